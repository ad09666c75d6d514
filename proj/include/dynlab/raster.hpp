#pragma once

// Grid classification of orbits over a window, with PNG/JSON export.

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dynlab/orbit.hpp"

namespace dynlab {

inline constexpr const char* kRasterSchema = "dynlab-raster/1";

class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

struct RunConfig {
  std::string fn_src;
  Rect window;
  int width = 300;
  int height = 300;
  OrbitConfig orbit;
  std::optional<cplx> period;
  std::vector<std::string> outputs;
  std::string palette = "classic";
  /// Worker threads for render(); 0 means hardware concurrency. Not part of
  /// the serialized schema: it never changes the result.
  int threads = 0;

  /// Throws ConfigError.
  void validate() const;
  bool operator==(const RunConfig& o) const {
    return fn_src == o.fn_src && window == o.window && width == o.width &&
           height == o.height && orbit == o.orbit && period == o.period && outputs == o.outputs &&
           palette == o.palette;
  }
};

nlohmann::json to_json(const RunConfig& c);
/// Throws ConfigError on schema violations.
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);

struct Cell {
  std::uint8_t kind = 0;
  std::uint16_t target_id = 0;
  std::uint16_t iterations = 0;
  bool operator==(const Cell&) const = default;
};

struct ClassRaster {
  int width = 0;
  int height = 0;
  Rect window;
  std::vector<Cell> cells;  // row-major, row 0 at im_max
  /// target_id -> target. Id 0 means "no target" and maps to Undefined.
  std::map<int, XComplex> legend;
  std::string config_hash;
  nlohmann::json config;

  const Cell& at(int x, int y) const { return cells[static_cast<std::size_t>(y) * width + x]; }
  double pixel_width() const { return window.width() / width; }
  double pixel_height() const { return window.height() / height; }
  cplx pixel_center(int x, int y) const {
    return {window.re_min + (x + 0.5) * pixel_width(), window.im_max - (y + 0.5) * pixel_height()};
  }
  /// Pixel whose cell contains z, or nullopt outside the window.
  std::optional<std::pair<int, int>> pixel_of(cplx z) const;
  OrbitKind kind_at(int x, int y) const { return static_cast<OrbitKind>(at(x, y).kind); }
  const XComplex& target_at(int x, int y) const { return legend.at(at(x, y).target_id); }

  bool operator==(const ClassRaster&) const = default;
};

/// Classifies every pixel centre. The singular set is taken on the window
/// expanded 3x. Deterministic for any thread count.
ClassRaster render(const RunConfig& cfg);

/// Same, for an already-built map (e.g. with a declared period that the
/// config cannot express, or a translated map).
ClassRaster render(const FnDef& f, const RunConfig& cfg);

/// Tolerance under which two targets of the same kind share an id.
inline constexpr double kTargetMergeTolerance = 1e-6;

/// Base colours of the fixed palette, indexed by kind code.
inline constexpr std::array<std::array<std::uint8_t, 3>, 7> kPalette = {{
    {0, 0, 0},        // Unresolved
    {40, 90, 200},    // EscapeInfinity
    {230, 120, 30},   // BakerFinite
    {50, 170, 70},    // AttractingCycle
    {200, 60, 160},   // ParabolicSuspect
    {235, 205, 40},   // Wandering
    {255, 255, 255},  // SingularHit
}};

std::array<std::uint8_t, 3> pixel_color(const Cell& c, int max_iter);

void export_png(const ClassRaster& r, const std::filesystem::path& path);
nlohmann::json raster_to_json(const ClassRaster& r);
ClassRaster raster_from_json(const nlohmann::json& j);
void export_json(const ClassRaster& r, const std::filesystem::path& path);
ClassRaster import_json(const std::filesystem::path& path);

/// Julia-candidate mask: Unresolved, SingularHit, or a pixel whose
/// 4-neighbourhood (with itself) shows two different Fatou labels
/// (kind, target_id).
std::vector<std::uint8_t> julia_mask(const ClassRaster& r);

}  // namespace dynlab
