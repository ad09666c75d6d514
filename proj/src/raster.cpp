#include "dynlab/raster.hpp"

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <thread>

#include <boost/functional/hash.hpp>
#include <png.h>

namespace dynlab {

using nlohmann::json;

namespace {

json xcomplex_to_json(const XComplex& z) {
  if (z.is_infinity()) return "inf";
  if (z.is_undefined()) return nullptr;
  return json::array({z.re(), z.im()});
}

XComplex xcomplex_from_json(const json& j) {
  if (j.is_null()) return XComplex::undefined();
  if (j.is_string() && j.get<std::string>() == "inf") return XComplex::infinity();
  if (j.is_array() && j.size() == 2) return XComplex(j[0].get<double>(), j[1].get<double>());
  throw ConfigError("bad complex value: " + j.dump());
}

template <class T>
T require(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("missing key \"") + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for \"") + key + "\": " + e.what());
  }
}

std::string hash_hex(const std::string& s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016zx", boost::hash<std::string>{}(s));
  return buf;
}

// Key ordering for target ids: finite values lexicographically, then infinity.
bool target_less(const XComplex& a, const XComplex& b) {
  if (a.finite() != b.finite()) return a.finite();
  if (!a.finite()) return false;
  return a.re() != b.re() ? a.re() < b.re() : a.im() < b.im();
}

struct PixelResult {
  OrbitKind kind = OrbitKind::Unresolved;
  std::optional<XComplex> target;
  int iterations = 0;
};

}  // namespace

void RunConfig::validate() const {
  if (fn_src.empty()) throw ConfigError("fn must be non-empty");
  if (!window.valid()) throw ConfigError("invalid window: need re_min<re_max and im_min<im_max");
  if (width < 16 || height < 16) throw ConfigError("resolution must be at least 16x16");
  try {
    orbit.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (period && (*period == cplx(0.0, 0.0) || !std::isfinite(period->real()) || !std::isfinite(period->imag())))
    throw ConfigError("period must be finite and nonzero");
  if (palette != "classic") throw ConfigError("unknown palette \"" + palette + "\"");
  if (threads < 0) throw ConfigError("threads must be >= 0");
}

json to_json(const RunConfig& c) {
  json j;
  j["version"] = kRasterSchema;
  j["fn"] = c.fn_src;
  j["window"] = {c.window.re_min, c.window.re_max, c.window.im_min, c.window.im_max};
  j["resolution"] = {c.width, c.height};
  j["orbit"] = {{"max_iter", c.orbit.max_iter},     {"escape_radius", c.orbit.escape_radius},
                {"eps_sing", c.orbit.eps_sing},     {"eps_cycle", c.orbit.eps_cycle},
                {"p_max", c.orbit.p_max},           {"confirm_steps", c.orbit.confirm_steps}};
  j["period"] = c.period ? json::array({c.period->real(), c.period->imag()}) : json(nullptr);
  j["palette"] = c.palette;
  j["outputs"] = c.outputs;
  return j;
}

RunConfig run_config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  if (require<std::string>(j, "version") != kRasterSchema)
    throw ConfigError(std::string("unsupported version; expected ") + kRasterSchema);
  RunConfig c;
  c.fn_src = require<std::string>(j, "fn");
  const auto w = require<std::vector<double>>(j, "window");
  if (w.size() != 4) throw ConfigError("window must have 4 entries");
  c.window = {w[0], w[1], w[2], w[3]};
  const auto r = require<std::vector<int>>(j, "resolution");
  if (r.size() != 2) throw ConfigError("resolution must have 2 entries");
  c.width = r[0];
  c.height = r[1];
  if (j.contains("orbit")) {
    const json& o = j.at("orbit");
    if (!o.is_object()) throw ConfigError("orbit must be an object");
    if (o.contains("max_iter")) c.orbit.max_iter = require<int>(o, "max_iter");
    if (o.contains("escape_radius")) c.orbit.escape_radius = require<double>(o, "escape_radius");
    if (o.contains("eps_sing")) c.orbit.eps_sing = require<double>(o, "eps_sing");
    if (o.contains("eps_cycle")) c.orbit.eps_cycle = require<double>(o, "eps_cycle");
    if (o.contains("p_max")) c.orbit.p_max = require<int>(o, "p_max");
    if (o.contains("confirm_steps")) c.orbit.confirm_steps = require<int>(o, "confirm_steps");
  }
  if (j.contains("period") && !j.at("period").is_null()) {
    const auto p = require<std::vector<double>>(j, "period");
    if (p.size() != 2) throw ConfigError("period must be [re, im] or null");
    c.period = cplx(p[0], p[1]);
  }
  if (j.contains("palette")) c.palette = require<std::string>(j, "palette");
  if (j.contains("outputs")) c.outputs = require<std::vector<std::string>>(j, "outputs");
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path.string() + ": " + std::strerror(errno));
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return run_config_from_json(j);
}

std::optional<std::pair<int, int>> ClassRaster::pixel_of(cplx z) const {
  if (!window.contains(z)) return std::nullopt;
  const int x = std::min(width - 1, static_cast<int>((z.real() - window.re_min) / pixel_width()));
  const int y = std::min(height - 1, static_cast<int>((window.im_max - z.imag()) / pixel_height()));
  return std::pair{x, y};
}

ClassRaster render(const RunConfig& cfg) {
  cfg.validate();
  const FnDef f(parse(cfg.fn_src), cfg.period, cfg.fn_src);
  return render(f, cfg);
}

ClassRaster render(const FnDef& f, const RunConfig& cfg) {
  cfg.validate();
  const SingularSet sing = singular_set(f, cfg.window.expanded(3.0));
  const OrbitClassifier classifier(f, sing, cfg.orbit);

  ClassRaster r;
  r.width = cfg.width;
  r.height = cfg.height;
  r.window = cfg.window;
  json cj = to_json(cfg);
  cj.erase("outputs");
  r.config = cj;
  r.config_hash = hash_hex(cj.dump());

  const std::size_t n = static_cast<std::size_t>(r.width) * r.height;
  std::vector<PixelResult> px(n);
  std::atomic<int> next_row{0};
  auto work = [&] {
    for (int y = next_row++; y < r.height; y = next_row++) {
      for (int x = 0; x < r.width; ++x) {
        const OrbitOutcome o = classifier.classify(r.pixel_center(x, y), SeedCheck::Lenient);
        px[static_cast<std::size_t>(y) * r.width + x] = {o.kind, o.target, o.iterations};
      }
    }
  };
  int threads = cfg.threads > 0 ? cfg.threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, r.height);
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(work);
  }

  // Target ids: distinct (kind, target) pairs in sorted order, merging
  // values of the same kind that agree within the tolerance.
  struct Entry {
    OrbitKind kind;
    XComplex target;
  };
  std::vector<Entry> uniq;
  for (const PixelResult& p : px)
    if (p.target && !p.target->is_undefined()) uniq.push_back({p.kind, *p.target});
  auto entry_less = [](const Entry& a, const Entry& b) {
    if (a.kind != b.kind) return a.kind < b.kind;
    return target_less(a.target, b.target);
  };
  std::sort(uniq.begin(), uniq.end(), entry_less);
  uniq.erase(std::unique(uniq.begin(), uniq.end(),
                         [](const Entry& a, const Entry& b) { return a.kind == b.kind && a.target == b.target; }),
             uniq.end());

  struct Group {
    OrbitKind kind;
    XComplex rep;
    int id;
  };
  std::vector<Group> groups;
  // Grid of the group representatives, cell size = tolerance.
  std::map<std::tuple<int, long long, long long>, std::vector<int>> grid;
  auto cell_of = [](const XComplex& z) {
    return std::pair{static_cast<long long>(std::floor(z.re() / kTargetMergeTolerance)),
                     static_cast<long long>(std::floor(z.im() / kTargetMergeTolerance))};
  };
  std::vector<int> uniq_id(uniq.size());
  for (std::size_t k = 0; k < uniq.size(); ++k) {
    const Entry& e = uniq[k];
    int found = -1;
    if (e.target.is_infinity()) {
      for (const Group& g : groups)
        if (g.kind == e.kind && g.rep.is_infinity()) found = g.id;
    } else {
      const auto [cx, cy] = cell_of(e.target);
      for (long long dx = -1; dx <= 1 && found < 0; ++dx) {
        for (long long dy = -1; dy <= 1 && found < 0; ++dy) {
          const auto it = grid.find({static_cast<int>(e.kind), cx + dx, cy + dy});
          if (it == grid.end()) continue;
          for (int gi : it->second) {
            if (std::abs(groups[gi].rep.value() - e.target.value()) <= kTargetMergeTolerance) {
              found = groups[gi].id;
              break;
            }
          }
        }
      }
    }
    if (found < 0) {
      found = static_cast<int>(groups.size()) + 1;
      if (!e.target.is_infinity()) {
        const auto [cx, cy] = cell_of(e.target);
        grid[{static_cast<int>(e.kind), cx, cy}].push_back(static_cast<int>(groups.size()));
      }
      groups.push_back({e.kind, e.target, found});
    }
    uniq_id[k] = found;
  }
  if (groups.size() > 65535) throw std::runtime_error("render: more than 65535 distinct targets");

  r.legend[0] = XComplex::undefined();
  for (const Group& g : groups) r.legend[g.id] = g.rep;

  r.cells.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const PixelResult& p = px[i];
    Cell c;
    c.kind = static_cast<std::uint8_t>(p.kind);
    c.iterations = static_cast<std::uint16_t>(std::min(p.iterations, 65535));
    if (p.target && !p.target->is_undefined()) {
      const Entry e{p.kind, *p.target};
      const auto it = std::lower_bound(uniq.begin(), uniq.end(), e, entry_less);
      c.target_id = static_cast<std::uint16_t>(uniq_id[static_cast<std::size_t>(it - uniq.begin())]);
    }
    r.cells[i] = c;
  }
  return r;
}

std::array<std::uint8_t, 3> pixel_color(const Cell& c, int max_iter) {
  const auto& base = kPalette[std::min<std::size_t>(c.kind, kPalette.size() - 1)];
  const double shade = c.target_id == 0 ? 1.0 : 1.0 - 0.15 * ((c.target_id - 1) % 4);
  const double ramp = 1.0 - 0.6 * std::min(1.0, static_cast<double>(c.iterations) / std::max(1, max_iter));
  std::array<std::uint8_t, 3> out{};
  for (int k = 0; k < 3; ++k) out[k] = static_cast<std::uint8_t>(std::lround(base[k] * shade * ramp));
  return out;
}

void export_png(const ClassRaster& r, const std::filesystem::path& path) {
  std::FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw std::runtime_error(path.string() + ": " + std::strerror(errno));
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw std::runtime_error("libpng: out of memory");
  }
  const int max_iter = r.config.contains("orbit") ? r.config["orbit"].value("max_iter", 400) : 400;
  std::vector<png_byte> row(static_cast<std::size_t>(r.width) * 3);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw std::runtime_error(path.string() + ": PNG write failed");
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, r.width, r.height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < r.height; ++y) {
    for (int x = 0; x < r.width; ++x) {
      const auto c = pixel_color(r.at(x, y), max_iter);
      std::copy(c.begin(), c.end(), row.begin() + 3 * x);
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  if (std::fclose(fp) != 0) throw std::runtime_error(path.string() + ": " + std::strerror(errno));
}

json raster_to_json(const ClassRaster& r) {
  json j;
  j["version"] = kRasterSchema;
  j["width"] = r.width;
  j["height"] = r.height;
  j["window"] = {r.window.re_min, r.window.re_max, r.window.im_min, r.window.im_max};
  j["config"] = r.config;
  j["config_hash"] = r.config_hash;
  json legend = json::array();
  for (const auto& [id, t] : r.legend) legend.push_back({{"id", id}, {"target", xcomplex_to_json(t)}});
  j["legend"] = legend;
  std::vector<int> kind, target, iters;
  kind.reserve(r.cells.size());
  target.reserve(r.cells.size());
  iters.reserve(r.cells.size());
  for (const Cell& c : r.cells) {
    kind.push_back(c.kind);
    target.push_back(c.target_id);
    iters.push_back(c.iterations);
  }
  j["cells"] = {{"kind", kind}, {"target_id", target}, {"iterations", iters}};
  return j;
}

ClassRaster raster_from_json(const json& j) {
  if (require<std::string>(j, "version") != kRasterSchema)
    throw ConfigError(std::string("unsupported raster version; expected ") + kRasterSchema);
  ClassRaster r;
  r.width = require<int>(j, "width");
  r.height = require<int>(j, "height");
  const auto w = require<std::vector<double>>(j, "window");
  if (w.size() != 4) throw ConfigError("window must have 4 entries");
  r.window = {w[0], w[1], w[2], w[3]};
  r.config = j.value("config", json::object());
  r.config_hash = j.value("config_hash", "");
  for (const json& e : require<json>(j, "legend")) r.legend[e.at("id").get<int>()] = xcomplex_from_json(e.at("target"));
  const json& cells = require<json>(j, "cells");
  const auto kind = require<std::vector<int>>(cells, "kind");
  const auto target = require<std::vector<int>>(cells, "target_id");
  const auto iters = require<std::vector<int>>(cells, "iterations");
  const std::size_t n = static_cast<std::size_t>(r.width) * r.height;
  if (kind.size() != n || target.size() != n || iters.size() != n)
    throw ConfigError("cells length does not match width*height");
  r.cells.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (kind[i] < 0 || kind[i] > 6) throw ConfigError("kind code out of range");
    if (!r.legend.contains(target[i])) throw ConfigError("target_id missing from legend");
    r.cells[i] = {static_cast<std::uint8_t>(kind[i]), static_cast<std::uint16_t>(target[i]),
                  static_cast<std::uint16_t>(iters[i])};
  }
  return r;
}

void export_json(const ClassRaster& r, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path.string() + ": " + std::strerror(errno));
  out << raster_to_json(r).dump() << '\n';
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

ClassRaster import_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path.string() + ": " + std::strerror(errno));
  try {
    return raster_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> julia_mask(const ClassRaster& r) {
  const int W = r.width, H = r.height;
  std::vector<std::uint8_t> m(static_cast<std::size_t>(W) * H, 0);
  auto fatou = [&](const Cell& c) {
    const auto k = static_cast<OrbitKind>(c.kind);
    return k != OrbitKind::Unresolved && k != OrbitKind::SingularHit;
  };
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const Cell& c = r.at(x, y);
      bool julia = !fatou(c);
      constexpr int dx[] = {1, -1, 0, 0};
      constexpr int dy[] = {0, 0, 1, -1};
      for (int k = 0; k < 4 && !julia; ++k) {
        const int nx = x + dx[k], ny = y + dy[k];
        if (nx < 0 || ny < 0 || nx >= W || ny >= H) continue;
        const Cell& d = r.at(nx, ny);
        if (fatou(d) && (d.kind != c.kind || d.target_id != c.target_id)) julia = true;
      }
      m[static_cast<std::size_t>(y) * W + x] = julia;
    }
  }
  return m;
}

}  // namespace dynlab
