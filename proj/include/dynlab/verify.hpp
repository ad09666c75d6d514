#pragma once

// Numerical checks for commuting pairs: commutation residuals, equality of
// Julia masks, translation invariance of the Fatou classification, and the
// sector structure of Baker families at a pole.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dynlab/qmc.hpp"
#include "dynlab/raster.hpp"

namespace dynlab {

struct CommutationReport {
  double max_residual = 0.0;  // max |f(g(z)) - g(f(z))| over used samples
  /// max residual / (1 + largest modulus met in the two composites)
  double max_relative = 0.0;
  cplx worst{};
  std::size_t used = 0;
  std::size_t skipped = 0;  // a composite was not finite
};

/// Draws `samples` quasi-random points of `window` at chordal distance
/// > 10 eps_sing from `sing` and compares the two composites. Throws
/// std::runtime_error("no valid samples") when nothing could be compared.
CommutationReport check_commutation(const FnDef& f, const FnDef& g, std::size_t samples, const Rect& window,
                                    const SingularSet& sing, double eps_sing = 1e-3,
                                    std::uint64_t seed = kDefaultSampleSeed);

struct AgreementReport {
  std::size_t total_pixels = 0;
  std::size_t compared_pixels = 0;
  std::size_t matching = 0;
  /// matching / compared; 1 when nothing was compared.
  double agreement_fraction = 1.0;
  int width = 0;
  int height = 0;
  /// 1 where a compared pixel disagrees.
  std::vector<std::uint8_t> disagreement_map;
  std::string params;
};

/// Compares the Julia masks of two rasters on the same grid, leaving out
/// pixels whose 3x3 neighbourhood is not constant in either mask.
AgreementReport julia_agreement(const ClassRaster& a, const ClassRaster& b);

/// Renders f and g with `cfg` and compares their Julia masks. Requires the
/// pair to commute (check_commutation below 1e-6 relative, else
/// std::invalid_argument).
AgreementReport julia_equality(const FnDef& f, const FnDef& g, const RunConfig& cfg);

/// Pixel shift of P on the raster grid. Throws ConfigError unless P lies on
/// a grid axis and spans a nonzero integer number of pixels.
std::pair<int, int> pixel_shift(const ClassRaster& r, cplx P);

/// Compares each pixel with the pixel displaced by P. Kinds must agree and
/// targets must agree up to the shift (e matches e + P, infinity matches
/// infinity). Pixels whose partner falls outside the window are left out.
AgreementReport translation_agreement(const ClassRaster& r, cplx P);
AgreementReport translation_invariance(const FnDef& f, cplx P, const RunConfig& cfg);

struct SectorCluster {
  double angle_center = 0.0;  // in [0, 2 pi)
  double angular_width = 0.0;
  std::size_t sample_count = 0;
};

struct SectorReport {
  cplx pole{};
  int order_expected = 1;
  double r_min = 0.0;
  double r_max = 0.0;
  std::size_t samples = 0;
  std::size_t baker_samples = 0;
  std::vector<SectorCluster> clusters;
  /// Cluster count on the annulus shrunk by 2 (nullopt: too few samples).
  std::optional<std::size_t> shrunk_clusters;
  bool radius_stable = false;
};

class InsufficientSamples : public std::runtime_error {
 public:
  explicit InsufficientSamples(const std::string& what) : std::runtime_error(what) {}
};

inline constexpr std::size_t kMinSectorSamples = 20;

/// Angular clusters of the points in the annulus around `pole` whose orbit
/// converges to the pole without leaving the disc of radius r_max. Angles
/// split at gaps wider than 2 pi / (4 p).
SectorReport baker_sectors(const FnDef& f, cplx pole, int p, double r_min, double r_max, std::size_t samples,
                           const OrbitConfig& cfg = {}, std::uint64_t seed = kDefaultSampleSeed);

/// Gap clustering on the circle; exposed for tests.
std::vector<SectorCluster> cluster_angles(std::vector<double> angles, double max_gap);

}  // namespace dynlab
