#pragma once

// Reproducible low-discrepancy sampling (2-D Sobol points with a seeded
// Cranley-Patterson rotation).

#include <cstdint>
#include <vector>

#include <boost/random/sobol.hpp>

#include "dynlab/rect.hpp"

namespace dynlab {

inline constexpr std::uint64_t kDefaultSampleSeed = 0x5eed2024ULL;

class QuasiRandom2D {
 public:
  explicit QuasiRandom2D(std::uint64_t seed = kDefaultSampleSeed);

  /// Next point of the rotated sequence in [0,1)^2.
  cplx next_unit();
  cplx next_in(const Rect& r);

 private:
  boost::random::sobol engine_{2};
  double shift_re_ = 0.0;
  double shift_im_ = 0.0;
};

std::vector<cplx> sample_rect(const Rect& r, std::size_t n, std::uint64_t seed = kDefaultSampleSeed);

}  // namespace dynlab
