#include "dynlab/qmc.hpp"

#include <cmath>
#include <random>

namespace dynlab {

QuasiRandom2D::QuasiRandom2D(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  shift_re_ = u(rng);
  shift_im_ = u(rng);
  engine_.discard(2);  // skip the origin
}

cplx QuasiRandom2D::next_unit() {
  const double scale = 1.0 / (static_cast<double>(boost::random::sobol::max()) + 1.0);
  double a = static_cast<double>(engine_()) * scale + shift_re_;
  double b = static_cast<double>(engine_()) * scale + shift_im_;
  a -= std::floor(a);
  b -= std::floor(b);
  return {a, b};
}

cplx QuasiRandom2D::next_in(const Rect& r) {
  const cplx u = next_unit();
  return {r.re_min + u.real() * r.width(), r.im_min + u.imag() * r.height()};
}

std::vector<cplx> sample_rect(const Rect& r, std::size_t n, std::uint64_t seed) {
  QuasiRandom2D q(seed);
  std::vector<cplx> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) out.push_back(q.next_in(r));
  return out;
}

}  // namespace dynlab
