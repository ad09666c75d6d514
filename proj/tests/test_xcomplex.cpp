#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "dynlab/xcomplex.hpp"

using namespace dynlab;

namespace {

cplx random_point(std::mt19937_64& rng) {
  // Log-uniform modulus so both tiny and huge values show up.
  std::uniform_real_distribution<double> lg(-6.0, 6.0), ang(-M_PI, M_PI);
  return std::polar(std::pow(10.0, lg(rng)), ang(rng));
}

}  // namespace

TEST_CASE("chordal anchors") {
  CHECK(chordal(XComplex(0.0), XComplex::infinity()) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(chordal(XComplex(0.0), XComplex(1.0)) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  const XComplex w(0.3, -7.25);
  CHECK(chordal(w, w) == 0.0);
  CHECK(chordal(XComplex::infinity(), XComplex::infinity()) == 0.0);
  CHECK_THROWS_AS(chordal(XComplex::undefined(), XComplex(1.0)), MetricError);
  CHECK_THROWS_AS(chordal(XComplex::infinity(), XComplex::undefined()), MetricError);
}

TEST_CASE("guard classification") {
  const double huge = std::numeric_limits<double>::max();
  CHECK(guard(huge * 10.0, 0.0).is_infinity());
  CHECK(guard(std::nan(""), 0.0).is_undefined());
  CHECK(guard(std::numeric_limits<double>::infinity(), std::nan("")).is_undefined());
  const XComplex ok = guard(3.0, -4.0);
  REQUIRE(ok.finite());
  CHECK(ok.re() == 3.0);
  CHECK(ok.im() == -4.0);
}

TEST_CASE("property: chordal is a bounded symmetric metric") {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 20000; ++k) {
    const XComplex a(random_point(rng)), b(random_point(rng)), c(random_point(rng));
    const double ab = chordal(a, b), ba = chordal(b, a);
    CHECK(ab == ba);
    CHECK(ab <= 2.0);
    CHECK(ab <= chordal(a, c) + chordal(c, b) + 1e-12);
  }
}

TEST_CASE("property: chordal invariant under z -> 1/z") {
  std::mt19937_64 rng(12);
  for (int k = 0; k < 20000; ++k) {
    const cplx z = random_point(rng), w = random_point(rng);
    const double d1 = chordal(XComplex(z), XComplex(w));
    const double d2 = chordal(XComplex(1.0 / z), XComplex(1.0 / w));
    CHECK(std::abs(d1 - d2) < 1e-9);
  }
  // 0 <-> infinity
  const cplx z(0.4, 2.0);
  CHECK(std::abs(chordal(XComplex(z), XComplex(0.0)) - chordal(XComplex(1.0 / z), XComplex::infinity())) < 1e-12);
}

TEST_CASE("property: guard never emits non-finite Finite") {
  std::mt19937_64 rng(13);
  const double specials[] = {0.0, -0.0, 1.0, std::numeric_limits<double>::infinity(),
                             -std::numeric_limits<double>::infinity(), std::nan(""),
                             std::numeric_limits<double>::max(), std::numeric_limits<double>::denorm_min()};
  std::uniform_int_distribution<int> pick(0, 9);
  std::uniform_real_distribution<double> any(-1e308, 1e308);
  for (int k = 0; k < 50000; ++k) {
    const int i = pick(rng), j = pick(rng);
    const double re = i < 8 ? specials[i] : any(rng);
    const double im = j < 8 ? specials[j] : any(rng);
    const XComplex x = guard(re, im);
    if (x.finite()) {
      CHECK(std::isfinite(x.re()));
      CHECK(std::isfinite(x.im()));
    }
  }
}

TEST_CASE("extended arithmetic") {
  const XComplex inf = XComplex::infinity(), und = XComplex::undefined();
  CHECK((XComplex(1.0) / XComplex(0.0)).is_infinity());
  CHECK((XComplex(0.0) / XComplex(0.0)).is_undefined());
  CHECK((XComplex(2.0) + inf).is_infinity());
  CHECK((inf + inf).is_undefined());
  CHECK((inf * XComplex(0.0)).is_undefined());
  CHECK((XComplex(5.0) / inf) == XComplex(0.0));
  CHECK((und + XComplex(1.0)).is_undefined());
  CHECK((und * XComplex(0.0)).is_undefined());
  CHECK(xexp(XComplex(700.5, 0.0)).is_infinity());
  CHECK(xexp(XComplex(699.0, 0.0)).finite());
  CHECK(xexp(inf).is_undefined());
  CHECK(xsin(inf).is_undefined());
  CHECK(xsin(XComplex(0.0, 800.0)).is_infinity());
  CHECK((XComplex(1e200, 1e200) * XComplex(1e200, -1e200)).is_infinity());
  CHECK(ipow(XComplex(0.0), -2).is_infinity());
  CHECK(ipow(XComplex(2.0), -2) == XComplex(0.25));
  CHECK(ipow(XComplex(0.0, 1.0), 3) == XComplex(0.0, -1.0));
}
