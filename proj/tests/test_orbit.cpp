#include <cmath>
#include <numbers>

#include "doctest.h"
#include "dynlab/orbit.hpp"
#include "dynlab/qmc.hpp"

using namespace dynlab;

namespace {
constexpr double kPi = std::numbers::pi;

const FnDef& sin_map() {
  static const FnDef f = FnDef::from_source("z + exp(1/sin(z))", cplx(2 * kPi, 0));
  return f;
}
const SingularSet& sin_sing() {
  static const SingularSet s = singular_set(sin_map(), {-30, 30, -30, 30});
  return s;
}

bool in_set(const SingularSet& s, const XComplex& t) {
  if (t.is_infinity()) return s.includes_infinity;
  for (cplx p : s.points)
    if (XComplex(p) == t) return true;
  return false;
}
}  // namespace

TEST_CASE("band_index") {
  CHECK(band_index(5.0, cplx(0, 2 * kPi)) == 0);
  CHECK(band_index(cplx(5, 4 * kPi), cplx(0, 2 * kPi)) == 2);
  CHECK(band_index(0.5 + 2 * kPi, 2 * kPi) == 1);
  CHECK(band_index(-3 * kPi + 0.1, 2 * kPi) == -1);
  CHECK_THROWS_AS(band_index(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("OrbitConfig validation") {
  OrbitConfig c;
  CHECK_NOTHROW(c.validate());
  c.p_max = 9;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.eps_sing = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.max_iter = -1;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("iterate_orbit") {
  const FnDef a = FnDef::from_source("z + exp(-z)");
  const auto o = iterate_orbit(a, 5.0);
  REQUIRE(o.size() == 401);
  CHECK(o[1].re() == doctest::Approx(5.006737946999086).epsilon(1e-15));
  for (std::size_t k = 1; k < o.size(); ++k) {
    CHECK(o[k].im() == 0.0);
    CHECK(o[k].re() > o[k - 1].re());
  }

  const FnDef b = FnDef::from_source("z - 1 + exp(-z)");
  for (const XComplex& z : iterate_orbit(b, 0.0, {.max_iter = 50})) CHECK(z == XComplex(0.0));

  // seed exactly on a singular point: one step, ending undefined
  for (const char* src : {"z + exp(1/sin(z))", "z + exp(1/z^2)", "z + exp(1/(1 - exp(z)))"}) {
    const auto s = iterate_orbit(FnDef::from_source(src), 0.0);
    REQUIRE(s.size() == 2);
    CHECK(s.back().is_undefined());
  }
}

TEST_CASE("classify_orbit: examples") {
  const FnDef a = FnDef::from_source("z + exp(-z)");
  const SingularSet sa = singular_set(a, {-10, 10, -10, 10});
  const OrbitOutcome e = classify_orbit(a, 5.0, sa);
  CHECK(e.kind == OrbitKind::EscapeInfinity);
  REQUIRE(e.target);
  CHECK(e.target->is_infinity());

  const FnDef b = FnDef::from_source("z - 1 + exp(-z)");
  const OrbitOutcome c = classify_orbit(b, 0.3, singular_set(b, {-10, 10, -10, 10}));
  CHECK(c.kind == OrbitKind::AttractingCycle);
  REQUIRE(c.target);
  CHECK(std::abs(c.target->value()) < 1e-9);
  CHECK(c.period == 1);
  REQUIRE(c.multiplier);
  CHECK(std::abs(*c.multiplier) < 1e-6);

  // finite Baker point of the sine map, reached from the left of 0
  const OrbitOutcome bf = classify_orbit(sin_map(), -0.5, sin_sing());
  CHECK(bf.kind == OrbitKind::BakerFinite);
  REQUIRE(bf.target);
  CHECK(*bf.target == XComplex(0.0));
  CHECK(bf.final_chordal_residual < OrbitConfig{}.eps_sing);

  // the same seed under h = f + 2*pi wanders, one band per step
  const FnDef h = sin_map().translated(2 * kPi);
  const OrbitOutcome w = classify_orbit(h, -0.5, sin_sing());
  CHECK(w.kind == OrbitKind::Wandering);
  CHECK(w.quotient_limit_singular);
  REQUIRE(w.target);
  CHECK(*w.target == XComplex(0.0));
  REQUIRE(w.band_trace.size() == static_cast<std::size_t>(w.iterations) + 1);
  for (std::size_t k = 1; k < w.band_trace.size(); ++k) CHECK(w.band_trace[k] == w.band_trace[k - 1] + 1);

  const FnDef shift = FnDef::from_source("z + 1");
  CHECK(classify_orbit(shift, cplx(0.3, -0.2), singular_set(shift, {-1, 1, -1, 1})).kind == OrbitKind::EscapeInfinity);
}

TEST_CASE("classify_orbit: seeds near singular points") {
  CHECK_THROWS_AS(classify_orbit(sin_map(), cplx(kPi + 1e-5, 0), sin_sing()), SeedError);
  CHECK_THROWS_AS(classify_orbit(sin_map(), cplx(NAN, 0), sin_sing()), SeedError);
  // every finite singular point, perturbed by < 1e-10, is a hit within two steps
  for (cplx p : sin_sing().points) {
    const OrbitOutcome o = classify_orbit(sin_map(), p + cplx(3e-11, -4e-11), sin_sing(), {}, SeedCheck::Lenient);
    CHECK(o.kind == OrbitKind::SingularHit);
    CHECK(o.iterations <= 2);
  }
}

TEST_CASE("classify_orbit: invariants and determinism over a sample") {
  const FnDef h = sin_map().translated(2 * kPi);
  const OrbitConfig cfg;
  QuasiRandom2D q(7);
  int wandering = 0;
  for (int k = 0; k < 300; ++k) {
    const cplx s = q.next_in({-7, 7, -4, 4});
    for (const FnDef* f : {&sin_map(), &h}) {
      const OrbitOutcome o = classify_orbit(*f, s, sin_sing(), cfg, SeedCheck::Lenient);
      CHECK(o == classify_orbit(*f, s, sin_sing(), cfg, SeedCheck::Lenient));
      CHECK(o.iterations <= cfg.max_iter);
      if (o.kind == OrbitKind::BakerFinite) {
        REQUIRE(o.target);
        CHECK(in_set(sin_sing(), *o.target));
        CHECK(o.final_chordal_residual < cfg.eps_sing);
      }
      if (o.kind == OrbitKind::AttractingCycle) {
        REQUIRE(o.multiplier);
        CHECK(std::abs(*o.multiplier) < 1.0);
      }
      if (o.kind == OrbitKind::Wandering) {
        ++wandering;
        const auto& b = o.band_trace;
        REQUIRE(b.size() > static_cast<std::size_t>(cfg.confirm_steps));
        for (std::size_t i = b.size() - cfg.confirm_steps; i < b.size(); ++i) CHECK(b[i] > b[i - 1]);
      }
    }
  }
  CHECK(wandering > 0);
}

TEST_CASE("translation conjugacy h^n = f^n + nP") {
  const FnDef& f = sin_map();
  const FnDef h = f.translated(2 * kPi);
  QuasiRandom2D q(11);
  int compared = 0;
  for (int k = 0; k < 50; ++k) {
    const cplx s = q.next_in({-8, 8, -8, 8});
    XComplex a(s), b(s);
    for (int n = 1; n <= 50; ++n) {
      a = f(a);
      b = h(b);
      if (!a.finite() || !b.finite()) break;
      ++compared;
      CHECK(std::abs(b.value() - a.value() - 2.0 * kPi * n) < 1e-6 * (1 + n));
    }
  }
  CHECK(compared > 500);
}

TEST_CASE("classification is stable under tiny seed perturbations") {
  const OrbitConfig cfg;
  QuasiRandom2D q(3);
  int checked = 0;
  for (int k = 0; k < 20000 && checked < 100; ++k) {
    const cplx s = q.next_in({-8, 8, -8, 8});
    const OrbitOutcome o = classify_orbit(sin_map(), s, sin_sing(), cfg, SeedCheck::Lenient);
    if (o.kind == OrbitKind::Unresolved || !(o.final_chordal_residual < cfg.eps_sing / 10)) continue;
    ++checked;
    const OrbitOutcome p = classify_orbit(sin_map(), s + cplx(1e-9, 0), sin_sing(), cfg, SeedCheck::Lenient);
    CHECK_MESSAGE(p.kind == o.kind, "seed ", s.real(), ",", s.imag());
  }
  CHECK(checked == 100);
}
