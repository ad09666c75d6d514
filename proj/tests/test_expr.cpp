#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "dynlab/expr.hpp"

using namespace dynlab;
namespace x = dynlab::ex;

namespace {

Expr random_tree(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 10);
  std::uniform_real_distribution<double> val(0.0, 50.0);
  switch (pick(rng)) {
    case 0: {
      static const cplx atoms[] = {std::numbers::pi, std::numbers::e, cplx(0.0, 1.0), 2.0, 0.5};
      std::uniform_int_distribution<int> a(0, 5);
      const int k = a(rng);
      return x::constant(k < 5 ? atoms[k] : cplx(val(rng)));
    }
    case 1: return x::var();
    case 2: return x::add(random_tree(rng, depth - 1), random_tree(rng, depth - 1));
    case 3: return x::sub(random_tree(rng, depth - 1), random_tree(rng, depth - 1));
    case 4: return x::mul(random_tree(rng, depth - 1), random_tree(rng, depth - 1));
    case 5: return x::div(random_tree(rng, depth - 1), random_tree(rng, depth - 1));
    case 6: return x::neg(random_tree(rng, depth - 1));
    case 7: {
      std::uniform_int_distribution<int> k(-3, 4);
      return x::pow(random_tree(rng, depth - 1), k(rng));
    }
    case 8: return x::exp(random_tree(rng, depth - 1));
    case 9: return x::sin(random_tree(rng, depth - 1));
    default: return x::cos(random_tree(rng, depth - 1));
  }
}

}  // namespace

TEST_CASE("parse: grammar-forced trees") {
  auto t = parse("z + exp(-z)");
  CHECK(structurally_equal(t, x::add(x::var(), x::exp(x::neg(x::var())))));

  auto h = parse("z + exp(1/sin(z)) + 2*pi");
  auto want = x::add(x::add(x::var(), x::exp(x::div(x::constant(1.0), x::sin(x::var())))),
                     x::mul(x::constant(2.0), x::constant(std::numbers::pi)));
  CHECK(structurally_equal(h, want));

  CHECK(structurally_equal(parse("-z^2"), x::neg(x::pow(x::var(), 2))));
  CHECK(structurally_equal(parse("z^-3"), x::pow(x::var(), -3)));
  CHECK(structurally_equal(parse("2*pi*i"),
                           x::mul(x::mul(x::constant(2.0), x::constant(std::numbers::pi)), x::constant(cplx(0, 1)))));
  CHECK(parse("1.5e-3")->value == cplx(1.5e-3));
  CHECK(parse(".25")->value == cplx(0.25));
}

TEST_CASE("parse: errors carry offsets") {
  try {
    parse("z + + 1");
    FAIL("expected syntax error");
  } catch (const ParseError& e) {
    CHECK(e.kind() == ParseError::Kind::Syntax);
    CHECK(e.offset() == 4);
    CHECK_FALSE(e.expected().empty());
  }
  try {
    parse("z + log(z)");
    FAIL("expected unknown identifier");
  } catch (const ParseError& e) {
    CHECK(e.kind() == ParseError::Kind::UnknownIdentifier);
    CHECK(e.offset() == 4);
  }
  CHECK_THROWS_AS(parse("2z"), ParseError);       // no implicit multiplication
  CHECK_THROWS_AS(parse("2 pi"), ParseError);
  CHECK_THROWS_AS(parse("2e"), ParseError);
  CHECK_THROWS_AS(parse("z^1.5"), ParseError);    // integer exponents only
  CHECK_THROWS_AS(parse("(z + 1"), ParseError);
  CHECK_THROWS_AS(parse("sin z"), ParseError);
  CHECK_THROWS_AS(parse(""), ParseError);
}

TEST_CASE("property: print/parse round trip") {
  std::mt19937_64 rng(21);
  for (int k = 0; k < 3000; ++k) {
    const Expr t = random_tree(rng, 5);
    const std::string s = to_string(t);
    const Expr back = parse(s);
    INFO(s);
    CHECK(structurally_equal(t, back));
  }
}

TEST_CASE("differentiate: examples") {
  auto d = differentiate(parse("z + exp(-z)"));
  CHECK(structurally_equal(d, x::sub(x::constant(1.0), x::exp(x::neg(x::var())))));
  CHECK(structurally_equal(differentiate(x::constant(cplx(3, 4))), x::constant(0.0)));

  auto df = differentiate(parse("z - 1 + exp(-z)"));
  for (int k = -2; k <= 2; ++k) {
    const XComplex v = eval(df, XComplex(0.0, 2.0 * std::numbers::pi * k));
    REQUIRE(v.finite());
    CHECK(std::abs(v.value()) < 1e-14);
  }
}

TEST_CASE("eval: examples") {
  CHECK(eval(parse("z - 1 + exp(-z)"), XComplex(0.0)) == XComplex(0.0));

  const XComplex at_pi = eval(parse("z + exp(1/sin(z))"), XComplex(std::numbers::pi));
  CHECK_FALSE(at_pi.finite());

  // 0.5 + e^-0.5, computed independently.
  const XComplex v = eval(parse("z + exp(-z)"), XComplex(0.5));
  REQUIRE(v.finite());
  CHECK(v.re() == doctest::Approx(1.1065306597126334).epsilon(1e-15));
  CHECK(v.im() == 0.0);

  CHECK(eval(parse("1/(z-z)"), XComplex(2.0)).is_infinity());
  CHECK(eval(parse("0/(z-z)"), XComplex(2.0)).is_undefined());
  CHECK(eval(parse("exp(z)"), XComplex(701.0)).is_infinity());
}

TEST_CASE("property: compiled program matches tree evaluation") {
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int k = 0; k < 500; ++k) {
    const Expr t = random_tree(rng, 6);
    const Program p(t);
    for (int j = 0; j < 10; ++j) {
      const XComplex z(u(rng), u(rng));
      const XComplex a = eval(t, z), b = p(z);
      CHECK(a.kind() == b.kind());
      if (a.finite() && b.finite()) CHECK(a.value() == b.value());
    }
  }
}

TEST_CASE("property: symbolic derivative agrees with central differences") {
  const char* sources[] = {"z + exp(-z)", "z - 1 + exp(-z)", "z*exp(-z)", "z + exp(1/sin(z))",
                           "z + exp(1/(1 - exp(z)))", "z + exp(1/z^2)", "z^3 - 2*z/(z + 4) + cos(z)^2"};
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> r(0.0, 3.0), a(-M_PI, M_PI);
  const double h = 1e-5;
  for (const char* src : sources) {
    const Expr e = parse(src);
    const Expr d = differentiate(e);
    int used = 0;
    for (int k = 0; used < 1000 && k < 100000; ++k) {
      const cplx z = std::polar(r(rng), a(rng));
      const XComplex dv = eval(d, XComplex(z));
      const XComplex fp = eval(e, XComplex(z + h)), fm = eval(e, XComplex(z - h)), f0 = eval(e, XComplex(z));
      if (!dv.finite() || !fp.finite() || !fm.finite() || !f0.finite()) continue;
      // Central differences are only a valid oracle where f is tame at scale h.
      if (std::abs(f0.value()) > 1e3 || std::abs(dv.value()) > 1e3) continue;
      const XComplex fp2 = eval(e, XComplex(z + 2.0 * h)), fm2 = eval(e, XComplex(z - 2.0 * h));
      if (!fp2.finite() || !fm2.finite()) continue;
      const cplx fd = (fp.value() - fm.value()) / (2.0 * h);
      const cplx fd2 = (fp2.value() - fm2.value()) / (4.0 * h);
      // Skip points where the difference quotient's own truncation error is
      // visible (essential singularities vary on scales below h).
      if (std::abs(fd - fd2) > 1e-7 * (1.0 + std::abs(fd))) continue;
      ++used;
      const double rel = std::abs(dv.value() - fd) / (1.0 + std::abs(dv.value()));
      INFO(src, " z=", z.real(), "+", z.imag(), "i");
      CHECK(rel < 1e-6);
    }
    CHECK(used == 1000);
  }
}

TEST_CASE("FnDef: displacement and period") {
  const FnDef f = FnDef::from_source("z + exp(-z)", cplx(0.0, 2.0 * std::numbers::pi));
  CHECK(f.has_identity_term());
  const XComplex d = f.displacement(XComplex(60.0));
  REQUIRE(d.finite());
  CHECK(d.re() == doctest::Approx(std::exp(-60.0)).epsilon(1e-14));  // lost in f(z)-z
  CHECK(f.deck_translation() == cplx(0.0, 0.0));

  const FnDef h = FnDef::from_source("z + exp(1/sin(z)) + 2*pi", 2.0 * std::numbers::pi);
  CHECK(h.constant_shift() == cplx(2.0 * std::numbers::pi));
  CHECK(h.deck_translation() == cplx(2.0 * std::numbers::pi));

  const FnDef g = FnDef::from_source("z - 1 + exp(-z) + 2*pi*i", cplx(0.0, 2.0 * std::numbers::pi));
  CHECK(g.deck_translation() == cplx(0.0, 2.0 * std::numbers::pi));

  const FnDef q = FnDef::from_source("z*exp(-z)");
  CHECK_FALSE(q.has_identity_term());
  CHECK(q.displacement(XComplex(1.0)) == XComplex(std::exp(-1.0) - 1.0));

  CHECK_THROWS_AS(FnDef::from_source("z + exp(-z)", cplx(0.0, 3.0)), FnError);
  CHECK_THROWS_AS(FnDef::from_source("z", cplx(0.0, 0.0)), FnError);
}

TEST_CASE("property: declared period holds on safe samples") {
  const double two_pi = 2.0 * std::numbers::pi;
  const FnDef maps[] = {FnDef::from_source("z + exp(1/sin(z))", two_pi),
                        FnDef::from_source("z + exp(1/(1 - exp(z)))", cplx(0.0, two_pi))};
  std::mt19937_64 rng(24);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  for (const FnDef& f : maps) {
    const cplx p = *f.period();
    int used = 0;
    for (int k = 0; used < 100 && k < 10000; ++k) {
      const cplx z(u(rng), u(rng));
      const XComplex a = f(XComplex(z)), b = f(XComplex(z + p)), d = f.deriv(XComplex(z));
      if (!a.finite() || !b.finite() || !d.finite()) continue;
      if (std::abs(a.value()) > 1e3 || std::abs(d.value()) > 1e3) continue;
      ++used;
      CHECK(std::abs(b.value() - a.value() - p) < 1e-10);
    }
    CHECK(used == 100);
  }
}
