#include <cmath>

#include "dynlab/expr.hpp"
#include "dynlab/qmc.hpp"

namespace dynlab {

namespace {

struct Term {
  Expr e;
  bool negated;
};

void flatten_sum(const Expr& e, bool negated, std::vector<Term>& out) {
  switch (e->op) {
    case Op::Add:
      flatten_sum(e->lhs, negated, out);
      flatten_sum(e->rhs, negated, out);
      return;
    case Op::Sub:
      flatten_sum(e->lhs, negated, out);
      flatten_sum(e->rhs, !negated, out);
      return;
    case Op::Neg:
      flatten_sum(e->lhs, !negated, out);
      return;
    default:
      out.push_back({e, negated});
  }
}

bool has_transcendental(const Expr& e) {
  if (!e) return false;
  if (e->op == Op::Exp || e->op == Op::Sin || e->op == Op::Cos) return true;
  return has_transcendental(e->lhs) || has_transcendental(e->rhs);
}

}  // namespace

FnDef::FnDef(Expr body, std::optional<cplx> period, std::string label)
    : body_(std::move(body)),
      derivative_(differentiate(body_)),
      period_(period),
      label_(label.empty() ? to_string(body_) : std::move(label)),
      f_(body_),
      df_(derivative_),
      transcendental_(has_transcendental(body_)) {
  std::vector<Term> terms;
  flatten_sum(body_, false, terms);
  Expr remainder;
  for (const Term& t : terms) {
    if (!has_identity_ && !t.negated && t.e->op == Op::Var) {
      has_identity_ = true;
      continue;
    }
    if (!depends_on_z(t.e)) {
      const XComplex c = eval(t.e, XComplex(0.0));
      if (c.finite()) {
        shift_ += t.negated ? -c.value() : c.value();
        continue;
      }
    }
    Expr piece = t.negated ? ex::neg(t.e) : t.e;
    remainder = remainder ? ex::add(remainder, piece) : piece;
  }
  if (has_identity_ && remainder) remainder_ = Program(remainder);
  if (period_) validate_period();
}

FnDef FnDef::from_source(std::string_view src, std::optional<cplx> period) {
  return FnDef(parse(src), period, std::string(src));
}

XComplex FnDef::displacement(const XComplex& z) const {
  if (!has_identity_) return f_(z) - z;
  if (remainder_.empty()) return z.finite() ? XComplex(shift_) : XComplex::undefined();
  return remainder_(z) + XComplex(shift_);
}

cplx FnDef::deck_translation() const {
  if (!period_) return {0.0, 0.0};
  const cplx p = *period_;
  const double k = std::round((shift_ * std::conj(p)).real() / std::norm(p));
  return k * p;
}

FnDef FnDef::translated(cplx c) const {
  return FnDef(ex::add(body_, ex::constant(c)), period_, label_ + " + (" + XComplex(c).to_string() + ")");
}

void FnDef::validate_period() const {
  const cplx p = *period_;
  if (!std::isfinite(p.real()) || !std::isfinite(p.imag()) || p == cplx(0.0, 0.0)) {
    throw FnError("declared period must be finite and nonzero");
  }
  constexpr std::size_t kWanted = 100;
  constexpr std::size_t kTries = 4000;
  constexpr double kTol = 1e-10;
  constexpr double kSafe = 1e3;
  QuasiRandom2D q(kDefaultSampleSeed);
  const Rect box{-4.0, 4.0, -4.0, 4.0};
  std::size_t checked = 0;
  for (std::size_t k = 0; k < kTries && checked < kWanted; ++k) {
    const cplx z = q.next_in(box);
    const XComplex a = f_(XComplex(z));
    const XComplex b = f_(XComplex(z + p));
    const XComplex d = df_(XComplex(z));
    if (!a.finite() || !b.finite() || !d.finite()) continue;
    if (std::abs(a.value()) > kSafe || std::abs(d.value()) > kSafe) continue;
    ++checked;
    const double err = std::abs(b.value() - a.value() - p);
    if (!(err < kTol)) {
      throw FnError("declared period " + XComplex(p).to_string() + " fails at z=" + XComplex(z).to_string() +
                    " (|f(z+P)-f(z)-P| = " + std::to_string(err) + ")");
    }
  }
  if (checked == 0) throw FnError("declared period could not be validated: no safe samples");
}

}  // namespace dynlab
