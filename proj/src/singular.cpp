#include "dynlab/singular.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dynlab/newton.hpp"

namespace dynlab {

namespace {

struct Zero {
  cplx z;
  int order;
};

bool is_const_value(const Expr& e, cplx* out) {
  if (depends_on_z(e)) return false;
  const XComplex v = eval(e, XComplex(0.0));
  if (!v.finite()) return false;
  *out = v.value();
  return true;
}

// z = base + k*step for all integers k with z inside the window.
void lattice(cplx base, cplx step, const Rect& w, int order, std::vector<Zero>& out) {
  // step is purely real or purely imaginary in every rule below.
  const bool real_step = step.imag() == 0.0;
  const double s = real_step ? step.real() : step.imag();
  const double lo = real_step ? w.re_min - base.real() : w.im_min - base.imag();
  const double hi = real_step ? w.re_max - base.real() : w.im_max - base.imag();
  for (long k = static_cast<long>(std::ceil(lo / s)); k <= static_cast<long>(std::floor(hi / s)); ++k) {
    const cplx z = base + static_cast<double>(k) * step;
    if (w.contains(z)) out.push_back({z, order});
  }
}

// Zeros of a denominator expression; false when no closed-form rule applies.
bool zeros_of(const Expr& d, const Rect& w, int order, std::vector<Zero>& out) {
  cplx c;
  if (is_const_value(d, &c)) return c != cplx(0.0, 0.0);
  switch (d->op) {
    case Op::Var:
      if (w.contains(0.0)) out.push_back({0.0, order});
      return true;
    case Op::Pow:
      if (d->exponent <= 0) return false;
      return zeros_of(d->lhs, w, order * d->exponent, out);
    case Op::Neg: return zeros_of(d->lhs, w, order, out);
    case Op::Mul: return zeros_of(d->lhs, w, order, out) && zeros_of(d->rhs, w, order, out);
    case Op::Exp: return true;  // never zero
    case Op::Sin:
      if (d->lhs->op != Op::Var) return false;
      lattice(0.0, std::numbers::pi, w, order, out);
      return true;
    case Op::Cos:
      if (d->lhs->op != Op::Var) return false;
      lattice(0.5 * std::numbers::pi, std::numbers::pi, w, order, out);
      return true;
    case Op::Add:
    case Op::Sub: {
      const bool sub = d->op == Op::Sub;
      const Expr& a = d->lhs;
      const Expr& b = d->rhs;
      cplx k;
      // z ± c, c - z
      if (a->op == Op::Var && is_const_value(b, &k)) {
        const cplx z0 = sub ? k : -k;
        if (w.contains(z0)) out.push_back({z0, order});
        return true;
      }
      if (b->op == Op::Var && is_const_value(a, &k)) {
        const cplx root = sub ? k : -k;
        if (w.contains(root)) out.push_back({root, order});
        return true;
      }
      // c - exp(z), exp(z) - c, c + exp(z)
      const Expr* e = nullptr;
      cplx level;
      if (b->op == Op::Exp && b->lhs->op == Op::Var && is_const_value(a, &k)) {
        e = &b;
        level = sub ? k : -k;
      } else if (a->op == Op::Exp && a->lhs->op == Op::Var && is_const_value(b, &k)) {
        e = &a;
        level = sub ? k : -k;
      }
      if (!e) return false;
      if (level == cplx(0.0, 0.0)) return true;
      lattice(std::log(level), cplx(0.0, 2.0 * std::numbers::pi), w, order, out);
      return true;
    }
    default: return false;
  }
}

void collect(const Expr& e, bool inside_transcendental, const Rect& w, std::vector<Zero>& out) {
  if (!e) return;
  if (inside_transcendental) {
    if (e->op == Op::Div && depends_on_z(e->rhs)) {
      if (!zeros_of(e->rhs, w, 1, out)) {
        throw SingularityError("no singularity rule for denominator " + to_string(e->rhs));
      }
    } else if (e->op == Op::Pow && e->exponent < 0 && depends_on_z(e->lhs)) {
      if (!zeros_of(e->lhs, w, -e->exponent, out)) {
        throw SingularityError("no singularity rule for base " + to_string(e->lhs));
      }
    }
  }
  const bool below = inside_transcendental || e->op == Op::Exp || e->op == Op::Sin || e->op == Op::Cos;
  collect(e->lhs, below, w, out);
  collect(e->rhs, below, w, out);
}

// Poles of f itself (denominators outside exp/sin/cos). These are the
// finite preimages of infinity. Unrecognised shapes are skipped.
void collect_poles(const Expr& e, const Rect& w, std::vector<Zero>& out) {
  if (!e || e->op == Op::Exp || e->op == Op::Sin || e->op == Op::Cos) return;
  if (e->op == Op::Div && depends_on_z(e->rhs)) {
    std::vector<Zero> tmp;
    if (zeros_of(e->rhs, w, 1, tmp)) out.insert(out.end(), tmp.begin(), tmp.end());
  }
  collect_poles(e->lhs, w, out);
  collect_poles(e->rhs, w, out);
}

bool lex_less(cplx a, cplx b) { return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag(); }

// Sorted, merged within `tol`; keeps the larger order.
std::vector<Zero> dedup(std::vector<Zero> zs, double tol) {
  std::sort(zs.begin(), zs.end(), [](const Zero& a, const Zero& b) { return lex_less(a.z, b.z); });
  std::vector<Zero> out;
  for (const Zero& z : zs) {
    auto hit = std::find_if(out.begin(), out.end(), [&](const Zero& o) { return std::abs(o.z - z.z) <= tol; });
    if (hit == out.end()) {
      out.push_back(z);
    } else {
      hit->order = std::max(hit->order, z.order);
    }
  }
  return out;
}

}  // namespace

int SingularSet::nearest(cplx z) const {
  int best = -1;
  double best_d = HUGE_VAL;
  for (std::size_t k = 0; k < points.size(); ++k) {
    const double d = chordal(XComplex(z), XComplex(points[k]));
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(k);
    }
  }
  return best;
}

SingularSet singular_set(const FnDef& f, const Rect& window) {
  window.require_valid();
  std::vector<Zero> zs;
  collect(f.body(), false, window, zs);
  zs = dedup(std::move(zs), 1e-9);

  SingularSet s;
  s.window = window;
  s.includes_infinity = f.transcendental();
  s.source = zs.empty() ? (f.transcendental() ? "entire/transcendental: infinity only" : "rational: none")
                        : "closed-form denominator zeros";
  // Closed-form points are exact up to rounding of the lattice constants.
  for (const Zero& z : zs) {
    s.points.push_back(z.z);
    s.orders.push_back(z.order);
    s.residuals.push_back(0.0);
  }
  return s;
}

PreimageResult preimages(const FnDef& f, cplx target, const Rect& window, int seeds_per_axis) {
  window.require_valid();
  PreimageResult out;
  if (seeds_per_axis < 1) return out;
  const XComplex t(target);
  auto fn = [&](const XComplex& z) { return std::pair{f(z) - t, f.deriv(z)}; };
  NewtonOptions opt;
  opt.residual_tol = kPreimageResidual;

  std::vector<Zero> found;
  const double dx = window.width() / seeds_per_axis, dy = window.height() / seeds_per_axis;
  for (int i = 0; i < seeds_per_axis; ++i) {
    for (int j = 0; j < seeds_per_axis; ++j) {
      const cplx seed(window.re_min + (i + 0.5) * dx, window.im_min + (j + 0.5) * dy);
      const NewtonResult r = newton(fn, seed, opt);
      if (!r.converged || !window.contains(r.z)) {
        ++out.nonconvergent;
        continue;
      }
      found.push_back({r.z, 0});
    }
  }
  for (const Zero& z : dedup(std::move(found), kDedupTolerance)) {
    const XComplex v = f(XComplex(z.z)) - t;
    out.points.push_back(z.z);
    out.residuals.push_back(v.finite() ? std::abs(v.value()) : HUGE_VAL);
  }
  return out;
}

SingularSet iterated_singular_set(const FnDef& f, const Rect& window, int depth, int seeds_per_axis) {
  if (depth < 1 || depth > 3) throw std::invalid_argument("depth must be in [1, 3]");
  SingularSet s = singular_set(f, window);
  if (depth == 1) return s;

  auto known = [&](cplx z) {
    return std::any_of(s.points.begin(), s.points.end(), [&](cplx p) { return std::abs(p - z) <= kDedupTolerance; });
  };

  std::vector<cplx> frontier = s.points;
  for (int level = 2; level <= depth; ++level) {
    std::vector<cplx> next;
    if (level == 2 && s.includes_infinity) {
      std::vector<Zero> poles;
      collect_poles(f.body(), window, poles);
      for (const Zero& p : dedup(std::move(poles), 1e-9)) {
        if (known(p.z)) continue;
        s.points.push_back(p.z);
        s.orders.push_back(0);
        s.residuals.push_back(0.0);
        next.push_back(p.z);
      }
    }
    for (cplx a : frontier) {
      const PreimageResult pre = preimages(f, a, window, seeds_per_axis);
      for (std::size_t k = 0; k < pre.points.size(); ++k) {
        if (known(pre.points[k])) continue;
        s.points.push_back(pre.points[k]);
        s.orders.push_back(0);
        s.residuals.push_back(pre.residuals[k]);
        next.push_back(pre.points[k]);
      }
    }
    frontier = std::move(next);
  }
  s.source = "iterated preimages, depth " + std::to_string(depth);
  return s;
}

}  // namespace dynlab
