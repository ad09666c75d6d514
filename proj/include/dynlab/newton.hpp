#pragma once

#include <cmath>
#include <utility>

#include "dynlab/xcomplex.hpp"

namespace dynlab {

struct NewtonOptions {
  int max_steps = 60;
  double residual_tol = 1e-9;
  /// Also require the final Newton correction |F/F'| <= step_tol (1 + |z|).
  /// Rejects points where |F| is merely tiny, e.g. near a pole of an
  /// exponent where exp() is small on a whole neighbourhood.
  double step_tol = HUGE_VAL;
};

struct NewtonResult {
  cplx z{};
  double residual = HUGE_VAL;
  int steps = 0;
  bool converged = false;
};

/// Damped Newton iteration for F(z) = 0. `fn(z)` returns {F(z), F'(z)}.
///
/// A step that increases |F| is halved (up to 30 times). When the step
/// lengths shrink at a steady linear rate r the root is treated as having
/// multiplicity m = round(1/(1-r)) and the step is scaled by m, which
/// restores quadratic convergence at double roots.
template <class Fn>
NewtonResult newton(Fn&& fn, cplx z0, const NewtonOptions& opt = {}) {
  NewtonResult out;
  cplx z = z0;
  const auto first = fn(XComplex(z));
  XComplex F = first.first, dF = first.second;
  if (!F.finite()) return out;
  double res = std::abs(F.value());
  double prev_step = 0.0, prev_ratio = 0.0;
  int steps = 0;
  for (; steps < opt.max_steps && res > 0.0; ++steps) {
    if (!dF.finite() || dF.value() == cplx(0.0, 0.0)) break;
    cplx dz = F.value() / dF.value();
    const double len = std::abs(dz);
    if (!std::isfinite(len)) break;
    double mult = 1.0;
    if (prev_step > 0.0) {
      const double ratio = len / prev_step;
      if (ratio > 0.3 && ratio < 0.95 && std::abs(ratio - prev_ratio) < 0.05) {
        mult = std::round(1.0 / (1.0 - ratio));
      }
      prev_ratio = ratio;
    }
    prev_step = len;

    auto try_step = [&](cplx step) {
      for (int halving = 0; halving < 30; ++halving) {
        const cplx trial = z - step;
        const auto [Ft, dFt] = fn(XComplex(trial));
        if (Ft.finite() && std::abs(Ft.value()) <= res) {
          z = trial;
          F = Ft;
          dF = dFt;
          res = std::abs(F.value());
          return true;
        }
        step *= 0.5;
      }
      return false;
    };
    bool accepted = mult > 1.0 && try_step(dz * mult);
    if (!accepted) {
      mult = 1.0;
      accepted = try_step(dz);
    }
    if (!accepted) break;
    if (len * mult <= 4e-16 * (1.0 + std::abs(z))) {
      ++steps;
      break;
    }
  }
  out.z = z;
  out.residual = res;
  out.steps = steps;
  out.converged = res < opt.residual_tol;
  if (out.converged && opt.step_tol < HUGE_VAL && res > 0.0) {
    const bool flat = !dF.finite() || dF.value() == cplx(0.0, 0.0);
    out.converged = !flat && std::abs(F.value() / dF.value()) <= opt.step_tol * (1.0 + std::abs(z));
  }
  return out;
}

}  // namespace dynlab
