#include "dynlab/periodic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "dynlab/newton.hpp"

namespace dynlab {

namespace {

constexpr double kResidualTol = 1e-9;
constexpr double kMinimalSeparation = 1e-6;
constexpr double kDedup = 1e-6;
constexpr double kCritical = 1e-9;
constexpr double kStepTol = 1e-8;

XComplex iterate(const FnDef& f, XComplex z, int n) {
  for (int i = 0; i < n && z.finite(); ++i) z = f(z);
  return z;
}

bool lex_less(cplx a, cplx b) { return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag(); }

// F(z) = f^p(z) - z and F'(z) = (f^p)'(z) - 1. For p = 1 the exact
// displacement avoids cancelling f(z) against z.
auto periodic_equation(const FnDef& f, int p) {
  return [&f, p](const XComplex& z) -> std::pair<XComplex, XComplex> {
    if (p == 1) return {f.displacement(z), f.deriv(z) - XComplex(1.0)};
    XComplex w = z, m(1.0);
    for (int i = 0; i < p; ++i) {
      m = m * f.deriv(w);
      w = f(w);
      if (!w.finite()) return {XComplex::undefined(), XComplex::undefined()};
    }
    return {w - z, m - XComplex(1.0)};
  };
}

}  // namespace

std::string_view to_string(PeriodicKind k) {
  switch (k) {
    case PeriodicKind::Attracting: return "Attracting";
    case PeriodicKind::Repelling: return "Repelling";
    case PeriodicKind::Indifferent: return "Indifferent";
    case PeriodicKind::Parabolic: return "Parabolic";
  }
  return "?";
}

PeriodicKind classify_multiplier(cplx m, double band) {
  if (std::abs(m - 1.0) < band) return PeriodicKind::Parabolic;
  const double r = std::abs(m);
  if (std::abs(r - 1.0) < band) return PeriodicKind::Indifferent;
  return r < 1.0 ? PeriodicKind::Attracting : PeriodicKind::Repelling;
}

XComplex cycle_multiplier(const FnDef& f, cplx z0, int p) {
  XComplex z(z0), m(1.0);
  for (int i = 0; i < p; ++i) {
    m = m * f.deriv(z);
    z = f(z);
    if (!z.finite() || !m.finite()) return XComplex::undefined();
  }
  return m;
}

PeriodicSearch find_periodic(const FnDef& f, int p, const Rect& window, int grid, const SingularSet* sing) {
  if (p < 1 || p > kMaxPeriod) throw std::invalid_argument("period must be in [1, 4]");
  window.require_valid();
  PeriodicSearch out;

  const auto fn = periodic_equation(f, p);
  NewtonOptions opt;
  opt.residual_tol = kResidualTol;
  opt.step_tol = kStepTol;

  std::vector<cplx> seeds;
  if (grid > 0) {
    const double dx = window.width() / grid, dy = window.height() / grid;
    for (int i = 0; i < grid; ++i)
      for (int j = 0; j < grid; ++j) seeds.emplace_back(window.re_min + (i + 0.5) * dx, window.im_min + (j + 0.5) * dy);
  }
  if (sing) {
    for (cplx s : sing->points) {
      if (!window.contains(s)) continue;
      for (double r : {0.02, 0.05, 0.1, 0.2, 0.4})
        for (int k = 0; k < 12; ++k) seeds.push_back(s + std::polar(r, (k + 0.25) * std::numbers::pi / 6));
    }
  }
  out.seeds = seeds.size();

  std::vector<cplx> roots;
  for (cplx s : seeds) {
    const NewtonResult r = newton(fn, s, opt);
    if (!r.converged) {
      ++out.nonconvergent;
      continue;
    }
    if (!window.contains(r.z)) {
      ++out.rejected;
      continue;
    }
    roots.push_back(r.z);
  }
  std::sort(roots.begin(), roots.end(), lex_less);

  for (cplx z : roots) {
    if (std::any_of(out.points.begin(), out.points.end(),
                    [&](const PeriodicPoint& q) { return std::abs(q.z - z) <= kDedup; }))
      continue;
    const XComplex fz = iterate(f, XComplex(z), p);
    if (!fz.finite()) continue;
    const double residual = std::abs(fz.value() - z);
    if (!(residual < kResidualTol)) continue;
    bool minimal = true;
    XComplex w(z);
    for (int j = 1; j < p && minimal; ++j) {
      w = f(w);
      minimal = w.finite() && std::abs(w.value() - z) > kMinimalSeparation;
    }
    if (!minimal) {
      ++out.rejected;
      continue;
    }
    const XComplex m = cycle_multiplier(f, z, p);
    if (!m.finite()) continue;
    out.points.push_back({z, p, m.value(), classify_multiplier(m.value()), residual});
  }
  return out;
}

std::vector<TransportCheck> multiplier_transport(const FnDef& f, cplx c, const std::vector<PeriodicPoint>& pts,
                                                 const SingularSet* sing, double eps_sing) {
  std::vector<TransportCheck> out;
  for (const PeriodicPoint& pt : pts) {
    TransportCheck t;
    t.point = pt;
    const XComplex gz = f(XComplex(pt.z)) + XComplex(c);
    const XComplex dg = f.deriv(XComplex(pt.z));
    if (!gz.finite() || !dg.finite()) {
      t.skipped = true;
      t.note = "image not finite";
      out.push_back(t);
      continue;
    }
    t.image = gz.value();
    if (std::abs(dg.value()) < kCritical) {
      t.critical = true;
      t.note = "critical point of g";
    }
    if (sing) {
      const auto near = std::find_if(sing->points.begin(), sing->points.end(), [&](cplx s) {
        return chordal(XComplex(s), XComplex(t.image)) < eps_sing;
      });
      if (near != sing->points.end()) {
        t.skipped = true;
        t.note = "image within eps_sing of a singular point";
        out.push_back(t);
        continue;
      }
    }
    const XComplex fw = iterate(f, XComplex(t.image), pt.period);
    const XComplex mw = cycle_multiplier(f, t.image, pt.period);
    if (!fw.finite() || !mw.finite()) {
      t.skipped = true;
      t.note = "orbit of image not finite";
      out.push_back(t);
      continue;
    }
    t.periodic_residual = std::abs(fw.value() - t.image);
    // The image inherits the rounding of f(z0); one Newton polish puts it
    // back on the cycle before the multiplier is compared.
    XComplex m_image = mw;
    const NewtonResult polished = newton(periodic_equation(f, pt.period), t.image);
    if (polished.converged && std::abs(polished.z - t.image) < 1e-6) {
      const XComplex mp = cycle_multiplier(f, polished.z, pt.period);
      if (mp.finite()) m_image = mp;
    }
    t.residual = std::abs(m_image.value() - pt.multiplier);
    out.push_back(t);
  }
  return out;
}

}  // namespace dynlab
