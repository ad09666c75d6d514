#pragma once

// Periodic points by Newton's method on f^p(z) - z.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dynlab/expr.hpp"
#include "dynlab/singular.hpp"

namespace dynlab {

enum class PeriodicKind { Attracting, Repelling, Indifferent, Parabolic };

std::string_view to_string(PeriodicKind k);

struct PeriodicPoint {
  cplx z;
  int period = 1;
  cplx multiplier;
  PeriodicKind kind = PeriodicKind::Repelling;
  /// |f^p(z) - z|
  double residual = 0.0;
};

inline constexpr int kMaxPeriod = 4;
inline constexpr double kIndifferentBand = 1e-6;

/// Parabolic iff |m - 1| < band; Indifferent iff ||m| - 1| < band.
PeriodicKind classify_multiplier(cplx m, double band = kIndifferentBand);

struct PeriodicSearch {
  std::vector<PeriodicPoint> points;
  std::size_t seeds = 0;
  std::size_t nonconvergent = 0;
  std::size_t rejected = 0;  // converged, but outside window or of lower period
};

/// All points of exact period p (1 <= p <= 4) found from a grid x grid seed
/// lattice over the window plus rings of seeds around the finite points of
/// `sing` (when given). Sorted lexicographically.
PeriodicSearch find_periodic(const FnDef& f, int p, const Rect& window, int grid = 40,
                             const SingularSet* sing = nullptr);

/// (f^p)'(z) = prod f'(z_i) along the orbit; non-finite when the orbit is.
XComplex cycle_multiplier(const FnDef& f, cplx z, int p);

struct TransportCheck {
  PeriodicPoint point;
  cplx image{};                    // w = f(z0) + c
  double periodic_residual = 0.0;  // |f^p(w) - w|
  double residual = 0.0;           // |(f^p)'(w) - (f^p)'(z0)|
  bool skipped = false;
  /// g'(z0) = 0: reported, but excluded from transport statistics.
  bool critical = false;
  std::string note;
};

/// For g = f + c, checks that g carries each periodic point z0 of f to a
/// periodic point w with the same multiplier. Points whose image is within
/// eps_sing (chordal) of `sing` are skipped; critical points of g are flagged.
std::vector<TransportCheck> multiplier_transport(const FnDef& f, cplx c, const std::vector<PeriodicPoint>& pts,
                                                 const SingularSet* sing = nullptr, double eps_sing = 1e-3);

}  // namespace dynlab
