#pragma once

// Window-truncated essential-singularity sets A(f) and their iterated
// versions A_n(f) = A_{n-1}(f) ∪ f^{-1}(A_{n-1}(f)).

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "dynlab/expr.hpp"
#include "dynlab/rect.hpp"

namespace dynlab {

class SingularityError : public std::runtime_error {
 public:
  explicit SingularityError(const std::string& what) : std::runtime_error(what) {}
};

/// Finite essential singularities inside `window` plus a flag for the
/// point at infinity. `orders[k]` is the pole order of the inner map at
/// `points[k]` (0 for points found as preimages); `residuals[k]` is the
/// defining-equation residual of the point.
struct SingularSet {
  std::vector<cplx> points;
  std::vector<int> orders;
  std::vector<double> residuals;
  bool includes_infinity = false;
  Rect window;
  std::string source;

  std::size_t size() const { return points.size(); }
  /// Index of the point nearest to z in the chordal metric, or -1 if empty.
  int nearest(cplx z) const;
};

/// Singular set from closed-form rules: zeros of every denominator that
/// sits inside exp/sin/cos. Throws SingularityError when a denominator
/// has no rule.
SingularSet singular_set(const FnDef& f, const Rect& window);

struct PreimageResult {
  std::vector<cplx> points;
  std::vector<double> residuals;
  std::size_t nonconvergent = 0;
};

inline constexpr double kPreimageResidual = 1e-9;
inline constexpr double kDedupTolerance = 1e-6;

/// Solutions of f(w) = target in `window` by Newton from a
/// seeds_per_axis x seeds_per_axis grid.
PreimageResult preimages(const FnDef& f, cplx target, const Rect& window, int seeds_per_axis = 50);

/// A_depth(f) truncated to the window; depth in [1, 3].
SingularSet iterated_singular_set(const FnDef& f, const Rect& window, int depth, int seeds_per_axis = 50);

}  // namespace dynlab
