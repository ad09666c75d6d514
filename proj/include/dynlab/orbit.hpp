#pragma once

// Orbit iteration and long-run classification.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dynlab/expr.hpp"
#include "dynlab/singular.hpp"

namespace dynlab {

enum class OrbitKind : std::uint8_t {
  Unresolved = 0,
  EscapeInfinity = 1,
  BakerFinite = 2,
  AttractingCycle = 3,
  ParabolicSuspect = 4,
  Wandering = 5,
  SingularHit = 6,
};

std::string_view to_string(OrbitKind k);
std::optional<OrbitKind> orbit_kind_from_string(std::string_view s);

struct OrbitConfig {
  int max_iter = 400;
  double escape_radius = 1e8;
  double eps_sing = 1e-3;
  double eps_cycle = 1e-9;
  int p_max = 6;
  int confirm_steps = 5;

  /// Throws std::invalid_argument unless every field is positive and p_max <= 8.
  void validate() const;
  bool operator==(const OrbitConfig&) const = default;
};

struct OrbitOutcome {
  OrbitKind kind = OrbitKind::Unresolved;
  std::optional<XComplex> target;
  std::optional<int> period;
  std::optional<cplx> multiplier;
  int iterations = 0;
  std::vector<long> band_trace;
  /// Chordal length of the last step of the (quotient) orbit.
  double final_chordal_residual = HUGE_VAL;
  /// Wandering only: the quotient orbit converged to a point of the singular set.
  bool quotient_limit_singular = false;

  bool operator==(const OrbitOutcome&) const = default;
};

class SeedError : public std::invalid_argument {
 public:
  explicit SeedError(const std::string& what) : std::invalid_argument(what) {}
};

enum class SeedCheck {
  /// Seeds within eps_sing of a finite singular point are rejected.
  Strict,
  /// Such seeds are iterated; a seed on top of a singular point is a SingularHit.
  Lenient,
};

/// Integer coordinate of z along P. Throws std::invalid_argument for P = 0.
long band_index(cplx z, cplx P);

/// Plain orbit: seed, f(seed), ... until a non-finite value (kept as the
/// last entry), |z| > escape_radius, or max_iter steps.
std::vector<XComplex> iterate_orbit(const FnDef& f, cplx seed, const OrbitConfig& cfg = {});

/// Reusable classifier for one map and singular set. Thread-safe: classify()
/// does not mutate the object.
class OrbitClassifier {
 public:
  OrbitClassifier(const FnDef& f, const SingularSet& sing, const OrbitConfig& cfg = {});

  OrbitOutcome classify(cplx seed, SeedCheck check = SeedCheck::Strict) const;

  const OrbitConfig& config() const { return cfg_; }
  const FnDef& fn() const { return f_; }
  const SingularSet& singular() const { return sing_; }

  /// Index of the Euclidean-nearest finite singular point, or -1.
  int nearest_singular(cplx z) const;

  /// Chordal radius under which an orbit point counts as landing on a
  /// finite singular point.
  double hit_radius() const { return cfg_.eps_sing * 1e-3; }

 private:
  const FnDef& f_;
  const SingularSet& sing_;
  OrbitConfig cfg_;
  cplx deck_{0.0, 0.0};
  std::vector<cplx> sorted_;          // singular points sorted by real part
  std::vector<int> sorted_index_;     // position in sing_.points
};

/// Convenience wrapper around OrbitClassifier.
OrbitOutcome classify_orbit(const FnDef& f, cplx seed, const SingularSet& sing, const OrbitConfig& cfg = {},
                            SeedCheck check = SeedCheck::Strict);

}  // namespace dynlab
