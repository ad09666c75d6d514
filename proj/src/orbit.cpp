#include "dynlab/orbit.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace dynlab {

namespace {

// A cycle multiplier this close to 1 is parabolic-looking; the verdict
// is deferred so that a stalled slow drift can still be recognised.
constexpr double kParabolicBand = 1e-3;
// Largest estimated distance from the orbit to a detected cycle.
constexpr double kCycleLocate = 1e-6;
// Slow-drift rule: displacement pointing at a finite target within 60
// degrees with the map close to the identity, or outward for infinity.
// With a declared period, outward may also be measured across the period
// (escape along an end of the cylinder C/P.Z).
constexpr double kNearIdentity = 0.1;
constexpr double kDriftCos = 0.5;
constexpr int kCylinder = -2;

double dist_inf(cplx q) { return 2.0 / std::hypot(1.0, std::abs(q)); }
double dist_to(cplx q, cplx e) { return chordal(XComplex(q), XComplex(e)); }
// Signed coordinate of q perpendicular to P.
double across(cplx q, cplx P) { return (q * std::conj(P)).imag() / std::abs(P); }

bool lex_less(cplx a, cplx b) { return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag(); }

constexpr std::array<std::string_view, 7> kKindNames = {
    "Unresolved", "EscapeInfinity", "BakerFinite", "AttractingCycle", "ParabolicSuspect", "Wandering", "SingularHit",
};

}  // namespace

std::string_view to_string(OrbitKind k) { return kKindNames[static_cast<std::size_t>(k)]; }

std::optional<OrbitKind> orbit_kind_from_string(std::string_view s) {
  for (std::size_t k = 0; k < kKindNames.size(); ++k)
    if (kKindNames[k] == s) return static_cast<OrbitKind>(k);
  return std::nullopt;
}

void OrbitConfig::validate() const {
  if (max_iter <= 0 || !(escape_radius > 0) || !(eps_sing > 0) || !(eps_cycle > 0) || p_max <= 0 ||
      confirm_steps <= 0) {
    throw std::invalid_argument("orbit config: all fields must be positive");
  }
  if (p_max > 8) throw std::invalid_argument("orbit config: p_max must be <= 8");
}

long band_index(cplx z, cplx P) {
  if (P == cplx(0.0, 0.0)) throw std::invalid_argument("band_index: period must be nonzero");
  return std::lround((z * std::conj(P)).real() / std::norm(P));
}

std::vector<XComplex> iterate_orbit(const FnDef& f, cplx seed, const OrbitConfig& cfg) {
  cfg.validate();
  std::vector<XComplex> out{XComplex(seed)};
  XComplex z(seed);
  for (int n = 0; n < cfg.max_iter; ++n) {
    z = f(z);
    out.push_back(z);
    if (!z.finite() || std::abs(z.value()) > cfg.escape_radius) break;
  }
  return out;
}

OrbitClassifier::OrbitClassifier(const FnDef& f, const SingularSet& sing, const OrbitConfig& cfg)
    : f_(f), sing_(sing), cfg_(cfg), deck_(f.deck_translation()) {
  cfg_.validate();
  std::vector<int> order(sing_.points.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = static_cast<int>(k);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return lex_less(sing_.points[a], sing_.points[b]); });
  for (int k : order) {
    sorted_.push_back(sing_.points[k]);
    sorted_index_.push_back(k);
  }
}

int OrbitClassifier::nearest_singular(cplx z) const {
  if (sorted_.empty()) return -1;
  const auto it = std::lower_bound(sorted_.begin(), sorted_.end(), z.real(),
                                   [](cplx p, double x) { return p.real() < x; });
  const std::ptrdiff_t mid = it - sorted_.begin();
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(sorted_.size());
  double best = HUGE_VAL;
  std::ptrdiff_t best_k = -1;
  auto visit = [&](std::ptrdiff_t k) {
    const double d = std::norm(sorted_[k] - z);
    if (d < best) {
      best = d;
      best_k = k;
    }
  };
  for (std::ptrdiff_t k = mid; k < n; ++k) {
    const double dx = sorted_[k].real() - z.real();
    if (dx * dx > best) break;
    visit(k);
  }
  for (std::ptrdiff_t k = mid - 1; k >= 0; --k) {
    const double dx = z.real() - sorted_[k].real();
    if (dx * dx > best) break;
    visit(k);
  }
  return sorted_index_[best_k];
}

OrbitOutcome OrbitClassifier::classify(cplx seed, SeedCheck check) const {
  if (!std::isfinite(seed.real()) || !std::isfinite(seed.imag())) throw SeedError("seed must be finite");

  OrbitOutcome out;
  const std::optional<cplx>& period = f_.period();
  const cplx T = deck_;
  const bool quotient = T != cplx(0.0, 0.0);
  const auto& pts = sing_.points;

  const int s0 = nearest_singular(seed);
  if (s0 >= 0) {
    const double d = dist_to(seed, pts[s0]);
    if (d < cfg_.eps_sing) {
      if (check == SeedCheck::Strict) {
        throw SeedError("seed " + XComplex(seed).to_string() + " is within eps_sing of singular point " +
                        XComplex(pts[s0]).to_string());
      }
      if (d < hit_radius()) {
        out.kind = OrbitKind::SingularHit;
        out.target = XComplex(pts[s0]);
        out.final_chordal_residual = d;
        if (period) out.band_trace.push_back(band_index(seed, *period));
        return out;
      }
    }
  }

  const int N = cfg_.max_iter;
  const int C = cfg_.confirm_steps;
  const int W = 4 * C;
  const int drift_from = std::max(N / 4, W);

  std::vector<cplx> zs, qs;
  std::vector<double> dinf, dnear, dcyl;
  std::vector<int> near;
  zs.reserve(N + 1);
  qs.reserve(N + 1);
  dinf.reserve(N + 1);
  dnear.reserve(N + 1);
  near.reserve(N + 1);

  auto push = [&](cplx z, cplx q) {
    zs.push_back(z);
    qs.push_back(q);
    dinf.push_back(dist_inf(q));
    // distance to the ends of the cylinder C / P.Z
    if (period) dcyl.push_back(1.0 / (1.0 + std::abs(across(q, *period))));
    const int k = nearest_singular(q);
    near.push_back(k);
    dnear.push_back(k >= 0 ? dist_to(q, pts[k]) : HUGE_VAL);
    if (period) out.band_trace.push_back(band_index(z, *period));
  };
  push(seed, seed);

  // Lazily evaluated f' and quotient displacement along the orbit.
  std::vector<XComplex> dfs(N + 1), disp(N + 1);
  std::vector<char> have(N + 1, 0);
  auto local = [&](int i) {
    if (!have[i]) {
      const XComplex z(zs[i]);
      dfs[i] = f_.deriv(z);
      disp[i] = f_.displacement(z) - XComplex(T);
      have[i] = 1;
    }
  };

  struct Pending {
    int period;
    cplx multiplier;
    cplx rep;
  };
  std::optional<Pending> parabolic;

  auto band_monotone = [&]() {
    const auto& b = out.band_trace;
    if (static_cast<int>(b.size()) < C + 1) return false;
    const std::size_t s = b.size() - static_cast<std::size_t>(C) - 1;
    const bool up = b[s + 1] > b[s];
    for (std::size_t k = s; k + 1 < b.size(); ++k)
      if (up ? !(b[k + 1] > b[k]) : !(b[k + 1] < b[k])) return false;
    return true;
  };

  auto finish = [&](OrbitKind kind, int it) {
    out.kind = kind;
    out.iterations = it;
    if (it >= 1 && static_cast<int>(qs.size()) > it) out.final_chordal_residual = dist_to(qs[it], qs[it - 1]);
    if (quotient && (kind == OrbitKind::BakerFinite || kind == OrbitKind::AttractingCycle)) {
      if (band_monotone()) {
        out.quotient_limit_singular = kind == OrbitKind::BakerFinite;
        out.kind = OrbitKind::Wandering;
      } else {
        out.kind = OrbitKind::Unresolved;
        out.target.reset();
        out.period.reset();
        out.multiplier.reset();
      }
    }
    return out;
  };

  // Window of the last C steps ending at index it: distances non-increasing
  // with a net decrease.
  auto converging = [&](const std::vector<double>& d, int it) {
    if (it < C) return false;
    for (int i = it - C; i < it; ++i)
      if (!(d[i + 1] <= d[i])) return false;
    return d[it] < d[it - C];
  };

  auto drifting = [&](int it, int target) {
    // target < 0: infinity (kCylinder: along the cylinder ends); otherwise
    // index into pts. For infinity with a period, positions are moved by a
    // whole number of periods fixed at the window start, so z and z + P
    // get the same verdict: the start lands one period ahead of band 0 in
    // the direction of travel along P.
    cplx shift(0.0, 0.0);
    if (target == -1 && period) {
      local(it - W);
      if (!disp[it - W].finite()) return false;
      const double ahead = (disp[it - W].value() * std::conj(*period)).real() < 0.0 ? -1.0 : 1.0;
      shift = (static_cast<double>(band_index(qs[it - W], *period)) - ahead) * *period;
    }
    auto dist = [&](int i) {
      return target == kCylinder ? dcyl[i] : target < 0 ? dist_inf(qs[i] - shift) : dnear[i];
    };
    auto toward = [&](cplx D, int i) {
      if (target == kCylinder) return across(D, *period) * across(qs[i], *period) > 0.0;
      const cplx dir = target < 0 ? qs[i] - shift : pts[target] - qs[i];
      const double scale = std::abs(D) * std::abs(dir);
      return scale > 0.0 && (D * std::conj(dir)).real() > (target < 0 ? 0.0 : kDriftCos * scale);
    };
    bool all_frozen = true;
    for (int i = it - W; i < it; ++i) {
      if (target >= 0 && near[i] != target) return false;
      local(i);
      if (!dfs[i].finite() || !disp[i].finite()) return false;
      // Finite Baker points need a near-identity map. Escape to infinity
      // may oscillate, but must then move strictly outward.
      const bool near_id = std::abs(dfs[i].value() - 1.0) < kNearIdentity;
      if (target >= 0 && !near_id) return false;
      const cplx D = disp[i].value();
      // Step below an ulp of z with f' ~ 1: the orbit is frozen in floating
      // point and carries no usable direction of its own.
      const bool frozen = near_id && qs[i + 1] == qs[i];
      if (!frozen && !toward(D, i)) return false;
      all_frozen = all_frozen && frozen;
      const double slack = near_id ? 1e-14 * (1.0 + std::abs(zs[i])) : 0.0;
      if (near_id ? !(dist(i + 1) <= dist(i) + slack) : !(dist(i + 1) < dist(i))) return false;
    }
    if (all_frozen) {
      // Fall back on the last step that actually moved: it must have
      // brought the orbit closer to the target.
      for (int j = it - W - 1; j >= 0; --j)
        if (qs[j + 1] != qs[j]) return dist(j + 1) < dist(j) && (target < 0 || near[j + 1] == target);
      return false;
    }
    return true;
  };

  for (int n = 0; n < N; ++n) {
    const int it = n + 1;
    const XComplex next = f_(XComplex(zs[n]));
    if (next.is_undefined()) {
      out.kind = OrbitKind::SingularHit;
      out.iterations = it;
      if (near[n] >= 0) {
        out.target = XComplex(pts[near[n]]);
        out.final_chordal_residual = dnear[n];
      }
      return out;
    }
    const cplx shift = static_cast<double>(it) * T;
    if (next.is_infinity() || std::abs(next.value() - shift) > cfg_.escape_radius) {
      out.target = XComplex::infinity();
      out.iterations = it;
      out.final_chordal_residual = next.is_infinity() ? dinf[n] : dist_inf(next.value() - shift);
      if (converging(dinf, n)) {
        out.kind = OrbitKind::EscapeInfinity;
      } else {
        out.kind = OrbitKind::SingularHit;
      }
      return out;
    }
    push(next.value(), next.value() - shift);

    if (near[it] >= 0 && dnear[it] < hit_radius()) {
      out.kind = OrbitKind::SingularHit;
      out.iterations = it;
      out.target = XComplex(pts[near[it]]);
      out.final_chordal_residual = dnear[it];
      return out;
    }

    if (it >= C) {
      if (near[it] >= 0 && dnear[it] < cfg_.eps_sing && converging(dnear, it) &&
          std::all_of(near.end() - C - 1, near.end(), [&](int k) { return k == near[it]; })) {
        out.target = XComplex(pts[near[it]]);
        return finish(OrbitKind::BakerFinite, it);
      }
      if (dinf[it] < cfg_.eps_sing && converging(dinf, it)) {
        out.target = XComplex::infinity();
        return finish(OrbitKind::EscapeInfinity, it);
      }
    }

    // A stationary orbit is at most a period-1 candidate.
    const int p_top = qs[it] == qs[it - 1] ? 1 : cfg_.p_max;
    for (int p = 1; p <= p_top && it >= p + 1; ++p) {
      if (std::abs(qs[it] - qs[it - p]) >= cfg_.eps_cycle || std::abs(qs[it - 1] - qs[it - 1 - p]) >= cfg_.eps_cycle)
        continue;
      XComplex mult(1.0);
      cplx rep = qs[it - p];
      for (int i = it - p; i < it; ++i) {
        local(i);
        mult = mult * dfs[i];
        if (lex_less(qs[i], rep)) rep = qs[i];
      }
      if (!mult.finite()) break;
      const cplx lambda = mult.value();
      // Near a cycle z_{n+p} - z_n ~ (lambda - 1)(z_n - z*). A slow drift
      // with tiny steps passes the closeness test but sits far from any
      // cycle by this estimate.
      // For p = 1 the exact displacement replaces the rounded difference,
      // which is zero once |D| drops below an ulp of z.
      double delta = std::abs(qs[it] - qs[it - p]);
      if (p == 1) {
        local(it);
        if (disp[it].finite()) delta = std::max(delta, std::abs(disp[it].value()));
      }
      if (delta > 0.0 && delta > kCycleLocate * std::abs(lambda - 1.0)) continue;
      if (std::abs(lambda) < 1.0) {
        out.target = XComplex(rep);
        out.period = p;
        out.multiplier = lambda;
        return finish(OrbitKind::AttractingCycle, it);
      }
      if (!parabolic && std::abs(lambda - 1.0) < kParabolicBand) parabolic = Pending{p, lambda, rep};
      break;
    }

    if (it >= drift_from) {
      const bool to_inf = drifting(it, -1) || (period && drifting(it, kCylinder));
      const bool to_fin = near[it] >= 0 && drifting(it, near[it]);
      if (to_fin) {
        out.target = XComplex(pts[near[it]]);
        return finish(OrbitKind::BakerFinite, it);
      }
      if (to_inf) {
        out.target = XComplex::infinity();
        return finish(OrbitKind::EscapeInfinity, it);
      }
    }
  }

  if (parabolic) {
    out.target = XComplex(parabolic->rep);
    out.period = parabolic->period;
    out.multiplier = parabolic->multiplier;
    return finish(OrbitKind::ParabolicSuspect, N);
  }
  return finish(OrbitKind::Unresolved, N);
}

OrbitOutcome classify_orbit(const FnDef& f, cplx seed, const SingularSet& sing, const OrbitConfig& cfg,
                            SeedCheck check) {
  return OrbitClassifier(f, sing, cfg).classify(seed, check);
}

}  // namespace dynlab
