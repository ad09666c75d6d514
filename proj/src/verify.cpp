#include "dynlab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace dynlab {

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;
constexpr double kCommuteTolerance = 1e-6;

// 1 where the 3x3 neighbourhood of the mask is not constant.
std::vector<std::uint8_t> mask_boundary(const std::vector<std::uint8_t>& m, int W, int H) {
  std::vector<std::uint8_t> b(m.size(), 0);
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const std::uint8_t v = m[static_cast<std::size_t>(y) * W + x];
      bool edge = false;
      for (int dy = -1; dy <= 1 && !edge; ++dy)
        for (int dx = -1; dx <= 1 && !edge; ++dx) {
          const int nx = x + dx, ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= W || ny >= H) continue;
          edge = m[static_cast<std::size_t>(ny) * W + nx] != v;
        }
      b[static_cast<std::size_t>(y) * W + x] = edge;
    }
  }
  return b;
}

void finish(AgreementReport& r) {
  r.agreement_fraction = r.compared_pixels == 0 ? 1.0 : static_cast<double>(r.matching) / r.compared_pixels;
}

bool targets_match(const XComplex& a, const XComplex& b, cplx P) {
  if (a.is_undefined() || b.is_undefined()) return a.is_undefined() && b.is_undefined();
  if (a.is_infinity() || b.is_infinity()) return a.is_infinity() && b.is_infinity();
  const cplx want = a.value() + P;
  return std::abs(b.value() - want) <= kTargetMergeTolerance * std::max(1.0, std::abs(want));
}

}  // namespace

CommutationReport check_commutation(const FnDef& f, const FnDef& g, std::size_t samples, const Rect& window,
                                    const SingularSet& sing, double eps_sing, std::uint64_t seed) {
  if (samples == 0) throw std::invalid_argument("check_commutation: need at least one sample");
  window.require_valid();
  CommutationReport out;
  QuasiRandom2D q(seed);
  const double keep_out = 10 * eps_sing;
  const std::size_t max_draws = 1000 * samples;
  std::size_t drawn = 0, accepted = 0;
  while (accepted < samples && drawn < max_draws) {
    const cplx z = q.next_in(window);
    ++drawn;
    const bool near = std::any_of(sing.points.begin(), sing.points.end(),
                                  [&](cplx s) { return chordal(XComplex(s), XComplex(z)) <= keep_out; });
    if (near) continue;
    ++accepted;
    const XComplex fz = f(XComplex(z)), gz = g(XComplex(z));
    const XComplex fg = f(gz), gf = g(fz);
    if (!fg.finite() || !gf.finite() || !fz.finite() || !gz.finite()) {
      ++out.skipped;
      continue;
    }
    ++out.used;
    const double res = std::abs(fg.value() - gf.value());
    const double scale = 1.0 + std::max({std::abs(z), std::abs(fz.value()), std::abs(gz.value()),
                                         std::abs(fg.value()), std::abs(gf.value())});
    if (out.used == 1 || res > out.max_residual) {
      out.max_residual = res;
      out.worst = z;
    }
    out.max_relative = std::max(out.max_relative, res / scale);
  }
  if (out.used == 0) throw std::runtime_error("no valid samples");
  return out;
}

AgreementReport julia_agreement(const ClassRaster& a, const ClassRaster& b) {
  if (a.width != b.width || a.height != b.height)
    throw std::invalid_argument("julia_agreement: rasters differ in size");
  const int W = a.width, H = a.height;
  const auto ma = julia_mask(a), mb = julia_mask(b);
  const auto ba = mask_boundary(ma, W, H), bb = mask_boundary(mb, W, H);
  AgreementReport r;
  r.width = W;
  r.height = H;
  r.total_pixels = ma.size();
  r.disagreement_map.assign(ma.size(), 0);
  for (std::size_t i = 0; i < ma.size(); ++i) {
    if (ba[i] || bb[i]) continue;
    ++r.compared_pixels;
    if (ma[i] == mb[i])
      ++r.matching;
    else
      r.disagreement_map[i] = 1;
  }
  finish(r);
  r.params = nlohmann::json{{"check", "julia-eq"}, {"a", a.config}, {"b", b.config}}.dump();
  return r;
}

AgreementReport julia_equality(const FnDef& f, const FnDef& g, const RunConfig& cfg) {
  cfg.validate();
  const SingularSet sing = singular_set(f, cfg.window);
  const CommutationReport c = check_commutation(f, g, 200, cfg.window, sing, cfg.orbit.eps_sing);
  if (!(c.max_relative < kCommuteTolerance))
    throw std::invalid_argument("julia_equality: maps do not commute (relative residual " +
                                std::to_string(c.max_relative) + ")");
  return julia_agreement(render(f, cfg), render(g, cfg));
}

std::pair<int, int> pixel_shift(const ClassRaster& r, cplx P) {
  auto whole = [](double v) {
    const double k = std::round(v);
    if (k == 0.0 || std::abs(v - k) > 1e-6) throw ConfigError("period is not a whole number of pixels");
    return static_cast<int>(k);
  };
  if (P.imag() == 0.0 && P.real() != 0.0) return {whole(P.real() / r.pixel_width()), 0};
  if (P.real() == 0.0 && P.imag() != 0.0) return {0, whole(P.imag() / r.pixel_height())};
  throw ConfigError("period must lie on a grid axis");
}

AgreementReport translation_agreement(const ClassRaster& r, cplx P) {
  const auto [sx, sy] = pixel_shift(r, P);
  AgreementReport out;
  out.width = r.width;
  out.height = r.height;
  out.total_pixels = r.cells.size();
  out.disagreement_map.assign(r.cells.size(), 0);
  for (int y = 0; y < r.height; ++y) {
    for (int x = 0; x < r.width; ++x) {
      // z + P is sy rows up
      const int px = x + sx, py = y - sy;
      if (px < 0 || py < 0 || px >= r.width || py >= r.height) continue;
      ++out.compared_pixels;
      const Cell& a = r.at(x, y);
      const Cell& b = r.at(px, py);
      if (a.kind == b.kind && targets_match(r.legend.at(a.target_id), r.legend.at(b.target_id), P))
        ++out.matching;
      else
        out.disagreement_map[static_cast<std::size_t>(y) * r.width + x] = 1;
    }
  }
  finish(out);
  out.params = nlohmann::json{{"check", "translate"}, {"period", {P.real(), P.imag()}}, {"config", r.config}}.dump();
  return out;
}

AgreementReport translation_invariance(const FnDef& f, cplx P, const RunConfig& cfg) {
  cfg.validate();
  ClassRaster probe;
  probe.width = cfg.width;
  probe.height = cfg.height;
  probe.window = cfg.window;
  pixel_shift(probe, P);  // fail before rendering
  return translation_agreement(render(f, cfg), P);
}

std::vector<SectorCluster> cluster_angles(std::vector<double> angles, double max_gap) {
  std::vector<SectorCluster> out;
  if (angles.empty()) return out;
  for (double& a : angles) {
    a = std::fmod(a, kTwoPi);
    if (a < 0) a += kTwoPi;
  }
  std::sort(angles.begin(), angles.end());
  const std::size_t n = angles.size();
  // gap[i] is the gap after angles[i], the last one wrapping around
  std::vector<double> gap(n);
  for (std::size_t i = 0; i + 1 < n; ++i) gap[i] = angles[i + 1] - angles[i];
  gap[n - 1] = angles[0] + kTwoPi - angles[n - 1];

  std::size_t widest = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (gap[i] > gap[widest]) widest = i;
  // Walk once around the circle starting after the widest gap.
  const std::size_t start = (widest + 1) % n;
  SectorCluster cur;
  double first = angles[start], last = first;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = (start + k) % n;
    const double a = angles[i] + (i < start ? kTwoPi : 0.0);
    if (k == 0) first = a;
    last = a;
    ++cur.sample_count;
    if (gap[i] > max_gap || k + 1 == n) {
      cur.angular_width = last - first;
      cur.angle_center = std::fmod(first + cur.angular_width / 2, kTwoPi);
      out.push_back(cur);
      cur = {};
      if (k + 1 < n) {
        const std::size_t j = (i + 1) % n;
        first = angles[j] + (j < start ? kTwoPi : 0.0);
      }
    }
  }
  std::sort(out.begin(), out.end(),
            [](const SectorCluster& a, const SectorCluster& b) { return a.angle_center < b.angle_center; });
  return out;
}

namespace {

struct SectorRun {
  std::vector<double> angles;
  std::size_t baker = 0;
};

SectorRun sector_run(const FnDef& f, const OrbitClassifier& cls, cplx pole, double r_min,
                     double r_max, std::size_t samples, std::uint64_t seed) {
  SectorRun run;
  QuasiRandom2D q(seed);
  for (std::size_t k = 0; k < samples; ++k) {
    const cplx u = q.next_unit();
    // uniform in area
    const double r = std::sqrt(r_min * r_min + u.real() * (r_max * r_max - r_min * r_min));
    const double theta = kTwoPi * u.imag();
    const cplx z0 = pole + std::polar(r, theta);
    const OrbitOutcome o = cls.classify(z0, SeedCheck::Lenient);
    if (o.kind != OrbitKind::BakerFinite || !o.target || o.target->value() != pole) continue;
    // Only the invariant families: the orbit stays in the disc.
    XComplex z(z0);
    bool inside = true;
    for (int i = 0; i < o.iterations && inside; ++i) {
      z = f(z);
      inside = z.finite() && std::abs(z.value() - pole) <= r_max;
    }
    if (!inside) continue;
    ++run.baker;
    run.angles.push_back(theta);
  }
  return run;
}

}  // namespace

SectorReport baker_sectors(const FnDef& f, cplx pole, int p, double r_min, double r_max, std::size_t samples,
                           const OrbitConfig& cfg, std::uint64_t seed) {
  if (p < 1) throw std::invalid_argument("baker_sectors: order must be >= 1");
  if (!(r_min > 0.0) || !(r_max > r_min)) throw std::invalid_argument("baker_sectors: need 0 < r_min < r_max");
  const double reach = 4 * r_max + 1.0;
  const SingularSet sing =
      singular_set(f, {pole.real() - reach, pole.real() + reach, pole.imag() - reach, pole.imag() + reach});
  bool found = false;
  for (cplx s : sing.points) {
    if (std::abs(s - pole) < 1e-9) {
      found = true;
      pole = s;
    }
  }
  if (!found) throw std::invalid_argument("baker_sectors: pole is not a singular point of f");
  for (cplx s : sing.points)
    if (s != pole && std::abs(s - pole) <= r_max)
      throw std::invalid_argument("baker_sectors: annulus contains another singular point");

  const OrbitClassifier cls(f, sing, cfg);
  const double max_gap = kTwoPi / (4 * p);

  SectorReport rep;
  rep.pole = pole;
  rep.order_expected = p;
  rep.r_min = r_min;
  rep.r_max = r_max;
  rep.samples = samples;
  const SectorRun run = sector_run(f, cls, pole, r_min, r_max, samples, seed);
  rep.baker_samples = run.baker;
  if (run.baker < kMinSectorSamples)
    throw InsufficientSamples("insufficient samples: " + std::to_string(run.baker) + " Baker-classified");
  rep.clusters = cluster_angles(run.angles, max_gap);

  const SectorRun half = sector_run(f, cls, pole, r_min / 2, r_max / 2, samples, seed);
  if (half.baker >= kMinSectorSamples) {
    rep.shrunk_clusters = cluster_angles(half.angles, max_gap).size();
    rep.radius_stable = *rep.shrunk_clusters == rep.clusters.size();
  }
  return rep;
}

}  // namespace dynlab
