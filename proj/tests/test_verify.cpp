#include <cmath>
#include <numbers>

#include "doctest.h"
#include "dynlab/verify.hpp"

using namespace dynlab;

namespace {
constexpr double kPi = std::numbers::pi;

RunConfig grid(const std::string& fn, Rect w, int res, std::optional<cplx> period = std::nullopt) {
  RunConfig c;
  c.fn_src = fn;
  c.window = w;
  c.width = c.height = res;
  c.period = period;
  c.threads = 1;
  return c;
}
}  // namespace

TEST_CASE("check_commutation") {
  const FnDef f = FnDef::from_source("z + exp(1/sin(z))", 2 * kPi);
  const Rect w{-8, 8, -8, 8};
  const SingularSet sing = singular_set(f, w);

  const CommutationReport c = check_commutation(f, f.translated(2 * kPi), 200, w, sing);
  CHECK(c.used + c.skipped == 200);
  CHECK(c.used > 150);
  CHECK(c.max_residual < 1e-9);
  CHECK(c.max_relative <= c.max_residual);

  const CommutationReport same = check_commutation(f, f, 50, w, sing);
  CHECK(same.max_residual == 0.0);

  const FnDef e = FnDef::from_source("z + exp(-z)");
  const FnDef sq = FnDef::from_source("z^2");
  const SingularSet none = singular_set(e, {-2, 2, -2, 2});
  CHECK(check_commutation(e, sq, 100, {-2, 2, -2, 2}, none).max_residual > 1);
  // z = 1: f(g(1)) = 1 + 1/e, g(f(1)) = (1 + 1/e)^2
  const double a = 1 + std::exp(-1.0);
  const CommutationReport at1 = check_commutation(e, sq, 1, {1 - 1e-12, 1 + 1e-12, -1e-12, 1e-12}, none);
  CHECK(at1.max_residual == doctest::Approx(a * a - a).epsilon(1e-9));

  // every draw lies within the keep-out disc of the pole at 0
  CHECK_THROWS_WITH_AS(check_commutation(f, f, 10, {-1e-4, 1e-4, -1e-4, 1e-4}, sing), "no valid samples",
                       std::runtime_error);
  // composites overflow everywhere
  const FnDef big = FnDef::from_source("exp(exp(z))");
  CHECK_THROWS_WITH_AS(check_commutation(big, big, 10, {800, 801, 0, 0.1}, none), "no valid samples",
                       std::runtime_error);
  CHECK_THROWS_AS(check_commutation(f, f, 0, w, sing), std::invalid_argument);

  // reproducible
  const CommutationReport again = check_commutation(f, f.translated(2 * kPi), 200, w, sing);
  CHECK(again.max_residual == c.max_residual);
  CHECK(again.worst == c.worst);
}

TEST_CASE("julia_agreement: exclusion and symmetry") {
  ClassRaster a;
  a.width = a.height = 8;
  a.cells.assign(64, Cell{1, 1, 5});
  a.legend = {{0, XComplex::undefined()}, {1, XComplex::infinity()}};
  ClassRaster b = a;
  const AgreementReport same = julia_agreement(a, a);
  CHECK(same.agreement_fraction == 1.0);
  CHECK(same.compared_pixels == 64);

  // a 2x2 Unresolved block in b only: its 4x4 surrounding is excluded in
  // b's boundary, the block interior is itself boundary
  for (int y = 3; y < 5; ++y)
    for (int x = 3; x < 5; ++x) b.cells[y * 8 + x] = Cell{0, 0, 400};
  const AgreementReport r = julia_agreement(a, b);
  CHECK(r.total_pixels == 64);
  CHECK(r.compared_pixels == 64 - 16);
  CHECK(r.agreement_fraction == 1.0);

  // a 4x4 block has a 2x2 interior that disagrees
  for (int y = 2; y < 6; ++y)
    for (int x = 2; x < 6; ++x) b.cells[y * 8 + x] = Cell{0, 0, 400};
  const AgreementReport r2 = julia_agreement(a, b);
  CHECK(r2.compared_pixels == 64 - 36 + 4);
  CHECK(r2.matching == 64 - 36);
  CHECK(r2.disagreement_map[3 * 8 + 3] == 1);
  CHECK(r2.agreement_fraction == doctest::Approx(28.0 / 32.0));
  CHECK(julia_agreement(b, a).agreement_fraction == r2.agreement_fraction);

  ClassRaster c = a;
  c.width = 4;
  c.height = 16;
  CHECK_THROWS_AS(julia_agreement(a, c), std::invalid_argument);
}

TEST_CASE("julia_equality: commuting pairs") {
  const RunConfig cfg = grid("z + exp(-z)", {-2, 10, -3 * kPi, 3 * kPi}, 60, cplx(0, 2 * kPi));
  const FnDef f = FnDef::from_source(cfg.fn_src, cfg.period);
  const AgreementReport self = julia_equality(f, f, cfg);
  CHECK(self.agreement_fraction == 1.0);

  const FnDef g = f.translated(cplx(0, 2 * kPi));
  const AgreementReport fg = julia_equality(f, g, cfg);
  const AgreementReport gf = julia_equality(g, f, cfg);
  CHECK(fg.agreement_fraction > 0.9);
  CHECK(std::abs(fg.agreement_fraction - gf.agreement_fraction) < 1e-12);
  CHECK(fg.compared_pixels <= fg.total_pixels);
  // reproducible bit for bit
  CHECK(julia_equality(f, g, cfg).agreement_fraction == fg.agreement_fraction);

  CHECK_THROWS_AS(julia_equality(f, FnDef::from_source("z^2"), cfg), std::invalid_argument);
}

TEST_CASE("translation invariance") {
  // z + 1 with a declared period 1: everything escapes
  const RunConfig flat = grid("z + 1", {0, 4, 0, 4}, 16, 1.0);
  const FnDef t = FnDef::from_source("z + 1", 1.0);
  const AgreementReport r = translation_invariance(t, 1.0, flat);
  CHECK(r.agreement_fraction == 1.0);
  CHECK(r.compared_pixels == 16 * 12);

  // 2 pi is 16 pixels on [-4 pi, 4 pi] at 64 px
  const FnDef s = FnDef::from_source("z + exp(1/sin(z))", 2 * kPi);
  const RunConfig cfg = grid("z + exp(1/sin(z))", {-4 * kPi, 4 * kPi, -4 * kPi, 4 * kPi}, 64, 2 * kPi);
  const ClassRaster raster = render(s, cfg);
  CHECK(pixel_shift(raster, 2 * kPi) == std::pair{16, 0});
  CHECK(pixel_shift(raster, cplx(0, -2 * kPi)) == std::pair{0, -16});
  const AgreementReport sr = translation_agreement(raster, 2 * kPi);
  CHECK(sr.compared_pixels == 64 * 48);
  CHECK(sr.agreement_fraction > 0.95);
  // Baker targets k pi are matched with k pi + 2 pi
  std::size_t baker_pairs = 0;
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x + 16 < 64; ++x) {
      const Cell& a = raster.at(x, y);
      const Cell& b = raster.at(x + 16, y);
      if (a.kind != 2 || b.kind != 2 || sr.disagreement_map[y * 64 + x]) continue;
      ++baker_pairs;
      CHECK(std::abs(raster.legend.at(b.target_id).value() - raster.legend.at(a.target_id).value() - 2 * kPi) <
            1e-9);
    }
  CHECK(baker_pairs > 50);
  // two periods match as well
  CHECK(translation_agreement(raster, 4 * kPi).agreement_fraction > 0.9);

  CHECK_THROWS_AS(pixel_shift(raster, 1.0), ConfigError);
  CHECK_THROWS_AS(pixel_shift(raster, cplx(2 * kPi, 2 * kPi)), ConfigError);
  CHECK_THROWS_AS(pixel_shift(raster, 0.0), ConfigError);
  CHECK_THROWS_AS(translation_invariance(s, 1.0, cfg), ConfigError);
}

TEST_CASE("cluster_angles") {
  CHECK(cluster_angles({}, 0.5).empty());
  const auto one = cluster_angles({1.0}, 0.5);
  REQUIRE(one.size() == 1);
  CHECK(one[0].angular_width == 0.0);

  // a cluster across the 0 / 2 pi seam
  const auto wrap = cluster_angles({6.1, 6.2, 0.05, 0.1, 3.0, 3.2}, 0.5);
  REQUIRE(wrap.size() == 2);
  CHECK(wrap[0].angle_center == doctest::Approx(3.1));
  CHECK(wrap[0].angular_width == doctest::Approx(0.2));
  CHECK(wrap[0].sample_count == 2);
  CHECK(wrap[1].angle_center == doctest::Approx(0.5 * (6.1 + 0.1 + 2 * kPi)));
  CHECK(wrap[1].angular_width == doctest::Approx(0.1 + 2 * kPi - 6.1));
  CHECK(wrap[1].sample_count == 4);

  // evenly spread: one cluster spanning the circle minus the widest gap
  std::vector<double> ring;
  for (int k = 0; k < 40; ++k) ring.push_back(k * 2 * kPi / 40);
  const auto all = cluster_angles(ring, 0.5);
  REQUIRE(all.size() == 1);
  CHECK(all[0].angular_width == doctest::Approx(2 * kPi - 2 * kPi / 40));
  CHECK(all[0].sample_count == 40);
}

TEST_CASE("baker_sectors") {
  struct Case {
    const char* fn;
    int p;
  };
  for (const Case c : {Case{"z + exp(1/sin(z))", 1}, Case{"z + exp(1/z^2)", 2}, Case{"z + exp(1/z^3)", 3}}) {
    CAPTURE(c.fn);
    const SectorReport r = baker_sectors(FnDef::from_source(c.fn), 0.0, c.p, 0.2, 0.8, 4000);
    CHECK(r.baker_samples >= kMinSectorSamples);
    REQUIRE(r.clusters.size() == static_cast<std::size_t>(c.p));
    std::size_t total = 0;
    for (const SectorCluster& s : r.clusters) {
      CHECK(s.angular_width <= 2 * kPi / c.p + 0.2);
      // the sectors sit where Re g < 0: centred on (2j+1) pi / p
      const double k = (s.angle_center * c.p / kPi - 1) / 2;
      CHECK(std::abs(k - std::round(k)) * 2 * kPi / c.p < 0.2);
      total += s.sample_count;
    }
    CHECK(total == r.baker_samples);
    CHECK(r.radius_stable);
  }

  const FnDef f = FnDef::from_source("z + exp(1/z^2)");
  CHECK_THROWS_AS(baker_sectors(f, 0.0, 2, 0.2, 0.8, 10), InsufficientSamples);
  CHECK_THROWS_AS(baker_sectors(f, 1.0, 2, 0.2, 0.8, 100), std::invalid_argument);
  CHECK_THROWS_AS(baker_sectors(f, 0.0, 0, 0.2, 0.8, 100), std::invalid_argument);
  CHECK_THROWS_AS(baker_sectors(f, 0.0, 2, 0.8, 0.2, 100), std::invalid_argument);
  // the disc of radius 4 around 0 contains the poles at +-pi
  CHECK_THROWS_AS(baker_sectors(FnDef::from_source("z + exp(1/sin(z))"), 0.0, 1, 0.5, 4.0, 100),
                  std::invalid_argument);
}
