// dynlab: command-line front end.
//
//   dynlab render        --fn EXPR --window r0,r1,i0,i1 --res WxH [--period re,im] --out a.png --json a.json
//   dynlab orbit         --fn EXPR --seed re,im [--period re,im] [--max-iter N]
//   dynlab periodic      --fn EXPR --period p --window ... [--grid N]
//   dynlab singularities --fn EXPR --window ... [--depth n]
//   dynlab verify commute|julia-eq|translate|sectors ...
//
// Numbers may be written as constant expressions ("-3*pi", "2*pi").
// Exit codes: 0 ok / thresholds met, 1 thresholds not met, 2 error.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dynlab/periodic.hpp"
#include "dynlab/raster.hpp"
#include "dynlab/verify.hpp"

using namespace dynlab;
using nlohmann::json;

namespace {

constexpr int kExitFail = 1;
constexpr int kExitError = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string part;
  while (std::getline(in, part, sep)) out.push_back(part);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

cplx constant(const std::string& s, const char* what) {
  Expr e;
  try {
    e = parse(s);
  } catch (const ParseError& err) {
    throw UsageError(std::string(what) + ": cannot parse \"" + s + "\": " + err.what());
  }
  if (depends_on_z(e)) throw UsageError(std::string(what) + ": \"" + s + "\" must not contain z");
  const XComplex v = eval(e, XComplex(0.0));
  if (!v.finite()) throw UsageError(std::string(what) + ": \"" + s + "\" is not finite");
  return v.value();
}

double real_value(const std::string& s, const char* what) {
  const cplx v = constant(s, what);
  if (v.imag() != 0.0) throw UsageError(std::string(what) + ": \"" + s + "\" is not real");
  return v.real();
}

std::vector<double> reals(const std::string& s, std::size_t n, const char* what) {
  const auto parts = split(s, ',');
  if (parts.size() != n)
    throw UsageError(std::string(what) + ": expected " + std::to_string(n) + " comma-separated values");
  std::vector<double> v;
  for (const auto& p : parts) v.push_back(real_value(p, what));
  return v;
}

// "re,im" or a single constant expression such as "2*pi*i".
cplx complex_value(const std::string& s, const char* what) {
  if (s.find(',') == std::string::npos) return constant(s, what);
  const auto v = reals(s, 2, what);
  return {v[0], v[1]};
}

Rect window_value(const std::string& s) {
  const auto v = reals(s, 4, "--window");
  const Rect r{v[0], v[1], v[2], v[3]};
  if (!r.valid()) throw UsageError("--window: need r0 < r1 and i0 < i1");
  return r;
}

std::pair<int, int> resolution_value(const std::string& s) {
  auto parts = split(s, 'x');
  if (parts.size() == 1) parts.push_back(parts[0]);
  if (parts.size() != 2) throw UsageError("--res: expected WxH");
  try {
    std::size_t a = 0, b = 0;
    const int w = std::stoi(parts[0], &a), h = std::stoi(parts[1], &b);
    if (a != parts[0].size() || b != parts[1].size()) throw std::invalid_argument("");
    return {w, h};
  } catch (const std::logic_error&) {
    throw UsageError("--res: expected WxH");
  }
}

json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

json xcomplex_json(const XComplex& z) {
  if (z.is_infinity()) return "inf";
  if (z.is_undefined()) return nullptr;
  return complex_json(z.value());
}

// JSON has no infinity; such values become null.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void emit(const json& j, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error(path + ": write failed");
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// Options shared by every subcommand that renders.
struct RenderOpts {
  std::string fn, window, res, period, config, out, json_out;
  int max_iter = 0;
  int threads = 0;

  void add(CLI::App* app, bool with_outputs = true) {
    app->add_option("--fn", fn, "map f(z), e.g. \"z+exp(-z)\"");
    app->add_option("--window", window, "r0,r1,i0,i1");
    app->add_option("--res", res, "WxH (or N for NxN)");
    app->add_option("--max-iter", max_iter, "orbit iteration cap")->check(CLI::PositiveNumber);
    app->add_option("--period", period, "translation period P with f(z+P)=f(z)+P, as re,im");
    app->add_option("--config", config, "RunConfig JSON; flags override its values");
    app->add_option("--threads", threads, "worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
    if (with_outputs) app->add_option("--out", out, "PNG output path");
    app->add_option("--json", json_out, with_outputs ? "raster JSON output path" : "report output path");
  }

  RunConfig build() const {
    RunConfig c;
    if (!config.empty()) c = load_run_config(config);
    if (!fn.empty()) c.fn_src = fn;
    if (!window.empty()) c.window = window_value(window);
    if (!res.empty()) std::tie(c.width, c.height) = resolution_value(res);
    if (max_iter > 0) c.orbit.max_iter = max_iter;
    if (!period.empty()) c.period = complex_value(period, "--period");
    c.threads = threads;
    if (c.fn_src.empty()) throw UsageError("--fn (or a --config with \"fn\") is required");
    c.validate();
    return c;
  }
};

FnDef make_fn(const std::string& src, std::optional<cplx> period = std::nullopt) {
  if (src.empty()) throw UsageError("--fn is required");
  return FnDef(parse(src), period, src);
}

json agreement_json(const AgreementReport& r, double threshold) {
  std::size_t disagree = 0;
  for (auto v : r.disagreement_map) disagree += v;
  return {{"total_pixels", r.total_pixels},
          {"compared_pixels", r.compared_pixels},
          {"matching", r.matching},
          {"disagreeing", disagree},
          {"agreement_fraction", r.agreement_fraction},
          {"threshold", threshold},
          {"pass", r.agreement_fraction >= threshold},
          {"width", r.width},
          {"height", r.height},
          {"params", json::parse(r.params)}};
}

// ---------------------------------------------------------------- render

int cmd_render(const RenderOpts& o) {
  RunConfig c = o.build();
  std::vector<std::string> outputs = c.outputs;
  if (!o.out.empty() || !o.json_out.empty()) outputs.clear();
  if (!o.out.empty()) outputs.push_back(o.out);
  if (!o.json_out.empty()) outputs.push_back(o.json_out);

  const auto t0 = std::chrono::steady_clock::now();
  const ClassRaster r = render(c);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  for (const auto& path : outputs) {
    if (ends_with(path, ".png"))
      export_png(r, path);
    else if (ends_with(path, ".json"))
      export_json(r, path);
    else
      throw UsageError(path + ": output must end in .png or .json");
  }

  json counts = json::object();
  std::map<int, std::size_t> n;
  for (const Cell& cell : r.cells) ++n[cell.kind];
  for (auto [k, v] : n) counts[std::string(to_string(static_cast<OrbitKind>(k)))] = v;
  std::cout << json{{"config_hash", r.config_hash},
                    {"width", r.width},
                    {"height", r.height},
                    {"kinds", counts},
                    {"targets", r.legend.size() - 1},
                    {"outputs", outputs},
                    {"seconds", secs}}
                   .dump(2)
            << "\n";
  return 0;
}

// ----------------------------------------------------------------- orbit

struct OrbitOpts {
  std::string fn, seed, period, window, out, json_out;
  int max_iter = 0;
  bool lenient = false;
};

double chordal_to_singular(const SingularSet& s, const XComplex& z) {
  double d = s.includes_infinity ? chordal(z, XComplex::infinity()) : HUGE_VAL;
  const int k = s.nearest(z.finite() ? z.value() : cplx(HUGE_VAL, 0));
  if (k >= 0) d = std::min(d, chordal(z, XComplex(s.points[k])));
  return d;
}

json outcome_json(const OrbitOutcome& o) {
  json j{{"kind", std::string(to_string(o.kind))},
         {"target", o.target ? xcomplex_json(*o.target) : json(nullptr)},
         {"period", o.period ? json(*o.period) : json(nullptr)},
         {"multiplier", o.multiplier ? complex_json(*o.multiplier) : json(nullptr)},
         {"iterations", o.iterations},
         {"band_trace", o.band_trace},
         {"final_chordal_residual", number(o.final_chordal_residual)},
         {"quotient_limit_singular", o.quotient_limit_singular}};
  return j;
}

int cmd_orbit(const OrbitOpts& o) {
  if (o.seed.empty()) throw UsageError("--seed is required");
  const cplx seed = complex_value(o.seed, "--seed");
  std::optional<cplx> period;
  if (!o.period.empty()) period = complex_value(o.period, "--period");
  const FnDef f = make_fn(o.fn, period);
  OrbitConfig cfg;
  if (o.max_iter > 0) cfg.max_iter = o.max_iter;
  // Singularities are looked up on a square around the seed unless given.
  const Rect w = o.window.empty() ? Rect{seed.real() - 50, seed.real() + 50, seed.imag() - 50, seed.imag() + 50}
                                  : window_value(o.window);
  const SingularSet sing = singular_set(f, w);
  const OrbitOutcome outcome = classify_orbit(f, seed, sing, cfg, o.lenient ? SeedCheck::Lenient : SeedCheck::Strict);

  std::ofstream file;
  if (!o.out.empty()) {
    file.open(o.out);
    if (!file) throw std::runtime_error(o.out + ": cannot open for writing");
  }
  std::ostream& csv = o.out.empty() ? std::cout : file;
  csv << "n,re,im,chordal_to_nearest_singularity\n";
  const auto orbit = iterate_orbit(f, seed, cfg);
  char line[160];
  for (std::size_t n = 0; n < orbit.size(); ++n) {
    const XComplex& z = orbit[n];
    const double re = z.finite() ? z.re() : (z.is_infinity() ? HUGE_VAL : NAN);
    const double im = z.finite() ? z.im() : (z.is_infinity() ? 0.0 : NAN);
    std::snprintf(line, sizeof line, "%zu,%.17g,%.17g,%.17g\n", n, re, im, chordal_to_singular(sing, z));
    csv << line;
  }
  if (o.out.empty() && o.json_out.empty()) std::cout << "\n";
  emit(outcome_json(outcome), o.json_out);
  return 0;
}

// -------------------------------------------------------------- periodic

struct PeriodicOpts {
  std::string fn, window, json_out;
  int period = 1;
  int grid = 40;
};

json periodic_json(const PeriodicPoint& p) {
  return {{"z", complex_json(p.z)},
          {"period", p.period},
          {"multiplier", complex_json(p.multiplier)},
          {"abs_multiplier", std::abs(p.multiplier)},
          {"kind", std::string(to_string(p.kind))},
          {"residual", p.residual}};
}

std::optional<SingularSet> try_singular_set(const FnDef& f, const Rect& w) {
  try {
    return singular_set(f, w);
  } catch (const SingularityError&) {
    return std::nullopt;
  }
}

int cmd_periodic(const PeriodicOpts& o) {
  if (o.window.empty()) throw UsageError("--window is required");
  const FnDef f = make_fn(o.fn);
  const Rect w = window_value(o.window);
  const auto sing = try_singular_set(f, w);
  const PeriodicSearch s = find_periodic(f, o.period, w, o.grid, sing ? &*sing : nullptr);
  json arr = json::array();
  for (const auto& p : s.points) arr.push_back(periodic_json(p));
  emit(arr, o.json_out);
  return 0;
}

// --------------------------------------------------------- singularities

struct SingularOpts {
  std::string fn, window, json_out;
  int depth = 1;
  int grid = 50;
};

int cmd_singularities(const SingularOpts& o) {
  if (o.window.empty()) throw UsageError("--window is required");
  const FnDef f = make_fn(o.fn);
  const SingularSet s = iterated_singular_set(f, window_value(o.window), o.depth, o.grid);
  json pts = json::array();
  for (std::size_t k = 0; k < s.size(); ++k)
    pts.push_back({{"z", complex_json(s.points[k])}, {"order", s.orders[k]}, {"residual", s.residuals[k]}});
  emit({{"fn", o.fn}, {"depth", o.depth}, {"includes_infinity", s.includes_infinity}, {"points", pts}}, o.json_out);
  return 0;
}

// ---------------------------------------------------------------- verify

struct VerifyOpts {
  RenderOpts render;
  std::string shift, pole, annulus = "0.2,0.8";
  std::size_t samples = 0;
  std::uint64_t seed = kDefaultSampleSeed;
  double tol = 1e-9;
  double threshold = 0.97;
  int order = 1;
};

int cmd_commute(const VerifyOpts& o) {
  if (o.render.window.empty()) throw UsageError("--window is required");
  if (o.shift.empty()) throw UsageError("--shift is required (g = f + shift)");
  const FnDef f = make_fn(o.render.fn);
  const FnDef g = f.translated(complex_value(o.shift, "--shift"));
  const Rect w = window_value(o.render.window);
  const auto sing = try_singular_set(f, w);
  const std::size_t n = o.samples ? o.samples : 200;
  const CommutationReport c = check_commutation(f, g, n, w, sing ? *sing : SingularSet{}, 1e-3, o.seed);
  const bool pass = c.max_relative < o.tol;
  emit({{"check", "commute"},
        {"fn", o.render.fn},
        {"shift", complex_json(complex_value(o.shift, "--shift"))},
        {"samples", n},
        {"used", c.used},
        {"skipped", c.skipped},
        {"max_residual", c.max_residual},
        {"max_relative", c.max_relative},
        {"worst", complex_json(c.worst)},
        {"tolerance", o.tol},
        {"pass", pass}},
       o.render.json_out);
  return pass ? 0 : kExitFail;
}

int cmd_julia_eq(const VerifyOpts& o) {
  if (o.shift.empty()) throw UsageError("--shift is required (g = f + shift)");
  const RunConfig c = o.render.build();
  const FnDef f(parse(c.fn_src), c.period, c.fn_src);
  const AgreementReport r = julia_equality(f, f.translated(complex_value(o.shift, "--shift")), c);
  emit(agreement_json(r, o.threshold), o.render.json_out);
  return r.agreement_fraction >= o.threshold ? 0 : kExitFail;
}

int cmd_translate(const VerifyOpts& o) {
  const RunConfig c = o.render.build();
  if (!c.period) throw UsageError("--period is required");
  const FnDef f(parse(c.fn_src), c.period, c.fn_src);
  const AgreementReport r = translation_invariance(f, *c.period, c);
  emit(agreement_json(r, o.threshold), o.render.json_out);
  return r.agreement_fraction >= o.threshold ? 0 : kExitFail;
}

int cmd_sectors(const VerifyOpts& o) {
  const FnDef f = make_fn(o.render.fn);
  const cplx pole = o.pole.empty() ? cplx(0.0, 0.0) : complex_value(o.pole, "--pole");
  const auto a = reals(o.annulus, 2, "--annulus");
  OrbitConfig cfg;
  if (o.render.max_iter > 0) cfg.max_iter = o.render.max_iter;
  const std::size_t n = o.samples ? o.samples : 4000;
  const double max_width = 2 * std::numbers::pi / o.order + 0.2;
  json j{{"check", "sectors"}, {"fn", o.render.fn}, {"pole", complex_json(pole)}, {"order_expected", o.order},
         {"annulus", a},       {"samples", n},      {"max_width", max_width}};
  SectorReport r;
  try {
    r = baker_sectors(f, pole, o.order, a[0], a[1], n, cfg, o.seed);
  } catch (const InsufficientSamples& e) {
    j["error"] = e.what();
    j["pass"] = false;
    emit(j, o.render.json_out);
    return kExitFail;
  }
  bool pass = r.clusters.size() == static_cast<std::size_t>(o.order);
  json cl = json::array();
  for (const auto& s : r.clusters) {
    pass = pass && s.angular_width <= max_width;
    cl.push_back({{"angle_center", s.angle_center}, {"angular_width", s.angular_width},
                  {"sample_count", s.sample_count}});
  }
  j["baker_samples"] = r.baker_samples;
  j["clusters"] = cl;
  j["shrunk_clusters"] = r.shrunk_clusters ? json(*r.shrunk_clusters) : json(nullptr);
  j["radius_stable"] = r.radius_stable;
  j["pass"] = pass;
  emit(j, o.render.json_out);
  return pass ? 0 : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dynlab: dynamics of maps with countably many essential singularities"};
  app.require_subcommand(1);
  std::uint64_t seed_rng = kDefaultSampleSeed;
  app.add_option("--seed-rng", seed_rng, "seed of the quasi-random samplers");

  RenderOpts ro;
  auto* render_cmd = app.add_subcommand("render", "classify a grid of orbits and export PNG/JSON");
  ro.add(render_cmd);

  OrbitOpts oo;
  auto* orbit_cmd = app.add_subcommand("orbit", "print one orbit as CSV and its classification as JSON");
  orbit_cmd->add_option("--fn", oo.fn, "map f(z)")->required();
  orbit_cmd->add_option("--seed", oo.seed, "starting point re,im")->required();
  orbit_cmd->add_option("--period", oo.period, "translation period re,im");
  orbit_cmd->add_option("--max-iter", oo.max_iter)->check(CLI::PositiveNumber);
  orbit_cmd->add_option("--window", oo.window, "where to look for singularities (default: seed +- 50)");
  orbit_cmd->add_option("--out", oo.out, "CSV output path (default stdout)");
  orbit_cmd->add_option("--json", oo.json_out, "outcome JSON path (default: stdout after the CSV)");
  orbit_cmd->add_flag("--lenient", oo.lenient, "iterate seeds that sit on a singularity");

  PeriodicOpts po;
  auto* periodic_cmd = app.add_subcommand("periodic", "periodic points by Newton's method");
  periodic_cmd->add_option("--fn", po.fn, "map f(z)")->required();
  periodic_cmd->add_option("--period", po.period, "exact period p")->check(CLI::Range(1, kMaxPeriod));
  periodic_cmd->add_option("--window", po.window, "r0,r1,i0,i1")->required();
  periodic_cmd->add_option("--grid", po.grid, "seed grid per axis")->check(CLI::PositiveNumber);
  periodic_cmd->add_option("--json", po.json_out, "output path (default stdout)");

  SingularOpts so;
  auto* sing_cmd = app.add_subcommand("singularities", "iterated essential-singularity set");
  sing_cmd->add_option("--fn", so.fn, "map f(z)")->required();
  sing_cmd->add_option("--window", so.window, "r0,r1,i0,i1")->required();
  sing_cmd->add_option("--depth", so.depth)->check(CLI::Range(1, 3));
  sing_cmd->add_option("--grid", so.grid, "Newton seeds per axis")->check(CLI::PositiveNumber);
  sing_cmd->add_option("--json", so.json_out, "output path (default stdout)");

  auto* verify_cmd = app.add_subcommand("verify", "numerical checks; exit 0 iff the threshold is met");
  verify_cmd->require_subcommand(1);
  VerifyOpts vo;
  auto* commute_cmd = verify_cmd->add_subcommand("commute", "max |f(g(z)) - g(f(z))| for g = f + shift");
  commute_cmd->add_option("--fn", vo.render.fn)->required();
  commute_cmd->add_option("--shift", vo.shift, "c in g = f + c")->required();
  commute_cmd->add_option("--window", vo.render.window)->required();
  commute_cmd->add_option("--samples", vo.samples);
  commute_cmd->add_option("--tol", vo.tol, "bound on the relative residual");
  commute_cmd->add_option("--json", vo.render.json_out);

  auto* julia_cmd = verify_cmd->add_subcommand("julia-eq", "Julia-mask agreement of f and f + shift");
  vo.render.add(julia_cmd, false);
  julia_cmd->add_option("--shift", vo.shift, "c in g = f + c")->required();
  julia_cmd->add_option("--threshold", vo.threshold);

  auto* translate_cmd = verify_cmd->add_subcommand("translate", "raster agreement with itself shifted by P");
  vo.render.add(translate_cmd, false);
  translate_cmd->add_option("--threshold", vo.threshold);

  auto* sectors_cmd = verify_cmd->add_subcommand("sectors", "angular clusters of Baker samples around a pole");
  sectors_cmd->add_option("--fn", vo.render.fn)->required();
  sectors_cmd->add_option("--pole", vo.pole, "re,im (default 0)");
  sectors_cmd->add_option("--order", vo.order, "expected number of sectors p")->check(CLI::PositiveNumber);
  sectors_cmd->add_option("--annulus", vo.annulus, "r_min,r_max");
  sectors_cmd->add_option("--samples", vo.samples);
  sectors_cmd->add_option("--max-iter", vo.render.max_iter)->check(CLI::PositiveNumber);
  sectors_cmd->add_option("--json", vo.render.json_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  vo.seed = seed_rng;

  try {
    if (*render_cmd) return cmd_render(ro);
    if (*orbit_cmd) return cmd_orbit(oo);
    if (*periodic_cmd) return cmd_periodic(po);
    if (*sing_cmd) return cmd_singularities(so);
    if (*commute_cmd) return cmd_commute(vo);
    if (*julia_cmd) return cmd_julia_eq(vo);
    if (*translate_cmd) return cmd_translate(vo);
    if (*sectors_cmd) return cmd_sectors(vo);
  } catch (const std::exception& e) {
    std::cerr << "dynlab: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
