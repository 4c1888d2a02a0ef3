// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "swarmflow/convex_integration.hpp"
#include "swarmflow/energy_ledger.hpp"
#include "swarmflow/errors.hpp"
#include "swarmflow/particle_swarm.hpp"
#include "swarmflow/relative_energy.hpp"
#include "swarmflow/scenario.hpp"
#include "swarmflow/spectral.hpp"

using namespace swarmflow;
namespace fs = std::filesystem;

namespace {

// pinned tolerances
constexpr double kMassTol = 1e-10;
constexpr double kMassRuntime = 60.0;
constexpr double kD3RateLo = 0.8, kD3RateHi = 1.3;
constexpr double kAlignTol = 1e-12;
constexpr double kAlignRuntime = 10.0;
constexpr double kCruiseTol = 1e-6;
constexpr double kSemicircleTol = 0.05;
constexpr double kDiscCv = 0.1;
constexpr double kFlockRuntime = 300.0;
constexpr double kFlockRateLo = 0.8, kFlockRateHi = 1.3;
constexpr double kReiRate = 0.8;
constexpr double kGronwallSpread = 0.2;
constexpr double kTzavarasTol = 1e-10;
constexpr double kSobolevTol = 1e-12;
constexpr double kSlackTol = 1e-12;
constexpr double kLambda0Tol = 1e-4;
constexpr double kEllipticTol = 1e-10;
constexpr double kCompareRuntime = 600.0;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& body) {
  Outcome o;
  const auto t0 = Clock::now();
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("[%s] %2d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str(),
              seconds_since(t0));
  std::fflush(stdout);
}

std::string num(double x) {
  std::ostringstream s;
  s.precision(4);
  s << x;
  return s.str();
}

RunReport run_config(Config c) { return run_scenario(scenario_from_config(c)); }

double measured(const RunReport& r, const std::string& key) {
  auto it = r.measured.find(key);
  if (it == r.measured.end()) throw Error("missing measurement " + key);
  return it->second;
}

const std::vector<std::string> kHydroPresets{"constant_state", "cruise_translation", "flock_1d",     "flock_disc",
                                             "perturbed_flock", "random_smooth",     "euler_poisson"};

Outcome mass_conservation() {
  double worst = 0.0, slowest = 0.0;
  std::string where;
  bool ok = true;
  for (const auto& name : kHydroPresets) {
    for (int dim : {1, 2}) {
      Config c = preset(name);
      c.set("grid.dim", dim);
      c.set("grid.cells", 64);
      c.set("run.T", 2.0);
      c.set("run.output_dt", 0.1);
      for (const char* k : {"checks.d3", "checks.rei", "checks.flock"}) c.set(k, false);
      c.set("checks.mass", true);
      const RunReport r = run_config(c);
      const CheckResult* m = r.check("mass");
      if (m->value > worst) {
        worst = m->value;
        where = name + " N=" + std::to_string(dim);
      }
      slowest = std::max(slowest, r.wall_time);
      ok = ok && m->pass && m->value <= kMassTol && r.wall_time < kMassRuntime;
    }
  }
  return {ok, "max relative drift " + num(worst) + (where.empty() ? "" : " (" + where + ")") + ", slowest run " +
                  num(slowest) + " s over " + std::to_string(2 * kHydroPresets.size()) + " runs"};
}

Outcome dissipation_identity() {
  std::vector<double> res;
  bool verdicts = true;
  for (int n : {64, 128, 256}) {
    Config c = preset("random_smooth");
    c.set("grid.cells", n);
    c.set("checks.rei", false);
    const RunReport r = run_config(c);
    res.push_back(std::abs(measured(r, "d3.final_residual")));
    verdicts = verdicts && r.check("d3")->pass;
  }
  const double r1 = std::log2(res[0] / res[1]), r2 = std::log2(res[1] / res[2]);
  const bool ok = verdicts && r1 >= kD3RateLo && r1 <= kD3RateHi && r2 >= kD3RateLo && r2 <= kD3RateHi;
  return {ok, "|residual(T=1)| " + num(res[0]) + ", " + num(res[1]) + ", " + num(res[2]) + "; rates " + num(r1) + ", " +
                  num(r2) + "; dissipative at all resolutions: " + (verdicts ? "yes" : "no")};
}

Outcome alignment_identity() {
  const auto t0 = Clock::now();
  const TorusGrid g(2, 16);
  ConstitutiveSet set;
  set.psi = gaussian_kernel(2, 1.0, 0.3);
  const HydroModel model(set, g);
  const ScalarField rho = ScalarField(g, 1.0) + seeded_smooth_field(g, 31, 3) * 0.3;
  VectorField u(g);
  for (int d = 0; d < 2; ++d) u.set_component(d, seeded_smooth_field(g, 32 + d, 3));
  const double conv = alignment_pairing(rho, u, model);

  const ScalarField& psi = model.psi_samples();
  const double w = g.cell_volume() * g.cell_volume();
  double direct = 0.0, antisym = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto a = g.unflatten(i);
    for (std::size_t j = 0; j < g.size(); ++j) {
      const auto b = g.unflatten(j);
      const std::size_t z = g.flatten({a[0] - b[0], a[1] - b[1], 0});
      const Vec ui = u.at(i), uj = u.at(j);
      const Vec du{uj[0] - ui[0], uj[1] - ui[1], 0.0};
      const double k = psi[z] * rho[i] * rho[j] * w;
      direct += k * norm2(du);
      antisym += k * (ui[0] * du[0] + ui[1] * du[1]);
    }
  }
  const double e1 = std::abs(conv - direct) / std::max(1.0, std::abs(direct));
  const double e2 = std::abs(antisym + 0.5 * direct) / std::max(1.0, std::abs(direct));
  const double el = seconds_since(t0);
  return {e1 <= kAlignTol && e2 <= kAlignTol && el < kAlignRuntime,
          "convolution vs double sum " + num(e1) + ", antisymmetrisation " + num(e2)};
}

Outcome cruise_speed_law() {
  SwarmConfig cfg;
  cfg.alpha = 4.0;
  cfg.self_propulsion = true;
  cfg.K = zero_kernel(2);
  cfg.psi = zero_kernel(2);
  cfg.dt = 1e-2;
  ParticleState s;
  s.dim = 2;
  s.x = {Vec{0.0, 0.0, 0.0}};
  s.v = {Vec{0.05, -0.02, 0.0}};
  s = advance(s, cfg, 50.0);
  const double speed = std::sqrt(norm2(s.v[0]));
  const double err = std::abs(speed - 0.5);
  return {err <= kCruiseTol, "|v(50)| = " + num(speed) + ", error " + num(err)};
}

double semicircle_cdf(double x) {
  const double a = std::sqrt(2.0);
  if (x <= -a) return 0.0;
  if (x >= a) return 1.0;
  return 0.5 + x * std::sqrt(2.0 - x * x) / (2.0 * std::numbers::pi) + std::asin(x / a) / std::numbers::pi;
}

Outcome flock_reproduction() {
  const auto t0 = Clock::now();
  const int n = 2000;
  const FlockResult line = relax_to_flock(quadratic_log_kernel(1), 1, n, 1e-8);
  std::vector<double> x;
  for (const Vec& p : line.x) x.push_back(p[0]);
  std::sort(x.begin(), x.end());
  double sup = 0.0;
  for (int i = 0; i < n; ++i) {
    const double F = semicircle_cdf(x[i]);
    sup = std::max({sup, std::abs(F - static_cast<double>(i) / n), std::abs(F - static_cast<double>(i + 1) / n)});
  }
  const double t_line = seconds_since(t0);

  const auto t1 = Clock::now();
  const FlockResult disc = relax_to_flock(quadratic_log_kernel(2), 2, n, 1e-6);
  Vec c{0.0, 0.0, 0.0};
  for (const Vec& p : disc.x)
    for (int d = 0; d < 2; ++d) c[d] += p[d] / n;
  std::vector<double> r;
  for (const Vec& p : disc.x) r.push_back(std::hypot(p[0] - c[0], p[1] - c[1]));
  std::vector<double> rs = r;
  std::sort(rs.begin(), rs.end());
  const double r90 = rs[static_cast<std::size_t>(0.9 * n) - 1];
  // equal-area bins: 4 rings x 4 sectors inside the 90% radius
  std::vector<double> count(16, 0.0);
  for (std::size_t i = 0; i < disc.x.size(); ++i) {
    if (r[i] >= r90) continue;
    const int ring = std::min(3, static_cast<int>(4.0 * r[i] * r[i] / (r90 * r90)));
    double th = std::atan2(disc.x[i][1] - c[1], disc.x[i][0] - c[0]) + std::numbers::pi;
    const int sector = std::min(3, static_cast<int>(th / (0.5 * std::numbers::pi)));
    count[4 * ring + sector] += 1.0;
  }
  double mean = 0.0, var = 0.0;
  for (double v : count) mean += v / count.size();
  for (double v : count) var += (v - mean) * (v - mean) / count.size();
  const double cv = std::sqrt(var) / mean;
  const double t_disc = seconds_since(t1);
  const bool ok = sup <= kSemicircleTol && cv <= kDiscCv && t_line < kFlockRuntime && t_disc < kFlockRuntime;
  return {ok, "semicircle sup-distance " + num(sup) + " (" + num(t_line) + " s), disc density CV " + num(cv) +
                  " inside r90=" + num(r90) + " (" + num(t_disc) + " s)"};
}

Outcome flock_stability() {
  std::vector<double> drift, limit;
  bool ok = true;
  for (int n : {128, 256}) {
    Config c = preset("flock_1d");
    c.set("grid.cells", n);
    const RunReport r = run_config(c);
    const CheckResult* f = r.check("flock");
    drift.push_back(f->value);
    limit.push_back(f->limit);
    ok = ok && f->pass;
  }
  const double rate = std::log2(drift[0] / drift[1]);
  ok = ok && rate >= kFlockRateLo && rate <= kFlockRateHi;
  return {ok, "L1 drift " + num(drift[0]) + " (limit " + num(limit[0]) + "), " + num(drift[1]) + " (limit " +
                  num(limit[1]) + "); rate " + num(rate)};
}

Outcome weak_strong() {
  std::vector<double> sup, gc;
  for (int n : {128, 256}) {
    Config c = preset("random_smooth");
    c.set("grid.cells", n);
    c.set("checks.d3", false);
    sup.push_back(measured(run_config(c), "rei.sup_E"));
    c.set("initial.perturbation", 1e-2);
    const RunReport p = run_config(c);
    gc.push_back(measured(p, "rei.gronwall_c"));
  }
  const double rate = std::log2(sup[0] / sup[1]);
  const double spread = std::abs(gc[0] - gc[1]) / std::max(std::abs(gc[0]), std::abs(gc[1]));
  const bool finite = std::isfinite(gc[0]) && std::isfinite(gc[1]);
  const bool ok = rate >= kReiRate && finite && spread <= kGronwallSpread;
  return {ok, "sup relative energy " + num(sup[0]) + " -> " + num(sup[1]) + " (rate " + num(rate) +
                  "); perturbed Gronwall c " + num(gc[0]) + ", " + num(gc[1]) + " (spread " + num(100 * spread) + "%)"};
}

Outcome euler_poisson_block() {
  const TorusGrid g(2, 32);
  double tz = 0.0, sob = 0.0;
  bool zero = true;
  for (int rep = 0; rep < 10; ++rep) {
    const std::uint64_t s = 100 + 10 * rep;
    const ScalarField a = ScalarField(g, 1.0) + seeded_smooth_field(g, s, 3) * 0.2;
    const ScalarField b = ScalarField(g, 1.0) + seeded_smooth_field(g, s + 1, 3) * 0.2;
    VectorField U(g);
    for (int d = 0; d < 2; ++d) U.set_component(d, seeded_smooth_field(g, s + 2 + d, 3));
    tz = std::max(tz, tzavaras_identity_check(a, b, U));
    const ScalarField f = seeded_smooth_field(g, s + 5, 4);
    sob = std::max(sob, std::abs(negative_sobolev_norm(f) - negative_sobolev_norm_quadrature(f)));
    zero = zero && poisson_relative_energy(a, U, a, U) == 0.0;
  }
  return {tz <= kTzavarasTol && sob <= kSobolevTol && zero,
          "commutator identity " + num(tz) + ", negative norm spectral vs quadrature " + num(sob) +
              ", identical trajectories give " + (zero ? "exactly 0" : "nonzero")};
}

SymTensorField random_trace_free(const TorusGrid& g, std::uint64_t seed, double amp) {
  SymTensorField F(g, true);
  const int dim = g.dim();
  std::vector<ScalarField> parts;
  for (int k = 0; k < dim * (dim + 1) / 2; ++k) parts.push_back(seeded_smooth_field(g, seed + k, 2) * amp);
  for (std::size_t c = 0; c < g.size(); ++c) {
    Mat m{};
    int k = 0;
    for (int i = 0; i < dim; ++i)
      for (int j = i; j < dim; ++j, ++k) m[i][j] = m[j][i] = parts[k][c];
    double tr = 0.0;
    for (int i = 0; i < dim; ++i) tr += m[i][i];
    for (int i = 0; i < dim; ++i) m[i][i] -= tr / dim;
    F.set_matrix(c, m);
  }
  return F;
}

Outcome subsolution_audit() {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> n01;
  std::uniform_real_distribution<double> rr(0.01, 10.0);
  double worst_slack = std::numeric_limits<double>::infinity();
  for (int dim : {2, 3}) {
    for (int k = 0; k < 100000; ++k) {
      Vec h{0, 0, 0};
      for (int d = 0; d < dim; ++d) h[d] = n01(rng);
      Mat Ht{};
      for (int i = 0; i < dim; ++i)
        for (int j = i; j < dim; ++j) Ht[i][j] = Ht[j][i] = n01(rng);
      double tr = 0.0;
      for (int i = 0; i < dim; ++i) tr += Ht[i][i];
      for (int i = 0; i < dim; ++i) Ht[i][i] -= tr / dim;
      const double r = rr(rng);
      worst_slack = std::min(worst_slack, standard_inequality_slack(h, r, Ht, dim) / std::max(1.0, norm2(h) / r));
    }
  }

  const TorusGrid g8(2, 8);
  const HydroModel bare(ConstitutiveSet{}, g8);
  const DensityPotential dp = build_density_potential(ScalarField(g8, 1.0), ScalarField(g8), 1.0, 0.1);
  Lambda0Options opt;
  opt.times = {0.0, 0.5, 1.0};
  const double l_still = find_lambda0(VectorField(g8), {0, 0, 0}, dp, bare, opt).lambda0;
  const double l_moving = find_lambda0(VectorField(g8), {1.0, 0, 0}, dp, bare, opt).lambda0;
  const double l0_err = std::max(std::abs(l_still), std::abs(l_moving - 1.0));

  double resid = 0.0;
  for (int dim : {2, 3}) {
    const TorusGrid g(dim, dim == 2 ? 32 : 16);
    VectorField G(g);
    for (int d = 0; d < dim; ++d) G.set_component(d, seeded_smooth_field(g, 300 + d, 3));
    G = mean_free(G);
    resid = std::max(resid, elliptic_residual(solve_elliptic_M(G), G));
  }

  // constant H: the corrector does not depend on Lambda
  int monotone = 0;
  std::uniform_real_distribution<double> h0(0.5, 2.0), step(0.0, 1.0), gam(1.0, 3.0);
  for (int rep = 0; rep < 100; ++rep) {
    const int dim = 2 + rep % 2;
    const TorusGrid g(dim, dim == 2 ? 16 : 8);
    ConstitutiveSet set;
    set.pressure = PressureLaw::power_law(1.0, gam(rng));
    set.K = gaussian_kernel(dim, -0.3, 0.4);
    set.psi = raised_cosine_kernel(dim, 0.5);
    set.H = FrictionFunction::constant(h0(rng));
    const HydroModel model(set, g);
    const std::uint64_t s = 1000 + 20 * rep;
    CandidateSlice cs{0.5,
                      seeded_solenoidal_field(g, s, 2, 0.5),
                      random_trace_free(g, s + 5, 0.2),
                      ScalarField(g, 1.0) + seeded_smooth_field(g, s + 10, 2) * 0.1,
                      seeded_smooth_field(g, s + 11, 2) * 0.02,
                      ScalarField(g),
                      {0.1, 0.2, 0.0},
                      3.0};
    double prev = -std::numeric_limits<double>::infinity();
    bool ok = true;
    for (int k = 0; k < 5; ++k) {
      SubsolutionCandidate c;
      c.slices = {cs};
      const double m = subsolution_check(c, model).min_margin;
      ok = ok && m >= prev - 1e-12;
      prev = m;
      cs.Lambda += step(rng);
    }
    monotone += ok ? 1 : 0;
  }
  const bool ok = worst_slack >= -kSlackTol && l0_err <= kLambda0Tol && resid <= kEllipticTol && monotone == 100;
  return {ok, "min scaled slack " + num(worst_slack) + " over 2x10^5 cases; Lambda0 = " + num(l_still) + ", " +
                  num(l_moving) + "; elliptic residual " + num(resid) + "; monotone " + std::to_string(monotone) +
                  "/100"};
}

Outcome monokinetic() {
  const auto t0 = Clock::now();
  Config c = load_config(fs::path(SWARMFLOW_SOURCE_DIR) / "configs" / "monokinetic_1d.cfg");
  const CompareReport rep = monokinetic_compare(c);
  double a = 0.0, b = 0.0;
  for (const auto& r : rep.rows) {
    if (r.cells == 64) a = r.l1;
    if (r.cells == 128) b = r.l1;
  }
  bool agree = true;
  for (const auto& r : rep.rows) agree = agree && r.expected_to_agree;
  const double el = seconds_since(t0);
  return {rep.decreasing && agree && b < a && el < kCompareRuntime,
          "L1 at T: " + num(a) + " (n=1e4, 64 cells) -> " + num(b) + " (n=4e4, 128 cells), h-slope " +
              num(rep.h_slopes.empty() ? 0.0 : rep.h_slopes[0]) + ", shock time " + num(rep.shock_time)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "swarmflow_acceptance_determinism";
  fs::remove_all(root);
  int files = 0;
  std::string mismatch;
  for (const auto& name : preset_names()) {
    for (int pass : {0, 1}) {
      Config c = preset(name);
      c.set("output.directory", (root / name / std::to_string(pass)).string());
      run_config(c);
    }
    for (const auto& e : fs::directory_iterator(root / name / "0")) {
      if (e.path().extension() != ".csv") continue;
      ++files;
      const fs::path other = root / name / "1" / e.path().filename();
      if (!fs::exists(other) || slurp(e.path()) != slurp(other))
        mismatch += (mismatch.empty() ? "" : ", ") + name + "/" + e.path().filename().string();
    }
  }
  fs::remove_all(root);
  return {mismatch.empty() && files > 0,
          std::to_string(files) + " CSV files over " + std::to_string(preset_names().size()) + " presets" +
              (mismatch.empty() ? ", all bit-identical" : ", differing: " + mismatch)};
}

}  // namespace

int main() {
  apply_threads(1);
  report(1, "mass conservation", mass_conservation);
  report(2, "dissipation identity", dissipation_identity);
  report(3, "alignment antisymmetrisation", alignment_identity);
  report(4, "cruise speed", cruise_speed_law);
  report(5, "flock reproduction", flock_reproduction);
  report(6, "flock stability", flock_stability);
  report(7, "weak-strong shadow", weak_strong);
  report(8, "Euler-Poisson block", euler_poisson_block);
  report(9, "subsolution audit", subsolution_audit);
  report(10, "mono-kinetic consistency", monokinetic);
  report(11, "determinism", determinism);
  std::printf("%d of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
