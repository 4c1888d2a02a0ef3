#include "swarmflow/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "swarmflow/energy_ledger.hpp"
#include "swarmflow/errors.hpp"
#include "swarmflow/field_io.hpp"
#include "swarmflow/particle_swarm.hpp"
#include "swarmflow/relative_energy.hpp"
#include "swarmflow/spectral.hpp"

namespace swarmflow {

namespace {

constexpr double kPi = std::numbers::pi;

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = [] {
    std::set<std::string> k{
        "scenario.name", "scenario.pipeline", "grid.dim", "grid.cells", "run.T", "run.output_dt", "run.cfl",
        "run.flux", "run.time", "run.fixed_dt", "pressure.kind", "pressure.a", "pressure.gamma", "friction.kind",
        "friction.h0", "friction.alpha", "friction.cap", "friction.Z0", "poisson.enabled", "initial.kind",
        "initial.rho", "initial.amplitude", "initial.velocity", "initial.velocity_amplitude", "initial.modes",
        "initial.shape", "initial.radius", "initial.background", "initial.mollify", "initial.perturbation",
        "initial.rho_file", "initial.m_file", "seeds.initial", "seeds.perturbation", "output.directory",
        "output.snapshots", "output.candidate", "runtime.threads", "checks.mass", "checks.d3", "checks.rei",
        "checks.flock", "checks.audit", "tolerance.mass", "tolerance.d3_C", "tolerance.rei_C",
        "tolerance.flock_C", "tolerance.gronwall_budget", "strong.refine", "strong.blowup", "audit.T",
        "audit.slices", "audit.floor", "audit.rho_amplitude", "audit.phi_amplitude", "audit.v_amplitude",
        "audit.modes", "audit.V", "audit.lambda_offset", "audit.threshold", "audit.substeps", "compare.particles",
        "compare.cells", "compare.dt", "candidate.slices"};
    for (const char* which : {"K", "psi"})
      for (const char* p : {"kind", "amp", "sigma", "beta", "axis", "c"}) k.insert(std::string("kernel.") + which + "." + p);
    return k;
  }();
  return keys;
}

template <class E>
E parse_enum(const Config& c, const std::string& key, const std::string& fallback,
             std::initializer_list<std::pair<const char*, E>> table) {
  const std::string v = c.get_string(key, fallback);
  for (const auto& [name, value] : table)
    if (v == name) return value;
  throw ConfigError("unknown value '" + v + "'", c.line_of(key), key);
}

Kernel kernel_from_config(const Config& c, const std::string& which, int dim) {
  const std::string base = "kernel." + which + ".";
  const std::string kind = c.get_string(base + "kind", "zero");
  if (kind == "zero") return zero_kernel(dim);
  if (kind == "cosine") return cosine_kernel(dim, c.get_double(base + "amp", 1.0), c.get_int(base + "axis", -1));
  if (kind == "raised_cosine") return raised_cosine_kernel(dim, c.get_double(base + "amp", 1.0));
  if (kind == "constant") return constant_kernel(dim, c.get_double(base + "c", 1.0));
  if (kind == "gaussian")
    return gaussian_kernel(dim, c.get_double(base + "amp", 1.0), c.get_double(base + "sigma", 0.3));
  if (kind == "quadratic") return quadratic_kernel(dim);
  if (kind == "cucker_smale")
    return cucker_smale_kernel(dim, c.get_double(base + "c", 1.0), c.get_double(base + "beta", 0.5));
  throw ConfigError("unknown kernel kind '" + kind + "'", c.line_of(base + "kind"), base + "kind");
}

FrictionFunction friction_from_config(const Config& c) {
  const std::string kind = c.get_string("friction.kind", "constant");
  if (kind == "constant") return FrictionFunction::constant(c.get_double("friction.h0", 1.0));
  if (kind == "linear") return FrictionFunction::linear(c.get_double("friction.alpha"));
  if (kind == "capped_linear")
    return FrictionFunction::capped_linear(c.get_double("friction.alpha"), c.get_double("friction.cap"));
  if (kind == "saturating") return FrictionFunction::saturating(c.get_double("friction.cap"));
  throw ConfigError("unknown friction kind '" + kind + "'", c.line_of("friction.kind"), "friction.kind");
}

Vec velocity_vector(const Config& c, const std::string& key, int dim) {
  Vec v{0.0, 0.0, 0.0};
  if (!c.has(key)) return v;
  const auto l = c.get_list(key);
  for (int d = 0; d < dim && d < static_cast<int>(l.size()); ++d) v[d] = l[d];
  return v;
}

// random cosine/sine series, normalised by the sum of coefficient magnitudes
struct SmoothSeries {
  std::vector<std::array<int, 3>> k;
  std::vector<double> a, b;
  double norm = 1.0;

  double operator()(const Vec& x) const {
    double s = 0.0;
    for (std::size_t j = 0; j < k.size(); ++j) {
      const double ph = kPi * (k[j][0] * x[0] + k[j][1] * x[1] + k[j][2] * x[2]);
      s += a[j] * std::cos(ph) + b[j] * std::sin(ph);
    }
    return s / norm;
  }
  Vec gradient(const Vec& x) const {
    Vec g{0.0, 0.0, 0.0};
    for (std::size_t j = 0; j < k.size(); ++j) {
      const double ph = kPi * (k[j][0] * x[0] + k[j][1] * x[1] + k[j][2] * x[2]);
      const double d = -a[j] * std::sin(ph) + b[j] * std::cos(ph);
      for (int q = 0; q < 3; ++q) g[q] += kPi * k[j][q] * d / norm;
    }
    return g;
  }
};

SmoothSeries smooth_series(int dim, std::uint64_t seed, int kmax) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  SmoothSeries s;
  double total = 0.0;
  const int lo = -kmax;
  for (int i = lo; i <= kmax; ++i)
    for (int j = dim > 1 ? lo : 0; j <= (dim > 1 ? kmax : 0); ++j)
      for (int l = dim > 2 ? lo : 0; l <= (dim > 2 ? kmax : 0); ++l) {
        // one representative per +-k pair
        const std::array<int, 3> kk{i, j, l};
        bool positive = false, decided = false;
        for (int q = 0; q < 3 && !decided; ++q)
          if (kk[q] != 0) {
            positive = kk[q] > 0;
            decided = true;
          }
        if (!positive) continue;
        const double w = 1.0 / (1.0 + i * i + j * j + l * l);
        s.k.push_back(kk);
        s.a.push_back(w * U(rng));
        s.b.push_back(w * U(rng));
        total += std::abs(s.a.back()) + std::abs(s.b.back());
      }
  s.norm = total > 0.0 ? total : 1.0;
  return s;
}

ScalarField sample_series(const TorusGrid& g, const SmoothSeries& s) {
  return ScalarField::sample(g, [&](const Vec& x) { return s(x); });
}

// pointwise initial data, when the kind admits it
struct AnalyticInitial {
  std::function<double(const Vec&)> rho;
  std::function<Vec(const Vec&)> u;
};

std::optional<AnalyticInitial> analytic_initial(const Config& c, int dim) {
  const std::string kind = c.get_string("initial.kind", "constant");
  const double rho = c.get_double("initial.rho", 1.0);
  const Vec vel = velocity_vector(c, "initial.velocity", dim);
  const double amp = c.get_double("initial.amplitude", 0.0);
  const double vamp = c.get_double("initial.velocity_amplitude", 0.0);
  if (kind == "constant") return AnalyticInitial{[rho](const Vec&) { return rho; }, [vel](const Vec&) { return vel; }};
  if (kind == "sine") {
    return AnalyticInitial{[rho, amp](const Vec& x) { return rho + amp * std::sin(kPi * x[0]); },
                           [vel, vamp](const Vec& x) {
                             Vec u = vel;
                             u[0] += vamp * std::sin(kPi * x[0]);
                             return u;
                           }};
  }
  if (kind == "random_smooth") {
    const auto seed = static_cast<std::uint64_t>(c.get_int("seeds.initial", 1));
    const int modes = c.get_int("initial.modes", 3);
    auto r = std::make_shared<SmoothSeries>(smooth_series(dim, seed, modes));
    auto us = std::make_shared<std::vector<SmoothSeries>>();
    for (int d = 0; d < dim; ++d) us->push_back(smooth_series(dim, seed + 1 + d, modes));
    return AnalyticInitial{[rho, amp, r](const Vec& x) { return rho * (1.0 + amp * (*r)(x)); },
                           [vel, vamp, us](const Vec& x) {
                             Vec u = vel;
                             for (std::size_t d = 0; d < us->size(); ++d) u[d] += vamp * (*us)[d](x);
                             return u;
                           }};
  }
  return std::nullopt;
}

ScalarField gaussian_filter(const ScalarField& f, double sigma) {
  if (sigma <= 0.0) return f;
  const TorusGrid& g = f.grid();
  auto c = forward_transform(g, f.values());
  for (std::size_t k = 0; k < c.size(); ++k) c[k] *= std::exp(-0.5 * sigma * sigma * norm2(wavevector(g, k)));
  return ScalarField(g, inverse_transform(g, std::move(c)));
}

// f(x - a) through the Fourier phase
ScalarField spectral_shift(const ScalarField& f, const Vec& a) {
  const TorusGrid& g = f.grid();
  auto c = forward_transform(g, f.values());
  for (std::size_t k = 0; k < c.size(); ++k) {
    const Vec kap = wavevector(g, k);
    const double ph = -(kap[0] * a[0] + kap[1] * a[1] + kap[2] * a[2]);
    c[k] *= Complex(std::cos(ph), std::sin(ph));
  }
  return ScalarField(g, inverse_transform(g, std::move(c)));
}

Vec flock_velocity(const Config& c, int dim) {
  if (c.has("initial.velocity")) return velocity_vector(c, "initial.velocity", dim);
  Vec v{0.0, 0.0, 0.0};
  v[0] = cruise_speed(friction_from_config(c));
  return v;
}

double l1_distance(const ScalarField& a, const ScalarField& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s * a.grid().cell_volume();
}

std::string fmt(double x) {
  std::ostringstream s;
  s << std::setprecision(17) << x;
  return s.str();
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + p.string());
  out << text;
}

std::vector<double> linspace(double T, int n) {
  std::vector<double> t;
  for (int k = 0; k <= n; ++k) t.push_back(T * k / n);
  return t;
}

Kernel scaled_kernel(Kernel k, double s) {
  if (k.zero || s == 1.0) return k;
  auto v = k.value;
  auto gr = k.gradient;
  k.value = [v, s](const Vec& z) { return s * v(z); };
  k.gradient = [gr, s](const Vec& z) {
    Vec g = gr(z);
    for (double& x : g) x *= s;
    return g;
  };
  for (auto& t : k.trig) t.coef *= s;
  k.form = KernelForm::generic;
  return k;
}

}  // namespace

ScalarField seeded_smooth_field(const TorusGrid& grid, std::uint64_t seed, int kmax) {
  return sample_series(grid, smooth_series(grid.dim(), seed, kmax));
}

VectorField seeded_solenoidal_field(const TorusGrid& grid, std::uint64_t seed, int kmax, double amp) {
  const int dim = grid.dim();
  if (dim < 2) throw Error("seeded_solenoidal_field: needs N >= 2");
  VectorField v(grid);
  if (dim == 2) {
    const SmoothSeries s = smooth_series(2, seed, kmax);
    v = VectorField::sample(grid, [&](const Vec& x) {
      const Vec g = s.gradient(x);
      return Vec{g[1], -g[0], 0.0};
    });
  } else {
    std::array<SmoothSeries, 3> A{smooth_series(3, seed, kmax), smooth_series(3, seed + 1, kmax),
                                  smooth_series(3, seed + 2, kmax)};
    v = VectorField::sample(grid, [&](const Vec& x) {
      const Vec g0 = A[0].gradient(x), g1 = A[1].gradient(x), g2 = A[2].gradient(x);
      return Vec{g2[1] - g1[2], g0[2] - g2[0], g1[0] - g0[1]};
    });
  }
  const double m = v.max_norm();
  if (m > 0.0) v *= amp / m;
  return v;
}

ConstitutiveSet constitutive_from_config(const Config& c, int dim) {
  ConstitutiveSet s;
  const std::string pk = c.get_string("pressure.kind", "zero");
  if (pk == "zero") {
    s.pressure = PressureLaw::zero();
  } else if (pk == "power_law") {
    const double a = c.get_double("pressure.a", 1.0);
    const double gamma = c.get_double("pressure.gamma", 2.0);
    if (a <= 0.0) throw ConfigError("pressure coefficient must be positive", c.line_of("pressure.a"), "pressure.a");
    if (gamma < 1.0) throw ConfigError("gamma must be >= 1", c.line_of("pressure.gamma"), "pressure.gamma");
    s.pressure = PressureLaw::power_law(a, gamma);
  } else {
    throw ConfigError("unknown pressure kind '" + pk + "'", c.line_of("pressure.kind"), "pressure.kind");
  }
  s.K = kernel_from_config(c, "K", dim);
  s.psi = kernel_from_config(c, "psi", dim);
  s.H = friction_from_config(c);
  return s;
}

HydroModel model_from_config(const Config& c, const TorusGrid& grid) {
  return HydroModel(constitutive_from_config(c, grid.dim()), grid, c.get_bool("poisson.enabled", false));
}

ScenarioConfig scenario_from_config(const Config& c) {
  for (const auto& [k, v] : c.entries())
    if (!known_keys().count(k)) throw ConfigError("unknown key", c.line_of(k), k);

  ScenarioConfig s;
  s.raw = c;
  s.name = c.get_string("scenario.name");
  s.pipeline = parse_enum<Pipeline>(c, "scenario.pipeline", "hydro",
                                    {{"hydro", Pipeline::hydro}, {"audit", Pipeline::audit},
                                     {"dissipative", Pipeline::dissipative}});
  s.dim = c.get_int("grid.dim");
  if (s.dim < 1 || s.dim > 3) throw ConfigError("dimension must be 1, 2 or 3", c.line_of("grid.dim"), "grid.dim");
  s.cells = c.get_int("grid.cells");
  if (s.cells < 4 || s.cells % 2 != 0)
    throw ConfigError("cells per axis must be even and >= 4", c.line_of("grid.cells"), "grid.cells");
  s.T = c.get_double("run.T");
  if (!(s.T > 0.0)) throw ConfigError("T must be positive", c.line_of("run.T"), "run.T");
  s.output_dt = c.get_double("run.output_dt", s.T / 10.0);
  if (!(s.output_dt > 0.0) || s.output_dt > s.T)
    throw ConfigError("output step must lie in (0, T]", c.line_of("run.output_dt"), "run.output_dt");
  const double ratio = s.T / s.output_dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio)
    throw ConfigError("T must be a whole number of output steps", c.line_of("run.output_dt"), "run.output_dt");
  s.scheme.cfl = c.get_double("run.cfl", 0.4);
  if (!(s.scheme.cfl > 0.0) || s.scheme.cfl > 1.0)
    throw ConfigError("cfl must lie in (0, 1]", c.line_of("run.cfl"), "run.cfl");
  s.scheme.flux = parse_enum<FluxKind>(c, "run.flux", "rusanov", {{"rusanov", FluxKind::rusanov}, {"hll", FluxKind::hll}});
  s.scheme.time = parse_enum<TimeScheme>(c, "run.time", "ssp_rk2",
                                         {{"ssp_rk2", TimeScheme::ssp_rk2}, {"forward_euler", TimeScheme::forward_euler}});
  if (c.has("run.fixed_dt")) s.scheme.fixed_dt = c.get_double("run.fixed_dt");
  s.poisson = c.get_bool("poisson.enabled", false);
  s.threads = c.get_int("runtime.threads", 1);
  if (s.threads < 1) throw ConfigError("threads must be >= 1", c.line_of("runtime.threads"), "runtime.threads");
  s.output_dir = c.get_string("output.directory", "");
  s.write_snapshots = c.get_bool("output.snapshots", false);
  s.write_candidate = c.get_bool("output.candidate", false);
  s.seed = static_cast<std::uint64_t>(c.get_int("seeds.initial", 1));
  s.perturbation_seed = static_cast<std::uint64_t>(c.get_int("seeds.perturbation", 2));

  const bool hydro = s.pipeline == Pipeline::hydro;
  s.check_mass = c.get_bool("checks.mass", hydro);
  s.check_d3 = c.get_bool("checks.d3", hydro);
  s.check_rei = c.get_bool("checks.rei", false);
  s.check_flock = c.get_bool("checks.flock", false);
  s.check_audit = c.get_bool("checks.audit", !hydro);
  s.mass_tol = c.get_double("tolerance.mass", 1e-10);
  s.d3_C = c.get_double("tolerance.d3_C", 1.0);
  s.rei_C = c.get_double("tolerance.rei_C", 1.0);
  s.flock_C = c.get_double("tolerance.flock_C", 1.0);
  s.gronwall_budget = c.get_double("tolerance.gronwall_budget", 1e6);
  s.strong_refine = c.get_int("strong.refine", 4);
  if (s.strong_refine < 1) throw ConfigError("refinement must be >= 1", c.line_of("strong.refine"), "strong.refine");
  s.blowup_threshold = c.get_double("strong.blowup", 1e3);

  // early failures for the remaining blocks
  const int modes = c.get_int("initial.modes", 3);
  if (modes < 1 || 2 * modes >= s.cells)
    throw ConfigError("modes must lie in [1, cells/2)", c.line_of("initial.modes"), "initial.modes");
  const std::string kind = c.get_string("initial.kind", "constant");
  static const std::set<std::string> kinds{"constant", "sine", "random_smooth", "flock", "files"};
  if (!kinds.count(kind)) throw ConfigError("unknown initial kind '" + kind + "'", c.line_of("initial.kind"), "initial.kind");
  (void)constitutive_from_config(c, s.dim);
  if (s.pipeline != Pipeline::hydro && s.dim < 2)
    throw ConfigError("the audit pipelines need N >= 2", c.line_of("grid.dim"), "grid.dim");
  return s;
}

HydroState initial_state(const Config& c, const TorusGrid& grid) {
  const int dim = grid.dim();
  const std::string kind = c.get_string("initial.kind", "constant");
  if (auto a = analytic_initial(c, dim)) {
    const ScalarField rho = ScalarField::sample(grid, a->rho);
    const VectorField u = VectorField::sample(grid, a->u);
    return HydroState(rho, scale(rho, u));
  }
  if (kind == "flock") {
    const std::string shape = c.get_string("initial.shape", "semicircle");
    const double R = c.get_double("initial.radius", 0.5);
    const double bg = c.get_double("initial.background", 0.1);
    const double height = c.get_double("initial.rho", 1.0);
    ScalarField prof(grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double r2 = norm2(grid.cell_center(i)) / (R * R);
      if (shape == "semicircle") {
        prof[i] = r2 < 1.0 ? height * std::sqrt(1.0 - r2) : 0.0;
      } else if (shape == "disc") {
        prof[i] = r2 < 1.0 ? height : 0.0;
      } else {
        throw ConfigError("unknown flock shape '" + shape + "'", c.line_of("initial.shape"), "initial.shape");
      }
    }
    ScalarField rho = gaussian_filter(prof, c.get_double("initial.mollify", 0.05));
    for (std::size_t i = 0; i < rho.size(); ++i) rho[i] += bg;
    if (rho.min() <= 0.0) throw NegativeDensity("initial_state: mollified flock is not positive");
    return HydroState(rho, scale(rho, VectorField(grid, flock_velocity(c, dim))));
  }
  if (kind == "files") {
    const ScalarField rho = scalar_from_snapshot(read_snapshot(c.get_string("initial.rho_file")));
    const VectorField m = vector_from_snapshot(read_snapshot(c.get_string("initial.m_file")));
    require_same_grid(rho.grid(), grid, "initial_state");
    require_same_grid(m.grid(), grid, "initial_state");
    return HydroState(rho, m);
  }
  throw ConfigError("unknown initial kind '" + kind + "'", c.line_of("initial.kind"), "initial.kind");
}

HydroState perturbed_initial_state(const Config& c, const TorusGrid& grid) {
  HydroState s = initial_state(c, grid);
  const double delta = c.get_double("initial.perturbation", 0.0);
  if (delta == 0.0) return s;
  VectorField u = velocity(s);
  const auto seed = static_cast<std::uint64_t>(c.get_int("seeds.perturbation", 2));
  const int modes = c.get_int("initial.modes", 3);
  s.rho += seeded_smooth_field(grid, seed, modes) * delta;
  if (s.rho.min() <= 0.0) throw NegativeDensity("perturbed_initial_state: density is not positive");
  for (int d = 0; d < grid.dim(); ++d) {
    const ScalarField du = seeded_smooth_field(grid, seed + 1 + d, modes) * delta;
    for (std::size_t i = 0; i < grid.size(); ++i) u.component(d)[i] += du[i];
  }
  s.m = scale(s.rho, u);
  return s;
}

bool RunReport::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

const CheckResult* RunReport::check(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

void write_run_report(std::ostream& out, const RunReport& rep) {
  out << "scenario " << rep.scenario << "\n";
  out << "config_hash " << rep.config_hash << "\n";
  for (const auto& c : rep.checks) {
    out << "check " << std::left << std::setw(10) << c.name << (c.pass ? " PASS" : " FAIL") << "  value=" << fmt(c.value)
        << "  limit=" << fmt(c.limit);
    if (!c.detail.empty()) out << "  (" << c.detail << ")";
    out << "\n";
  }
  for (const auto& [k, v] : rep.measured) out << "measured " << k << " = " << fmt(v) << "\n";
  for (const auto& e : rep.events) out << "event " << e << "\n";
  out << "wall_time_s " << std::fixed << std::setprecision(3) << rep.wall_time << std::defaultfloat << "\n";
  out << "overall " << (rep.pass() ? "PASS" : "FAIL") << "\n";
}

void apply_threads(int threads) {
#ifdef _OPENMP
  omp_set_num_threads(std::max(1, threads));
#else
  (void)threads;
#endif
}

namespace {

void run_hydro(const ScenarioConfig& cfg, RunReport& rep) {
  const Config& c = cfg.raw;
  const TorusGrid grid(cfg.dim, cfg.cells);
  const HydroModel model = model_from_config(c, grid);
  const HydroState init = perturbed_initial_state(c, grid);
  const Trajectory traj = run(init, model, cfg.scheme, cfg.T, cfg.output_dt);
  rep.events.insert(rep.events.end(), traj.events.begin(), traj.events.end());
  rep.measured["run.steps"] = static_cast<double>(traj.steps);
  rep.measured["run.max_dt"] = traj.max_dt;
  const double h = grid.spacing();
  const double dt = traj.max_dt;

  if (cfg.check_mass) {
    const double m0 = traj.diagnostics.front().mass;
    double drift = 0.0;
    for (const auto& row : traj.diagnostics) drift = std::max(drift, std::abs(row.mass - m0) / std::abs(m0));
    rep.checks.push_back({"mass", drift <= cfg.mass_tol, drift, cfg.mass_tol, "max relative mass drift"});
  }
  if (cfg.check_d3) {
    std::vector<LedgerSample> series;
    for (const auto& row : traj.diagnostics) series.push_back({row.t, row.energy.total, row.rate.total()});
    const double tol = d3_tolerance(cfg.d3_C, h, dt, cfg.T);
    const D3Report d3 = d3_residual(series, tol);
    rep.measured["d3.final_residual"] = d3.residual.back();
    rep.checks.push_back({"d3", d3.dissipative, d3.max_residual, tol, "max energy inequality residual"});
  }
  if (cfg.check_flock) {
    const Vec u0 = flock_velocity(c, cfg.dim);
    Vec shift{u0[0] * cfg.T, u0[1] * cfg.T, u0[2] * cfg.T};
    const ScalarField exact = spectral_shift(init.rho, shift);
    const double drift = l1_distance(traj.snapshots.back().rho, exact);
    const double tol = cfg.flock_C * (h + dt) * cfg.T;
    rep.checks.push_back({"flock", drift <= tol, drift, tol, "L1 drift from the translated profile"});
  }
  if (cfg.check_rei) {
    (void)split_friction(model.friction(), c.get_double("friction.Z0", 0.0));
    const TorusGrid fine(cfg.dim, cfg.cells * cfg.strong_refine);
    const HydroState f0 = initial_state(c, fine);
    StrongOptions opt;
    opt.cfl = cfg.scheme.cfl;
    opt.blowup_threshold = cfg.blowup_threshold;
    const StrongTrajectory st = strong_reference(f0.rho, velocity(f0), model.on(fine), grid, cfg.T, cfg.output_dt, opt);
    if (st.blown_up) rep.events.push_back("strong reference stopped at t=" + fmt(st.t_strong) + " (gradient blow-up)");
    const StrongSolution strong = make_strong_solution(st);
    std::vector<HydroState> weak(traj.snapshots.begin(),
                                 traj.snapshots.begin() + std::min(traj.snapshots.size(), strong.t.size()));
    const double tol = cfg.rei_C * (h + dt) * cfg.T;
    const RelEnergyReport rr = rei_residual(weak, strong, model, tol, cfg.gronwall_budget);
    rep.measured["rei.sup_E"] = *std::max_element(rr.E.begin(), rr.E.end());
    rep.measured["rei.E0"] = rr.E.front();
    rep.measured["rei.gronwall_c"] = rr.gronwall_c;
    rep.measured["strong.t_strong"] = st.t_strong;
    rep.checks.push_back({"rei", rr.inequality_holds, rr.max_residual, tol, "relative energy inequality residual"});
    if (c.get_double("initial.perturbation", 0.0) != 0.0)
      rep.checks.push_back({"gronwall", rr.gronwall_ok, rr.gronwall_c, cfg.gronwall_budget, "fitted Gronwall constant"});
    if (!cfg.output_dir.empty()) {
      std::ostringstream csv;
      write_rel_energy_csv(csv, rr);
      write_text(cfg.output_dir / "rel_energy.csv", csv.str());
    }
  }

  if (!cfg.output_dir.empty()) {
    std::ostringstream csv;
    write_diagnostics_csv(csv, traj, cfg.dim);
    write_text(cfg.output_dir / "diagnostics.csv", csv.str());
    if (cfg.write_snapshots) {
      for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
        write_snapshot(cfg.output_dir / ("rho_" + std::to_string(k) + ".swfl"), to_snapshot(traj.snapshots[k].rho));
        write_snapshot(cfg.output_dir / ("m_" + std::to_string(k) + ".swfl"), to_snapshot(traj.snapshots[k].m));
      }
    }
  }
}

struct AuditSetup {
  DensityPotential dp;
  VectorField v0;
  Vec V0;
  Lambda0Options opt;
};

AuditSetup audit_setup(const ScenarioConfig& cfg, const TorusGrid& grid) {
  const Config& c = cfg.raw;
  const double T = c.get_double("audit.T", cfg.T);
  const int n = c.get_int("audit.slices", 10);
  if (n < 1) throw ConfigError("need at least one slice", c.line_of("audit.slices"), "audit.slices");
  const int modes = c.get_int("audit.modes", 2);
  const ScalarField rho0 =
      ScalarField(grid, 1.0) + seeded_smooth_field(grid, cfg.seed, modes) * c.get_double("audit.rho_amplitude", 0.1);
  ScalarField phi0 = seeded_smooth_field(grid, cfg.seed + 10, modes) * c.get_double("audit.phi_amplitude", 0.01);
  const double pm = phi0.mean();
  for (std::size_t i = 0; i < phi0.size(); ++i) phi0[i] -= pm;
  AuditSetup s{build_density_potential(rho0, phi0, T, c.get_double("audit.floor", 0.5)),
               seeded_solenoidal_field(grid, cfg.seed + 20, modes, c.get_double("audit.v_amplitude", 0.2)),
               velocity_vector(c, "audit.V", grid.dim()),
               {}};
  s.opt.times = linspace(T, n);
  s.opt.threshold = c.get_double("audit.threshold", 1e-8);
  s.opt.substeps = c.get_int("audit.substeps", 4);
  return s;
}

SubsolutionCandidate build_candidate(const AuditSetup& s, const HydroModel& model,
                                     const std::function<double(double)>& Lambda) {
  const TorusGrid& g = model.grid();
  const PressureLaw& law = model.pressure();
  auto slice = [&](double t) {
    const ScalarField rho = s.dp.rho(t);
    return VSlice{s.v0, rho, s.dp.Phi(t), energy_constraint_e(Lambda(t), rho, s.dp.dPhi_dt(t), law)};
  };
  const auto V = solve_V_ode(slice, s.opt.times, s.V0, model, s.opt.substeps);
  SubsolutionCandidate cand;
  for (std::size_t k = 0; k < s.opt.times.size(); ++k) {
    const double t = s.opt.times[k];
    cand.slices.push_back(CandidateSlice{t, s.v0, SymTensorField(g, true), s.dp.rho(t), s.dp.Phi(t), s.dp.dPhi_dt(t),
                                         V[k], Lambda(t)});
  }
  return cand;
}

Config model_keys(const Config& c) {
  Config out;
  for (const auto& [k, v] : c.entries())
    for (const char* p : {"grid.", "pressure.", "kernel.", "friction.", "poisson."})
      if (k.rfind(p, 0) == 0) out.set(k, v);
  return out;
}

void record_audit(const ScenarioConfig& cfg, const AuditReport& a, const SubsolutionCandidate& cand, RunReport& rep,
                  const std::string& suffix) {
  if (cfg.check_audit) {
    std::string detail = a.violations.empty() ? "min margin over judged slices" : a.violations.front();
    rep.checks.push_back({"audit" + suffix, a.pass, a.min_margin, a.threshold, detail});
  }
  rep.measured["audit" + suffix + ".min_margin"] = a.min_margin;
  rep.measured["audit" + suffix + ".worst_t"] = a.worst_t;
  if (!cfg.output_dir.empty()) {
    std::ostringstream txt, csv;
    write_audit_report(txt, a);
    write_audit_csv(csv, a);
    write_text(cfg.output_dir / ("audit" + suffix + "_report.txt"), txt.str());
    write_text(cfg.output_dir / ("audit" + suffix + ".csv"), csv.str());
    if (cfg.write_candidate) write_candidate_dir(cfg.output_dir / ("candidate" + suffix), cand, model_keys(cfg.raw), a.threshold);
  }
}

void run_audit(const ScenarioConfig& cfg, RunReport& rep) {
  const Config& c = cfg.raw;
  const TorusGrid grid(cfg.dim, cfg.cells);
  const HydroModel model = model_from_config(c, grid);
  const AuditSetup s = audit_setup(cfg, grid);
  const Lambda0Result l0 = find_lambda0(s.v0, s.V0, s.dp, model, s.opt);
  rep.measured["audit.lambda0"] = l0.lambda0;
  rep.measured["audit.lambda0_iterations"] = l0.iterations;

  if (cfg.pipeline == Pipeline::audit) {
    const double Lambda = l0.lambda0 + c.get_double("audit.lambda_offset", 0.1);
    const SubsolutionCandidate cand = build_candidate(s, model, [Lambda](double) { return Lambda; });
    AuditReport a = subsolution_check(cand, model, s.opt.threshold);
    a.lambda0 = l0.lambda0;
    a.has_lambda0 = true;
    record_audit(cfg, a, cand, rep, "");
    return;
  }

  // dissipative Lambda(t) = Lambda0 + exp(-lambda t)
  double cm = 0.0;
  for (double t : s.opt.times) cm = std::max(cm, measure_dissipation_constant(l0.lambda0, s.dp.rho(t), model));
  rep.measured["ledger.c"] = cm;
  const double vol = grid.domain_volume();
  const double T = s.opt.times.back();
  DissipativeLambda dl;
  try {
    dl = dissipative_lambda(l0.lambda0, cm, vol, T);
  } catch (const Error& e) {
    rep.checks.push_back({"ledger", false, cm, 0.0, e.what()});
    return;
  }
  rep.measured["ledger.lambda"] = dl.lambda;
  const SubsolutionCandidate cand = build_candidate(s, model, [&dl](double t) { return dl(t); });
  AuditReport a = subsolution_check(cand, model, s.opt.threshold);
  a.lambda0 = l0.lambda0;
  a.has_lambda0 = true;
  record_audit(cfg, a, cand, rep, "");

  // energy |Omega| Lambda(t) must decay at least as fast as the dissipation lower bound allows
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < s.opt.times.size(); ++k) {
    const double t = s.opt.times[k];
    const double lower = dissipation_lower_bound(dl(t), s.dp.rho(t), model);
    worst = std::max(worst, vol * dl.derivative(t) - std::min(lower, -cm * (1.0 + dl(t))));
  }
  rep.checks.push_back({"ledger", worst <= 0.0, worst, 0.0, "|Omega| dLambda/dt minus the dissipation bound"});
}

}  // namespace

RunReport run_scenario(const ScenarioConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  apply_threads(cfg.threads);
  RunReport rep;
  rep.scenario = cfg.name;
  rep.config_hash = hex_hash(config_hash(cfg.raw));
  if (!cfg.output_dir.empty()) std::filesystem::create_directories(cfg.output_dir);
  if (cfg.pipeline == Pipeline::hydro) {
    run_hydro(cfg, rep);
  } else {
    run_audit(cfg, rep);
  }
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!cfg.output_dir.empty()) {
    std::ostringstream txt;
    write_run_report(txt, rep);
    write_text(cfg.output_dir / "report.txt", txt.str());
  }
  return rep;
}

void write_candidate_dir(const std::filesystem::path& dir, const SubsolutionCandidate& cand, const Config& model_cfg,
                         double threshold) {
  if (cand.slices.empty()) throw Error("write_candidate_dir: empty candidate");
  std::filesystem::create_directories(dir);
  Config c = model_cfg;
  const TorusGrid& g = cand.slices.front().rho.grid();
  c.set("grid.dim", g.dim());
  c.set("grid.cells", g.cells_per_axis());
  c.set("audit.threshold", threshold);
  c.set("candidate.slices", static_cast<int>(cand.slices.size()));
  write_text(dir / "candidate.cfg", serialize(c));

  std::ostringstream csv;
  csv << "k,t,Lambda";
  for (int d = 0; d < g.dim(); ++d) csv << ",V_" << d + 1;
  csv << "\n";
  for (std::size_t k = 0; k < cand.slices.size(); ++k) {
    const CandidateSlice& s = cand.slices[k];
    csv << k << "," << format_double(s.t) << "," << format_double(s.Lambda);
    for (int d = 0; d < g.dim(); ++d) csv << "," << format_double(s.V[d]);
    csv << "\n";
    const std::string id = std::to_string(k);
    write_snapshot(dir / ("v_" + id + ".swfl"), to_snapshot(s.v));
    write_snapshot(dir / ("F_" + id + ".swfl"), to_snapshot(s.F));
    write_snapshot(dir / ("rho_" + id + ".swfl"), to_snapshot(s.rho));
    write_snapshot(dir / ("Phi_" + id + ".swfl"), to_snapshot(s.Phi));
    write_snapshot(dir / ("dPhi_dt_" + id + ".swfl"), to_snapshot(s.dPhi_dt));
  }
  write_text(dir / "slices.csv", csv.str());
}

LoadedCandidate read_candidate_dir(const std::filesystem::path& dir) {
  LoadedCandidate out;
  out.config = load_config(dir / "candidate.cfg");
  out.threshold = out.config.get_double("audit.threshold", 1e-8);
  const int n = out.config.get_int("candidate.slices");
  const int dim = out.config.get_int("grid.dim");
  const TorusGrid grid(dim, out.config.get_int("grid.cells"));

  std::ifstream in(dir / "slices.csv");
  if (!in) throw Error("read_candidate_dir: missing slices.csv in " + dir.string());
  std::string line;
  std::getline(in, line);
  for (int k = 0; k < n; ++k) {
    if (!std::getline(in, line)) throw Error("read_candidate_dir: slices.csv has fewer than " + std::to_string(n) + " rows");
    std::vector<double> cols;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) cols.push_back(std::stod(item));
    if (static_cast<int>(cols.size()) != 3 + dim || static_cast<int>(cols[0]) != k)
      throw Error("read_candidate_dir: malformed slices.csv row " + std::to_string(k));
    Vec V{0.0, 0.0, 0.0};
    for (int d = 0; d < dim; ++d) V[d] = cols[3 + d];
    const std::string id = std::to_string(k);
    CandidateSlice s{cols[1],
                     vector_from_snapshot(read_snapshot(dir / ("v_" + id + ".swfl"))),
                     tensor_from_snapshot(read_snapshot(dir / ("F_" + id + ".swfl")), true),
                     scalar_from_snapshot(read_snapshot(dir / ("rho_" + id + ".swfl"))),
                     scalar_from_snapshot(read_snapshot(dir / ("Phi_" + id + ".swfl"))),
                     scalar_from_snapshot(read_snapshot(dir / ("dPhi_dt_" + id + ".swfl"))),
                     V,
                     cols[2]};
    require_same_grid(s.rho.grid(), grid, "read_candidate_dir");
    out.candidate.slices.push_back(std::move(s));
  }
  return out;
}

AuditReport audit_candidate_dir(const std::filesystem::path& dir) {
  const LoadedCandidate lc = read_candidate_dir(dir);
  const TorusGrid grid(lc.config.get_int("grid.dim"), lc.config.get_int("grid.cells"));
  return subsolution_check(lc.candidate, model_from_config(lc.config, grid), lc.threshold);
}

namespace {

std::vector<Vec> sample_positions(const AnalyticInitial& a, int dim, int n, std::uint64_t seed) {
  std::vector<Vec> x;
  x.reserve(n);
  if (dim == 1) {
    // quantiles of a piecewise-linear CDF on a fine auxiliary grid
    const int m = std::max(4096, 4 * n);
    const double h = kPeriod / m;
    std::vector<double> cdf(m + 1, 0.0);
    for (int j = 0; j < m; ++j) cdf[j + 1] = cdf[j] + h * a.rho(Vec{-1.0 + (j + 0.5) * h, 0.0, 0.0});
    const double total = cdf.back();
    int j = 0;
    for (int i = 0; i < n; ++i) {
      const double q = (i + 0.5) / n * total;
      while (j < m - 1 && cdf[j + 1] < q) ++j;
      const double w = (q - cdf[j]) / (cdf[j + 1] - cdf[j]);
      x.push_back(Vec{-1.0 + (j + w) * h, 0.0, 0.0});
    }
    return x;
  }
  // stratified: largest-remainder counts per cell, uniform positions inside
  const int cells = std::max(4, static_cast<int>(std::pow(n / 16.0, 1.0 / dim)) & ~1);
  const TorusGrid g(dim, cells);
  const ScalarField rho = ScalarField::sample(g, a.rho);
  const double total = rho.integral();
  std::vector<int> count(g.size());
  std::vector<std::pair<double, std::size_t>> rem;
  int used = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double want = n * rho[i] * g.cell_volume() / total;
    count[i] = static_cast<int>(std::floor(want));
    used += count[i];
    rem.emplace_back(want - count[i], i);
  }
  std::stable_sort(rem.begin(), rem.end(), [](const auto& p, const auto& q) { return p.first > q.first; });
  for (int k = 0; k < n - used; ++k) ++count[rem[k].second];
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-0.5, 0.5);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec c = g.cell_center(i);
    for (int k = 0; k < count[i]; ++k) {
      Vec p = c;
      for (int d = 0; d < dim; ++d) p[d] += U(rng) * g.spacing();
      x.push_back(p);
    }
  }
  return x;
}

}  // namespace

CompareReport monokinetic_compare(const Config& c) {
  const ScenarioConfig cfg = scenario_from_config(c);
  apply_threads(cfg.threads);
  const ConstitutiveSet set = constitutive_from_config(c, cfg.dim);
  if (set.pressure.kind() != PressureLaw::Kind::zero)
    throw ConfigError("mono-kinetic comparison needs a pressureless model", c.line_of("pressure.kind"), "pressure.kind");
  if (cfg.poisson) throw ConfigError("mono-kinetic comparison has no Poisson coupling", c.line_of("poisson.enabled"), "poisson.enabled");
  const auto a = analytic_initial(c, cfg.dim);
  if (!a) throw ConfigError("mono-kinetic comparison needs pointwise initial data", c.line_of("initial.kind"), "initial.kind");

  SwarmConfig sw;
  const std::string fk = c.get_string("friction.kind", "constant");
  if (fk == "linear") {
    sw.self_propulsion = true;
    sw.alpha = c.get_double("friction.alpha");
  } else if (!(fk == "constant" && c.get_double("friction.h0", 1.0) == 1.0)) {
    throw ConfigError("particles support linear friction or none", c.line_of("friction.kind"), "friction.kind");
  }
  sw.dt = c.get_double("compare.dt", 1e-2);
  sw.mode = SpaceMode::torus;

  std::vector<double> ns = c.has("compare.particles") ? c.get_list("compare.particles") : std::vector<double>{1e4};
  std::vector<double> gs = c.has("compare.cells") ? c.get_list("compare.cells")
                                                  : std::vector<double>{static_cast<double>(cfg.cells)};
  if (ns.size() != gs.size())
    throw ConfigError("compare.particles and compare.cells need the same length", c.line_of("compare.cells"), "compare.cells");

  CompareReport rep;
  {
    // characteristics of the free pressureless flow cross at -1/min du_d/dx_d
    const TorusGrid fine(cfg.dim, static_cast<int>(*std::max_element(gs.begin(), gs.end())));
    const VectorField u = VectorField::sample(fine, a->u);
    double lo = 0.0;
    for (int d = 0; d < cfg.dim; ++d) lo = std::min(lo, spectral_partial(u.component_field(d), d).min());
    rep.shock_time = lo < 0.0 ? -1.0 / lo : std::numeric_limits<double>::infinity();
  }

  std::vector<double> final_l1;
  for (std::size_t lvl = 0; lvl < ns.size(); ++lvl) {
    const int n = static_cast<int>(ns[lvl]);
    const TorusGrid grid(cfg.dim, static_cast<int>(gs[lvl]));
    const HydroModel model(set, grid, false);
    const HydroState init = initial_state(c, grid);
    const double M = init.mass();
    const Trajectory traj = run(init, model, cfg.scheme, cfg.T, cfg.output_dt);

    sw.K = scaled_kernel(set.K, M);
    sw.psi = scaled_kernel(set.psi, M);
    ParticleState ps;
    ps.dim = cfg.dim;
    ps.x = sample_positions(*a, cfg.dim, n, cfg.seed);
    for (const Vec& x : ps.x) ps.v.push_back(a->u(x));
    for (const HydroState& snap : traj.snapshots) {
      ps = advance(std::move(ps), sw, snap.t);
      ps.t = snap.t;
      const ScalarField rp = deposit(ps, grid).rho * M;
      rep.rows.push_back({n, grid.cells_per_axis(), snap.t, l1_distance(rp, snap.rho), snap.t < rep.shock_time});
    }
    final_l1.push_back(rep.rows.back().l1);
  }
  rep.decreasing = true;
  for (std::size_t lvl = 1; lvl < final_l1.size(); ++lvl) {
    const double r = std::log(final_l1[lvl - 1] / final_l1[lvl]);
    rep.h_slopes.push_back(r / std::log(gs[lvl] / gs[lvl - 1]));
    rep.n_slopes.push_back(r / std::log(ns[lvl] / ns[lvl - 1]));
    if (!(final_l1[lvl] < final_l1[lvl - 1])) rep.decreasing = false;
  }
  return rep;
}

void write_compare_report(std::ostream& out, const CompareReport& rep) {
  out << "particles,cells,t,l1,expected_to_agree\n";
  for (const auto& r : rep.rows)
    out << r.particles << "," << r.cells << "," << fmt(r.t) << "," << fmt(r.l1) << ","
        << (r.expected_to_agree ? "yes" : "not expected to agree") << "\n";
  out << "# shock_time " << fmt(rep.shock_time) << "\n";
  for (std::size_t k = 0; k < rep.h_slopes.size(); ++k)
    out << "# level " << k << "->" << k + 1 << " h_slope " << fmt(rep.h_slopes[k]) << " n_slope " << fmt(rep.n_slopes[k])
        << "\n";
  out << "# decreasing " << (rep.decreasing ? "yes" : "no") << "\n";
}

namespace {

Config base_preset(const std::string& name, const std::string& pipeline, int dim, int cells, double T, double out_dt) {
  Config c;
  c.set("scenario.name", name);
  c.set("scenario.pipeline", pipeline);
  c.set("grid.dim", dim);
  c.set("grid.cells", cells);
  c.set("run.T", T);
  c.set("run.output_dt", out_dt);
  c.set("run.cfl", 0.4);
  c.set("run.flux", std::string("rusanov"));
  c.set("run.time", std::string("ssp_rk2"));
  c.set("seeds.initial", 1);
  c.set("runtime.threads", 1);
  c.set("tolerance.mass", 1e-10);
  return c;
}

void gamma_law(Config& c) {
  c.set("pressure.kind", std::string("power_law"));
  c.set("pressure.a", 1.0);
  c.set("pressure.gamma", 2.0);
}

void attraction(Config& c) {
  c.set("kernel.K.kind", std::string("gaussian"));
  c.set("kernel.K.amp", -0.3);
  c.set("kernel.K.sigma", 0.4);
}

void alignment(Config& c, double amp) {
  c.set("kernel.psi.kind", std::string("raised_cosine"));
  c.set("kernel.psi.amp", amp);
}

void flock(Config& c, const std::string& shape) {
  c.set("pressure.kind", std::string("zero"));
  alignment(c, 0.5);
  c.set("friction.kind", std::string("linear"));
  c.set("friction.alpha", 4.0);
  c.set("initial.kind", std::string("flock"));
  c.set("initial.shape", shape);
  c.set("initial.radius", 0.5);
  c.set("initial.background", 0.1);
  c.set("initial.mollify", 0.05);
  c.set("checks.flock", true);
  c.set("tolerance.flock_C", 3.0);
  c.set("tolerance.d3_C", 1.0);
}

void audit_block(Config& c, double T) {
  gamma_law(c);
  attraction(c);
  c.set("friction.kind", std::string("saturating"));
  c.set("friction.cap", 2.0);
  c.set("audit.T", T);
  c.set("audit.slices", 10);
  c.set("audit.floor", 0.5);
  c.set("audit.rho_amplitude", 0.1);
  c.set("audit.phi_amplitude", 0.01);
  c.set("audit.v_amplitude", 0.2);
  c.set("audit.modes", 2);
  c.set("audit.V", std::string("0.3, 0"));
  c.set("audit.threshold", 1e-8);
  c.set("checks.audit", true);
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"constant_state", "cruise_translation", "flock_1d",      "flock_disc",
          "perturbed_flock", "random_smooth",     "euler_poisson", "subsolution_audit_basic",
          "dissipative_lambda_demo"};
}

Config preset(const std::string& name) {
  if (name == "constant_state") {
    Config c = base_preset(name, "hydro", 1, 64, 1.0, 0.1);
    gamma_law(c);
    attraction(c);
    alignment(c, 0.5);
    c.set("initial.kind", std::string("constant"));
    c.set("initial.rho", 1.0);
    c.set("checks.rei", true);
    c.set("tolerance.d3_C", 1.0);
    c.set("tolerance.rei_C", 1.0);
    return c;
  }
  if (name == "cruise_translation") {
    Config c = base_preset(name, "hydro", 2, 32, 1.0, 0.1);
    flock(c, "disc");
    c.set("initial.kind", std::string("constant"));
    c.set("initial.rho", 1.0);
    c.set("initial.velocity", std::string("0.5, 0"));
    return c;
  }
  if (name == "flock_1d") {
    Config c = base_preset(name, "hydro", 1, 128, 1.0, 0.1);
    flock(c, "semicircle");
    return c;
  }
  if (name == "flock_disc") {
    Config c = base_preset(name, "hydro", 2, 64, 1.0, 0.1);
    flock(c, "disc");
    return c;
  }
  if (name == "perturbed_flock") {
    Config c = base_preset(name, "hydro", 1, 64, 1.0, 0.05);
    flock(c, "semicircle");
    c.set("checks.flock", false);
    c.set("checks.rei", true);
    c.set("initial.perturbation", 0.01);
    c.set("initial.modes", 3);
    c.set("seeds.perturbation", 2);
    c.set("tolerance.rei_C", 1.0);
    c.set("tolerance.gronwall_budget", 50.0);
    return c;
  }
  if (name == "random_smooth") {
    Config c = base_preset(name, "hydro", 1, 64, 1.0, 0.05);
    gamma_law(c);
    c.set("pressure.a", 0.25);
    attraction(c);
    alignment(c, 0.5);
    c.set("friction.kind", std::string("saturating"));
    c.set("friction.cap", 2.0);
    c.set("initial.kind", std::string("random_smooth"));
    c.set("initial.rho", 1.0);
    c.set("initial.amplitude", 0.1);
    c.set("initial.velocity_amplitude", 0.1);
    c.set("initial.modes", 2);
    c.set("checks.rei", true);
    c.set("tolerance.d3_C", 1.0);
    c.set("tolerance.rei_C", 1.0);
    c.set("tolerance.gronwall_budget", 50.0);
    return c;
  }
  if (name == "euler_poisson") {
    Config c = base_preset(name, "hydro", 2, 32, 0.5, 0.05);
    gamma_law(c);
    alignment(c, 0.5);
    c.set("poisson.enabled", true);
    c.set("initial.kind", std::string("random_smooth"));
    c.set("initial.rho", 1.0);
    c.set("initial.amplitude", 0.2);
    c.set("initial.velocity_amplitude", 0.1);
    c.set("initial.modes", 2);
    c.set("checks.rei", true);
    c.set("tolerance.d3_C", 1.0);
    c.set("tolerance.rei_C", 1.0);
    c.set("tolerance.gronwall_budget", 50.0);
    return c;
  }
  if (name == "subsolution_audit_basic") {
    Config c = base_preset(name, "audit", 2, 16, 1.0, 0.1);
    audit_block(c, 1.0);
    c.set("audit.lambda_offset", 0.1);
    alignment(c, 0.5);
    return c;
  }
  if (name == "dissipative_lambda_demo") {
    Config c = base_preset(name, "dissipative", 2, 16, 0.1, 0.01);
    audit_block(c, 0.1);
    alignment(c, 0.1);
    return c;
  }
  throw ConfigError("unknown preset '" + name + "'", 0, "scenario.name");
}

}  // namespace swarmflow
