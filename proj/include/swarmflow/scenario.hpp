#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "swarmflow/config.hpp"
#include "swarmflow/convex_integration.hpp"
#include "swarmflow/hydro_solver.hpp"

namespace swarmflow {

enum class Pipeline { hydro, audit, dissipative };

/// Typed view of a Config, validated on construction.
struct ScenarioConfig {
  Config raw;
  std::string name;
  Pipeline pipeline = Pipeline::hydro;
  int dim = 1;
  int cells = 64;
  double T = 1.0;
  double output_dt = 0.1;
  SchemeConfig scheme;
  bool poisson = false;
  int threads = 1;
  std::filesystem::path output_dir;
  bool write_snapshots = false;
  bool write_candidate = false;

  std::uint64_t seed = 1;
  std::uint64_t perturbation_seed = 2;

  bool check_mass = true;
  bool check_d3 = true;
  bool check_rei = false;
  bool check_flock = false;
  bool check_audit = false;

  double mass_tol = 1e-10;
  double d3_C = 1.0;
  double rei_C = 1.0;
  double flock_C = 1.0;
  double gronwall_budget = 1e6;

  int strong_refine = 4;
  double blowup_threshold = 1e3;
};

/// Throws ConfigError for unknown pipelines, T <= 0, bad grids and malformed values.
ScenarioConfig scenario_from_config(const Config& c);

ConstitutiveSet constitutive_from_config(const Config& c, int dim);
HydroModel model_from_config(const Config& c, const TorusGrid& grid);

/// Unperturbed initial data sampled on any grid, so refinements see the same continuum profile.
HydroState initial_state(const Config& c, const TorusGrid& grid);
/// Adds initial.perturbation times seeded smooth fields to the density and to each velocity component.
HydroState perturbed_initial_state(const Config& c, const TorusGrid& grid);

/// Band-limited field with |f| <= 1: random cosine/sine series over 0 < |k|_inf <= kmax.
ScalarField seeded_smooth_field(const TorusGrid& grid, std::uint64_t seed, int kmax);
/// Divergence-free, zero-mean, max norm scaled to amp.
VectorField seeded_solenoidal_field(const TorusGrid& grid, std::uint64_t seed, int kmax, double amp);

struct CheckResult {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double limit = 0.0;
  std::string detail;
};

struct RunReport {
  std::string scenario;
  std::string config_hash;
  std::vector<CheckResult> checks;
  std::map<std::string, double> measured;
  std::vector<std::string> events;
  double wall_time = 0.0;

  bool pass() const;
  /// 0 pass, 2 check failure.
  int exit_code() const { return pass() ? 0 : 2; }
  const CheckResult* check(const std::string& name) const;
};

void write_run_report(std::ostream& out, const RunReport& rep);

/// Sets the OpenMP thread count when available.
void apply_threads(int threads);

RunReport run_scenario(const ScenarioConfig& cfg);

/// Candidate dir: candidate.cfg, slices.csv (k,t,Lambda,V_1..V_N) and per slice
/// v_k, F_k, rho_k, Phi_k, dPhi_dt_k .swfl snapshots.
void write_candidate_dir(const std::filesystem::path& dir, const SubsolutionCandidate& cand, const Config& model_cfg,
                         double threshold);
struct LoadedCandidate {
  Config config;
  SubsolutionCandidate candidate;
  double threshold = 1e-8;
};
LoadedCandidate read_candidate_dir(const std::filesystem::path& dir);
AuditReport audit_candidate_dir(const std::filesystem::path& dir);

struct CompareRow {
  int particles;
  int cells;
  double t;
  double l1;
  bool expected_to_agree;
};

struct CompareReport {
  std::vector<CompareRow> rows;
  /// log(L1 ratio) over log(h ratio) and over log(n ratio) between consecutive levels at the final time.
  std::vector<double> h_slopes;
  std::vector<double> n_slopes;
  double shock_time = 0.0;
  bool decreasing = false;
};

/// Particles sampled from rho0 with velocity u0(x_i), evolved alongside the hydro solver
/// on each (compare.particles, compare.cells) level. Throws ConfigError for pressure laws.
CompareReport monokinetic_compare(const Config& c);
void write_compare_report(std::ostream& out, const CompareReport& rep);

std::vector<std::string> preset_names();
/// Throws ConfigError for unknown names.
Config preset(const std::string& name);

}  // namespace swarmflow
