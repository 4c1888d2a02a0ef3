#pragma once

#include <optional>
#include <string>
#include <vector>

#include "swarmflow/energy_ledger.hpp"
#include "swarmflow/hydro_state.hpp"

namespace swarmflow {

enum class FluxKind { rusanov, hll };
enum class TimeScheme { forward_euler, ssp_rk2 };

struct SchemeConfig {
  double cfl = 0.4;
  FluxKind flux = FluxKind::rusanov;
  TimeScheme time = TimeScheme::ssp_rk2;
  double vacuum_floor = 1e-12;
  /// Requested step; reduced to the CFL step when it is too large.
  std::optional<double> fixed_dt;
};

struct SourceTerms {
  VectorField friction;
  VectorField attraction;
  VectorField alignment;
  VectorField poisson;

  VectorField total() const;
};

SourceTerms compute_sources(const ScalarField& rho, const VectorField& u, const HydroModel& model);
/// -rho grad Phi with -Lap Phi = rho - mean(rho).
VectorField poisson_force(const ScalarField& rho);

/// cfl h / max over cells of sum_d (|u_d| + c_s); +inf for a state at rest without sound.
double cfl_timestep(const HydroState& s, const HydroModel& model, const SchemeConfig& cfg);

struct StepLog {
  std::size_t vacuum_cells = 0;
  std::vector<std::string> events;
};

/// One step of size dt. Throws NegativeDensity, NumericalBlowUp.
HydroState step(const HydroState& s, const HydroModel& model, const SchemeConfig& cfg, double dt,
                StepLog* log = nullptr);

struct DiagnosticsRow {
  double t;
  double mass;
  Vec momentum;
  EnergyBreakdown energy;
  DissipationRate rate;
  double d3_residual;
};

struct Trajectory {
  std::vector<HydroState> snapshots;
  std::vector<DiagnosticsRow> diagnostics;
  std::vector<std::string> events;
  std::size_t steps = 0;
  double max_dt = 0.0;
};

/// Snapshots at k * output_dt up to T, diagnostics evaluated on every snapshot.
Trajectory run(const HydroState& initial, const HydroModel& model, const SchemeConfig& cfg,
               double T, double output_dt);

void write_diagnostics_csv(std::ostream& out, const Trajectory& traj, int dim);

/// Primitive-form reference solution sampled back onto the coarse grid.
struct StrongTrajectory {
  std::vector<double> t;
  std::vector<ScalarField> r;
  std::vector<VectorField> U;
  bool blown_up = false;
  double t_strong = 0.0;
  std::vector<double> grad_U_max;
};

struct StrongOptions {
  double cfl = 0.4;
  double blowup_threshold = 1e3;
};

/// r, U given on the fine grid; outputs are block averages (mass weighted for U) on `coarse`.
StrongTrajectory strong_reference(const ScalarField& r0, const VectorField& U0, const HydroModel& fine,
                                  const TorusGrid& coarse, double T, double output_dt,
                                  const StrongOptions& opt = {});

ScalarField block_average(const ScalarField& fine, const TorusGrid& coarse);
VectorField mass_weighted_average(const ScalarField& rho, const VectorField& u, const TorusGrid& coarse);

}  // namespace swarmflow
