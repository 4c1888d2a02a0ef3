#pragma once

#include <vector>

#include "swarmflow/hydro_state.hpp"

namespace swarmflow {

struct EnergyBreakdown {
  double kinetic = 0.0;
  double internal = 0.0;
  /// Includes the Poisson self-energy when the model carries Poisson forcing.
  double interaction = 0.0;
  double total = 0.0;
  double t = 0.0;
};

struct DissipationRate {
  /// int rho |u|^2 (1 - H(|u|^2))
  double friction_term = 0.0;
  /// -1/2 int int psi(x-y) rho(x) rho(y) |u(y) - u(x)|^2
  double alignment_term = 0.0;
  /// psi failed the symmetry check; the unsymmetrised expansion was used.
  bool unsymmetrized = false;
  double t = 0.0;

  double total() const { return friction_term + alignment_term; }
};

EnergyBreakdown total_energy(const HydroState& s, const HydroModel& model);
DissipationRate dissipation_rate(const HydroState& s, const HydroModel& model);

/// int int psi(x-y) rho(x) rho(y) |u(y) - u(x)|^2 through three convolutions.
double alignment_pairing(const ScalarField& rho, const VectorField& u, const HydroModel& model);

struct LedgerSample {
  double t;
  double energy;
  double dissipation;
};

struct D3Report {
  std::vector<double> t;
  std::vector<double> residual;
  double tolerance = 0.0;
  double max_residual = 0.0;
  bool dissipative = true;
};

/// residual(tau) = E(tau) - E(0) - trapezoid integral of the dissipation rate.
/// Requires a uniform output grid. Throws TimeGridMismatch.
D3Report d3_residual(const std::vector<LedgerSample>& series, double tolerance);

/// C (h + dt) T
double d3_tolerance(double c, double h, double dt, double run_length);

}  // namespace swarmflow
