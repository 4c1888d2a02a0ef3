#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include "swarmflow/hydro_solver.hpp"

namespace swarmflow {

struct StrongBounds {
  double rho_low = 0.0;
  double rho_high = 0.0;
};

/// Time samples of a smooth reference (r, U) on the comparison grid.
struct StrongSolution {
  std::vector<double> t;
  std::vector<ScalarField> r;
  std::vector<VectorField> U;
  StrongBounds bounds;
  std::vector<double> grad_U_max;
  std::vector<double> grad_r_max;
};

/// Bounds are 0.9 min r and 1.1 max r over all samples. Throws NegativeDensity if r touches 0.
StrongSolution make_strong_solution(std::vector<double> t, std::vector<ScalarField> r, std::vector<VectorField> U);
StrongSolution make_strong_solution(const StrongTrajectory& traj);

/// One strong sample with its time derivatives.
struct StrongSample {
  ScalarField r;
  VectorField U;
  ScalarField dr_dt;
  VectorField dU_dt;
};

/// Centred differences in time, one-sided at the ends.
StrongSample strong_sample(const StrongSolution& s, std::size_t k);

/// int 1/2 rho |u-U|^2 + P(rho) - P'(r)(rho - r) - P(r)
double relative_energy(const ScalarField& rho, const VectorField& u, const ScalarField& r, const VectorField& U,
                       const PressureLaw& law);

/// K * f, plus the Poisson potential of f - mean f when the model carries it.
ScalarField interaction_potential(const HydroModel& model, const ScalarField& f);

/// 1/2 int (r - rho) (K * (r - rho)), Poisson part included.
double interaction_bracket(const ScalarField& rho, const ScalarField& r, const HydroModel& model);

/// 1/2 int int psi rho(x) rho(y) |(u-U)(y) - (u-U)(x)|^2
double relative_dissipation(const ScalarField& rho, const VectorField& u, const VectorField& U,
                            const HydroModel& model);

struct RemainderTerms {
  double convective = 0.0;       ///< -int rho (dU/dt + u.grad U).(u - U)
  double attraction = 0.0;       ///< -int rho (grad K * r).(u - U)
  double interaction = 0.0;      ///< int (rho - r)(grad K * (rho - r)).U
  double pressure = 0.0;         ///< (r-rho) dP'(r)/dt + grad P'(r).(rU - rho u) - div U (p(rho) - p(r))
  double friction = 0.0;         ///< int (1 - H(|u|^2)) rho u.(u - U)
  double alignment_mismatch = 0.0;
  double alignment_strong = 0.0;

  double total() const;
  std::array<double, 7> terms() const;
};

RemainderTerms remainder(const ScalarField& rho, const VectorField& u, const StrongSample& strong,
                         const HydroModel& model);

/// -int div U (p(rho) - p'(r)(rho - r) - p(r))
double pressure_block_reduced(const ScalarField& rho, const ScalarField& r, const VectorField& U,
                              const PressureLaw& law);

struct RelEnergyReport {
  std::vector<double> t;
  std::vector<double> E;
  /// int_0^t of the remainder
  std::vector<double> remainder;
  std::vector<double> residual;
  double tolerance = 0.0;
  double max_residual = 0.0;
  bool inequality_holds = true;
  double gronwall_c = 0.0;
  bool gronwall_ok = true;
  double gronwall_budget = 0.0;
};

/// LHS of the relative energy inequality minus the time integral of the remainder.
/// Throws TimeGridMismatch, GridMismatch.
RelEnergyReport rei_residual(const std::vector<HydroState>& weak, const StrongSolution& strong,
                             const HydroModel& model, double tolerance, double gronwall_budget = 1e6);

void write_rel_energy_csv(std::ostream& out, const RelEnergyReport& rep);
void write_rel_energy_summary(std::ostream& out, const RelEnergyReport& rep);

/// Smooth cutoff: 1 on [low, high], 0 outside [low - w, high + w], cubic in between.
double cutoff(double rho, double low, double high, double width);

struct EssResSplit {
  double rho_low;
  double rho_high;
  double width;
  ScalarField chi;
  std::vector<bool> essential;  ///< chi > 0
  std::vector<bool> residual;   ///< chi < 1
};

/// Transition width 0.1 rho_low.
EssResSplit ess_res_split(const ScalarField& rho, const StrongBounds& bounds);

struct CoercivityReport {
  /// Largest c for which the pointwise lower bound holds on this state; 0 if it fails.
  double c = 0.0;
  bool holds = false;
  /// (|[rho-r]_ess|_1 + |[rho-r]_res|_1 + |[rho-r]_ess|_2) / E^(1/2)
  double kkk_ratio = 0.0;
};

CoercivityReport coercivity_check(const ScalarField& rho, const VectorField& u, const ScalarField& r,
                                  const VectorField& U, const PressureLaw& law, const StrongBounds& bounds);

/// int f Phi with -Lap Phi = f, spectrally |Omega| sum |f_k|^2 / |kappa_k|^2. Throws NonZeroMean.
double negative_sobolev_norm(const ScalarField& f);
/// Same value from the real-space quadrature int f invert_laplacian(f).
double negative_sobolev_norm_quadrature(const ScalarField& f);

/// int 1/2 rho |u-U|^2 + 1/2 int (r - rho) Phi_(r - rho)
double poisson_relative_energy(const ScalarField& rho, const VectorField& u, const ScalarField& r,
                               const VectorField& U);

/// |int (rho-r) grad Phi . U + int [div U |grad phi|^2 / 2 - grad U : grad phi (x) grad phi]|,
/// phi = Phi_rho - Phi_r.
double tzavaras_identity_check(const ScalarField& rho, const ScalarField& r, const VectorField& U);

/// C with |psi * f|_inf <= C |f|_{W^-1,2} for zero-mean f, from the Fourier coefficients of psi.
double regularity_constant(const ScalarField& psi_samples);

struct GronwallFit {
  double c = 0.0;
  double eps = 0.0;
  bool verdict = true;
};

/// Smallest c >= 0 with E(t) <= (E(0) + eps) exp(c t), eps = 1e-12 max E.
GronwallFit gronwall_fit(const std::vector<double>& t, const std::vector<double>& E, double budget = 1e6);

}  // namespace swarmflow
