#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "swarmflow/hydro_state.hpp"

namespace swarmflow {

/// rho(t) = rho0 - eps (1 - exp(-t/eps)) Lap Phi0, Phi(t) = exp(-t/eps) Phi0.
struct DensityPotential {
  ScalarField rho0;
  ScalarField Phi0;
  ScalarField lap_Phi0;
  double eps = 1.0;
  double T = 0.0;

  ScalarField rho(double t) const;
  ScalarField Phi(double t) const;
  ScalarField dPhi_dt(double t) const;
  ScalarField drho_dt(double t) const;
};

inline constexpr double kMinDecayScale = 1e-3;

/// eps is the largest value <= 1 keeping rho >= floor on [0, T].
/// Throws NonZeroMean (mean Phi0 != 0), NegativeDensity (no eps >= 1e-3 works).
DensityPotential build_density_potential(const ScalarField& rho0, const ScalarField& Phi0, double T, double floor);

/// Inputs of the V equation at one time.
struct VSlice {
  VectorField v;
  ScalarField rho;
  ScalarField Phi;
  ScalarField e;
};

using SliceFn = std::function<VSlice(double)>;

/// dV/dt for the current slice.
Vec v_ode_rhs(const Vec& V, const VSlice& s, const HydroModel& model);

/// RK4 with `substeps` steps between consecutive output times.
std::vector<Vec> solve_V_ode(const SliceFn& slices, const std::vector<double>& times, const Vec& V0,
                             const HydroModel& model, int substeps = 1);

/// m (1 - H(2e/rho)) - rho grad K*rho + rho psi*m - m psi*rho with m = v + V + grad Phi.
VectorField assemble_Xi(const VectorField& v, const Vec& V, const ScalarField& Phi, const ScalarField& rho,
                        const ScalarField& e, const HydroModel& model);
VectorField mean_free(const VectorField& Xi);

/// Trace-free M = grad w + grad w^T - (2/N) div w I with -div M = G.
/// Throws NonZeroMean, and Error for N = 1.
SymTensorField solve_elliptic_M(const VectorField& G);
/// |div M + G|_inf / |G|_inf
double elliptic_residual(const SymTensorField& M, const VectorField& G);

/// Lambda - N/2 (p(rho) + dPhi/dt). Throws NonPositiveEnergy.
ScalarField energy_constraint_e(double Lambda, const ScalarField& rho, const ScalarField& dPhi_dt,
                                const PressureLaw& law);

struct CandidateSlice {
  double t;
  VectorField v;
  SymTensorField F;
  ScalarField rho;
  ScalarField Phi;
  ScalarField dPhi_dt;
  Vec V;
  double Lambda;
};

struct SubsolutionCandidate {
  std::vector<CandidateSlice> slices;
};

/// e - N/2 lambda_max[(v+h)(x)(v+h)/rho - F + M], h = V + grad Phi.
ScalarField margin_field(const VectorField& v, const Vec& V, const ScalarField& Phi, const ScalarField& rho,
                         const SymTensorField& F, const SymTensorField& M, const ScalarField& e);

struct SliceMargin {
  double t;
  double margin;
  std::size_t worst_cell;
  bool judged;
};

struct AuditReport {
  double lambda0 = 0.0;
  bool has_lambda0 = false;
  double min_margin = 0.0;
  double worst_t = 0.0;
  Vec worst_x{0.0, 0.0, 0.0};
  double threshold = 1e-8;
  std::vector<SliceMargin> slices;
  std::vector<std::string> violations;
  bool pass = false;
};

/// Margins on every slice; slices at t <= 0 are reported but not judged.
AuditReport subsolution_check(const SubsolutionCandidate& c, const HydroModel& model, double threshold = 1e-8);

void write_audit_report(std::ostream& out, const AuditReport& rep);
void write_audit_csv(std::ostream& out, const AuditReport& rep);

struct Lambda0Options {
  std::vector<double> times;
  double threshold = 1e-8;
  double tolerance = 1e-6;
  double damping = 0.5;
  int max_iterations = 100;
  int substeps = 4;
};

struct Lambda0Result {
  double lambda0 = 0.0;
  double margin = 0.0;
  int iterations = 0;
};

/// Smallest constant Lambda for which v = v0, F = 0 passes on every t > 0 slice.
/// Throws ConvergenceFailure.
Lambda0Result find_lambda0(const VectorField& v0, const Vec& V0, const DensityPotential& dp,
                           const HydroModel& model, const Lambda0Options& opt);

/// Minimal margin over the t > 0 slices for a constant Lambda; -inf if e <= 0 somewhere.
double lambda_margin(double Lambda, const VectorField& v0, const Vec& V0, const DensityPotential& dp,
                     const HydroModel& model, const Lambda0Options& opt);

/// N/2 lambda_max[h(x)h/r - Ht] - |h|^2/(2r)
double standard_inequality_slack(const Vec& h, double r, const Mat& Ht, int dim);
bool standard_inequality_check(const Vec& h, double r, const Mat& Ht, int dim);

struct DissipativeLambda {
  double lambda = 1.0;
  double lambda0 = 0.0;
  double c = 0.0;
  double domain_volume = 0.0;
  double horizon = 0.0;

  double operator()(double t) const;
  double derivative(double t) const;
};

/// Lambda(t) = Lambda0 + exp(-lambda t), lambda the smallest power of two >= 1 with
/// |Omega| Lambda'(t) <= -c (1 + Lambda(t)) on [0, T]. Throws Error.
DissipativeLambda dissipative_lambda(double lambda0, double c, double domain_volume, double T);

/// int 2e (1 - H(2e/rho)) - 4 int e psi*rho with e = Lambda - N/2 p(rho): a lower bound of the
/// dissipation rate of any state with kinetic energy density e.
double dissipation_lower_bound(double Lambda, const ScalarField& rho, const HydroModel& model);
/// max over Lambda in [Lambda0, Lambda0 + 1] of max(0, -lower bound) / (1 + Lambda).
double measure_dissipation_constant(double lambda0, const ScalarField& rho, const HydroModel& model);

/// int 1/2 |v + V + grad Phi|^2 / rho - int e
double kinetic_energy_defect(const CandidateSlice& s, const PressureLaw& law);

}  // namespace swarmflow
