#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "swarmflow/torus_grid.hpp"

namespace swarmflow {

class PressureLaw {
 public:
  enum class Kind { zero, power_law, custom };

  static PressureLaw zero();
  /// p = a rho^gamma
  static PressureLaw power_law(double a, double gamma);
  /// P is obtained by adaptive quadrature of p(z)/z^2.
  static PressureLaw custom(std::function<double(double)> p, std::function<double(double)> dp);

  Kind kind() const { return kind_; }
  double a() const { return a_; }
  double gamma() const { return gamma_; }

  double p(double rho) const;
  double dp(double rho) const;
  /// P(rho) = rho * int_1^rho p(z)/z^2 dz
  double potential(double rho) const;
  /// P'(rho)
  double potential_derivative(double rho) const;
  double sound_speed(double rho) const;

 private:
  Kind kind_ = Kind::zero;
  double a_ = 0.0;
  double gamma_ = 1.0;
  std::function<double(double)> p_;
  std::function<double(double)> dp_;
};

/// Throws NegativeDensity for rho < 0.
double pressure_potential(const PressureLaw& law, double rho);

/// Positivity of p' together with the growth conditions at infinity; the zero law fails.
bool check_pressure_admissible(const PressureLaw& law);

/// Exact cosine-series term coef * cos(pi m.z).
struct TrigTerm {
  double coef;
  std::array<int, 3> m;
};

/// Closed forms the pair loops can inline.
enum class KernelForm { generic, quadratic, quadratic_log };

/// Pairwise kernel z -> k(z), used both for K and for psi.
struct Kernel {
  std::string name = "zero";
  int dim = 1;
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
  bool symmetric = true;
  bool singular = false;
  bool zero = false;
  /// Non-empty iff the kernel equals this finite cosine series on the torus.
  std::vector<TrigTerm> trig;
  KernelForm form = KernelForm::generic;

  double operator()(const Vec& z) const { return value(z); }
};

using InteractionKernel = Kernel;
using CommunicationKernel = Kernel;

Kernel zero_kernel(int dim);
/// amp * cos(pi z_axis), or amp * sum_d cos(pi z_d) when axis < 0.
Kernel cosine_kernel(int dim, double amp, int axis = -1);
/// amp * prod_d (1 + cos(pi z_d)) / 2; non-negative.
Kernel raised_cosine_kernel(int dim, double amp);
Kernel constant_kernel(int dim, double c);
/// amp * exp(-|z|^2 / (2 sigma^2))
Kernel gaussian_kernel(int dim, double amp, double sigma);
/// |z|^2 / 2
Kernel quadratic_kernel(int dim);
/// |z|^2/2 - log|z|; singular at 0.
Kernel quadratic_log_kernel(int dim);
/// |z|^a/a - |z|^(2-N)/(2-N), with -log|z| for N = 2.
Kernel power_law_kernel(int dim, double a);
/// c / (1 + |z|^2)^beta
Kernel cucker_smale_kernel(int dim, double c, double beta);

struct KernelSamples {
  ScalarField value;
  VectorField gradient;
};

/// Samples on the displacement lattice of the grid. Throws SingularOnTorus.
KernelSamples sample_kernel_on_torus(const Kernel& k, const TorusGrid& grid);

/// Pointwise k(z) = k(-z) on the lattice, to 1e-12.
bool kernel_symmetric_on(const ScalarField& samples);

class FrictionFunction {
 public:
  FrictionFunction() = default;
  FrictionFunction(std::string name, std::function<double(double)> h,
                   std::function<double(double)> dh, double bound, double monotone_from = 0.0);

  static FrictionFunction constant(double h0);
  /// alpha * Z
  static FrictionFunction linear(double alpha);
  /// min(alpha Z, cap)
  static FrictionFunction capped_linear(double alpha, double cap);
  /// cap * Z / (1 + Z)
  static FrictionFunction saturating(double cap);

  const std::string& name() const { return name_; }
  double operator()(double z) const { return h_(z); }
  double derivative(double z) const { return dh_(z); }
  /// sup H; +inf for unbounded families.
  double bound() const { return bound_; }
  double monotone_from() const { return z0_; }
  bool is_constant_one() const { return constant_one_; }

 private:
  std::string name_ = "constant";
  std::function<double(double)> h_ = [](double) { return 1.0; };
  std::function<double(double)> dh_ = [](double) { return 0.0; };
  double bound_ = 1.0;
  double z0_ = 0.0;
  bool constant_one_ = true;
};

/// Unique s > 0 with H(s^2) = 1. Throws NoCruiseSpeed.
double cruise_speed(const FrictionFunction& h);

struct FrictionSplit {
  FrictionFunction compact;       ///< H1, zero beyond Z0
  FrictionFunction nondecreasing; ///< H2
};

/// H2(Z) = H(max(Z, Z0)), H1 = H - H2. Throws MonotonicityViolation if H decreases beyond Z0
/// on the sample grid.
FrictionSplit split_friction(const FrictionFunction& h, double z0);

struct ConstitutiveSet {
  PressureLaw pressure = PressureLaw::zero();
  Kernel K = zero_kernel(1);
  Kernel psi = zero_kernel(1);
  FrictionFunction H;
};

}  // namespace swarmflow
