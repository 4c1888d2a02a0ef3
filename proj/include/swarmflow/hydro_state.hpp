#pragma once

#include "swarmflow/constitutive.hpp"
#include "swarmflow/torus_grid.hpp"

namespace swarmflow {

/// Conserved variables (rho, m = rho u) at time t.
struct HydroState {
  ScalarField rho;
  VectorField m;
  double t = 0.0;

  HydroState(ScalarField r, VectorField mom, double time = 0.0)
      : rho(std::move(r)), m(std::move(mom)), t(time) {}

  const TorusGrid& grid() const { return rho.grid(); }
  double mass() const { return rho.integral(); }
};

/// u = m / rho, zero where rho <= floor.
VectorField velocity(const ScalarField& rho, const VectorField& m, double floor = 0.0);
VectorField velocity(const HydroState& s, double floor = 0.0);

/// Constitutive set bound to a grid: kernel samples ready for FFT convolution.
class HydroModel {
 public:
  HydroModel(ConstitutiveSet set, const TorusGrid& grid, bool poisson = false);

  const ConstitutiveSet& constitutive() const { return set_; }
  const PressureLaw& pressure() const { return set_.pressure; }
  const FrictionFunction& friction() const { return set_.H; }
  const TorusGrid& grid() const { return grid_; }
  bool poisson() const { return poisson_; }
  bool pressureless() const { return set_.pressure.kind() == PressureLaw::Kind::zero; }
  bool has_K() const { return !set_.K.zero; }
  bool has_psi() const { return !set_.psi.zero; }
  bool psi_symmetric() const { return psi_symmetric_; }

  const ScalarField& K_samples() const { return K_; }
  const ScalarField& psi_samples() const { return psi_; }

  ScalarField K_conv(const ScalarField& f) const;
  ScalarField psi_conv(const ScalarField& f) const;
  VectorField psi_conv(const VectorField& f) const;

  /// Same constitutive set on another grid.
  HydroModel on(const TorusGrid& grid) const { return HydroModel(set_, grid, poisson_); }

 private:
  ConstitutiveSet set_;
  TorusGrid grid_;
  bool poisson_;
  ScalarField K_;
  ScalarField psi_;
  bool psi_symmetric_ = true;
};

}  // namespace swarmflow
