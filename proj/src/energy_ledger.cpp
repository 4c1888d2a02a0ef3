#include "swarmflow/energy_ledger.hpp"

#include <algorithm>
#include <cmath>

#include "swarmflow/errors.hpp"
#include "swarmflow/spectral.hpp"

namespace swarmflow {

VectorField velocity(const ScalarField& rho, const VectorField& m, double floor) {
  VectorField u(rho.grid());
  for (int d = 0; d < rho.grid().dim(); ++d) {
    auto dst = u.component(d);
    auto src = m.component(d);
    for (std::size_t i = 0; i < rho.size(); ++i) dst[i] = rho[i] > floor ? src[i] / rho[i] : 0.0;
  }
  return u;
}

VectorField velocity(const HydroState& s, double floor) { return velocity(s.rho, s.m, floor); }

HydroModel::HydroModel(ConstitutiveSet set, const TorusGrid& grid, bool poisson)
    : set_(std::move(set)), grid_(grid), poisson_(poisson), K_(grid), psi_(grid) {
  if (!set_.K.zero) K_ = sample_kernel_on_torus(set_.K, grid).value;
  if (!set_.psi.zero) {
    psi_ = sample_kernel_on_torus(set_.psi, grid).value;
    if (psi_.min() < 0.0) throw Error("communication kernel must be non-negative");
    psi_symmetric_ = kernel_symmetric_on(psi_);
  }
}

ScalarField HydroModel::K_conv(const ScalarField& f) const {
  return has_K() ? periodic_convolve(K_, f) : ScalarField(f.grid());
}

ScalarField HydroModel::psi_conv(const ScalarField& f) const {
  return has_psi() ? periodic_convolve(psi_, f) : ScalarField(f.grid());
}

VectorField HydroModel::psi_conv(const VectorField& f) const {
  VectorField out(f.grid());
  if (!has_psi()) return out;
  for (int d = 0; d < f.dim(); ++d) out.set_component(d, periodic_convolve(psi_, f.component_field(d)));
  return out;
}

EnergyBreakdown total_energy(const HydroState& s, const HydroModel& model) {
  const TorusGrid& g = s.grid();
  EnergyBreakdown e;
  e.t = s.t;
  const ScalarField m2 = s.m.norm_squared();
  double kin = 0.0, internal = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (s.rho[i] > 0.0) kin += 0.5 * m2[i] / s.rho[i];
    internal += model.pressure().potential(std::max(0.0, s.rho[i]));
  }
  e.kinetic = kin * g.cell_volume();
  e.internal = internal * g.cell_volume();
  double inter = 0.0;
  if (model.has_K()) inter += 0.5 * inner(s.rho, model.K_conv(s.rho));
  if (model.poisson()) {
    ScalarField f = s.rho;
    const double mean = f.mean();
    for (double& v : f.values()) v -= mean;
    inter += 0.5 * inner(f, invert_laplacian(f));
  }
  e.interaction = inter;
  e.total = e.kinetic + e.internal + e.interaction;
  return e;
}

double alignment_pairing(const ScalarField& rho, const VectorField& u, const HydroModel& model) {
  if (!model.has_psi()) return 0.0;
  const ScalarField u2 = u.norm_squared();
  const ScalarField rho_u2 = hadamard(rho, u2);
  const VectorField m = scale(rho, u);
  // |u(y)-u(x)|^2 = |u(y)|^2 - 2 u(x).u(y) + |u(x)|^2
  const double a = inner(rho, model.psi_conv(rho_u2));
  const double b = inner(m, model.psi_conv(m));
  const double c = inner(rho_u2, model.psi_conv(rho));
  return a - 2.0 * b + c;
}

DissipationRate dissipation_rate(const HydroState& s, const HydroModel& model) {
  DissipationRate r;
  r.t = s.t;
  const VectorField u = velocity(s);
  const ScalarField u2 = u.norm_squared();
  double fr = 0.0;
  for (std::size_t i = 0; i < s.rho.size(); ++i)
    fr += s.rho[i] * u2[i] * (1.0 - model.friction()(u2[i]));
  r.friction_term = fr * s.grid().cell_volume();
  r.alignment_term = -0.5 * alignment_pairing(s.rho, u, model);
  r.unsymmetrized = !model.psi_symmetric();
  return r;
}

D3Report d3_residual(const std::vector<LedgerSample>& series, double tolerance) {
  D3Report rep;
  rep.tolerance = tolerance;
  if (series.empty()) return rep;
  if (series.size() > 2) {
    const double dt = series[1].t - series[0].t;
    for (std::size_t k = 1; k < series.size(); ++k) {
      const double step = series[k].t - series[k - 1].t;
      if (std::abs(step - dt) > 1e-9 * std::max(1.0, std::abs(dt)))
        throw TimeGridMismatch("d3_residual: output times are not uniform");
    }
  }
  double integral = 0.0;
  rep.max_residual = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < series.size(); ++k) {
    if (k > 0)
      integral += 0.5 * (series[k].t - series[k - 1].t) *
                  (series[k].dissipation + series[k - 1].dissipation);
    const double res = series[k].energy - series[0].energy - integral;
    rep.t.push_back(series[k].t);
    rep.residual.push_back(res);
    rep.max_residual = std::max(rep.max_residual, res);
    if (res > tolerance) rep.dissipative = false;
  }
  return rep;
}

double d3_tolerance(double c, double h, double dt, double run_length) {
  return c * (h + dt) * run_length;
}

}  // namespace swarmflow
