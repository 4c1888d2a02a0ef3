#include "swarmflow/hydro_solver.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "swarmflow/errors.hpp"
#include "swarmflow/spectral.hpp"

namespace swarmflow {

namespace {

// neighbour tables along each axis
struct Neighbours {
  std::array<std::vector<std::size_t>, 3> plus;
  std::array<std::vector<std::size_t>, 3> minus;
};

Neighbours neighbours(const TorusGrid& g) {
  Neighbours nb;
  for (int d = 0; d < g.dim(); ++d) {
    std::array<int, 3> e{0, 0, 0};
    e[d] = 1;
    std::array<int, 3> me{0, 0, 0};
    me[d] = -1;
    nb.plus[d].resize(g.size());
    nb.minus[d].resize(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      nb.plus[d][i] = g.shifted(i, e);
      nb.minus[d][i] = g.shifted(i, me);
    }
  }
  return nb;
}

struct ConservedRhs {
  ScalarField drho;
  VectorField dm;
};

// 1 + N conserved components, interface flux between L and R along axis d
struct Cell {
  double rho;
  Vec m;
  Vec u;
  double p;
  double c;
};

Cell make_cell(double rho, const Vec& m, const PressureLaw& law, int dim, double floor) {
  Cell c{rho, m, {0.0, 0.0, 0.0}, 0.0, 0.0};
  if (rho > floor)
    for (int k = 0; k < dim; ++k) c.u[k] = m[k] / rho;
  c.p = law.kind() == PressureLaw::Kind::zero ? 0.0 : law.p(std::max(rho, 0.0));
  c.c = law.sound_speed(rho);
  return c;
}

void physical_flux(const Cell& q, int d, int dim, double out[4]) {
  out[0] = q.m[d];
  for (int k = 0; k < dim; ++k) out[1 + k] = q.m[k] * q.u[d] + (k == d ? q.p : 0.0);
}

void interface_flux(const Cell& L, const Cell& R, int d, int dim, FluxKind kind, double out[4]) {
  double fl[4], fr[4];
  physical_flux(L, d, dim, fl);
  physical_flux(R, d, dim, fr);
  const double ul[4] = {L.rho, L.m[0], L.m[1], L.m[2]};
  const double ur[4] = {R.rho, R.m[0], R.m[1], R.m[2]};
  if (kind == FluxKind::rusanov) {
    const double a = std::max(std::abs(L.u[d]) + L.c, std::abs(R.u[d]) + R.c);
    for (int k = 0; k <= dim; ++k) out[k] = 0.5 * (fl[k] + fr[k]) - 0.5 * a * (ur[k] - ul[k]);
    return;
  }
  const double sl = std::min(L.u[d] - L.c, R.u[d] - R.c);
  const double sr = std::max(L.u[d] + L.c, R.u[d] + R.c);
  for (int k = 0; k <= dim; ++k) {
    if (sl >= 0.0) out[k] = fl[k];
    else if (sr <= 0.0) out[k] = fr[k];
    else out[k] = (sr * fl[k] - sl * fr[k] + sl * sr * (ur[k] - ul[k])) / (sr - sl);
  }
}

ConservedRhs conserved_rhs(const ScalarField& rho, const VectorField& m, const HydroModel& model,
                           const SchemeConfig& cfg, const Neighbours& nb) {
  const TorusGrid& g = rho.grid();
  const int dim = g.dim();
  const std::size_t n = g.size();
  const double inv_h = 1.0 / g.spacing();

  std::vector<Cell> cells(n);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) cells[i] = make_cell(rho[i], m.at(i), model.pressure(), dim, cfg.vacuum_floor);

  ConservedRhs out{ScalarField(g), VectorField(g)};
  std::vector<std::array<double, 4>> flux(n);
  for (int d = 0; d < dim; ++d) {
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n; ++i) {
      double f[4] = {0.0, 0.0, 0.0, 0.0};
      interface_flux(cells[i], cells[nb.plus[d][i]], d, dim, cfg.flux, f);
      flux[i] = {f[0], f[1], f[2], f[3]};
    }
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n; ++i) {
      const auto& fp = flux[i];
      const auto& fm = flux[nb.minus[d][i]];
      out.drho[i] -= (fp[0] - fm[0]) * inv_h;
      for (int k = 0; k < dim; ++k) out.dm.component(k)[i] -= (fp[1 + k] - fm[1 + k]) * inv_h;
    }
  }
  const VectorField u = velocity(rho, m, cfg.vacuum_floor);
  out.dm += compute_sources(rho, u, model).total();
  return out;
}

void apply_floor(ScalarField& rho, VectorField& m, double floor, StepLog* log, double t) {
  std::size_t vac = 0;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    if (!std::isfinite(rho[i])) throw NumericalBlowUp("non-finite density at t = " + std::to_string(t));
    if (rho[i] < -1e-12) {
      std::ostringstream msg;
      msg << "density " << rho[i] << " in cell " << i << " at t = " << t;
      throw NegativeDensity(msg.str());
    }
    if (rho[i] < floor) {
      rho[i] = floor;
      for (int d = 0; d < m.dim(); ++d) m.component(d)[i] = 0.0;
      ++vac;
    }
  }
  if (!m.all_finite()) throw NumericalBlowUp("non-finite momentum at t = " + std::to_string(t));
  if (log && vac > 0) {
    log->vacuum_cells += vac;
    log->events.push_back("t=" + std::to_string(t) + ": " + std::to_string(vac) +
                          " vacuum cell(s) clamped to the floor, momentum zeroed");
  }
}

}  // namespace

VectorField SourceTerms::total() const {
  VectorField t = friction;
  t += attraction;
  t += alignment;
  t += poisson;
  return t;
}

VectorField poisson_force(const ScalarField& rho) {
  ScalarField f = rho;
  const double mean = f.mean();
  for (double& v : f.values()) v -= mean;
  const VectorField grad = spectral_gradient(invert_laplacian(f));
  return scale(rho, grad) * -1.0;
}

SourceTerms compute_sources(const ScalarField& rho, const VectorField& u, const HydroModel& model) {
  const TorusGrid& g = rho.grid();
  require_same_grid(g, u.grid(), "compute_sources");
  const int dim = g.dim();
  SourceTerms s{VectorField(g), VectorField(g), VectorField(g), VectorField(g)};
  const ScalarField u2 = u.norm_squared();
  const FrictionFunction& H = model.friction();
  if (!H.is_constant_one()) {
    for (int d = 0; d < dim; ++d) {
      auto dst = s.friction.component(d);
      auto ud = u.component(d);
      for (std::size_t i = 0; i < g.size(); ++i) dst[i] = (1.0 - H(u2[i])) * rho[i] * ud[i];
    }
  }
  if (model.has_K()) s.attraction = scale(rho, spectral_gradient(model.K_conv(rho))) * -1.0;
  if (model.has_psi()) {
    const VectorField m = scale(rho, u);
    const VectorField psi_m = model.psi_conv(m);
    const ScalarField psi_rho = model.psi_conv(rho);
    s.alignment = scale(rho, psi_m) - scale(psi_rho, m);
  }
  if (model.poisson()) s.poisson = poisson_force(rho);
  return s;
}

double cfl_timestep(const HydroState& s, const HydroModel& model, const SchemeConfig& cfg) {
  const TorusGrid& g = s.grid();
  double smax = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double c = model.pressure().sound_speed(s.rho[i]);
    double sum = 0.0;
    for (int d = 0; d < g.dim(); ++d) {
      const double ud = s.rho[i] > cfg.vacuum_floor ? s.m.component(d)[i] / s.rho[i] : 0.0;
      sum += std::abs(ud) + c;
    }
    smax = std::max(smax, sum);
  }
  if (smax == 0.0) return std::numeric_limits<double>::infinity();
  return cfg.cfl * g.spacing() / smax;
}

HydroState step(const HydroState& s, const HydroModel& model, const SchemeConfig& cfg, double dt,
                StepLog* log) {
  require_same_grid(s.grid(), model.grid(), "hydro step");
  const Neighbours nb = neighbours(s.grid());
  auto euler = [&](const ScalarField& rho, const VectorField& m) {
    ConservedRhs r = conserved_rhs(rho, m, model, cfg, nb);
    ScalarField rho1 = rho + r.drho * dt;
    VectorField m1 = m + r.dm * dt;
    apply_floor(rho1, m1, cfg.vacuum_floor, log, s.t + dt);
    return std::make_pair(std::move(rho1), std::move(m1));
  };
  auto [rho1, m1] = euler(s.rho, s.m);
  if (cfg.time == TimeScheme::forward_euler) return HydroState(std::move(rho1), std::move(m1), s.t + dt);
  auto [rho2, m2] = euler(rho1, m1);
  ScalarField rho = (s.rho + rho2) * 0.5;
  VectorField m = (s.m + m2) * 0.5;
  apply_floor(rho, m, cfg.vacuum_floor, nullptr, s.t + dt);
  return HydroState(std::move(rho), std::move(m), s.t + dt);
}

Trajectory run(const HydroState& initial, const HydroModel& model, const SchemeConfig& cfg,
               double T, double output_dt) {
  if (T < 0.0) throw Error("run: T must be non-negative");
  Trajectory traj;
  std::vector<LedgerSample> ledger;
  auto record = [&](const HydroState& s) {
    DiagnosticsRow row{s.t, s.mass(), s.m.integral(), total_energy(s, model), dissipation_rate(s, model), 0.0};
    ledger.push_back({s.t, row.energy.total, row.rate.total()});
    const D3Report rep = d3_residual(ledger, std::numeric_limits<double>::infinity());
    row.d3_residual = rep.residual.back();
    traj.diagnostics.push_back(row);
    traj.snapshots.push_back(s);
  };
  HydroState s = initial;
  record(s);
  if (T == 0.0) return traj;
  if (!(output_dt > 0.0)) throw Error("run: output interval must be positive");
  const long outputs = std::max(1L, std::lround(T / output_dt));
  const double out_dt = T / static_cast<double>(outputs);
  StepLog log;
  bool warned = false;
  for (long k = 1; k <= outputs; ++k) {
    const double t_next = k * out_dt;
    while (s.t < t_next - 1e-12 * std::max(1.0, T)) {
      const double dt_cfl = cfl_timestep(s, model, cfg);
      double dt = cfg.fixed_dt.value_or(dt_cfl);
      if (cfg.fixed_dt && *cfg.fixed_dt > dt_cfl) {
        dt = dt_cfl;
        if (!warned) {
          std::ostringstream msg;
          msg << "t=" << s.t << ": requested dt " << *cfg.fixed_dt << " violates CFL, reduced to " << dt_cfl;
          traj.events.push_back(msg.str());
          warned = true;
        }
      }
      dt = std::min(dt, t_next - s.t);
      traj.max_dt = std::max(traj.max_dt, dt);
      s = step(s, model, cfg, dt, &log);
      ++traj.steps;
    }
    s.t = t_next;
    record(s);
  }
  traj.events.insert(traj.events.end(), log.events.begin(), log.events.end());
  return traj;
}

void write_diagnostics_csv(std::ostream& out, const Trajectory& traj, int dim) {
  out << "t,mass";
  for (int d = 1; d <= dim; ++d) out << ",momentum_" << d;
  out << ",kinetic_energy,internal_energy,interaction_energy,total_energy,dissipation_rate,d3_residual\n";
  out << std::setprecision(17);
  for (const auto& r : traj.diagnostics) {
    out << r.t << ',' << r.mass;
    for (int d = 0; d < dim; ++d) out << ',' << r.momentum[d];
    out << ',' << r.energy.kinetic << ',' << r.energy.internal << ',' << r.energy.interaction << ','
        << r.energy.total << ',' << r.rate.total() << ',' << r.d3_residual << '\n';
  }
}

// ------------------------------------------------------------ strong reference

ScalarField block_average(const ScalarField& fine, const TorusGrid& coarse) {
  const TorusGrid& g = fine.grid();
  if (g.dim() != coarse.dim() || g.cells_per_axis() % coarse.cells_per_axis() != 0)
    throw GridMismatch("block_average: fine grid is not a refinement of the coarse grid");
  const int f = g.cells_per_axis() / coarse.cells_per_axis();
  ScalarField out(coarse);
  for (std::size_t i = 0; i < g.size(); ++i) {
    auto ijk = g.unflatten(i);
    for (int d = 0; d < g.dim(); ++d) ijk[d] /= f;
    out[coarse.flatten(ijk)] += fine[i];
  }
  out *= static_cast<double>(coarse.size()) / static_cast<double>(g.size());
  return out;
}

VectorField mass_weighted_average(const ScalarField& rho, const VectorField& u, const TorusGrid& coarse) {
  const ScalarField rbar = block_average(rho, coarse);
  VectorField out(coarse);
  for (int d = 0; d < coarse.dim(); ++d) {
    ScalarField num = block_average(hadamard(rho, u.component_field(d)), coarse);
    for (std::size_t i = 0; i < coarse.size(); ++i) num[i] = rbar[i] > 0.0 ? num[i] / rbar[i] : 0.0;
    out.set_component(d, num);
  }
  return out;
}

namespace {

struct PrimitiveRhs {
  ScalarField dr;
  VectorField dU;
};

PrimitiveRhs primitive_rhs(const ScalarField& r, const VectorField& U, const HydroModel& model,
                           const Neighbours& nb) {
  const TorusGrid& g = r.grid();
  const int dim = g.dim();
  const std::size_t n = g.size();
  const double inv_h = 1.0 / g.spacing();
  const PressureLaw& law = model.pressure();

  std::vector<double> c(n), pp(n);
  for (std::size_t i = 0; i < n; ++i) {
    c[i] = law.sound_speed(r[i]);
    pp[i] = law.kind() == PressureLaw::Kind::zero ? 0.0 : law.potential_derivative(r[i]);
  }
  PrimitiveRhs out{ScalarField(g), VectorField(g)};
  std::vector<double> a(n), fr(n);
  for (int d = 0; d < dim; ++d) {
    auto Ud = U.component(d);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = nb.plus[d][i];
      a[i] = std::max(std::abs(Ud[i]) + c[i], std::abs(Ud[j]) + c[j]);
      fr[i] = 0.5 * (r[i] * Ud[i] + r[j] * Ud[j]) - 0.5 * a[i] * (r[j] - r[i]);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t ip = nb.plus[d][i], im = nb.minus[d][i];
      out.dr[i] -= (fr[i] - fr[im]) * inv_h;
      // transport, pressure and Lax-Friedrichs diffusion along axis d
      for (int k = 0; k < dim; ++k) {
        auto Uk = U.component(k);
        const double central = 0.5 * (Uk[ip] - Uk[im]) * inv_h;
        const double diff = 0.5 * (a[i] * (Uk[ip] - Uk[i]) - a[im] * (Uk[i] - Uk[im])) * inv_h;
        out.dU.component(k)[i] += -Ud[i] * central + diff;
      }
      out.dU.component(d)[i] -= 0.5 * (pp[ip] - pp[im]) * inv_h;
    }
  }
  // sources divided by rho
  const ScalarField U2 = U.norm_squared();
  const FrictionFunction& H = model.friction();
  VectorField src(g);
  if (!H.is_constant_one())
    for (int k = 0; k < dim; ++k)
      for (std::size_t i = 0; i < n; ++i) src.component(k)[i] = (1.0 - H(U2[i])) * U.component(k)[i];
  if (model.has_K()) src -= spectral_gradient(model.K_conv(r));
  if (model.has_psi()) {
    const VectorField psi_m = model.psi_conv(scale(r, U));
    const ScalarField psi_r = model.psi_conv(r);
    src += psi_m - scale(psi_r, U);
  }
  if (model.poisson()) {
    ScalarField f = r;
    const double mean = f.mean();
    for (double& v : f.values()) v -= mean;
    src -= spectral_gradient(invert_laplacian(f));
  }
  out.dU += src;
  return out;
}

double max_velocity_gradient(const VectorField& U, const Neighbours& nb) {
  const TorusGrid& g = U.grid();
  double m = 0.0;
  for (int k = 0; k < g.dim(); ++k)
    for (int d = 0; d < g.dim(); ++d)
      for (std::size_t i = 0; i < g.size(); ++i)
        m = std::max(m, std::abs(U.component(k)[nb.plus[d][i]] - U.component(k)[nb.minus[d][i]]) /
                            (2.0 * g.spacing()));
  return m;
}

}  // namespace

StrongTrajectory strong_reference(const ScalarField& r0, const VectorField& U0, const HydroModel& fine,
                                  const TorusGrid& coarse, double T, double output_dt,
                                  const StrongOptions& opt) {
  const TorusGrid& g = r0.grid();
  require_same_grid(g, fine.grid(), "strong_reference");
  const Neighbours nb = neighbours(g);
  StrongTrajectory out;
  ScalarField r = r0;
  VectorField U = U0;
  double t = 0.0;
  auto record = [&] {
    out.t.push_back(t);
    out.r.push_back(block_average(r, coarse));
    out.U.push_back(mass_weighted_average(r, U, coarse));
    out.grad_U_max.push_back(max_velocity_gradient(U, nb));
  };
  record();
  out.t_strong = T;
  if (T <= 0.0) return out;
  const long outputs = std::max(1L, std::lround(T / output_dt));
  const double out_dt = T / static_cast<double>(outputs);
  for (long k = 1; k <= outputs; ++k) {
    const double t_next = k * out_dt;
    while (t < t_next - 1e-12 * std::max(1.0, T)) {
      double smax = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) {
        double s = 0.0;
        for (int d = 0; d < g.dim(); ++d) s += std::abs(U.component(d)[i]) + fine.pressure().sound_speed(r[i]);
        smax = std::max(smax, s);
      }
      double dt = smax > 0.0 ? opt.cfl * g.spacing() / smax : t_next - t;
      dt = std::min(dt, t_next - t);
      const PrimitiveRhs k1 = primitive_rhs(r, U, fine, nb);
      const ScalarField r1 = r + k1.dr * dt;
      const VectorField U1 = U + k1.dU * dt;
      const PrimitiveRhs k2 = primitive_rhs(r1, U1, fine, nb);
      r = (r + r1 + k2.dr * dt) * 0.5;
      U = (U + U1 + k2.dU * dt) * 0.5;
      t += dt;
      if (r.min() <= 0.0 || !r.all_finite() || !U.all_finite())
        throw NumericalBlowUp("strong reference lost positivity at t = " + std::to_string(t));
    }
    t = t_next;
    record();
    if (out.grad_U_max.back() > opt.blowup_threshold) {
      out.blown_up = true;
      out.t_strong = t;
      break;
    }
  }
  return out;
}

}  // namespace swarmflow
