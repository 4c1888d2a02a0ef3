#include "swarmflow/convex_integration.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

#include "swarmflow/errors.hpp"
#include "swarmflow/spectral.hpp"
#include "swarmflow/sym_eigen.hpp"

namespace swarmflow {

namespace {

VectorField momentum(const VectorField& v, const Vec& V, const ScalarField& Phi) {
  return add_constant(v + spectral_gradient(Phi), V);
}

ScalarField friction_factor(const ScalarField& e, const ScalarField& rho, const FrictionFunction& H) {
  ScalarField out(e.grid());
  for (std::size_t i = 0; i < e.size(); ++i) out[i] = H(2.0 * e[i] / rho[i]);
  return out;
}

}  // namespace

ScalarField DensityPotential::rho(double t) const {
  return rho0 - lap_Phi0 * (eps * (1.0 - std::exp(-t / eps)));
}

ScalarField DensityPotential::Phi(double t) const { return Phi0 * std::exp(-t / eps); }

ScalarField DensityPotential::dPhi_dt(double t) const { return Phi0 * (-std::exp(-t / eps) / eps); }

ScalarField DensityPotential::drho_dt(double t) const { return lap_Phi0 * (-std::exp(-t / eps)); }

DensityPotential build_density_potential(const ScalarField& rho0, const ScalarField& Phi0, double T, double floor) {
  require_same_grid(rho0.grid(), Phi0.grid(), "build_density_potential");
  const double m = Phi0.mean();
  if (std::abs(m) > 1e-12 * std::max(1.0, Phi0.max_abs()))
    throw NonZeroMean("build_density_potential: Phi0 must have zero mean");
  if (rho0.min() < floor) throw NegativeDensity("build_density_potential: rho0 below the floor");
  DensityPotential dp{rho0, Phi0, spectral_laplacian(Phi0), 1.0, T};
  // rho(t) is affine in s = eps (1 - exp(-t/eps)), which grows in t and in eps
  double s_max = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < rho0.size(); ++i)
    if (dp.lap_Phi0[i] > 0.0) s_max = std::min(s_max, (rho0[i] - floor) / dp.lap_Phi0[i]);
  auto s_of = [&](double eps) { return eps * (1.0 - std::exp(-T / eps)); };
  if (s_of(1.0) <= s_max) return dp;
  if (s_of(kMinDecayScale) > s_max)
    throw NegativeDensity("build_density_potential: Phi0 too large for the density floor");
  double lo = kMinDecayScale, hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    (s_of(mid) <= s_max ? lo : hi) = mid;
  }
  dp.eps = lo;
  return dp;
}

Vec v_ode_rhs(const Vec& V, const VSlice& s, const HydroModel& model) {
  const TorusGrid& g = s.rho.grid();
  const int dim = g.dim();
  const double vol = g.domain_volume();
  const ScalarField Hf = friction_factor(s.e, s.rho, model.friction());
  double decay = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) decay += Hf[i] - 1.0;
  decay *= g.cell_volume() / vol;

  const VectorField w = s.v + spectral_gradient(s.Phi);
  ScalarField weight = Hf;
  if (model.has_psi()) weight += model.psi_conv(s.rho);
  VectorField src = scale(weight, w) * -1.0;
  if (model.has_psi()) src += scale(s.rho, model.psi_conv(w));
  if (model.has_K()) src -= scale(s.rho, spectral_gradient(model.K_conv(s.rho)));
  const Vec mean = src.integral();

  Vec out{0.0, 0.0, 0.0};
  for (int d = 0; d < dim; ++d) out[d] = -V[d] * decay + mean[d] / vol;
  return out;
}

std::vector<Vec> solve_V_ode(const SliceFn& slices, const std::vector<double>& times, const Vec& V0,
                             const HydroModel& model, int substeps) {
  std::vector<Vec> out;
  if (times.empty()) return out;
  out.push_back(V0);
  Vec V = V0;
  auto axpy = [](const Vec& a, double s, const Vec& b) {
    return Vec{a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]};
  };
  for (std::size_t k = 1; k < times.size(); ++k) {
    const double h = (times[k] - times[k - 1]) / substeps;
    for (int j = 0; j < substeps; ++j) {
      const double t = times[k - 1] + j * h;
      const VSlice s0 = slices(t), sm = slices(t + 0.5 * h), s1 = slices(t + h);
      const Vec k1 = v_ode_rhs(V, s0, model);
      const Vec k2 = v_ode_rhs(axpy(V, 0.5 * h, k1), sm, model);
      const Vec k3 = v_ode_rhs(axpy(V, 0.5 * h, k2), sm, model);
      const Vec k4 = v_ode_rhs(axpy(V, h, k3), s1, model);
      for (int d = 0; d < 3; ++d) V[d] += h / 6.0 * (k1[d] + 2.0 * k2[d] + 2.0 * k3[d] + k4[d]);
    }
    out.push_back(V);
  }
  return out;
}

VectorField assemble_Xi(const VectorField& v, const Vec& V, const ScalarField& Phi, const ScalarField& rho,
                        const ScalarField& e, const HydroModel& model) {
  const VectorField m = momentum(v, V, Phi);
  ScalarField fr = friction_factor(e, rho, model.friction());
  for (double& x : fr.values()) x = 1.0 - x;
  VectorField Xi = scale(fr, m);
  if (model.has_K()) Xi -= scale(rho, spectral_gradient(model.K_conv(rho)));
  if (model.has_psi()) Xi += scale(rho, model.psi_conv(m)) - scale(model.psi_conv(rho), m);
  return Xi;
}

VectorField mean_free(const VectorField& Xi) {
  Vec m = Xi.mean();
  for (double& x : m) x = -x;
  return add_constant(Xi, m);
}

SymTensorField solve_elliptic_M(const VectorField& G) {
  const TorusGrid& g = G.grid();
  const int dim = g.dim();
  if (dim == 1) throw Error("solve_elliptic_M: the trace-free corrector is undefined for N = 1");
  double scale_g = 0.0;
  for (int d = 0; d < dim; ++d) scale_g = std::max(scale_g, G.component_field(d).max_abs());
  const Vec mean = G.mean();
  for (int d = 0; d < dim; ++d)
    if (std::abs(mean[d]) > 1e-12 * scale_g && std::abs(mean[d]) > 0.0)
      throw NonZeroMean("solve_elliptic_M: G has non-zero mean");

  std::array<std::vector<Complex>, 3> Gh, wh;
  for (int d = 0; d < dim; ++d) {
    Gh[d] = forward_transform(g, G.component(d));
    wh[d].assign(g.size(), Complex(0.0, 0.0));
  }
  const double c = 1.0 - 2.0 / dim;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const Vec kap = wavevector(g, k);
    const double k2 = norm2(kap);
    if (k2 == 0.0) continue;
    Complex kg(0.0, 0.0);
    for (int d = 0; d < dim; ++d) kg += kap[d] * Gh[d][k];
    // (|k|^2 I + c k k^T)^{-1} by Sherman-Morrison
    for (int d = 0; d < dim; ++d) wh[d][k] = (Gh[d][k] - c / (1.0 + c) * kap[d] * kg / k2) / k2;
  }
  SymTensorField M(g, true);
  std::vector<Complex> buf(g.size());
  for (int i = 0; i < dim; ++i)
    for (int j = i; j < dim; ++j) {
      for (std::size_t k = 0; k < g.size(); ++k) {
        const Vec kap = wavevector(g, k);
        Complex val = Complex(0.0, 1.0) * (kap[j] * wh[i][k] + kap[i] * wh[j][k]);
        if (i == j) {
          Complex div(0.0, 0.0);
          for (int d = 0; d < dim; ++d) div += Complex(0.0, 1.0) * kap[d] * wh[d][k];
          val -= 2.0 / dim * div;
        }
        buf[k] = val;
      }
      const auto vals = inverse_transform(g, buf);
      for (std::size_t cell = 0; cell < g.size(); ++cell) M.set(cell, i, j, vals[cell]);
    }
  return M;
}

double elliptic_residual(const SymTensorField& M, const VectorField& G) {
  const VectorField r = M.divergence() + G;
  double top = 0.0, bottom = 0.0;
  for (int d = 0; d < G.dim(); ++d) {
    top = std::max(top, r.component_field(d).max_abs());
    bottom = std::max(bottom, G.component_field(d).max_abs());
  }
  return bottom > 0.0 ? top / bottom : top;
}

ScalarField energy_constraint_e(double Lambda, const ScalarField& rho, const ScalarField& dPhi_dt,
                                const PressureLaw& law) {
  const double half_n = 0.5 * rho.grid().dim();
  ScalarField e(rho.grid());
  for (std::size_t i = 0; i < rho.size(); ++i) {
    e[i] = Lambda - half_n * (law.p(rho[i]) + dPhi_dt[i]);
    if (!(e[i] > 0.0))
      throw NonPositiveEnergy("energy_constraint_e: e = " + std::to_string(e[i]) + " in cell " + std::to_string(i));
  }
  return e;
}

ScalarField margin_field(const VectorField& v, const Vec& V, const ScalarField& Phi, const ScalarField& rho,
                         const SymTensorField& F, const SymTensorField& M, const ScalarField& e) {
  const TorusGrid& g = rho.grid();
  const int dim = g.dim();
  const VectorField m = momentum(v, V, Phi);
  ScalarField out(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    Mat a = outer(m.at(i), dim);
    const Mat f = F.matrix(i), mm = M.matrix(i);
    for (int p = 0; p < dim; ++p)
      for (int q = 0; q < dim; ++q) a[p][q] = a[p][q] / rho[i] - f[p][q] + mm[p][q];
    out[i] = e[i] - 0.5 * dim * lambda_max(a, dim);
  }
  return out;
}

AuditReport subsolution_check(const SubsolutionCandidate& c, const HydroModel& model, double threshold) {
  AuditReport rep;
  rep.threshold = threshold;
  rep.min_margin = std::numeric_limits<double>::infinity();
  bool any_judged = false;
  for (const auto& s : c.slices) {
    const TorusGrid& g = s.rho.grid();
    const std::string at = " at t = " + std::to_string(s.t);
    const double vscale = std::max(1.0, s.v.max_norm());
    if (spectral_divergence(s.v).max_abs() > 1e-10 * vscale) rep.violations.push_back("div v != 0" + at);
    const Vec vm = s.v.mean();
    if (std::sqrt(norm2(vm)) > 1e-10 * vscale) rep.violations.push_back("mean v != 0" + at);
    if (s.F.max_abs_trace() > 1e-10 * std::max(1.0, s.F.max_abs())) rep.violations.push_back("tr F != 0" + at);
    if (!(s.rho.min() > 0.0)) {
      rep.violations.push_back("rho not positive" + at);
      continue;
    }
    SliceMargin sm{s.t, -std::numeric_limits<double>::infinity(), 0, s.t > 0.0};
    try {
      const ScalarField e = energy_constraint_e(s.Lambda, s.rho, s.dPhi_dt, model.pressure());
      const VectorField G = mean_free(assemble_Xi(s.v, s.V, s.Phi, s.rho, e, model));
      const SymTensorField M = g.dim() == 1 ? SymTensorField(g, true) : solve_elliptic_M(G);
      const ScalarField mf = margin_field(s.v, s.V, s.Phi, s.rho, s.F, M, e);
      sm.margin = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < g.size(); ++i)
        if (mf[i] < sm.margin) {
          sm.margin = mf[i];
          sm.worst_cell = i;
        }
    } catch (const NonPositiveEnergy& err) {
      rep.violations.push_back(std::string(err.what()) + at);
    }
    if (sm.judged) {
      any_judged = true;
      if (sm.margin < rep.min_margin) {
        rep.min_margin = sm.margin;
        rep.worst_t = s.t;
        rep.worst_x = g.cell_center(sm.worst_cell);
      }
    }
    rep.slices.push_back(sm);
  }
  rep.pass = any_judged && rep.violations.empty() && rep.min_margin > threshold;
  return rep;
}

void write_audit_report(std::ostream& out, const AuditReport& rep) {
  out << std::setprecision(12);
  if (rep.has_lambda0) out << "lambda0 = " << rep.lambda0 << "\n";
  out << "min_margin = " << rep.min_margin << "\n"
      << "threshold = " << rep.threshold << "\n"
      << "worst_t = " << rep.worst_t << "\n"
      << "worst_x = " << rep.worst_x[0] << ' ' << rep.worst_x[1] << ' ' << rep.worst_x[2] << "\n"
      << "slices = " << rep.slices.size() << "\n";
  for (const auto& v : rep.violations) out << "violation: " << v << "\n";
  out << "verdict = " << (rep.pass ? "pass" : "fail") << "\n";
}

void write_audit_csv(std::ostream& out, const AuditReport& rep) {
  out << "t,margin,worst_cell,judged\n" << std::setprecision(17);
  for (const auto& s : rep.slices) out << s.t << ',' << s.margin << ',' << s.worst_cell << ',' << (s.judged ? 1 : 0) << '\n';
}

double lambda_margin(double Lambda, const VectorField& v0, const Vec& V0, const DensityPotential& dp,
                     const HydroModel& model, const Lambda0Options& opt) {
  const TorusGrid& g = v0.grid();
  const PressureLaw& law = model.pressure();
  auto slice = [&](double t) {
    const ScalarField rho = dp.rho(t);
    const ScalarField dphi = dp.dPhi_dt(t);
    ScalarField e(g);
    for (std::size_t i = 0; i < g.size(); ++i) e[i] = Lambda - 0.5 * g.dim() * (law.p(rho[i]) + dphi[i]);
    return VSlice{v0, rho, dp.Phi(t), e};
  };
  for (double t : opt.times) {
    const VSlice s = slice(t);
    if (!(s.e.min() > 0.0)) return -std::numeric_limits<double>::infinity();
  }
  const std::vector<Vec> V = solve_V_ode(slice, opt.times, V0, model, opt.substeps);
  const SymTensorField F(g, true);
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < opt.times.size(); ++k) {
    if (opt.times[k] <= 0.0) continue;
    const VSlice s = slice(opt.times[k]);
    const VectorField G = mean_free(assemble_Xi(v0, V[k], s.Phi, s.rho, s.e, model));
    const SymTensorField M = g.dim() == 1 ? SymTensorField(g, true) : solve_elliptic_M(G);
    worst = std::min(worst, margin_field(v0, V[k], s.Phi, s.rho, F, M, s.e).min());
  }
  return worst;
}

Lambda0Result find_lambda0(const VectorField& v0, const Vec& V0, const DensityPotential& dp,
                           const HydroModel& model, const Lambda0Options& opt) {
  const TorusGrid& g = v0.grid();
  // below this Lambda the constraint e > 0 fails somewhere
  double floor = 0.0;
  for (double t : opt.times) {
    const ScalarField rho = dp.rho(t), dphi = dp.dPhi_dt(t);
    for (std::size_t i = 0; i < g.size(); ++i)
      floor = std::max(floor, 0.5 * g.dim() * (model.pressure().p(rho[i]) + dphi[i]));
  }
  Lambda0Result res;
  double L = floor + 1.0;
  bool converged = false;
  for (int it = 0; it < opt.max_iterations; ++it) {
    ++res.iterations;
    const double m = lambda_margin(L, v0, V0, dp, model, opt);
    const double target = std::isfinite(m) ? L + opt.threshold - m : L + 1.0;
    const double next = std::max(floor, L + opt.damping * (target - L));
    if (std::abs(next - L) < 0.1 * opt.tolerance) {
      L = next;
      converged = true;
      break;
    }
    L = next;
  }
  if (!converged) throw ConvergenceFailure("find_lambda0: fixed point did not settle");

  double hi = L + opt.tolerance;
  for (int k = 0; lambda_margin(hi, v0, V0, dp, model, opt) < opt.threshold; ++k) {
    if (k > 60) throw ConvergenceFailure("find_lambda0: no admissible Lambda above the fixed point");
    hi += (hi - floor) + opt.tolerance;
  }
  double lo = floor;
  while (hi - lo > opt.tolerance) {
    const double mid = 0.5 * (lo + hi);
    (lambda_margin(mid, v0, V0, dp, model, opt) >= opt.threshold ? hi : lo) = mid;
  }
  res.lambda0 = hi;
  res.margin = lambda_margin(hi, v0, V0, dp, model, opt);
  return res;
}

double standard_inequality_slack(const Vec& h, double r, const Mat& Ht, int dim) {
  Mat a = outer(h, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) a[i][j] = a[i][j] / r - Ht[i][j];
  double h2 = 0.0;
  for (int i = 0; i < dim; ++i) h2 += h[i] * h[i];
  return 0.5 * dim * lambda_max(a, dim) - 0.5 * h2 / r;
}

bool standard_inequality_check(const Vec& h, double r, const Mat& Ht, int dim) {
  const double scale = std::max({1.0, norm2(h) / r});
  return standard_inequality_slack(h, r, Ht, dim) >= -1e-12 * scale;
}

double DissipativeLambda::operator()(double t) const { return lambda0 + std::exp(-lambda * t); }

double DissipativeLambda::derivative(double t) const { return -lambda * std::exp(-lambda * t); }

DissipativeLambda dissipative_lambda(double lambda0, double c, double domain_volume, double T) {
  if (!std::isfinite(c) || c < 0.0) throw Error("dissipative_lambda: dissipation bound c unavailable");
  DissipativeLambda out{1.0, lambda0, c, domain_volume, T};
  if (c == 0.0) return out;
  // worst time is the end of the horizon: (|Omega| lambda - c) exp(-lambda T) >= c (1 + Lambda0)
  auto ok = [&](double lam) {
    return (domain_volume * lam - c) * std::exp(-lam * T) >= c * (1.0 + lambda0) &&
           domain_volume * lam - c >= c * (1.0 + lambda0);
  };
  for (double lam = 1.0; lam < 1e12; lam *= 2.0) {
    if (ok(lam)) {
      out.lambda = lam;
      return out;
    }
    // past the maximiser 1/T + c/|Omega| the left side only decreases
    if (T > 0.0 && lam > 1.0 / T + c / domain_volume) break;
  }
  throw Error("dissipative_lambda: no power of two satisfies the inequality on this horizon");
}

double dissipation_lower_bound(double Lambda, const ScalarField& rho, const HydroModel& model) {
  const TorusGrid& g = rho.grid();
  const double half_n = 0.5 * g.dim();
  const ScalarField psi_rho = model.psi_conv(rho);
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double e = Lambda - half_n * model.pressure().p(rho[i]);
    s += 2.0 * e * (1.0 - model.friction()(2.0 * e / rho[i])) - 4.0 * e * psi_rho[i];
  }
  return s * g.cell_volume();
}

double measure_dissipation_constant(double lambda0, const ScalarField& rho, const HydroModel& model) {
  double c = 0.0;
  for (int k = 0; k <= 100; ++k) {
    const double L = lambda0 + 0.01 * k;
    c = std::max(c, std::max(0.0, -dissipation_lower_bound(L, rho, model)) / (1.0 + L));
  }
  return c;
}

double kinetic_energy_defect(const CandidateSlice& s, const PressureLaw& law) {
  const VectorField m = momentum(s.v, s.V, s.Phi);
  const ScalarField m2 = m.norm_squared();
  const double half_n = 0.5 * s.rho.grid().dim();
  double d = 0.0;
  for (std::size_t i = 0; i < s.rho.size(); ++i)
    d += 0.5 * m2[i] / s.rho[i] - (s.Lambda - half_n * (law.p(s.rho[i]) + s.dPhi_dt[i]));
  return d * s.rho.grid().cell_volume();
}

}  // namespace swarmflow
