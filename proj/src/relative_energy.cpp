#include "swarmflow/relative_energy.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

#include "swarmflow/errors.hpp"
#include "swarmflow/spectral.hpp"

namespace swarmflow {

namespace {

double grad_max(const ScalarField& f) {
  const VectorField g = spectral_gradient(f);
  return g.max_norm();
}

ScalarField zero_mean(ScalarField f) {
  const double m = f.mean();
  for (double& v : f.values()) v -= m;
  return f;
}

// psi * (a V) - V psi * a
VectorField alignment_difference(const ScalarField& a, const VectorField& V, const HydroModel& model) {
  return model.psi_conv(scale(a, V)) - scale(model.psi_conv(a), V);
}

void require_positive(const ScalarField& r) {
  if (!(r.min() > 0.0)) throw NegativeDensity("strong density must stay positive, min r = " + std::to_string(r.min()));
}

}  // namespace

StrongSolution make_strong_solution(std::vector<double> t, std::vector<ScalarField> r, std::vector<VectorField> U) {
  if (t.size() != r.size() || t.size() != U.size() || t.empty())
    throw TimeGridMismatch("strong solution: sample counts differ");
  StrongSolution s;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    require_positive(r[k]);
    lo = std::min(lo, r[k].min());
    hi = std::max(hi, r[k].max());
    s.grad_r_max.push_back(grad_max(r[k]));
    double gu = 0.0;
    for (int d = 0; d < U[k].dim(); ++d) gu = std::max(gu, grad_max(U[k].component_field(d)));
    s.grad_U_max.push_back(gu);
  }
  s.bounds = {0.9 * lo, 1.1 * hi};
  s.t = std::move(t);
  s.r = std::move(r);
  s.U = std::move(U);
  return s;
}

StrongSolution make_strong_solution(const StrongTrajectory& traj) {
  return make_strong_solution(traj.t, traj.r, traj.U);
}

StrongSample strong_sample(const StrongSolution& s, std::size_t k) {
  const std::size_t n = s.t.size();
  StrongSample out{s.r[k], s.U[k], ScalarField(s.r[k].grid()), VectorField(s.r[k].grid())};
  if (n < 2) return out;
  const std::size_t a = k == 0 ? 0 : k - 1;
  const std::size_t b = k + 1 == n ? k : k + 1;
  const double dt = s.t[b] - s.t[a];
  out.dr_dt = (s.r[b] - s.r[a]) * (1.0 / dt);
  out.dU_dt = (s.U[b] - s.U[a]) * (1.0 / dt);
  return out;
}

double relative_energy(const ScalarField& rho, const VectorField& u, const ScalarField& r, const VectorField& U,
                       const PressureLaw& law) {
  require_same_grid(rho.grid(), r.grid(), "relative_energy");
  require_positive(r);
  const ScalarField w2 = (u - U).norm_squared();
  double s = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    s += 0.5 * rho[i] * w2[i];
    if (law.kind() != PressureLaw::Kind::zero)
      s += law.potential(std::max(0.0, rho[i])) - law.potential_derivative(r[i]) * (rho[i] - r[i]) -
           law.potential(r[i]);
  }
  return s * rho.grid().cell_volume();
}

ScalarField interaction_potential(const HydroModel& model, const ScalarField& f) {
  ScalarField out = model.K_conv(f);
  if (model.poisson()) out += invert_laplacian(zero_mean(f));
  return out;
}

double interaction_bracket(const ScalarField& rho, const ScalarField& r, const HydroModel& model) {
  const ScalarField d = r - rho;
  return 0.5 * inner(d, interaction_potential(model, d));
}

double relative_dissipation(const ScalarField& rho, const VectorField& u, const VectorField& U,
                            const HydroModel& model) {
  return 0.5 * alignment_pairing(rho, u - U, model);
}

double RemainderTerms::total() const {
  return convective + attraction + interaction + pressure + friction + alignment_mismatch + alignment_strong;
}

std::array<double, 7> RemainderTerms::terms() const {
  return {convective, attraction, interaction, pressure, friction, alignment_mismatch, alignment_strong};
}

RemainderTerms remainder(const ScalarField& rho, const VectorField& u, const StrongSample& strong,
                         const HydroModel& model) {
  const TorusGrid& g = rho.grid();
  require_same_grid(g, strong.r.grid(), "remainder");
  require_positive(strong.r);
  const int dim = g.dim();
  const ScalarField& r = strong.r;
  const VectorField& U = strong.U;
  const VectorField w = u - U;
  RemainderTerms t;

  // material derivative of U along u
  VectorField DU = strong.dU_dt;
  for (int k = 0; k < dim; ++k) {
    const VectorField gk = spectral_gradient(U.component_field(k));
    const ScalarField adv = dot(u, gk);
    auto dst = DU.component(k);
    for (std::size_t i = 0; i < g.size(); ++i) dst[i] += adv[i];
  }
  t.convective = -inner(scale(rho, DU), w);

  if (model.has_K() || model.poisson()) {
    t.attraction = -inner(scale(rho, spectral_gradient(interaction_potential(model, r))), w);
    const ScalarField d = rho - r;
    t.interaction = inner(scale(d, spectral_gradient(interaction_potential(model, d))), U);
  }

  const PressureLaw& law = model.pressure();
  if (law.kind() != PressureLaw::Kind::zero) {
    ScalarField Pp(g), dPp(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
      Pp[i] = law.potential_derivative(r[i]);
      dPp[i] = law.dp(r[i]) / r[i] * strong.dr_dt[i];
    }
    const VectorField gradPp = spectral_gradient(Pp);
    const ScalarField divU = spectral_divergence(U);
    const VectorField flux_diff = scale(r, U) - scale(rho, u);
    const ScalarField gp = dot(gradPp, flux_diff);
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
      s += (r[i] - rho[i]) * dPp[i] + gp[i] - divU[i] * (law.p(std::max(0.0, rho[i])) - law.p(r[i]));
    t.pressure = s * g.cell_volume();
  }

  if (!model.friction().is_constant_one()) {
    const ScalarField u2 = u.norm_squared();
    const ScalarField uw = dot(u, w);
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) s += (1.0 - model.friction()(u2[i])) * rho[i] * uw[i];
    t.friction = s * g.cell_volume();
  }

  if (model.has_psi()) {
    const VectorField rw = scale(rho, w);
    t.alignment_mismatch = inner(rw, alignment_difference(rho - r, U, model));
    t.alignment_strong = inner(rw, alignment_difference(r, U, model));
  }
  return t;
}

double pressure_block_reduced(const ScalarField& rho, const ScalarField& r, const VectorField& U,
                              const PressureLaw& law) {
  const ScalarField divU = spectral_divergence(U);
  double s = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i)
    s -= divU[i] * (law.p(rho[i]) - law.dp(r[i]) * (rho[i] - r[i]) - law.p(r[i]));
  return s * rho.grid().cell_volume();
}

RelEnergyReport rei_residual(const std::vector<HydroState>& weak, const StrongSolution& strong,
                             const HydroModel& model, double tolerance, double gronwall_budget) {
  if (weak.size() != strong.t.size()) throw TimeGridMismatch("rei_residual: sample counts differ");
  for (std::size_t k = 0; k < weak.size(); ++k) {
    if (std::abs(weak[k].t - strong.t[k]) > 1e-9 * std::max(1.0, std::abs(strong.t[k])))
      throw TimeGridMismatch("rei_residual: output times differ at sample " + std::to_string(k));
    require_same_grid(weak[k].grid(), strong.r[k].grid(), "rei_residual");
  }
  RelEnergyReport rep;
  rep.tolerance = tolerance;
  rep.gronwall_budget = gronwall_budget;
  rep.max_residual = -std::numeric_limits<double>::infinity();
  double lhs0 = 0.0, integral = 0.0, diss_integral = 0.0;
  double prev_R = 0.0, prev_D = 0.0;
  for (std::size_t k = 0; k < weak.size(); ++k) {
    const StrongSample s = strong_sample(strong, k);
    const ScalarField& rho = weak[k].rho;
    const VectorField u = velocity(weak[k]);
    const double E = relative_energy(rho, u, s.r, s.U, model.pressure());
    const double bracket = interaction_bracket(rho, s.r, model);
    const double D = relative_dissipation(rho, u, s.U, model);
    const double R = remainder(rho, u, s, model).total();
    if (k == 0) {
      lhs0 = E + bracket;
    } else {
      const double dt = strong.t[k] - strong.t[k - 1];
      integral += 0.5 * dt * (R + prev_R);
      diss_integral += 0.5 * dt * (D + prev_D);
    }
    prev_R = R;
    prev_D = D;
    const double res = E + bracket - lhs0 + diss_integral - integral;
    rep.t.push_back(strong.t[k]);
    rep.E.push_back(E);
    rep.remainder.push_back(integral);
    rep.residual.push_back(res);
    rep.max_residual = std::max(rep.max_residual, res);
    if (res > tolerance) rep.inequality_holds = false;
  }
  const GronwallFit fit = gronwall_fit(rep.t, rep.E, gronwall_budget);
  rep.gronwall_c = fit.c;
  rep.gronwall_ok = fit.verdict;
  return rep;
}

void write_rel_energy_csv(std::ostream& out, const RelEnergyReport& rep) {
  out << "t,E,remainder,residual\n" << std::setprecision(17);
  for (std::size_t k = 0; k < rep.t.size(); ++k)
    out << rep.t[k] << ',' << rep.E[k] << ',' << rep.remainder[k] << ',' << rep.residual[k] << '\n';
}

void write_rel_energy_summary(std::ostream& out, const RelEnergyReport& rep) {
  out << std::setprecision(10) << "gronwall_c = " << rep.gronwall_c << "\n"
      << "gronwall_budget = " << rep.gronwall_budget << "\n"
      << "gronwall_verdict = " << (rep.gronwall_ok ? "pass" : "fail") << "\n"
      << "rei_tolerance = " << rep.tolerance << "\n"
      << "rei_max_residual = " << rep.max_residual << "\n"
      << "rei_verdict = " << (rep.inequality_holds ? "pass" : "fail") << "\n";
}

double cutoff(double rho, double low, double high, double width) {
  if (rho >= low && rho <= high) return 1.0;
  const double d = rho < low ? (low - rho) / width : (rho - high) / width;
  if (d >= 1.0) return 0.0;
  const double s = 1.0 - d;
  return s * s * (3.0 - 2.0 * s);
}

EssResSplit ess_res_split(const ScalarField& rho, const StrongBounds& bounds) {
  EssResSplit s{bounds.rho_low, bounds.rho_high, 0.1 * bounds.rho_low, ScalarField(rho.grid()), {}, {}};
  s.essential.resize(rho.size());
  s.residual.resize(rho.size());
  for (std::size_t i = 0; i < rho.size(); ++i) {
    const double c = cutoff(rho[i], s.rho_low, s.rho_high, s.width);
    s.chi[i] = c;
    s.essential[i] = c > 0.0;
    s.residual[i] = c < 1.0;
  }
  return s;
}

CoercivityReport coercivity_check(const ScalarField& rho, const VectorField& u, const ScalarField& r,
                                  const VectorField& U, const PressureLaw& law, const StrongBounds& bounds) {
  const EssResSplit split = ess_res_split(rho, bounds);
  const ScalarField w2 = (u - U).norm_squared();
  CoercivityReport rep;
  double c = std::numeric_limits<double>::infinity();
  double l1_ess = 0.0, l1_res = 0.0, l2_ess = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    const double chi = split.chi[i];
    const double x = rho[i];
    const double lhs = 0.5 * x * w2[i] + law.potential(std::max(0.0, x)) - law.potential_derivative(r[i]) * (x - r[i]) -
                       law.potential(r[i]);
    const double res = 1.0 - chi;
    const double rhs = x * w2[i] + chi * chi * w2[i] + chi * chi * (x - r[i]) * (x - r[i]) +
                       res * (1.0 + law.p(std::max(0.0, x)) + x * std::max(0.0, std::log(std::max(x, 1e-300))));
    if (rhs > 0.0) c = std::min(c, lhs / rhs);
    l1_ess += std::abs(chi * (x - r[i]));
    l1_res += std::abs(res * (x - r[i]));
    l2_ess += chi * chi * (x - r[i]) * (x - r[i]);
  }
  const double hN = rho.grid().cell_volume();
  rep.c = std::isfinite(c) ? std::max(0.0, c) : 0.0;
  rep.holds = std::isfinite(c) && c > 0.0;
  const double E = relative_energy(rho, u, r, U, law);
  const double lhs = (l1_ess + l1_res) * hN + std::sqrt(l2_ess * hN);
  rep.kkk_ratio = E > 0.0 ? lhs / std::sqrt(E) : (lhs == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
  return rep;
}

double negative_sobolev_norm(const ScalarField& f) {
  const TorusGrid& g = f.grid();
  const double m = f.mean();
  if (std::abs(m) > 1e-10 * f.max_abs() && std::abs(m) > 0.0)
    throw NonZeroMean("negative_sobolev_norm: mean " + std::to_string(m));
  const auto c = forward_transform(g, f.values());
  double s = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    const double k2 = norm2(wavevector(g, k));
    if (k2 > 0.0) s += std::norm(c[k]) / k2;
  }
  return s * g.domain_volume();
}

double negative_sobolev_norm_quadrature(const ScalarField& f) { return inner(f, invert_laplacian(f)); }

double poisson_relative_energy(const ScalarField& rho, const VectorField& u, const ScalarField& r,
                               const VectorField& U) {
  const ScalarField w2 = (u - U).norm_squared();
  const double kin = 0.5 * inner(rho, w2);
  return kin + 0.5 * negative_sobolev_norm(zero_mean(r - rho));
}

double tzavaras_identity_check(const ScalarField& rho, const ScalarField& r, const VectorField& U) {
  const TorusGrid& g = rho.grid();
  const int dim = g.dim();
  const ScalarField d = zero_mean(rho - r);
  const VectorField gphi = spectral_gradient(invert_laplacian(d));
  const double lhs = inner(scale(d, gphi), U);
  const ScalarField divU = spectral_divergence(U);
  double s = 0.5 * inner(divU, gphi.norm_squared());
  for (int i = 0; i < dim; ++i) {
    const VectorField gUi = spectral_gradient(U.component_field(i));
    for (int j = 0; j < dim; ++j)
      s -= inner(hadamard(gUi.component_field(j), gphi.component_field(i)), gphi.component_field(j));
  }
  return std::abs(lhs + s);
}

double regularity_constant(const ScalarField& psi_samples) {
  const TorusGrid& g = psi_samples.grid();
  const auto c = forward_transform(g, psi_samples.values());
  double s = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) s += std::norm(c[k]) * norm2(wavevector(g, k));
  // |Omega| sum |psi_k||f_k| with Cauchy-Schwarz against |f|^2 = |Omega| sum |f_k|^2/|k|^2
  return std::sqrt(g.domain_volume() * s);
}

GronwallFit gronwall_fit(const std::vector<double>& t, const std::vector<double>& E, double budget) {
  GronwallFit fit;
  if (E.empty()) return fit;
  const double emax = *std::max_element(E.begin(), E.end());
  fit.eps = 1e-12 * emax;
  const double base = E.front() + fit.eps;
  auto ok = [&](double c) {
    for (std::size_t k = 0; k < E.size(); ++k)
      if (E[k] > base * std::exp(c * (t[k] - t.front())) * (1.0 + 1e-15)) return false;
    return true;
  };
  if (base <= 0.0) {
    fit.c = emax > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    fit.verdict = fit.c <= budget;
    return fit;
  }
  if (ok(0.0)) {
    fit.c = 0.0;
  } else {
    double hi = 1.0;
    while (!ok(hi)) {
      hi *= 2.0;
      if (hi > 1e12) {
        fit.c = std::numeric_limits<double>::infinity();
        fit.verdict = false;
        return fit;
      }
    }
    double lo = 0.0;
    while (hi - lo > 1e-10 * std::max(1.0, hi)) {
      const double mid = 0.5 * (lo + hi);
      (ok(mid) ? hi : lo) = mid;
    }
    fit.c = hi;
  }
  fit.verdict = fit.c <= budget;
  return fit;
}

}  // namespace swarmflow
