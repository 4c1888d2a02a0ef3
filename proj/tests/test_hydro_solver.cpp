#include <algorithm>
#include <cmath>
#include <sstream>
#include <random>

#include "doctest.h"
#include "support.hpp"
#include "swarmflow/errors.hpp"
#include "swarmflow/hydro_solver.hpp"
#include "swarmflow/spectral.hpp"

using namespace swarmflow;
using testing_support::max_diff;
using testing_support::pi;

namespace {

Vec wrapped(const Vec& a, const Vec& b, int dim) {
  Vec z{0.0, 0.0, 0.0};
  for (int d = 0; d < dim; ++d) {
    z[d] = a[d] - b[d];
    z[d] -= 2.0 * std::floor((z[d] + 1.0) / 2.0);
  }
  return z;
}

// sum_y psi(x-y) (u(y)-u(x)) rho(y) rho(x) h^N, cell by cell
VectorField alignment_double_sum(const ScalarField& rho, const VectorField& u, const Kernel& psi) {
  const TorusGrid& g = rho.grid();
  VectorField out(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    Vec acc{0.0, 0.0, 0.0};
    const Vec xi = g.cell_center(i);
    for (std::size_t j = 0; j < g.size(); ++j) {
      const double w = psi(wrapped(xi, g.cell_center(j), g.dim())) * rho[j] * rho[i] * g.cell_volume();
      for (int d = 0; d < g.dim(); ++d) acc[d] += w * (u.component(d)[j] - u.component(d)[i]);
    }
    out.set(i, acc);
  }
  return out;
}

ConstitutiveSet pressureless_cruise(int dim) {
  ConstitutiveSet c;
  c.K = zero_kernel(dim);
  c.psi = zero_kernel(dim);
  c.H = FrictionFunction::linear(1.0);
  return c;
}

// exact cell averages of 1 + 0.2 sin(pi (x - t))
ScalarField advected_average(const TorusGrid& g, double t) {
  ScalarField r(g);
  const double h = g.spacing();
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double a = g.center(static_cast<int>(i)) - 0.5 * h - t;
    r[i] = 1.0 + 0.2 * (std::cos(pi * a) - std::cos(pi * (a + h))) / (pi * h);
  }
  return r;
}

double l1(const ScalarField& a, const ScalarField& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s * a.grid().cell_volume();
}

HydroState smooth_state(const TorusGrid& g, std::mt19937_64& rng, double amp) {
  ScalarField rho = testing_support::random_smooth(g, rng, 2, true) * amp;
  for (double& v : rho.values()) v += 1.0;
  VectorField u = testing_support::random_smooth_vector(g, rng, 2, true) * amp;
  return HydroState(rho, scale(rho, u));
}

}  // namespace

TEST_CASE("sources vanish on a constant state") {
  const TorusGrid g(2, 16);
  ConstitutiveSet c;
  c.pressure = PressureLaw::power_law(1.0, 2.0);
  c.K = gaussian_kernel(2, 1.0, 0.3);
  c.psi = raised_cosine_kernel(2, 1.0);
  c.H = FrictionFunction::linear(1.0);
  const HydroModel model(c, g);
  const SourceTerms s = compute_sources(ScalarField(g, 0.7), VectorField(g), model);
  CHECK(s.total().max_norm() <= 1e-12);
}

TEST_CASE("constant velocity gives no alignment force") {
  const TorusGrid g(2, 16);
  std::mt19937_64 rng(3);
  ConstitutiveSet c;
  c.psi = gaussian_kernel(2, 1.0, 0.4);
  const HydroModel model(c, g);
  ScalarField rho = testing_support::random_smooth(g, rng, 3, true) * 0.1;
  for (double& v : rho.values()) v += 1.0;
  const SourceTerms s = compute_sources(rho, VectorField(g, {0.3, -1.2, 0.0}), model);
  CHECK(s.alignment.max_norm() <= 1e-12);
}

TEST_CASE("alignment by convolution matches the double sum") {
  for (int dim : {1, 2}) {
    const TorusGrid g(dim, 16);
    std::mt19937_64 rng(11 + dim);
    ConstitutiveSet c;
    c.psi = gaussian_kernel(dim, 1.0, 0.35);
    const HydroModel model(c, g);
    ScalarField rho = testing_support::random_smooth(g, rng, 3, true) * 0.2;
    for (double& v : rho.values()) v += 1.0;
    const VectorField u = testing_support::random_smooth_vector(g, rng, 3, false);
    const VectorField fast = compute_sources(rho, u, model).alignment;
    CHECK(max_diff(fast, alignment_double_sum(rho, u, c.psi)) <= 1e-12);
  }
}

TEST_CASE("symmetric alignment injects no momentum") {
  const TorusGrid g(2, 32);
  std::mt19937_64 rng(5);
  ConstitutiveSet c;
  c.psi = cucker_smale_kernel(2, 1.0, 0.5);
  const HydroModel model(c, g);
  for (int rep = 0; rep < 10; ++rep) {
    ScalarField rho = testing_support::random_smooth(g, rng, 4, true) * 0.3;
    for (double& v : rho.values()) v += 1.0;
    const VectorField u = testing_support::random_smooth_vector(g, rng, 4, false);
    const Vec net = compute_sources(rho, u, model).alignment.integral();
    CHECK(std::abs(net[0]) + std::abs(net[1]) <= 1e-12);
  }
}

TEST_CASE("poisson force") {
  const TorusGrid g(2, 32);
  CHECK(poisson_force(ScalarField(g, 2.0)).max_norm() == 0.0);

  const ScalarField rho = ScalarField::sample(g, [](const Vec& x) { return 1.0 + 0.1 * std::cos(pi * x[0]); });
  const VectorField expect = VectorField::sample(g, [](const Vec& x) {
    const double r = 1.0 + 0.1 * std::cos(pi * x[0]);
    return Vec{r * 0.1 * std::sin(pi * x[0]) / pi, 0.0, 0.0};
  });
  CHECK(max_diff(poisson_force(rho), expect) <= 1e-13);

  std::mt19937_64 rng(8);
  for (int rep = 0; rep < 10; ++rep) {
    ScalarField r = testing_support::random_smooth(g, rng, 5, true) * 0.4;
    for (double& v : r.values()) v += 1.0;
    const Vec net = poisson_force(r).integral();
    CHECK(std::abs(net[0]) + std::abs(net[1]) <= 1e-10);
  }
}

TEST_CASE("constant state is steady") {
  const TorusGrid g(2, 16);
  ConstitutiveSet c;
  c.pressure = PressureLaw::power_law(1.0, 1.4);
  c.K = cosine_kernel(2, 0.5);
  c.psi = raised_cosine_kernel(2, 2.0);
  c.H = FrictionFunction::saturating(2.0);
  const HydroModel model(c, g);
  HydroState s(ScalarField(g, 1.3), VectorField(g));
  for (auto flux : {FluxKind::rusanov, FluxKind::hll}) {
    SchemeConfig cfg;
    cfg.flux = flux;
    const double dt = cfl_timestep(s, model, cfg);
    const HydroState next = step(s, model, cfg, dt);
    CHECK(max_diff(next.rho, s.rho) <= 1e-12);
    CHECK(next.m.max_norm() <= 1e-12);
  }
}

TEST_CASE("cruising state travels unchanged") {
  const TorusGrid g(2, 16);
  const HydroModel model(pressureless_cruise(2), g);
  HydroState s(ScalarField(g, 1.0), VectorField(g, {1.0, 0.0, 0.0}));
  const Trajectory tr = run(s, model, SchemeConfig{}, 0.5, 0.25);
  const HydroState& last = tr.snapshots.back();
  CHECK(max_diff(last.rho, s.rho) <= 1e-12);
  CHECK(max_diff(last.m, s.m) <= 1e-12);
}

TEST_CASE("pressureless advection converges at first order") {
  std::vector<double> err;
  for (int n : {64, 128, 256}) {
    const TorusGrid g(1, n);
    const HydroModel model(pressureless_cruise(1), g);
    const ScalarField rho = advected_average(g, 0.0);
    HydroState s(rho, scale(rho, VectorField(g, {1.0, 0.0, 0.0})));
    SchemeConfig cfg;
    cfg.cfl = 0.5;
    const Trajectory tr = run(s, model, cfg, 0.5, 0.5);
    err.push_back(l1(tr.snapshots.back().rho, advected_average(g, 0.5)));
  }
  for (std::size_t k = 1; k < err.size(); ++k) {
    const double ratio = err[k - 1] / err[k];
    CHECK(ratio >= 1.6);
    CHECK(ratio <= 2.4);
  }
}

TEST_CASE("unit CFL upwind step is an exact cell shift") {
  const TorusGrid g(1, 32);
  std::mt19937_64 rng(2);
  const HydroModel model(pressureless_cruise(1), g);
  ScalarField rho = testing_support::random_smooth(g, rng, 6, true) * 0.05;
  for (double& v : rho.values()) v += 1.0;
  HydroState s(rho, VectorField::from_components({rho}));
  SchemeConfig cfg;
  cfg.cfl = 1.0;
  cfg.time = TimeScheme::forward_euler;
  const HydroState next = step(s, model, cfg, cfl_timestep(s, model, cfg));
  for (std::size_t i = 0; i < g.size(); ++i) {
    const std::size_t from = g.shifted(i, {-1, 0, 0});
    CHECK(std::abs(next.rho[i] - rho[from]) <= 1e-14);
    CHECK(std::abs(next.m.component(0)[i] - rho[from]) <= 1e-14);
  }
}

TEST_CASE("self convergence of a smooth gamma-law run") {
  std::vector<ScalarField> rho;
  ConstitutiveSet c;
  c.pressure = PressureLaw::power_law(1.0, 2.0);
  c.K = cosine_kernel(1, 0.3);
  c.psi = raised_cosine_kernel(1, 1.0);
  c.H = FrictionFunction::capped_linear(1.0, 2.0);
  for (int n : {64, 128, 256, 512}) {
    const TorusGrid g(1, n);
    const ScalarField r0 = ScalarField::sample(g, [](const Vec& x) { return 1.0 + 0.1 * std::cos(pi * x[0]); });
    const VectorField u0 = VectorField::sample(g, [](const Vec& x) { return Vec{0.1 * std::sin(pi * x[0]), 0, 0}; });
    const Trajectory tr = run(HydroState(r0, scale(r0, u0)), HydroModel(c, g), SchemeConfig{}, 0.3, 0.3);
    rho.push_back(block_average(tr.snapshots.back().rho, TorusGrid(1, 64)));
  }
  const double e1 = l1(rho[0], rho[1]), e2 = l1(rho[1], rho[2]), e3 = l1(rho[2], rho[3]);
  for (double rate : {std::log2(e1 / e2), std::log2(e2 / e3)}) {
    CHECK(rate >= 0.8);
    CHECK(rate <= 1.2);
  }
}

TEST_CASE("mass is conserved along a run") {
  const TorusGrid g(2, 32);
  std::mt19937_64 rng(21);
  ConstitutiveSet c;
  c.pressure = PressureLaw::power_law(1.0, 1.4);
  c.K = gaussian_kernel(2, -0.5, 0.3);
  c.psi = raised_cosine_kernel(2, 1.0);
  c.H = FrictionFunction::saturating(2.0);
  const HydroModel model(c, g);
  for (auto flux : {FluxKind::rusanov, FluxKind::hll}) {
    SchemeConfig cfg;
    cfg.flux = flux;
    const Trajectory tr = run(smooth_state(g, rng, 0.2), model, cfg, 0.2, 0.05);
    const double m0 = tr.diagnostics.front().mass;
    for (const auto& row : tr.diagnostics) CHECK(std::abs(row.mass - m0) <= 1e-10 * m0);
  }
}

TEST_CASE("run bookkeeping") {
  const TorusGrid g(1, 32);
  const HydroModel model(pressureless_cruise(1), g);
  HydroState s(ScalarField(g, 1.0), VectorField(g, {1.0, 0.0, 0.0}));

  const Trajectory empty = run(s, model, SchemeConfig{}, 0.0, 0.1);
  REQUIRE(empty.snapshots.size() == 1);
  CHECK(empty.steps == 0);

  const Trajectory tr = run(s, model, SchemeConfig{}, 0.3, 0.1);
  REQUIRE(tr.snapshots.size() == 4);
  CHECK(tr.snapshots.back().t == doctest::Approx(0.3).epsilon(1e-15));

  SchemeConfig big;
  big.fixed_dt = 1.0;
  const Trajectory reduced = run(s, model, big, 0.2, 0.1);
  REQUIRE_FALSE(reduced.events.empty());
  CHECK(reduced.events.front().find("CFL") != std::string::npos);
  CHECK(reduced.max_dt <= 0.4 * g.spacing() + 1e-15);
}

TEST_CASE("vacuum cells are clamped and logged") {
  const TorusGrid g(1, 32);
  const HydroModel model(pressureless_cruise(1), g);
  ScalarField rho(g, 1.0);
  for (int i = 0; i < 8; ++i) rho[i] = 0.0;
  HydroState s(rho, scale(rho, VectorField(g, {1.0, 0.0, 0.0})));
  StepLog log;
  const HydroState next = step(s, model, SchemeConfig{}, 0.01, &log);
  CHECK(log.vacuum_cells > 0);
  CHECK(next.rho.min() >= 1e-12);
}

TEST_CASE("oversized steps produce negative density") {
  const TorusGrid g(1, 32);
  const HydroModel model(pressureless_cruise(1), g);
  ScalarField rho(g, 1.0);
  rho[10] = 5.0;
  HydroState s(rho, scale(rho, VectorField(g, {1.0, 0.0, 0.0})));
  SchemeConfig cfg;
  cfg.time = TimeScheme::forward_euler;
  CHECK_THROWS_AS(step(s, model, cfg, 5.0 * g.spacing()), NegativeDensity);
}

TEST_CASE("diagnostics csv header") {
  const TorusGrid g(2, 8);
  const HydroModel model(pressureless_cruise(2), g);
  const Trajectory tr = run(HydroState(ScalarField(g, 1.0), VectorField(g)), model, SchemeConfig{}, 0.1, 0.1);
  std::ostringstream out;
  write_diagnostics_csv(out, tr, 2);
  const std::string text = out.str();
  CHECK(text.substr(0, text.find('\n')) ==
        "t,mass,momentum_1,momentum_2,kinetic_energy,internal_energy,interaction_energy,total_energy,"
        "dissipation_rate,d3_residual");
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
}

TEST_CASE("strong reference: trivial states") {
  const TorusGrid coarse(1, 16), fine(1, 64);
  const HydroModel model(pressureless_cruise(1), fine);
  const StrongTrajectory st =
      strong_reference(ScalarField(fine, 1.0), VectorField(fine, {1.0, 0.0, 0.0}), model, coarse, 0.5, 0.25);
  REQUIRE(st.r.size() == 3);
  CHECK(max_diff(st.r.back(), ScalarField(coarse, 1.0)) <= 1e-13);
  CHECK(max_diff(st.U.back(), VectorField(coarse, {1.0, 0.0, 0.0})) <= 1e-13);
  CHECK_FALSE(st.blown_up);

  ConstitutiveSet c;
  c.pressure = PressureLaw::power_law(1.0, 2.0);
  c.psi = raised_cosine_kernel(1, 1.0);
  const StrongTrajectory still =
      strong_reference(ScalarField(fine, 0.8), VectorField(fine), HydroModel(c, fine), coarse, 0.2, 0.1);
  CHECK(max_diff(still.r.back(), ScalarField(coarse, 0.8)) <= 1e-13);
}

TEST_CASE("strong reference agrees with the coarse solver to O(h)") {
  ConstitutiveSet c;
  c.pressure = PressureLaw::power_law(1.0, 2.0);
  c.K = cosine_kernel(1, 0.3);
  c.psi = raised_cosine_kernel(1, 1.0);
  auto r0f = [](const Vec& x) { return 1.0 + 0.1 * std::cos(pi * x[0]); };
  auto u0f = [](const Vec& x) { return Vec{0.1 * std::sin(pi * x[0]), 0, 0}; };
  std::vector<double> err;
  for (int n : {32, 64}) {
    const TorusGrid coarse(1, n), fine(1, 4 * n);
    const StrongTrajectory st = strong_reference(ScalarField::sample(fine, r0f), VectorField::sample(fine, u0f),
                                                 HydroModel(c, fine), coarse, 0.3, 0.3);
    const ScalarField r0 = ScalarField::sample(coarse, r0f);
    const Trajectory tr = run(HydroState(r0, scale(r0, VectorField::sample(coarse, u0f))), HydroModel(c, coarse),
                              SchemeConfig{}, 0.3, 0.3);
    err.push_back(l1(tr.snapshots.back().rho, st.r.back()));
  }
  CHECK(err[1] < 0.7 * err[0]);
  CHECK(err[0] < 0.05);
}

TEST_CASE("strong reference flags gradient blow-up") {
  const TorusGrid coarse(1, 16), fine(1, 256);
  ConstitutiveSet c;
  const HydroModel model(c, fine);
  // inviscid Burgers data, gradient catastrophe at t = 1/pi
  const VectorField U0 = VectorField::sample(fine, [](const Vec& x) { return Vec{1.0 - std::sin(pi * x[0]), 0, 0}; });
  StrongOptions opt;
  opt.blowup_threshold = 20.0;
  const StrongTrajectory st = strong_reference(ScalarField(fine, 1.0), U0, model, coarse, 2.0, 0.02, opt);
  CHECK(st.blown_up);
  CHECK(st.t_strong > 0.2);
  CHECK(st.t_strong < 0.5);
}

TEST_CASE("block averages preserve mass and momentum") {
  const TorusGrid fine(2, 32), coarse(2, 8);
  std::mt19937_64 rng(4);
  ScalarField rho = testing_support::random_smooth(fine, rng, 4, true) * 0.3;
  for (double& v : rho.values()) v += 1.0;
  const VectorField u = testing_support::random_smooth_vector(fine, rng, 4, false);
  CHECK(block_average(rho, coarse).integral() == doctest::Approx(rho.integral()).epsilon(1e-14));
  const VectorField U = mass_weighted_average(rho, u, coarse);
  const Vec p_fine = scale(rho, u).integral();
  const Vec p_coarse = scale(block_average(rho, coarse), U).integral();
  CHECK(std::abs(p_fine[0] - p_coarse[0]) <= 1e-13);
  CHECK(std::abs(p_fine[1] - p_coarse[1]) <= 1e-13);
}
