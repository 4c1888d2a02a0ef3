#include <cmath>
#include <random>

#include "doctest.h"
#include "support.hpp"
#include "swarmflow/energy_ledger.hpp"
#include "swarmflow/errors.hpp"
#include "swarmflow/hydro_solver.hpp"
#include "swarmflow/spectral.hpp"

using namespace swarmflow;
using testing_support::pi;

namespace {

double wrapped_kernel(const Kernel& k, const Vec& a, const Vec& b, int dim) {
  Vec z{0.0, 0.0, 0.0};
  for (int d = 0; d < dim; ++d) {
    z[d] = a[d] - b[d];
    z[d] -= 2.0 * std::floor((z[d] + 1.0) / 2.0);
  }
  return k(z);
}

ScalarField positive_density(const TorusGrid& g, std::mt19937_64& rng, double amp = 0.1) {
  ScalarField rho = testing_support::random_smooth(g, rng, 3, true) * amp;
  for (double& v : rho.values()) v += 1.0;
  return rho;
}

}  // namespace

TEST_CASE("energy of simple states") {
  for (int dim : {1, 2, 3}) {
    const TorusGrid g(dim, 8);
    ConstitutiveSet c;
    c.K = cosine_kernel(dim, 1.0);
    const HydroModel model(c, g);
    const EnergyBreakdown rest = total_energy(HydroState(ScalarField(g, 1.0), VectorField(g)), model);
    CHECK(std::abs(rest.total) <= 1e-13);

    const HydroModel bare(ConstitutiveSet{}, g);
    const EnergyBreakdown moving = total_energy(HydroState(ScalarField(g, 1.0), VectorField(g, {1.0, 0, 0})), bare);
    CHECK(moving.kinetic == doctest::Approx(std::pow(2.0, dim - 1)).epsilon(1e-14));
    CHECK(moving.total == moving.kinetic + moving.internal + moving.interaction);
  }
}

TEST_CASE("interaction energy matches the double sum") {
  const TorusGrid g(2, 16);
  std::mt19937_64 rng(7);
  ConstitutiveSet c;
  c.K = gaussian_kernel(2, -1.0, 0.3);
  const HydroModel model(c, g);
  const ScalarField rho = positive_density(g, rng);
  double direct = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = 0; j < g.size(); ++j)
      direct += 0.5 * wrapped_kernel(c.K, g.cell_center(i), g.cell_center(j), 2) * rho[i] * rho[j];
  direct *= g.cell_volume() * g.cell_volume();
  const double fast = total_energy(HydroState(rho, VectorField(g)), model).interaction;
  CHECK(std::abs(fast - direct) <= 1e-12 * std::max(1.0, std::abs(direct)));
}

TEST_CASE("dissipation of trivial velocity fields") {
  const TorusGrid g(2, 16);
  std::mt19937_64 rng(9);
  ConstitutiveSet c;
  c.psi = raised_cosine_kernel(2, 1.0);
  c.H = FrictionFunction::linear(1.0);
  const HydroModel model(c, g);
  const ScalarField rho = positive_density(g, rng);

  const DissipationRate zero = dissipation_rate(HydroState(rho, VectorField(g)), model);
  CHECK(zero.friction_term == 0.0);
  CHECK(std::abs(zero.alignment_term) <= 1e-14);

  const DissipationRate cruise =
      dissipation_rate(HydroState(rho, scale(rho, VectorField(g, {0.6, 0.8, 0.0}))), model);
  CHECK(std::abs(cruise.friction_term) <= 1e-14);
  CHECK(std::abs(cruise.alignment_term) <= 1e-12);
  CHECK_FALSE(cruise.unsymmetrized);
}

TEST_CASE("antisymmetrisation identity") {
  for (int dim : {1, 2}) {
    const TorusGrid g(dim, 16);
    std::mt19937_64 rng(31 + dim);
    ConstitutiveSet c;
    c.psi = cucker_smale_kernel(dim, 1.0, 0.7);
    const HydroModel model(c, g);
    const ScalarField rho = positive_density(g, rng);
    const VectorField u = testing_support::random_smooth_vector(g, rng, 3, false);
    double lhs = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
      for (std::size_t j = 0; j < g.size(); ++j) {
        const double w = wrapped_kernel(c.psi, g.cell_center(i), g.cell_center(j), dim) * rho[i] * rho[j];
        for (int d = 0; d < dim; ++d) {
          const double du = u.component(d)[j] - u.component(d)[i];
          lhs += w * u.component(d)[i] * du;
          sq += w * du * du;
        }
      }
    const double h2 = g.cell_volume() * g.cell_volume();
    lhs *= h2;
    sq *= h2;
    CHECK(std::abs(lhs + 0.5 * sq) <= 1e-12 * std::max(1.0, sq));
    CHECK(std::abs(alignment_pairing(rho, u, model) - sq) <= 1e-12 * std::max(1.0, sq));
    CHECK(dissipation_rate(HydroState(rho, scale(rho, u)), model).alignment_term ==
          doctest::Approx(-0.5 * sq).epsilon(1e-12));
  }
}

TEST_CASE("alignment term is never positive") {
  std::mt19937_64 rng(77);
  for (int rep = 0; rep < 50; ++rep) {
    const int dim = 1 + rep % 3;
    const TorusGrid g(dim, dim == 3 ? 8 : 16);
    ConstitutiveSet c;
    c.psi = rep % 2 ? raised_cosine_kernel(dim, 0.5) : gaussian_kernel(dim, 2.0, 0.2);
    const HydroModel model(c, g);
    const ScalarField rho = positive_density(g, rng, 0.1);
    const VectorField u = testing_support::random_smooth_vector(g, rng, 3, false);
    CHECK(dissipation_rate(HydroState(rho, scale(rho, u)), model).alignment_term <= 1e-12);
  }
}

TEST_CASE("d3 residual of a steady state") {
  const TorusGrid g(1, 32);
  ConstitutiveSet c;
  c.pressure = PressureLaw::power_law(1.0, 2.0);
  c.psi = raised_cosine_kernel(1, 1.0);
  const HydroModel model(c, g);
  const Trajectory tr = run(HydroState(ScalarField(g, 1.2), VectorField(g)), model, SchemeConfig{}, 1.0, 0.1);
  for (const auto& row : tr.diagnostics) CHECK(std::abs(row.d3_residual) <= 1e-13);
}

TEST_CASE("d3 residual shrinks at first order") {
  ConstitutiveSet c;
  c.pressure = PressureLaw::power_law(1.0, 2.0);
  c.K = cosine_kernel(1, 0.3);
  c.psi = raised_cosine_kernel(1, 1.0);
  c.H = FrictionFunction::capped_linear(1.0, 2.0);
  std::vector<double> worst;
  for (int n : {64, 128, 256}) {
    const TorusGrid g(1, n);
    const ScalarField r0 = ScalarField::sample(g, [](const Vec& x) { return 1.0 + 0.2 * std::cos(pi * x[0]); });
    const VectorField u0 = VectorField::sample(g, [](const Vec& x) { return Vec{0.3 * std::sin(pi * x[0]), 0, 0}; });
    // output interval refined with h
    const Trajectory tr = run(HydroState(r0, scale(r0, u0)), HydroModel(c, g), SchemeConfig{}, 0.5, 3.2 / n);
    double w = 0.0;
    for (const auto& row : tr.diagnostics) w = std::max(w, std::abs(row.d3_residual));
    worst.push_back(w);
  }
  for (std::size_t k = 1; k < worst.size(); ++k) {
    const double rate = std::log2(worst[k - 1] / worst[k]);
    CHECK(rate >= 0.7);
    CHECK(rate <= 1.5);
  }
}

TEST_CASE("injected energy is not dissipative") {
  std::vector<LedgerSample> s;
  for (int k = 0; k <= 10; ++k) s.push_back({0.1 * k, 1.0 - 0.01 * k, -0.1});
  CHECK(d3_residual(s, 1e-9).dissipative);
  s[6].energy += 1e-3;
  const D3Report rep = d3_residual(s, 1e-6);
  CHECK_FALSE(rep.dissipative);
  CHECK(rep.max_residual == doctest::Approx(1e-3).epsilon(1e-9));
}

TEST_CASE("d3 needs a uniform time grid") {
  std::vector<LedgerSample> s{{0.0, 1.0, 0.0}, {0.1, 1.0, 0.0}, {0.3, 1.0, 0.0}};
  CHECK_THROWS_AS(d3_residual(s, 1.0), TimeGridMismatch);
  CHECK(d3_tolerance(2.0, 0.1, 0.05, 3.0) == doctest::Approx(0.9));
}

TEST_CASE("interaction energy rate follows the continuity update") {
  ConstitutiveSet c;
  c.K = gaussian_kernel(1, 1.0, 0.3);
  std::vector<double> err;
  for (int n : {64, 128, 256}) {
    const TorusGrid g(1, n);
    const HydroModel model(c, g);
    const ScalarField rho = ScalarField::sample(g, [](const Vec& x) { return 1.0 + 0.3 * std::cos(pi * x[0]); });
    const VectorField u = VectorField::sample(g, [](const Vec& x) { return Vec{0.5 + 0.2 * std::sin(2 * pi * x[0]), 0, 0}; });
    const HydroState s(rho, scale(rho, u));
    SchemeConfig cfg;
    cfg.time = TimeScheme::forward_euler;
    const double dt = cfl_timestep(s, model, cfg);
    // continuity only: K alone forces momentum, not density
    const HydroState next = step(s, model, cfg, dt);
    const double rate = (total_energy(next, model).interaction - total_energy(s, model).interaction) / dt;
    const double exact = -inner(spectral_divergence(s.m), model.K_conv(rho));
    err.push_back(std::abs(rate - exact));
  }
  CHECK(err[1] < 0.65 * err[0]);
  CHECK(err[2] < 0.65 * err[1]);
}
