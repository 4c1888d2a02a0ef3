#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "doctest.h"
#include "support.hpp"
#include "swarmflow/convex_integration.hpp"
#include "swarmflow/energy_ledger.hpp"
#include "swarmflow/errors.hpp"
#include "swarmflow/spectral.hpp"

using namespace swarmflow;
using testing_support::max_diff;
using testing_support::pi;

namespace {

VectorField solenoidal(const TorusGrid& g, std::mt19937_64& rng, double amp) {
  if (g.dim() == 2) {
    const ScalarField s = testing_support::random_smooth(g, rng, 3, true);
    const VectorField gs = spectral_gradient(s);
    return VectorField::from_components({gs.component_field(1), gs.component_field(0) * -1.0}) * amp;
  }
  return helmholtz_decompose(testing_support::random_smooth_vector(g, rng, 3, true)).solenoidal * amp;
}

SymTensorField trace_free(const TorusGrid& g, std::mt19937_64& rng, double amp) {
  SymTensorField F(g, true);
  const int n = g.dim();
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      if (i == n - 1 && j == n - 1) continue;
      const ScalarField c = testing_support::random_smooth(g, rng, 3, true) * amp;
      for (std::size_t k = 0; k < g.size(); ++k) F.set(k, i, j, c[k]);
    }
  for (std::size_t k = 0; k < g.size(); ++k) {
    double tr = 0.0;
    for (int i = 0; i < n - 1; ++i) tr += F.get(k, i, i);
    F.set(k, n - 1, n - 1, -tr);
  }
  return F;
}

ScalarField positive(const TorusGrid& g, std::mt19937_64& rng, double amp) {
  ScalarField r = testing_support::random_smooth(g, rng, 2, true) * amp;
  for (double& v : r.values()) v += 1.0;
  return r;
}

double eigen_lambda_max(const Mat& a, int n) {
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = a[i][j];
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m).eigenvalues().maxCoeff();
}

CandidateSlice static_slice(const TorusGrid& g, double t, double Lambda, const Vec& V) {
  return {t, VectorField(g), SymTensorField(g, true), ScalarField(g, 1.0), ScalarField(g), ScalarField(g), V, Lambda};
}

ConstitutiveSet random_set(int dim, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(0, 2);
  ConstitutiveSet c;
  c.pressure = PressureLaw::power_law(1.0, 1.4);
  c.K = gaussian_kernel(dim, -0.3, 0.4);
  c.psi = raised_cosine_kernel(dim, 0.5);
  switch (pick(rng)) {
    case 0: c.H = FrictionFunction::constant(1.5); break;
    case 1: c.H = FrictionFunction::saturating(2.0); break;
    default: c.H = FrictionFunction::capped_linear(1.0, 3.0); break;
  }
  return c;
}

}  // namespace

TEST_CASE("density and potential pair") {
  const TorusGrid g(2, 16);
  const ScalarField one(g, 1.0);
  const DensityPotential flat = build_density_potential(one, ScalarField(g), 1.0, 0.1);
  CHECK(max_diff(flat.rho(0.7), one) == 0.0);
  CHECK(flat.Phi(0.7).max_abs() == 0.0);

  const double delta = 0.01;
  const ScalarField phi0 = ScalarField::sample(g, [&](const Vec& x) { return delta * std::cos(pi * x[0]); });
  const DensityPotential dp = build_density_potential(one, phi0, 1.0, 0.5);
  CHECK(dp.eps == 1.0);
  for (double t : {0.0, 0.3, 1.0}) {
    const ScalarField expect = ScalarField::sample(g, [&](const Vec& x) {
      return 1.0 + delta * pi * pi * dp.eps * (1.0 - std::exp(-t / dp.eps)) * std::cos(pi * x[0]);
    });
    CHECK(max_diff(dp.rho(t), expect) <= 1e-13);
    CHECK((dp.drho_dt(t) + spectral_laplacian(dp.Phi(t))).max_abs() <= 1e-10);
    CHECK(dp.rho(t).min() >= 0.5);
  }
  CHECK(max_diff(dp.drho_dt(0.0), spectral_laplacian(phi0) * -1.0) <= 1e-13);

  // large potential forces a faster decay
  const DensityPotential fast = build_density_potential(one, phi0 * 20.0, 1.0, 0.5);
  CHECK(fast.eps < 1.0);
  CHECK(fast.rho(1.0).min() >= 0.5 - 1e-12);
  CHECK(fast.rho(1.0).min() <= 0.5 + 1e-6);
  CHECK_THROWS_AS(build_density_potential(one, phi0 * 1e5, 1.0, 0.5), NegativeDensity);
}

TEST_CASE("V equation closed forms") {
  const TorusGrid g(2, 8);
  const Vec V0{0.7, -0.2, 0.0};
  std::vector<double> times;
  for (int k = 0; k <= 10; ++k) times.push_back(0.1 * k);
  auto slices = [&](double) { return VSlice{VectorField(g), ScalarField(g, 1.0), ScalarField(g), ScalarField(g, 1.0)}; };

  const auto same = solve_V_ode(slices, times, V0, HydroModel(ConstitutiveSet{}, g));
  CHECK(same.back() == V0);

  ConstitutiveSet c;
  c.H = FrictionFunction::constant(1.8);
  const auto decay = solve_V_ode(slices, times, V0, HydroModel(c, g), 10);
  for (std::size_t k = 0; k < times.size(); ++k)
    for (int d = 0; d < 2; ++d) CHECK(std::abs(decay[k][d] - V0[d] * std::exp(-0.8 * times[k])) <= 1e-9);
}

TEST_CASE("V equation converges at fourth order") {
  const TorusGrid g(2, 16);
  std::mt19937_64 rng(2);
  ConstitutiveSet c;
  c.pressure = PressureLaw::power_law(1.0, 2.0);
  c.K = gaussian_kernel(2, -0.3, 0.4);
  c.psi = raised_cosine_kernel(2, 1.0);
  c.H = FrictionFunction::saturating(2.0);
  const HydroModel model(c, g);
  const ScalarField phi0 = testing_support::random_smooth(g, rng, 2, true) * 0.01;
  const DensityPotential dp = build_density_potential(positive(g, rng, 0.05), phi0, 1.0, 0.5);
  const VectorField v = solenoidal(g, rng, 0.3);
  auto slices = [&](double t) {
    const ScalarField rho = dp.rho(t);
    ScalarField e(g);
    for (std::size_t i = 0; i < g.size(); ++i) e[i] = (2.0 + std::sin(3.0 * t)) - c.pressure.p(rho[i]);
    return VSlice{v, rho, dp.Phi(t), e};
  };
  const std::vector<double> times{0.0, 1.0};
  std::vector<double> end;
  for (int sub : {8, 16, 32, 64}) end.push_back(solve_V_ode(slices, times, {0.5, 0.2, 0.0}, model, sub).back()[0]);
  const double r1 = std::abs(end[0] - end[1]) / std::abs(end[1] - end[2]);
  const double r2 = std::abs(end[1] - end[2]) / std::abs(end[2] - end[3]);
  CHECK(std::log2(r1) == doctest::Approx(4.0).epsilon(0.1));
  CHECK(std::log2(r2) == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("source Xi and its mean-free part") {
  const TorusGrid g(2, 16);
  const HydroModel bare(ConstitutiveSet{}, g);
  const VectorField zero = assemble_Xi(VectorField(g), {0, 0, 0}, ScalarField(g), ScalarField(g, 1.0),
                                       ScalarField(g, 1.0), bare);
  CHECK(zero.max_norm() == 0.0);

  std::mt19937_64 rng(4);
  const HydroModel model(random_set(2, rng), g);
  const VectorField cst = assemble_Xi(VectorField(g), {0.3, 0.1, 0}, ScalarField(g), ScalarField(g, 1.2),
                                      ScalarField(g, 0.8), model);
  CHECK(mean_free(cst).max_norm() <= 1e-13);

  for (int rep = 0; rep < 10; ++rep) {
    const ScalarField rho = positive(g, rng, 0.1);
    const VectorField Xi = assemble_Xi(solenoidal(g, rng, 0.5), {0.2, -0.4, 0}, testing_support::random_smooth(g, rng, 3, true) * 0.05,
                                       rho, positive(g, rng, 0.1), model);
    const Vec m = mean_free(Xi).mean();
    CHECK(std::abs(m[0]) + std::abs(m[1]) <= 1e-12 * Xi.max_norm());
  }
}

TEST_CASE("elliptic corrector") {
  const TorusGrid g(2, 16);
  CHECK(solve_elliptic_M(VectorField(g)).max_abs() == 0.0);

  const double amp = 0.7;
  const VectorField G = VectorField::sample(g, [&](const Vec& x) { return Vec{0.0, amp * std::cos(pi * x[0]), 0.0}; });
  const SymTensorField M = solve_elliptic_M(G);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double x = g.cell_center(k)[0];
    CHECK(std::abs(M.get(k, 0, 1) + amp * std::sin(pi * x) / pi) <= 1e-13);
    CHECK(std::abs(M.get(k, 0, 0)) <= 1e-13);
    CHECK(std::abs(M.get(k, 1, 1)) <= 1e-13);
  }

  std::mt19937_64 rng(6);
  for (int dim : {2, 3}) {
    const TorusGrid gd(dim, dim == 2 ? 32 : 16);
    for (int rep = 0; rep < 5; ++rep) {
      const VectorField Gr = testing_support::random_smooth_vector(gd, rng, 4, true);
      const SymTensorField Mr = solve_elliptic_M(Gr);
      CHECK(Mr.max_abs_trace() <= 1e-12);
      CHECK(elliptic_residual(Mr, Gr) <= 1e-10);
    }
  }
  CHECK_THROWS_AS(solve_elliptic_M(VectorField(g, {1.0, 0.0, 0.0})), NonZeroMean);
  CHECK_THROWS_AS(solve_elliptic_M(VectorField(TorusGrid(1, 16))), Error);
}

TEST_CASE("energy constraint") {
  const TorusGrid g(2, 8);
  const ScalarField e = energy_constraint_e(1.0, ScalarField(g, 1.0), ScalarField(g), PressureLaw::zero());
  CHECK(max_diff(e, ScalarField(g, 1.0)) == 0.0);
  const auto law = PressureLaw::power_law(2.0, 2.0);
  CHECK_THROWS_AS(energy_constraint_e(1.9, ScalarField(g, 1.0), ScalarField(g), law), NonPositiveEnergy);
  ScalarField rho(g, 1.0), dphi(g, 0.0);
  rho[3] = 0.5;
  dphi[3] = 0.1;
  const ScalarField eh = energy_constraint_e(3.0, rho, dphi, law);
  CHECK(eh[0] == doctest::Approx(1.0));
  // 3 - (0.5 + 0.1)
  CHECK(eh[3] == doctest::Approx(2.4));
}

TEST_CASE("subsolution check on trivial candidates") {
  const TorusGrid g(2, 8);
  const HydroModel bare(ConstitutiveSet{}, g);
  SubsolutionCandidate c;
  c.slices = {static_slice(g, 0.0, 1.0, {0, 0, 0}), static_slice(g, 0.5, 1.0, {0, 0, 0})};
  const AuditReport rep = subsolution_check(c, bare);
  CHECK(rep.pass);
  CHECK(rep.min_margin == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_FALSE(rep.slices[0].judged);

  for (double L : {0.9, 1.0 - 1e-6, 1.0 + 1e-6, 1.5}) {
    SubsolutionCandidate moving;
    moving.slices = {static_slice(g, 0.5, L, {1.0, 0, 0})};
    CHECK(subsolution_check(moving, bare).pass == (L > 1.0));
  }

  SubsolutionCandidate bad;
  bad.slices = {static_slice(g, 0.5, 1.0, {0, 0, 0})};
  bad.slices[0].v = VectorField(g, {0.2, 0, 0});
  const AuditReport flagged = subsolution_check(bad, bare);
  CHECK_FALSE(flagged.pass);
  CHECK_FALSE(flagged.violations.empty());
}

TEST_CASE("margin sign agrees with a dense eigen solver") {
  std::mt19937_64 rng(7);
  for (int dim : {2, 3}) {
    const TorusGrid g(dim, 8);
    for (int rep = 0; rep < 10; ++rep) {
      const HydroModel model(random_set(dim, rng), g);
      const VectorField v = solenoidal(g, rng, 0.5);
      const SymTensorField F = trace_free(g, rng, 0.3);
      const ScalarField rho = positive(g, rng, 0.1);
      const ScalarField Phi = testing_support::random_smooth(g, rng, 2, true) * 0.02;
      const Vec V{0.2, -0.1, 0.05};
      const double Lambda = dim + 0.5 + rep * 0.3;
      const ScalarField e = energy_constraint_e(Lambda, rho, ScalarField(g), model.pressure());
      const SymTensorField M = solve_elliptic_M(mean_free(assemble_Xi(v, V, Phi, rho, e, model)));
      const ScalarField mf = margin_field(v, V, Phi, rho, F, M, e);
      const VectorField m = add_constant(v + spectral_gradient(Phi), V);
      for (std::size_t k = 0; k < g.size(); ++k) {
        Mat a{};
        for (int i = 0; i < dim; ++i)
          for (int j = 0; j < dim; ++j)
            a[i][j] = m.at(k)[i] * m.at(k)[j] / rho[k] - F.get(k, i, j) + M.get(k, i, j);
        const double ref = e[k] - 0.5 * dim * eigen_lambda_max(a, dim);
        CHECK(std::abs(mf[k] - ref) <= 1e-12 * std::max(1.0, std::abs(ref)));
        if (std::abs(ref) > 1e-10) CHECK((mf[k] > 0.0) == (ref > 0.0));
      }
    }
  }
}

TEST_CASE("Lambda0 on analytic fixtures") {
  const TorusGrid g(2, 8);
  const HydroModel bare(ConstitutiveSet{}, g);
  const DensityPotential dp = build_density_potential(ScalarField(g, 1.0), ScalarField(g), 1.0, 0.1);
  Lambda0Options opt;
  opt.times = {0.0, 0.5, 1.0};
  const Lambda0Result still = find_lambda0(VectorField(g), {0, 0, 0}, dp, bare, opt);
  CHECK(std::abs(still.lambda0) <= 1e-4);
  CHECK(still.lambda0 > 0.0);
  const Lambda0Result moving = find_lambda0(VectorField(g), {1.0, 0, 0}, dp, bare, opt);
  CHECK(std::abs(moving.lambda0 - 1.0) <= 1e-4);
  CHECK(moving.lambda0 > 1.0);
  CHECK(moving.margin >= opt.threshold);
}

TEST_CASE("Lambda0 is stable under refinement") {
  ConstitutiveSet c;
  c.pressure = PressureLaw::power_law(1.0, 2.0);
  c.K = gaussian_kernel(2, -0.3, 0.4);
  c.psi = raised_cosine_kernel(2, 1.0);
  c.H = FrictionFunction::saturating(2.0);
  auto rho0f = [](const Vec& x) { return 1.0 + 0.1 * std::cos(pi * x[0]) * std::cos(pi * x[1]); };
  auto phi0f = [](const Vec& x) { return 0.01 * std::sin(pi * x[1]); };
  auto vf = [](const Vec& x) { return Vec{0.3 * std::sin(pi * x[1]), 0.2 * std::cos(pi * x[0]), 0.0}; };
  std::vector<double> l0;
  for (int n : {16, 32}) {
    const TorusGrid g(2, n);
    const DensityPotential dp =
        build_density_potential(ScalarField::sample(g, rho0f), ScalarField::sample(g, phi0f), 1.0, 0.5);
    Lambda0Options opt;
    opt.times = {0.0, 0.25, 0.5, 0.75, 1.0};
    l0.push_back(find_lambda0(VectorField::sample(g, vf), {0.1, 0.0, 0.0}, dp, HydroModel(c, g), opt).lambda0);
  }
  CHECK(l0[1] == doctest::Approx(l0[0]).epsilon(0.02));
}

TEST_CASE("standard inequality over random samples") {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> n01;
  std::uniform_real_distribution<double> r(0.01, 10.0);
  for (int dim : {2, 3}) {
    for (int k = 0; k < 100000; ++k) {
      Vec h{0, 0, 0};
      for (int d = 0; d < dim; ++d) h[d] = n01(rng);
      Mat Ht{};
      double tr = 0.0;
      for (int i = 0; i < dim; ++i)
        for (int j = i; j < dim; ++j) Ht[i][j] = Ht[j][i] = n01(rng);
      for (int i = 0; i < dim; ++i) tr += Ht[i][i];
      for (int i = 0; i < dim; ++i) Ht[i][i] -= tr / dim;
      const double rr = r(rng);
      REQUIRE(standard_inequality_slack(h, rr, Ht, dim) >= -1e-12 * std::max(1.0, norm2(h) / rr));
    }
    const Vec h{0.3, -1.2, dim == 3 ? 0.5 : 0.0};
    // lambda_max[h (x) h] = |h|^2, so the slack is (N - 1) |h|^2 / (2r)
    CHECK(standard_inequality_slack(h, 2.0, Mat{}, dim) == doctest::Approx((dim - 1) * norm2(h) / 4.0).epsilon(1e-14));
    Mat tf{};
    tf[0][0] = 1.0;
    tf[1][1] = -1.0;
    CHECK(standard_inequality_check({0, 0, 0}, 1.0, tf, dim));
  }
}

TEST_CASE("margin is monotone in Lambda") {
  // with H constant the corrector M does not see Lambda
  std::mt19937_64 rng(123);
  std::uniform_real_distribution<double> h0(0.5, 2.0), step(0.0, 1.0);
  for (int rep = 0; rep < 100; ++rep) {
    const int dim = 2 + rep % 2;
    const TorusGrid g(dim, dim == 2 ? 16 : 8);
    ConstitutiveSet set = random_set(dim, rng);
    set.H = FrictionFunction::constant(h0(rng));
    const HydroModel model(set, g);
    CandidateSlice s{0.5, solenoidal(g, rng, 0.5), trace_free(g, rng, 0.2), positive(g, rng, 0.1),
                     testing_support::random_smooth(g, rng, 2, true) * 0.02, ScalarField(g), {0.1, 0.2, 0.0}, 2.0};
    double prev = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < 5; ++k) {
      SubsolutionCandidate c;
      c.slices = {s};
      const double m = subsolution_check(c, model).min_margin;
      CHECK(m >= prev - 1e-12);
      prev = m;
      s.Lambda += step(rng);
    }
  }
}

TEST_CASE("candidates on the energy manifold") {
  const TorusGrid g(2, 16);
  std::mt19937_64 rng(8);
  const auto law = PressureLaw::power_law(1.0, 2.0);
  const VectorField v = solenoidal(g, rng, 0.02);
  const Vec V{0.4, 0.0, 0.0};
  const double Lambda = 3.0;
  // rho solves Lambda - rho^2 = |m|^2 / (2 rho) cell by cell
  const ScalarField m2 = add_constant(v, V).norm_squared();
  ScalarField rho(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    // larger root, where Lambda - rho^2 - q/rho decreases
    double lo = std::cbrt(0.25 * m2[i]), hi = std::sqrt(Lambda);
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (Lambda - mid * mid - 0.5 * m2[i] / mid > 0.0 ? lo : hi) = mid;
    }
    rho[i] = lo;
  }
  const CandidateSlice s{0.5, v, SymTensorField(g, true), rho, ScalarField(g), ScalarField(g), V, Lambda};
  CHECK(std::abs(kinetic_energy_defect(s, law)) <= 1e-12);
}

TEST_CASE("dissipative Lambda") {
  CHECK(dissipative_lambda(0.5, 0.0, 4.0, 1.0).lambda == 1.0);
  CHECK_THROWS_AS(dissipative_lambda(0.5, -1.0, 4.0, 1.0), Error);

  const DissipativeLambda dl = dissipative_lambda(0.0, 1.0, 4.0, 1.0);
  CHECK(dl.lambda == 1.0);
  // 4 lambda e^{-lambda t} >= 1 + Lambda(t) at t = 0
  CHECK(4.0 * dl.lambda >= 1.0 + dl(0.0));
  for (double t = 0.0; t <= 1.0; t += 0.01) CHECK(4.0 * dl.derivative(t) <= -(1.0 + dl(t)));

  const DissipativeLambda steep = dissipative_lambda(0.5, 3.0, 4.0, 0.1);
  CHECK(steep.lambda == 4.0);
  for (double t = 0.0; t <= 0.1; t += 0.001) CHECK(4.0 * steep.derivative(t) <= -3.0 * (1.0 + steep(t)));
  // exponential decay cannot outlast a long horizon
  CHECK_THROWS_AS(dissipative_lambda(2.0, 3.0, 4.0, 0.5), Error);
}

TEST_CASE("dissipative Lambda passes the energy ledger") {
  const TorusGrid g(2, 16);
  std::mt19937_64 rng(9);
  ConstitutiveSet c;
  c.pressure = PressureLaw::power_law(1.0, 2.0);
  c.psi = raised_cosine_kernel(2, 0.1);
  c.H = FrictionFunction::saturating(2.0);
  const HydroModel model(c, g);
  const ScalarField rho0 = positive(g, rng, 0.05);
  const double lambda0 = 2.0;
  const double cm = measure_dissipation_constant(lambda0, rho0, model);
  CHECK(cm > 0.0);
  const DissipativeLambda dl = dissipative_lambda(lambda0, cm, g.domain_volume(), 0.1);
  MESSAGE("c = " << cm << ", lambda = " << dl.lambda);
  // energy of any state on the constraint manifold is |Omega| Lambda(t) plus a constant
  std::vector<LedgerSample> series;
  for (int k = 0; k <= 200; ++k) {
    const double t = 0.0005 * k;
    series.push_back({t, g.domain_volume() * dl(t), dissipation_lower_bound(dl(t), rho0, model)});
  }
  CHECK(d3_residual(series, 1e-9).dissipative);
}
