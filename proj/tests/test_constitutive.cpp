#include <cmath>
#include <numbers>

#include "doctest.h"
#include "swarmflow/constitutive.hpp"
#include "swarmflow/errors.hpp"

using namespace swarmflow;

TEST_CASE("pressure potential closed forms") {
  CHECK(pressure_potential(PressureLaw::power_law(1.0, 2.0), 2.0) == doctest::Approx(2.0));
  CHECK(pressure_potential(PressureLaw::power_law(1.0, 1.0), std::numbers::e) ==
        doctest::Approx(std::numbers::e));
  CHECK(pressure_potential(PressureLaw::power_law(1.0, 1.0), 0.0) == 0.0);
  CHECK(pressure_potential(PressureLaw::zero(), 3.7) == 0.0);
  CHECK_THROWS_AS(pressure_potential(PressureLaw::power_law(1.0, 2.0), -0.1), NegativeDensity);
}

TEST_CASE("custom laws integrate the potential by quadrature") {
  auto law = PressureLaw::custom([](double r) { return 1.5 * std::pow(r, 1.4); },
                                 [](double r) { return 2.1 * std::pow(r, 0.4); });
  const auto ref = PressureLaw::power_law(1.5, 1.4);
  for (double rho : {0.05, 0.5, 1.0, 2.0, 7.0}) {
    CHECK(law.potential(rho) == doctest::Approx(ref.potential(rho)).epsilon(1e-10));
    CHECK(law.potential_derivative(rho) == doctest::Approx(ref.potential_derivative(rho)).epsilon(1e-10));
  }
}

TEST_CASE("p = rho P' - P") {
  for (double gamma : {1.0, 1.4, 2.0, 3.0}) {
    const auto law = PressureLaw::power_law(0.7, gamma);
    for (int i = 1; i <= 200; ++i) {
      const double rho = 0.01 * i;
      const double lhs = law.p(rho);
      const double rhs = rho * law.potential_derivative(rho) - law.potential(rho);
      CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1e-300, std::abs(lhs)) + 1e-15);
    }
  }
}

TEST_CASE("P is convex for power laws") {
  for (double gamma : {1.0, 1.2, 2.0, 5.0 / 3.0}) {
    const auto law = PressureLaw::power_law(1.0, gamma);
    const double d = 1e-3;
    for (int i = 1; i < 5000; ++i) {
      const double rho = i * d;
      const double second = law.potential(rho + d) - 2.0 * law.potential(rho) + law.potential(rho - d);
      CHECK(second >= -1e-10);
    }
  }
}

TEST_CASE("pressure admissibility") {
  CHECK(check_pressure_admissible(PressureLaw::power_law(1.0, 1.4)));
  CHECK(check_pressure_admissible(PressureLaw::power_law(2.0, 1.0)));
  CHECK_FALSE(check_pressure_admissible(PressureLaw::zero()));
  auto flat = PressureLaw::custom([](double r) { return (r - 1.0) * (r - 1.0) * (r - 1.0) + 1.0 + 0.0 * r; },
                                  [](double r) { return 3.0 * (r - 1.0) * (r - 1.0); });
  CHECK_FALSE(check_pressure_admissible(flat));  // p(0) = 0 but p'(1) = 0
  auto good = PressureLaw::custom([](double r) { return r * r + r; }, [](double r) { return 2.0 * r + 1.0; });
  CHECK(check_pressure_admissible(good));
}

TEST_CASE("cruise speed") {
  CHECK(cruise_speed(FrictionFunction::linear(4.0)) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(cruise_speed(FrictionFunction::linear(1.0)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(cruise_speed(FrictionFunction::saturating(1.0)), NoCruiseSpeed);
  CHECK_THROWS_AS(cruise_speed(FrictionFunction::constant(2.0)), NoCruiseSpeed);
  for (double alpha : {0.3, 1.0, 2.5, 9.0, 100.0}) {
    const auto h = FrictionFunction::capped_linear(alpha, 3.0);
    const double s = cruise_speed(h);
    CHECK(std::abs(h(s * s) - 1.0) <= 1e-10);
  }
  const auto sat = FrictionFunction::saturating(2.0);
  CHECK(std::abs(sat(std::pow(cruise_speed(sat), 2)) - 1.0) <= 1e-10);
}

TEST_CASE("split_friction reconstructs H") {
  const auto check_split = [](const FrictionFunction& h, double z0) {
    const auto split = split_friction(h, z0);
    double prev = -1e300;
    for (int i = 0; i <= 10000; ++i) {
      const double z = 5.0 * z0 * i / 10000.0 + 3.0 * i / 10000.0;
      const double sum = split.compact(z) + split.nondecreasing(z);
      CHECK(std::abs(sum - h(z)) <= 4e-16 * std::max(1.0, std::abs(h(z))));
      if (z > z0) CHECK(split.compact(z) == 0.0);
      CHECK(split.nondecreasing(z) >= prev);
      prev = split.nondecreasing(z);
    }
  };
  check_split(FrictionFunction::capped_linear(1.0, 1.0), 1.0);
  check_split(FrictionFunction::linear(2.0), 0.0);
  {
    const auto split = split_friction(FrictionFunction::linear(2.0), 0.0);
    for (double z : {0.0, 0.5, 3.0}) CHECK(split.compact(z) == 0.0);
  }
  // bump below Z0
  FrictionFunction bump(
      "bump", [](double z) { return z + 0.5 * std::exp(-40.0 * (z - 0.4) * (z - 0.4)); },
      [](double z) { return 1.0 - 40.0 * (z - 0.4) * std::exp(-40.0 * (z - 0.4) * (z - 0.4)); },
      std::numeric_limits<double>::infinity(), 1.0);
  check_split(bump, 1.0);
  CHECK_THROWS_AS(split_friction(bump, 0.0), MonotonicityViolation);
}

TEST_CASE("kernels on the torus") {
  TorusGrid g(2, 16);
  const auto cosk = sample_kernel_on_torus(cosine_kernel(2, 1.0, 0), g);
  for (std::size_t i = 0; i < g.size(); ++i)
    CHECK(cosk.value[i] == doctest::Approx(std::cos(std::numbers::pi * g.displacement(i)[0])));
  CHECK(kernel_symmetric_on(cosk.value));

  const auto one = sample_kernel_on_torus(constant_kernel(2, 1.0), g);
  CHECK(one.value.min() == doctest::Approx(1.0));
  CHECK(one.value.max() == doctest::Approx(1.0));

  CHECK_THROWS_AS(sample_kernel_on_torus(quadratic_log_kernel(2), g), SingularOnTorus);
  CHECK_THROWS_AS(sample_kernel_on_torus(power_law_kernel(3, 2.0), TorusGrid(3, 4)), SingularOnTorus);

  const auto rc = sample_kernel_on_torus(raised_cosine_kernel(2, 1.0), g);
  CHECK(rc.value.min() >= 0.0);
  CHECK(kernel_symmetric_on(rc.value));
  CHECK(kernel_symmetric_on(sample_kernel_on_torus(gaussian_kernel(2, 1.0, 0.3), g).value));
}

TEST_CASE("cosine-series kernels agree with their closed form") {
  const auto rc = raised_cosine_kernel(3, 2.0);
  CHECK(rc.trig.size() == 14);
  for (double a : {-0.9, -0.2, 0.0, 0.4, 0.95}) {
    const Vec z{a, 0.3 - a, 0.5 * a};
    double expect = 2.0;
    for (int d = 0; d < 3; ++d) expect *= 0.5 * (1.0 + std::cos(std::numbers::pi * z[d]));
    CHECK(rc(z) == doctest::Approx(expect).epsilon(1e-14));
    const double e = 1e-6;
    for (int d = 0; d < 3; ++d) {
      Vec zp = z, zm = z;
      zp[d] += e;
      zm[d] -= e;
      CHECK(rc.gradient(z)[d] == doctest::Approx((rc(zp) - rc(zm)) / (2 * e)).epsilon(1e-7));
    }
  }
}

TEST_CASE("whole-space kernel gradients") {
  const auto k = quadratic_log_kernel(2);
  const Vec z{0.3, -0.4, 0.0};
  const double e = 1e-6;
  for (int d = 0; d < 2; ++d) {
    Vec zp = z, zm = z;
    zp[d] += e;
    zm[d] -= e;
    CHECK(k.gradient(z)[d] == doctest::Approx((k(zp) - k(zm)) / (2 * e)).epsilon(1e-7));
  }
  for (int dim = 1; dim <= 3; ++dim) {
    const auto p = power_law_kernel(dim, 2.0);
    Vec w{0.3, dim > 1 ? -0.4 : 0.0, dim > 2 ? 0.2 : 0.0};
    for (int d = 0; d < dim; ++d) {
      Vec wp = w, wm = w;
      wp[d] += e;
      wm[d] -= e;
      CHECK(p.gradient(w)[d] == doctest::Approx((p(wp) - p(wm)) / (2 * e)).epsilon(1e-6));
    }
  }
}
