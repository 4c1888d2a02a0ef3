#include "swarmflow/constitutive.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "swarmflow/errors.hpp"

namespace swarmflow {

namespace {

constexpr double kPi = std::numbers::pi;

double custom_integral(const std::function<double(double)>& p, double rho) {
  using boost::math::quadrature::gauss_kronrod;
  auto f = [&](double z) { return p(z) / (z * z); };
  return gauss_kronrod<double, 61>::integrate(f, 1.0, rho, 15, 1e-13);
}

std::vector<TrigTerm> canonical(std::vector<TrigTerm> terms) {
  std::map<std::array<int, 3>, double> merged;
  for (auto t : terms) {
    // cos is even: store m with the first non-zero entry positive
    for (int d = 0; d < 3; ++d) {
      if (t.m[d] == 0) continue;
      if (t.m[d] < 0)
        for (int& x : t.m) x = -x;
      break;
    }
    merged[t.m] += t.coef;
  }
  std::vector<TrigTerm> out;
  for (const auto& [m, c] : merged)
    if (c != 0.0) out.push_back({c, m});
  return out;
}

std::vector<TrigTerm> multiply(const std::vector<TrigTerm>& a, const std::vector<TrigTerm>& b) {
  std::vector<TrigTerm> out;
  for (const auto& x : a)
    for (const auto& y : b) {
      std::array<int, 3> plus{}, minus{};
      for (int d = 0; d < 3; ++d) {
        plus[d] = x.m[d] + y.m[d];
        minus[d] = x.m[d] - y.m[d];
      }
      out.push_back({0.5 * x.coef * y.coef, plus});
      out.push_back({0.5 * x.coef * y.coef, minus});
    }
  return canonical(std::move(out));
}

Kernel from_trig(std::string name, int dim, std::vector<TrigTerm> terms) {
  Kernel k;
  k.name = std::move(name);
  k.dim = dim;
  k.trig = canonical(std::move(terms));
  const auto t = k.trig;
  k.value = [t](const Vec& z) {
    double s = 0.0;
    for (const auto& term : t)
      s += term.coef * std::cos(kPi * (term.m[0] * z[0] + term.m[1] * z[1] + term.m[2] * z[2]));
    return s;
  };
  k.gradient = [t, dim](const Vec& z) {
    Vec g{0.0, 0.0, 0.0};
    for (const auto& term : t) {
      const double s =
          std::sin(kPi * (term.m[0] * z[0] + term.m[1] * z[1] + term.m[2] * z[2]));
      for (int d = 0; d < dim; ++d) g[d] -= term.coef * kPi * term.m[d] * s;
    }
    return g;
  };
  return k;
}

double radius(const Vec& z) { return std::sqrt(norm2(z)); }

}  // namespace

// ------------------------------------------------------------------ pressure

PressureLaw PressureLaw::zero() { return PressureLaw(); }

PressureLaw PressureLaw::power_law(double a, double gamma) {
  if (!(a > 0.0) || !(gamma >= 1.0)) throw Error("power law needs a > 0 and gamma >= 1");
  PressureLaw law;
  law.kind_ = Kind::power_law;
  law.a_ = a;
  law.gamma_ = gamma;
  return law;
}

PressureLaw PressureLaw::custom(std::function<double(double)> p, std::function<double(double)> dp) {
  PressureLaw law;
  law.kind_ = Kind::custom;
  law.p_ = std::move(p);
  law.dp_ = std::move(dp);
  return law;
}

double PressureLaw::p(double rho) const {
  switch (kind_) {
    case Kind::zero: return 0.0;
    case Kind::power_law: return a_ * std::pow(rho, gamma_);
    case Kind::custom: return p_(rho);
  }
  return 0.0;
}

double PressureLaw::dp(double rho) const {
  switch (kind_) {
    case Kind::zero: return 0.0;
    case Kind::power_law: return a_ * gamma_ * std::pow(rho, gamma_ - 1.0);
    case Kind::custom: return dp_(rho);
  }
  return 0.0;
}

double PressureLaw::potential(double rho) const {
  if (rho == 0.0) return 0.0;
  switch (kind_) {
    case Kind::zero: return 0.0;
    case Kind::power_law:
      if (gamma_ == 1.0) return a_ * rho * std::log(rho);
      return a_ * (std::pow(rho, gamma_) - rho) / (gamma_ - 1.0);
    case Kind::custom: return rho * custom_integral(p_, rho);
  }
  return 0.0;
}

double PressureLaw::potential_derivative(double rho) const {
  switch (kind_) {
    case Kind::zero: return 0.0;
    case Kind::power_law:
      if (gamma_ == 1.0) return a_ * (std::log(rho) + 1.0);
      return a_ * (gamma_ * std::pow(rho, gamma_ - 1.0) - 1.0) / (gamma_ - 1.0);
    case Kind::custom: return custom_integral(p_, rho) + p_(rho) / rho;
  }
  return 0.0;
}

double PressureLaw::sound_speed(double rho) const {
  return kind_ == Kind::zero ? 0.0 : std::sqrt(std::max(0.0, dp(std::max(rho, 0.0))));
}

double pressure_potential(const PressureLaw& law, double rho) {
  if (rho < 0.0) throw NegativeDensity("pressure_potential: rho = " + std::to_string(rho));
  return law.potential(rho);
}

bool check_pressure_admissible(const PressureLaw& law) {
  switch (law.kind()) {
    case PressureLaw::Kind::zero: return false;
    case PressureLaw::Kind::power_law: return law.a() > 0.0 && law.gamma() >= 1.0;
    case PressureLaw::Kind::custom: break;
  }
  if (std::abs(law.p(0.0)) > 1e-14) return false;
  for (int i = 1; i <= 2000; ++i) {
    const double rho = 1e-3 * std::pow(1e7, i / 2000.0);
    if (!(law.dp(rho) > 0.0)) return false;
  }
  for (int i = 1; i <= 1000; ++i)
    if (!(law.dp(i / 100.0) > 0.0)) return false;
  // growth at infinity, probed on a geometric tail
  double min_dp = std::numeric_limits<double>::infinity();
  double min_ratio = std::numeric_limits<double>::infinity();
  for (double rho = 1e2; rho <= 1e6; rho *= 10.0) {
    min_dp = std::min(min_dp, law.dp(rho));
    min_ratio = std::min(min_ratio, law.potential(rho) / law.p(rho));
  }
  return min_dp > 1e-10 && min_ratio > 1e-10;
}

// ------------------------------------------------------------------- kernels

Kernel zero_kernel(int dim) {
  Kernel k;
  k.name = "zero";
  k.dim = dim;
  k.zero = true;
  k.value = [](const Vec&) { return 0.0; };
  k.gradient = [](const Vec&) { return Vec{0.0, 0.0, 0.0}; };
  return k;
}

Kernel cosine_kernel(int dim, double amp, int axis) {
  std::vector<TrigTerm> terms;
  for (int d = 0; d < dim; ++d) {
    if (axis >= 0 && d != axis) continue;
    std::array<int, 3> m{0, 0, 0};
    m[d] = 1;
    terms.push_back({amp, m});
  }
  return from_trig("cosine", dim, std::move(terms));
}

Kernel raised_cosine_kernel(int dim, double amp) {
  std::vector<TrigTerm> series{{amp, {0, 0, 0}}};
  for (int d = 0; d < dim; ++d) {
    std::array<int, 3> m{0, 0, 0};
    m[d] = 1;
    series = multiply(series, {{0.5, {0, 0, 0}}, {0.5, m}});
  }
  Kernel k = from_trig("raised_cosine", dim, std::move(series));
  k.value = [dim, amp](const Vec& z) {
    double v = amp;
    for (int d = 0; d < dim; ++d) v *= 0.5 * (1.0 + std::cos(kPi * z[d]));
    return v;
  };
  return k;
}

Kernel constant_kernel(int dim, double c) {
  Kernel k = from_trig("constant", dim, {{c, {0, 0, 0}}});
  if (c == 0.0) k.zero = true;
  return k;
}

Kernel gaussian_kernel(int dim, double amp, double sigma) {
  Kernel k;
  k.name = "gaussian";
  k.dim = dim;
  const double s2 = sigma * sigma;
  k.value = [amp, s2](const Vec& z) { return amp * std::exp(-0.5 * norm2(z) / s2); };
  k.gradient = [amp, s2](const Vec& z) {
    const double f = -amp * std::exp(-0.5 * norm2(z) / s2) / s2;
    return Vec{f * z[0], f * z[1], f * z[2]};
  };
  return k;
}

Kernel quadratic_kernel(int dim) {
  Kernel k;
  k.name = "quadratic";
  k.dim = dim;
  k.form = KernelForm::quadratic;
  k.value = [](const Vec& z) { return 0.5 * norm2(z); };
  k.gradient = [](const Vec& z) { return z; };
  return k;
}

Kernel quadratic_log_kernel(int dim) {
  Kernel k;
  k.name = "quadratic_log";
  k.dim = dim;
  k.form = KernelForm::quadratic_log;
  k.singular = true;
  k.value = [](const Vec& z) { return 0.5 * norm2(z) - std::log(radius(z)); };
  k.gradient = [](const Vec& z) {
    const double r2 = norm2(z);
    if (r2 == 0.0) return Vec{0.0, 0.0, 0.0};
    const double f = 1.0 - 1.0 / r2;
    return Vec{f * z[0], f * z[1], f * z[2]};
  };
  return k;
}

Kernel power_law_kernel(int dim, double a) {
  Kernel k;
  k.name = "power_law";
  k.dim = dim;
  k.singular = dim >= 2;
  k.value = [dim, a](const Vec& z) {
    const double r = radius(z);
    const double attract = std::pow(r, a) / a;
    if (dim == 2) return attract - std::log(r);
    return attract - std::pow(r, 2.0 - dim) / (2.0 - dim);
  };
  k.gradient = [dim, a](const Vec& z) {
    const double r = radius(z);
    if (r == 0.0) return Vec{0.0, 0.0, 0.0};
    const double f = std::pow(r, a - 2.0) - std::pow(r, -static_cast<double>(dim));
    return Vec{f * z[0], f * z[1], f * z[2]};
  };
  return k;
}

Kernel cucker_smale_kernel(int dim, double c, double beta) {
  Kernel k;
  k.name = "cucker_smale";
  k.dim = dim;
  k.value = [c, beta](const Vec& z) { return c / std::pow(1.0 + norm2(z), beta); };
  k.gradient = [c, beta](const Vec& z) {
    const double f = -2.0 * beta * c / std::pow(1.0 + norm2(z), beta + 1.0);
    return Vec{f * z[0], f * z[1], f * z[2]};
  };
  return k;
}

KernelSamples sample_kernel_on_torus(const Kernel& k, const TorusGrid& grid) {
  if (k.singular)
    throw SingularOnTorus("kernel '" + k.name + "' is singular at the origin; use particle flock mode");
  ScalarField value(grid);
  VectorField gradient(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vec z = grid.displacement(i);
    value[i] = k.value(z);
    gradient.set(i, k.gradient(z));
  }
  if (!value.all_finite() || !gradient.all_finite())
    throw SingularOnTorus("kernel '" + k.name + "' is not finite on the fundamental cell");
  return {std::move(value), std::move(gradient)};
}

bool kernel_symmetric_on(const ScalarField& samples) {
  const TorusGrid& g = samples.grid();
  const double scale = std::max(1.0, samples.max_abs());
  for (std::size_t i = 0; i < g.size(); ++i)
    if (std::abs(samples[i] - samples[g.mirror(i)]) > 1e-12 * scale) return false;
  return true;
}

// ------------------------------------------------------------------ friction

FrictionFunction::FrictionFunction(std::string name, std::function<double(double)> h,
                                   std::function<double(double)> dh, double bound,
                                   double monotone_from)
    : name_(std::move(name)),
      h_(std::move(h)),
      dh_(std::move(dh)),
      bound_(bound),
      z0_(monotone_from),
      constant_one_(false) {}

FrictionFunction FrictionFunction::constant(double h0) {
  FrictionFunction f("constant", [h0](double) { return h0; }, [](double) { return 0.0; }, h0);
  f.constant_one_ = h0 == 1.0;
  return f;
}

FrictionFunction FrictionFunction::linear(double alpha) {
  return FrictionFunction(
      "linear", [alpha](double z) { return alpha * z; }, [alpha](double) { return alpha; },
      std::numeric_limits<double>::infinity());
}

FrictionFunction FrictionFunction::capped_linear(double alpha, double cap) {
  return FrictionFunction(
      "capped_linear", [alpha, cap](double z) { return std::min(alpha * z, cap); },
      [alpha, cap](double z) { return alpha * z < cap ? alpha : 0.0; }, cap);
}

FrictionFunction FrictionFunction::saturating(double cap) {
  return FrictionFunction(
      "saturating", [cap](double z) { return cap * z / (1.0 + z); },
      [cap](double z) { return cap / ((1.0 + z) * (1.0 + z)); }, cap);
}

double cruise_speed(const FrictionFunction& h) {
  if (h(0.0) > 1.0) throw NoCruiseSpeed("H(0) > 1");
  if (h(0.0) == 1.0) throw NoCruiseSpeed("H(0) = 1: no unique positive cruise speed");
  double hi = 1.0;
  while (h(hi * hi) < 1.0) {
    hi *= 2.0;
    if (hi > 1e8) throw NoCruiseSpeed("H never reaches 1");
  }
  double lo = 0.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (h(mid * mid) < 1.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

FrictionSplit split_friction(const FrictionFunction& h, double z0) {
  if (z0 < 0.0) throw Error("split_friction: Z0 must be non-negative");
  const double zmax = std::max(10.0, 4.0 * z0);
  double prev = h(z0);
  for (int i = 1; i <= 10000; ++i) {
    const double z = z0 + (zmax - z0) * i / 10000.0;
    const double v = h(z);
    if (v < prev - 1e-12 * std::max(1.0, std::abs(prev)))
      throw MonotonicityViolation("H decreases at Z = " + std::to_string(z) + " beyond Z0");
    prev = v;
  }
  FrictionFunction h2(
      h.name() + "_nondecreasing", [h, z0](double z) { return h(std::max(z, z0)); },
      [h, z0](double z) { return z > z0 ? h.derivative(z) : 0.0; }, h.bound(), 0.0);
  FrictionFunction h1(
      h.name() + "_compact", [h, z0](double z) { return z > z0 ? 0.0 : h(z) - h(z0); },
      [h, z0](double z) { return z > z0 ? 0.0 : h.derivative(z); }, h.bound(), z0);
  return {std::move(h1), std::move(h2)};
}

}  // namespace swarmflow
