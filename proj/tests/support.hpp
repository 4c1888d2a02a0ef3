#pragma once

#include <cmath>
#include <numbers>
#include <random>

#include "swarmflow/torus_grid.hpp"

namespace testing_support {

using swarmflow::ScalarField;
using swarmflow::TorusGrid;
using swarmflow::Vec;
using swarmflow::VectorField;

inline constexpr double pi = std::numbers::pi;

/// Random trigonometric polynomial with modes |m_d| <= kmax per axis.
inline ScalarField random_smooth(const TorusGrid& g, std::mt19937_64& rng, int kmax = 3,
                                 bool zero_mean = true) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> k(-kmax, kmax);
  struct Mode {
    std::array<int, 3> m;
    double a, b;
  };
  std::vector<Mode> modes;
  for (int i = 0; i < 6; ++i) {
    Mode md{{0, 0, 0}, u(rng), u(rng)};
    for (int d = 0; d < g.dim(); ++d) md.m[d] = k(rng);
    modes.push_back(md);
  }
  const double c0 = zero_mean ? 0.0 : 2.0;
  return ScalarField::sample(g, [&](const Vec& x) {
    double s = c0;
    for (const auto& md : modes) {
      const double ph = pi * (md.m[0] * x[0] + md.m[1] * x[1] + md.m[2] * x[2]);
      if (md.m == std::array<int, 3>{0, 0, 0}) {
        if (!zero_mean) s += md.a;
        continue;
      }
      s += md.a * std::cos(ph) + md.b * std::sin(ph);
    }
    return s;
  });
}

inline VectorField random_smooth_vector(const TorusGrid& g, std::mt19937_64& rng, int kmax = 3,
                                        bool zero_mean = false) {
  std::vector<ScalarField> comps;
  for (int d = 0; d < g.dim(); ++d) comps.push_back(random_smooth(g, rng, kmax, zero_mean));
  return VectorField::from_components(comps);
}

inline double max_diff(const ScalarField& a, const ScalarField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double max_diff(const VectorField& a, const VectorField& b) {
  double m = 0.0;
  for (int d = 0; d < a.dim(); ++d)
    for (std::size_t i = 0; i < a.size(); ++i)
      m = std::max(m, std::abs(a.component(d)[i] - b.component(d)[i]));
  return m;
}

}  // namespace testing_support
