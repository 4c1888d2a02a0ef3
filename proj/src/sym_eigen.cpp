#include "swarmflow/sym_eigen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace swarmflow {

double lambda_max(const Mat& a, int dim) {
  if (dim == 1) return a[0][0];
  if (dim == 2) {
    const double mid = 0.5 * (a[0][0] + a[1][1]);
    const double half = 0.5 * (a[0][0] - a[1][1]);
    return mid + std::hypot(half, a[0][1]);
  }
  const double p1 = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
  const double q = (a[0][0] + a[1][1] + a[2][2]) / 3.0;
  const double d0 = a[0][0] - q, d1 = a[1][1] - q, d2 = a[2][2] - q;
  const double p2 = d0 * d0 + d1 * d1 + d2 * d2 + 2.0 * p1;
  if (p2 == 0.0) return q;
  const double p = std::sqrt(p2 / 6.0);
  // det((A - qI)/p) / 2
  const double b00 = d0 / p, b11 = d1 / p, b22 = d2 / p;
  const double b01 = a[0][1] / p, b02 = a[0][2] / p, b12 = a[1][2] / p;
  const double det = b00 * (b11 * b22 - b12 * b12) - b01 * (b01 * b22 - b12 * b02) +
                     b02 * (b01 * b12 - b11 * b02);
  const double r = std::clamp(0.5 * det, -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  return q + 2.0 * p * std::cos(phi);
}

Mat outer(const Vec& h, int dim) {
  Mat m{};
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) m[i][j] = h[i] * h[j];
  return m;
}

}  // namespace swarmflow
