#pragma once

#include "swarmflow/torus_grid.hpp"

namespace swarmflow {

/// Largest eigenvalue of the leading dim x dim block of a symmetric matrix.
/// Closed form: direct for dim <= 2, trigonometric (Smith) for dim = 3.
double lambda_max(const Mat& a, int dim);

/// h (x) h, leading dim x dim block.
Mat outer(const Vec& h, int dim);

}  // namespace swarmflow
