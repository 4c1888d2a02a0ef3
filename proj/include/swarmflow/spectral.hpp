#pragma once

#include <complex>
#include <span>
#include <vector>

#include "swarmflow/torus_grid.hpp"

namespace swarmflow {

using Complex = std::complex<double>;

/// Normalised discrete Fourier coefficients: f_j = sum_k c_k exp(2 pi i j.k / n).
/// Mode k carries the wavevector kappa = pi * k_signed per axis.
std::vector<Complex> forward_transform(const TorusGrid& grid, std::span<const double> values);
/// Real part of the inverse of forward_transform.
std::vector<double> inverse_transform(const TorusGrid& grid, std::vector<Complex> coeffs);

/// Wavevector of a mode for first-derivative symbols. The Nyquist component of each
/// axis is zeroed, so every derivative operator here shares the same kernel.
Vec wavevector(const TorusGrid& grid, std::size_t mode);

ScalarField spectral_partial(const ScalarField& f, int axis);
VectorField spectral_gradient(const ScalarField& f);
ScalarField spectral_divergence(const VectorField& v);
/// div(grad f); symbol -|kappa|^2.
ScalarField spectral_laplacian(const ScalarField& f);

/// Zero-mean Phi with -Lap Phi = f. Throws NonZeroMean when
/// |mean f| > 1e-10 ||f||_inf; smaller means are removed.
ScalarField invert_laplacian(const ScalarField& f);

/// h^N-weighted circular convolution (k*f)(x_i) = h^N sum_j k(x_i - x_j) f(x_j).
/// The kernel is indexed by lattice displacement (see TorusGrid::displacement).
ScalarField periodic_convolve(const ScalarField& kernel, const ScalarField& f);
VectorField periodic_convolve(const VectorField& kernel, const ScalarField& f);

struct HelmholtzParts {
  VectorField solenoidal;  ///< divergence-free, zero mean
  Vec mean;                ///< spatially homogeneous part
  ScalarField potential;   ///< zero-mean Phi
  VectorField gradient;    ///< grad Phi
};

/// m = v + V + grad Phi.
HelmholtzParts helmholtz_decompose(const VectorField& m);

/// |Omega| * sum_k |c_k|^2, equal to h^N sum |f|^2 by Parseval.
double spectral_l2_squared(const ScalarField& f);

}  // namespace swarmflow
