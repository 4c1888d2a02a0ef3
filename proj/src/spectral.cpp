#include "swarmflow/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "swarmflow/errors.hpp"

namespace swarmflow {

namespace {

// fftw_malloc guarantees the alignment the cached plans were created with.
class FftBuffer {
 public:
  explicit FftBuffer(std::size_t n)
      : data_(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))), size_(n) {
    if (data_ == nullptr) throw std::bad_alloc();
  }
  ~FftBuffer() { fftw_free(data_); }
  FftBuffer(const FftBuffer&) = delete;
  FftBuffer& operator=(const FftBuffer&) = delete;

  fftw_complex* get() { return data_; }
  Complex* complex() { return reinterpret_cast<Complex*>(data_); }
  std::size_t size() const { return size_; }

 private:
  fftw_complex* data_;
  std::size_t size_;
};

struct PlanPair {
  fftw_plan forward;
  fftw_plan backward;
};

// Plan creation is not thread-safe in FFTW; execution on distinct buffers is.
PlanPair plans_for(const TorusGrid& grid) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, PlanPair> cache;
  std::lock_guard<std::mutex> lock(mutex);
  const auto key = std::make_pair(grid.dim(), grid.cells_per_axis());
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  int dims[3] = {grid.cells_per_axis(), grid.cells_per_axis(), grid.cells_per_axis()};
  FftBuffer in(grid.size());
  FftBuffer out(grid.size());
  PlanPair p{};
  p.forward = fftw_plan_dft(grid.dim(), dims, in.get(), out.get(), FFTW_FORWARD, FFTW_ESTIMATE);
  p.backward = fftw_plan_dft(grid.dim(), dims, in.get(), out.get(), FFTW_BACKWARD, FFTW_ESTIMATE);
  cache.emplace(key, p);
  return p;
}

int signed_mode(int k, int n) { return k <= n / 2 ? k : k - n; }

}  // namespace

std::vector<Complex> forward_transform(const TorusGrid& grid, std::span<const double> values) {
  const std::size_t n = grid.size();
  FftBuffer in(n);
  FftBuffer out(n);
  for (std::size_t i = 0; i < n; ++i) in.complex()[i] = Complex(values[i], 0.0);
  fftw_execute_dft(plans_for(grid).forward, in.get(), out.get());
  std::vector<Complex> c(n);
  const double inv = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) c[i] = out.complex()[i] * inv;
  return c;
}

std::vector<double> inverse_transform(const TorusGrid& grid, std::vector<Complex> coeffs) {
  const std::size_t n = grid.size();
  FftBuffer in(n);
  FftBuffer out(n);
  for (std::size_t i = 0; i < n; ++i) in.complex()[i] = coeffs[i];
  fftw_execute_dft(plans_for(grid).backward, in.get(), out.get());
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = out.complex()[i].real();
  return v;
}

Vec wavevector(const TorusGrid& grid, std::size_t mode) {
  const auto k = grid.unflatten(mode);
  const int n = grid.cells_per_axis();
  Vec kappa{0.0, 0.0, 0.0};
  for (int d = 0; d < grid.dim(); ++d) {
    if (k[d] == n / 2) continue;
    kappa[d] = std::numbers::pi * signed_mode(k[d], n);
  }
  return kappa;
}

ScalarField spectral_partial(const ScalarField& f, int axis) {
  const TorusGrid& g = f.grid();
  auto c = forward_transform(g, f.values());
  for (std::size_t k = 0; k < c.size(); ++k) c[k] *= Complex(0.0, wavevector(g, k)[axis]);
  return ScalarField(g, inverse_transform(g, std::move(c)));
}

VectorField spectral_gradient(const ScalarField& f) {
  const TorusGrid& g = f.grid();
  const auto c = forward_transform(g, f.values());
  VectorField out(g);
  for (int d = 0; d < g.dim(); ++d) {
    std::vector<Complex> cd(c.size());
    for (std::size_t k = 0; k < c.size(); ++k) cd[k] = c[k] * Complex(0.0, wavevector(g, k)[d]);
    out.set_component(d, ScalarField(g, inverse_transform(g, std::move(cd))));
  }
  return out;
}

ScalarField spectral_divergence(const VectorField& v) {
  const TorusGrid& g = v.grid();
  std::vector<Complex> acc(g.size(), Complex(0.0, 0.0));
  for (int d = 0; d < g.dim(); ++d) {
    const auto c = forward_transform(g, v.component(d));
    for (std::size_t k = 0; k < c.size(); ++k) acc[k] += c[k] * Complex(0.0, wavevector(g, k)[d]);
  }
  return ScalarField(g, inverse_transform(g, std::move(acc)));
}

ScalarField spectral_laplacian(const ScalarField& f) {
  const TorusGrid& g = f.grid();
  auto c = forward_transform(g, f.values());
  for (std::size_t k = 0; k < c.size(); ++k) c[k] *= -norm2(wavevector(g, k));
  return ScalarField(g, inverse_transform(g, std::move(c)));
}

ScalarField invert_laplacian(const ScalarField& f) {
  const TorusGrid& g = f.grid();
  const double m = f.mean();
  if (std::abs(m) > 1e-10 * f.max_abs() && std::abs(m) > 0.0) {
    throw NonZeroMean("invert_laplacian: source mean " + std::to_string(m) +
                      " exceeds 1e-10 of its sup norm");
  }
  auto c = forward_transform(g, f.values());
  for (std::size_t k = 0; k < c.size(); ++k) {
    const double k2 = norm2(wavevector(g, k));
    c[k] = k2 > 0.0 ? c[k] / k2 : Complex(0.0, 0.0);
  }
  return ScalarField(g, inverse_transform(g, std::move(c)));
}

ScalarField periodic_convolve(const ScalarField& kernel, const ScalarField& f) {
  require_same_grid(kernel.grid(), f.grid(), "periodic_convolve");
  const TorusGrid& g = f.grid();
  auto ck = forward_transform(g, kernel.values());
  const auto cf = forward_transform(g, f.values());
  const double vol = g.domain_volume();
  for (std::size_t k = 0; k < ck.size(); ++k) ck[k] *= cf[k] * vol;
  return ScalarField(g, inverse_transform(g, std::move(ck)));
}

VectorField periodic_convolve(const VectorField& kernel, const ScalarField& f) {
  require_same_grid(kernel.grid(), f.grid(), "periodic_convolve");
  const TorusGrid& g = f.grid();
  const auto cf = forward_transform(g, f.values());
  const double vol = g.domain_volume();
  VectorField out(g);
  for (int d = 0; d < g.dim(); ++d) {
    auto ck = forward_transform(g, kernel.component(d));
    for (std::size_t k = 0; k < ck.size(); ++k) ck[k] *= cf[k] * vol;
    out.set_component(d, ScalarField(g, inverse_transform(g, std::move(ck))));
  }
  return out;
}

HelmholtzParts helmholtz_decompose(const VectorField& m) {
  const TorusGrid& g = m.grid();
  const int dim = g.dim();
  std::array<std::vector<Complex>, 3> c;
  for (int d = 0; d < dim; ++d) c[d] = forward_transform(g, m.component(d));

  std::vector<Complex> phi(g.size(), Complex(0.0, 0.0));
  std::array<std::vector<Complex>, 3> grad;
  for (int d = 0; d < dim; ++d) grad[d].assign(g.size(), Complex(0.0, 0.0));

  for (std::size_t k = 0; k < g.size(); ++k) {
    const Vec kappa = wavevector(g, k);
    const double k2 = norm2(kappa);
    if (k2 == 0.0) continue;
    Complex kdotm(0.0, 0.0);
    for (int d = 0; d < dim; ++d) kdotm += kappa[d] * c[d][k];
    phi[k] = Complex(0.0, -1.0) * kdotm / k2;
    for (int d = 0; d < dim; ++d) grad[d][k] = kappa[d] * kdotm / k2;
  }

  Vec mean{0.0, 0.0, 0.0};
  for (int d = 0; d < dim; ++d) mean[d] = c[d][0].real();

  VectorField gradient(g);
  VectorField solenoidal(g);
  for (int d = 0; d < dim; ++d) {
    std::vector<Complex> sol(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) sol[k] = c[d][k] - grad[d][k];
    sol[0] = Complex(0.0, 0.0);
    gradient.set_component(d, ScalarField(g, inverse_transform(g, grad[d])));
    solenoidal.set_component(d, ScalarField(g, inverse_transform(g, std::move(sol))));
  }
  return HelmholtzParts{std::move(solenoidal), mean,
                        ScalarField(g, inverse_transform(g, std::move(phi))),
                        std::move(gradient)};
}

double spectral_l2_squared(const ScalarField& f) {
  const auto c = forward_transform(f.grid(), f.values());
  double s = 0.0;
  for (const auto& ck : c) s += std::norm(ck);
  return s * f.grid().domain_volume();
}

}  // namespace swarmflow
