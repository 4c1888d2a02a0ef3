#include "swarmflow/torus_grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "swarmflow/errors.hpp"
#include "swarmflow/spectral.hpp"

namespace swarmflow {

namespace {

int wrap(int i, int n) {
  int r = i % n;
  return r < 0 ? r + n : r;
}

}  // namespace

TorusGrid::TorusGrid(int dim, int cells_per_axis) : dim_(dim), n_(cells_per_axis) {
  if (dim < 1 || dim > 3) throw Error("torus dimension must be 1, 2 or 3");
  if (cells_per_axis < 4 || cells_per_axis % 2 != 0)
    throw Error("cells per axis must be even and >= 4, got " + std::to_string(cells_per_axis));
  h_ = kPeriod / n_;
  size_ = 1;
  cell_volume_ = 1.0;
  for (int d = 0; d < dim_; ++d) {
    size_ *= static_cast<std::size_t>(n_);
    cell_volume_ *= h_;
  }
}

double TorusGrid::domain_volume() const { return std::pow(kPeriod, dim_); }

std::array<int, 3> TorusGrid::unflatten(std::size_t idx) const {
  std::array<int, 3> ijk{0, 0, 0};
  for (int d = dim_ - 1; d >= 0; --d) {
    ijk[d] = static_cast<int>(idx % n_);
    idx /= n_;
  }
  return ijk;
}

std::size_t TorusGrid::flatten(std::array<int, 3> ijk) const {
  std::size_t idx = 0;
  for (int d = 0; d < dim_; ++d) idx = idx * n_ + static_cast<std::size_t>(wrap(ijk[d], n_));
  return idx;
}

Vec TorusGrid::cell_center(std::size_t idx) const {
  const auto ijk = unflatten(idx);
  Vec x{0.0, 0.0, 0.0};
  for (int d = 0; d < dim_; ++d) x[d] = center(ijk[d]);
  return x;
}

Vec TorusGrid::displacement(std::size_t idx) const {
  const auto ijk = unflatten(idx);
  Vec z{0.0, 0.0, 0.0};
  for (int d = 0; d < dim_; ++d) {
    const int j = ijk[d] < n_ / 2 ? ijk[d] : ijk[d] - n_;
    z[d] = j * h_;
  }
  return z;
}

std::size_t TorusGrid::mirror(std::size_t idx) const {
  auto ijk = unflatten(idx);
  for (int d = 0; d < dim_; ++d) ijk[d] = -ijk[d];
  return flatten(ijk);
}

std::size_t TorusGrid::shifted(std::size_t idx, std::array<int, 3> by) const {
  auto ijk = unflatten(idx);
  for (int d = 0; d < dim_; ++d) ijk[d] += by[d];
  return flatten(ijk);
}

void require_same_grid(const TorusGrid& a, const TorusGrid& b, const char* where) {
  if (!(a == b)) {
    throw GridMismatch(std::string(where) + ": fields live on different grids (" +
                       std::to_string(a.dim()) + "D/" + std::to_string(a.cells_per_axis()) +
                       " vs " + std::to_string(b.dim()) + "D/" +
                       std::to_string(b.cells_per_axis()) + ")");
  }
}

// ---------------------------------------------------------------- ScalarField

ScalarField::ScalarField(const TorusGrid& grid, double value)
    : grid_(grid), values_(grid.size(), value) {}

ScalarField::ScalarField(const TorusGrid& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) throw GridMismatch("scalar field payload size mismatch");
}

ScalarField ScalarField::sample(const TorusGrid& grid,
                                const std::function<double(const Vec&)>& f) {
  ScalarField out(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) out.values_[i] = f(grid.cell_center(i));
  return out;
}

double ScalarField::integral() const {
  double s = 0.0;
  for (double v : values_) s += v;
  return s * grid_.cell_volume();
}

double ScalarField::mean() const { return integral() / grid_.domain_volume(); }

double ScalarField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double ScalarField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double ScalarField::max() const { return *std::max_element(values_.begin(), values_.end()); }

bool ScalarField::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

ScalarField& ScalarField::operator+=(const ScalarField& o) {
  require_same_grid(grid_, o.grid_, "ScalarField +=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& o) {
  require_same_grid(grid_, o.grid_, "ScalarField -=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
  return *this;
}

ScalarField& ScalarField::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(ScalarField a, double s) { return a *= s; }
ScalarField operator*(double s, ScalarField a) { return a *= s; }

ScalarField hadamard(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a.grid(), b.grid(), "hadamard");
  ScalarField out(a.grid());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

double inner(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a.grid(), b.grid(), "inner");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s * a.grid().cell_volume();
}

// ---------------------------------------------------------------- VectorField

VectorField::VectorField(const TorusGrid& grid, const Vec& value) : grid_(grid) {
  for (int d = 0; d < grid.dim(); ++d) comps_[d].assign(grid.size(), value[d]);
}

VectorField VectorField::sample(const TorusGrid& grid, const std::function<Vec(const Vec&)>& f) {
  VectorField out(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) out.set(i, f(grid.cell_center(i)));
  return out;
}

VectorField VectorField::from_components(const std::vector<ScalarField>& comps) {
  if (comps.empty()) throw Error("from_components: no components");
  const TorusGrid& g = comps.front().grid();
  if (static_cast<int>(comps.size()) != g.dim())
    throw GridMismatch("from_components: component count does not match dimension");
  VectorField out(g);
  for (int d = 0; d < g.dim(); ++d) out.set_component(d, comps[d]);
  return out;
}

ScalarField VectorField::component_field(int d) const { return ScalarField(grid_, comps_[d]); }

void VectorField::set_component(int d, const ScalarField& f) {
  require_same_grid(grid_, f.grid(), "VectorField::set_component");
  comps_[d].assign(f.values().begin(), f.values().end());
}

Vec VectorField::at(std::size_t i) const {
  Vec v{0.0, 0.0, 0.0};
  for (int d = 0; d < grid_.dim(); ++d) v[d] = comps_[d][i];
  return v;
}

void VectorField::set(std::size_t i, const Vec& v) {
  for (int d = 0; d < grid_.dim(); ++d) comps_[d][i] = v[d];
}

Vec VectorField::integral() const {
  Vec s{0.0, 0.0, 0.0};
  for (int d = 0; d < grid_.dim(); ++d) {
    double acc = 0.0;
    for (double v : comps_[d]) acc += v;
    s[d] = acc * grid_.cell_volume();
  }
  return s;
}

Vec VectorField::mean() const {
  Vec s = integral();
  for (double& c : s) c /= grid_.domain_volume();
  return s;
}

double VectorField::max_norm() const {
  double m = 0.0;
  for (std::size_t i = 0; i < size(); ++i) m = std::max(m, norm2(at(i)));
  return std::sqrt(m);
}

ScalarField VectorField::norm_squared() const {
  ScalarField out(grid_);
  for (int d = 0; d < grid_.dim(); ++d)
    for (std::size_t i = 0; i < size(); ++i) out[i] += comps_[d][i] * comps_[d][i];
  return out;
}

bool VectorField::all_finite() const {
  for (int d = 0; d < grid_.dim(); ++d)
    for (double v : comps_[d])
      if (!std::isfinite(v)) return false;
  return true;
}

VectorField& VectorField::operator+=(const VectorField& o) {
  require_same_grid(grid_, o.grid_, "VectorField +=");
  for (int d = 0; d < grid_.dim(); ++d)
    for (std::size_t i = 0; i < size(); ++i) comps_[d][i] += o.comps_[d][i];
  return *this;
}

VectorField& VectorField::operator-=(const VectorField& o) {
  require_same_grid(grid_, o.grid_, "VectorField -=");
  for (int d = 0; d < grid_.dim(); ++d)
    for (std::size_t i = 0; i < size(); ++i) comps_[d][i] -= o.comps_[d][i];
  return *this;
}

VectorField& VectorField::operator*=(double s) {
  for (int d = 0; d < grid_.dim(); ++d)
    for (double& v : comps_[d]) v *= s;
  return *this;
}

VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
VectorField operator*(VectorField a, double s) { return a *= s; }

VectorField scale(const ScalarField& s, const VectorField& v) {
  require_same_grid(s.grid(), v.grid(), "scale");
  VectorField out(v.grid());
  for (int d = 0; d < v.dim(); ++d) {
    auto src = v.component(d);
    auto dst = out.component(d);
    for (std::size_t i = 0; i < v.size(); ++i) dst[i] = s[i] * src[i];
  }
  return out;
}

ScalarField dot(const VectorField& a, const VectorField& b) {
  require_same_grid(a.grid(), b.grid(), "dot");
  ScalarField out(a.grid());
  for (int d = 0; d < a.dim(); ++d) {
    auto x = a.component(d);
    auto y = b.component(d);
    for (std::size_t i = 0; i < a.size(); ++i) out[i] += x[i] * y[i];
  }
  return out;
}

double inner(const VectorField& a, const VectorField& b) { return dot(a, b).integral(); }

VectorField add_constant(VectorField v, const Vec& c) {
  for (int d = 0; d < v.dim(); ++d)
    for (double& x : v.component(d)) x += c[d];
  return v;
}

// ------------------------------------------------------------- SymTensorField

SymTensorField::SymTensorField(const TorusGrid& grid, bool trace_free)
    : grid_(grid), trace_free_(trace_free) {
  const int n = grid.dim();
  comps_.assign(static_cast<std::size_t>(n * (n + 1) / 2), std::vector<double>(grid.size(), 0.0));
}

int SymTensorField::slot(int i, int j) const {
  if (i > j) std::swap(i, j);
  const int n = grid_.dim();
  // row-major upper triangle
  return i * n - i * (i - 1) / 2 + (j - i);
}

double SymTensorField::get(std::size_t cell, int i, int j) const {
  return comps_[slot(i, j)][cell];
}

void SymTensorField::set(std::size_t cell, int i, int j, double value) {
  comps_[slot(i, j)][cell] = value;
}

Mat SymTensorField::matrix(std::size_t cell) const {
  Mat m{};
  const int n = grid_.dim();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m[i][j] = get(cell, i, j);
  return m;
}

void SymTensorField::set_matrix(std::size_t cell, const Mat& m) {
  const int n = grid_.dim();
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) set(cell, i, j, 0.5 * (m[i][j] + m[j][i]));
}

double SymTensorField::trace(std::size_t cell) const {
  double t = 0.0;
  for (int i = 0; i < grid_.dim(); ++i) t += get(cell, i, i);
  return t;
}

double SymTensorField::max_abs_trace() const {
  double m = 0.0;
  for (std::size_t c = 0; c < grid_.size(); ++c) m = std::max(m, std::abs(trace(c)));
  return m;
}

double SymTensorField::max_abs() const {
  double m = 0.0;
  for (const auto& comp : comps_)
    for (double v : comp) m = std::max(m, std::abs(v));
  return m;
}

VectorField SymTensorField::divergence() const {
  const int n = grid_.dim();
  VectorField out(grid_);
  for (int j = 0; j < n; ++j) {
    std::vector<ScalarField> column;
    for (int i = 0; i < n; ++i) column.emplace_back(grid_, comps_[slot(i, j)]);
    for (int i = 0; i < n; ++i) {
      const ScalarField dj = spectral_partial(column[i], j);
      auto dst = out.component(i);
      for (std::size_t c = 0; c < grid_.size(); ++c) dst[c] += dj[c];
    }
  }
  return out;
}

SymTensorField& SymTensorField::operator*=(double s) {
  for (auto& comp : comps_)
    for (double& v : comp) v *= s;
  return *this;
}

}  // namespace swarmflow
