#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace swarmflow {

/// Point or vector in R^N, N <= 3. Components beyond the grid dimension stay zero.
using Vec = std::array<double, 3>;

/// Symmetric 3x3 storage; only the leading N x N block is meaningful.
using Mat = std::array<std::array<double, 3>, 3>;

inline constexpr double kPeriod = 2.0;

/// Uniform cell-centred grid on the flat torus [-1,1)^N.
///
/// Cells are stored row-major with axis 0 slowest. The same index space doubles as the
/// lattice of displacements z = j*h (wrapped into [-1,1)) on which kernels are sampled,
/// since differences of cell centres are exactly these lattice vectors.
class TorusGrid {
 public:
  TorusGrid(int dim, int cells_per_axis);

  int dim() const { return dim_; }
  int cells_per_axis() const { return n_; }
  double spacing() const { return h_; }
  std::size_t size() const { return size_; }
  double cell_volume() const { return cell_volume_; }
  double domain_volume() const;

  /// -1 + (j + 1/2) h
  double center(int j) const { return -1.0 + (j + 0.5) * h_; }

  std::array<int, 3> unflatten(std::size_t idx) const;
  /// Indices are wrapped periodically.
  std::size_t flatten(std::array<int, 3> ijk) const;

  Vec cell_center(std::size_t idx) const;
  Vec displacement(std::size_t idx) const;
  /// Index of the lattice displacement -z.
  std::size_t mirror(std::size_t idx) const;
  /// Index shifted by whole cells along each axis.
  std::size_t shifted(std::size_t idx, std::array<int, 3> by) const;

  bool operator==(const TorusGrid& other) const {
    return dim_ == other.dim_ && n_ == other.n_;
  }

 private:
  int dim_;
  int n_;
  double h_;
  std::size_t size_;
  double cell_volume_;
};

void require_same_grid(const TorusGrid& a, const TorusGrid& b, const char* where);

class ScalarField {
 public:
  explicit ScalarField(const TorusGrid& grid, double value = 0.0);
  ScalarField(const TorusGrid& grid, std::vector<double> values);

  static ScalarField sample(const TorusGrid& grid, const std::function<double(const Vec&)>& f);

  const TorusGrid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  /// h^N * sum
  double integral() const;
  double mean() const;
  double max_abs() const;
  double min() const;
  double max() const;
  bool all_finite() const;

  ScalarField& operator+=(const ScalarField& o);
  ScalarField& operator-=(const ScalarField& o);
  ScalarField& operator*=(double s);

 private:
  TorusGrid grid_;
  std::vector<double> values_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(ScalarField a, double s);
ScalarField operator*(double s, ScalarField a);
/// Cellwise product.
ScalarField hadamard(const ScalarField& a, const ScalarField& b);
/// h^N sum of a*b.
double inner(const ScalarField& a, const ScalarField& b);

/// Structure-of-arrays vector field with one component array per axis.
class VectorField {
 public:
  explicit VectorField(const TorusGrid& grid, const Vec& value = {0.0, 0.0, 0.0});

  static VectorField sample(const TorusGrid& grid, const std::function<Vec(const Vec&)>& f);
  static VectorField from_components(const std::vector<ScalarField>& comps);

  const TorusGrid& grid() const { return grid_; }
  int dim() const { return grid_.dim(); }
  std::size_t size() const { return grid_.size(); }

  std::span<double> component(int d) { return comps_[d]; }
  std::span<const double> component(int d) const { return comps_[d]; }
  ScalarField component_field(int d) const;
  void set_component(int d, const ScalarField& f);

  Vec at(std::size_t i) const;
  void set(std::size_t i, const Vec& v);

  Vec integral() const;
  Vec mean() const;
  double max_norm() const;
  /// Cellwise squared Euclidean norm.
  ScalarField norm_squared() const;
  bool all_finite() const;

  VectorField& operator+=(const VectorField& o);
  VectorField& operator-=(const VectorField& o);
  VectorField& operator*=(double s);

 private:
  TorusGrid grid_;
  std::array<std::vector<double>, 3> comps_;
};

VectorField operator+(VectorField a, const VectorField& b);
VectorField operator-(VectorField a, const VectorField& b);
VectorField operator*(VectorField a, double s);
/// Cellwise scalar times vector.
VectorField scale(const ScalarField& s, const VectorField& v);
/// Cellwise dot product.
ScalarField dot(const VectorField& a, const VectorField& b);
/// h^N sum of a.b
double inner(const VectorField& a, const VectorField& b);
VectorField add_constant(VectorField v, const Vec& c);

/// Symmetric N x N matrix per cell, stored as the upper triangle.
class SymTensorField {
 public:
  SymTensorField(const TorusGrid& grid, bool trace_free);

  const TorusGrid& grid() const { return grid_; }
  bool trace_free() const { return trace_free_; }
  int dim() const { return grid_.dim(); }

  double get(std::size_t cell, int i, int j) const;
  void set(std::size_t cell, int i, int j, double value);
  Mat matrix(std::size_t cell) const;
  void set_matrix(std::size_t cell, const Mat& m);
  double trace(std::size_t cell) const;
  double max_abs_trace() const;
  double max_abs() const;

  /// Row divergence (div M)_i = sum_j d_j M_ij, computed spectrally.
  VectorField divergence() const;

  SymTensorField& operator*=(double s);

 private:
  int slot(int i, int j) const;

  TorusGrid grid_;
  bool trace_free_;
  std::vector<std::vector<double>> comps_;
};

inline double norm2(const Vec& v) { return v[0] * v[0] + v[1] * v[1] + v[2] * v[2]; }

}  // namespace swarmflow
