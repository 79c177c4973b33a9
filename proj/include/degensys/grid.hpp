#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace degensys {

/// Uniform vertex-centered grid on an axis-aligned interval (1D) or rectangle (2D).
///
/// Only interior nodes are stored. The boundary carries the homogeneous Dirichlet
/// condition, so every nodal field implicitly vanishes there. The spacing per axis
/// is extent / (nodes + 1); interior node i sits at (i + 1) * spacing.
class Grid {
public:
  static Grid line(int nodes, double extent = 1.0) {
    return Grid(1, {nodes, 1}, {extent, 1.0});
  }

  static Grid rectangle(int nodes_x, int nodes_y, double extent_x = 1.0, double extent_y = 1.0) {
    return Grid(2, {nodes_x, nodes_y}, {extent_x, extent_y});
  }

  int dim() const { return dim_; }
  int nodes(int axis) const { return nodes_[static_cast<std::size_t>(axis)]; }
  double extent(int axis) const { return extent_[static_cast<std::size_t>(axis)]; }
  double spacing(int axis) const { return spacing_[static_cast<std::size_t>(axis)]; }

  /// Interior node count (product over axes).
  std::size_t size() const {
    return static_cast<std::size_t>(nodes_[0]) * static_cast<std::size_t>(nodes_[1]);
  }

  /// Quadrature weight of one node: product of spacings (h in 1D, hx*hy in 2D).
  double cell_volume() const { return dim_ == 1 ? spacing_[0] : spacing_[0] * spacing_[1]; }

  /// Measure of the whole domain.
  double volume() const { return dim_ == 1 ? extent_[0] : extent_[0] * extent_[1]; }

  /// Coordinate of interior node i along an axis (boundary excluded).
  double coord(int axis, int i) const {
    return (i + 1) * spacing_[static_cast<std::size_t>(axis)];
  }

  /// Row-major flat index of interior node (i, j).
  std::size_t index(int i, int j = 0) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(nodes_[0]) +
           static_cast<std::size_t>(i);
  }

  friend bool operator==(const Grid&, const Grid&) = default;

private:
  Grid(int dim, std::array<int, 2> nodes, std::array<double, 2> extent)
      : dim_(dim), nodes_(nodes), extent_(extent) {
    for (int axis = 0; axis < dim_; ++axis) {
      if (nodes_[static_cast<std::size_t>(axis)] < 3)
        throw std::invalid_argument("Grid: need at least 3 interior nodes per axis");
      if (!(extent_[static_cast<std::size_t>(axis)] > 0.0))
        throw std::invalid_argument("Grid: extent must be positive");
    }
    spacing_[0] = extent_[0] / (nodes_[0] + 1);
    spacing_[1] = dim_ == 2 ? extent_[1] / (nodes_[1] + 1) : 1.0;
  }

  int dim_;
  std::array<int, 2> nodes_;   // {nx, ny}; ny == 1 in 1D
  std::array<double, 2> extent_;
  std::array<double, 2> spacing_;
};

/// Nodal values of a scalar function on the interior nodes of a Grid, row-major.
class ScalarField {
public:
  explicit ScalarField(const Grid& grid, double fill = 0.0)
      : grid_(grid), values_(grid.size(), fill) {}

  /// Sample a closed-form function at the interior nodes. In 1D the second
  /// argument is passed as 0.
  template <class Fn>
  static ScalarField from_function(const Grid& grid, Fn&& fn) {
    ScalarField out(grid);
    const int ny = grid.dim() == 2 ? grid.nodes(1) : 1;
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < grid.nodes(0); ++i) {
        const double x = grid.coord(0, i);
        const double y = grid.dim() == 2 ? grid.coord(1, j) : 0.0;
        out.values_[grid.index(i, j)] = fn(x, y);
      }
    return out;
  }

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }

  double operator[](std::size_t k) const { return values_[k]; }
  double& operator[](std::size_t k) { return values_[k]; }
  double at(int i, int j = 0) const { return values_[grid_.index(i, j)]; }
  double& at(int i, int j = 0) { return values_[grid_.index(i, j)]; }

  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  bool all_finite() const {
    for (double v : values_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  /// Apply a pointwise map, returning a new field.
  template <class Fn>
  ScalarField map(Fn&& fn) const {
    ScalarField out(grid_);
    for (std::size_t k = 0; k < values_.size(); ++k) out.values_[k] = fn(values_[k]);
    return out;
  }

private:
  Grid grid_;
  std::vector<double> values_;
};

inline void require_same_grid(const ScalarField& a, const ScalarField& b, const char* what) {
  if (!(a.grid() == b.grid()))
    throw std::invalid_argument(std::string(what) + ": fields live on different grids");
}

/// c1*x + c2*y, elementwise.
inline ScalarField lin_combo(double c1, const ScalarField& x, double c2, const ScalarField& y) {
  require_same_grid(x, y, "lin_combo");
  ScalarField out(x.grid());
  for (std::size_t k = 0; k < x.size(); ++k) out[k] = c1 * x[k] + c2 * y[k];
  return out;
}

inline ScalarField operator-(const ScalarField& x, const ScalarField& y) {
  return lin_combo(1.0, x, -1.0, y);
}

/// Discrete L2 norm: sqrt(sum v^2 * h^dim), midpoint quadrature.
inline double l2_norm(const ScalarField& v) {
  double s = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) s += v[k] * v[k];
  return std::sqrt(s * v.grid().cell_volume());
}

/// Discrete sup norm: max |v|.
inline double linf_norm(const ScalarField& v) {
  double m = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) m = std::max(m, std::abs(v[k]));
  return m;
}

}  // namespace degensys
