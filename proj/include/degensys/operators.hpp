#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "degensys/grid.hpp"
#include "degensys/problem.hpp"

namespace degensys {

/// Per-face diffusion coefficients on the staggered face lattice.
///
/// x-face (i, j) separates nodes (i-1, j) and (i, j); indices run i = 0..nx with
/// i = 0 and i = nx touching the boundary. y-faces are analogous along the second
/// axis (absent in 1D).
struct FaceCoefficients {
  Grid grid;
  std::vector<double> x;  // (nx+1) * ny
  std::vector<double> y;  // nx * (ny+1), empty in 1D

  double x_face(int i, int j) const {
    return x[static_cast<std::size_t>(j) * (grid.nodes(0) + 1) + static_cast<std::size_t>(i)];
  }
  double y_face(int i, int j) const {
    return y[static_cast<std::size_t>(j) * grid.nodes(0) + static_cast<std::size_t>(i)];
  }
};

/// Harmonic average of the two adjacent nodal values per interior face; faces on
/// the boundary take the single interior neighbor's value. Harmonic averaging
/// keeps the assembled operator an M-matrix when the coefficient varies by
/// orders of magnitude between neighbors.
inline FaceCoefficients face_average(const ScalarField& D) {
  const Grid& g = D.grid();
  for (std::size_t k = 0; k < D.size(); ++k)
    if (!(D[k] > 0.0))
      throw std::invalid_argument("face_average: coefficient must be positive at every node");

  const int nx = g.nodes(0);
  const int ny = g.dim() == 2 ? g.nodes(1) : 1;
  const auto harmonic = [](double a, double b) { return 2.0 * a * b / (a + b); };

  FaceCoefficients f{g, {}, {}};
  f.x.resize(static_cast<std::size_t>(nx + 1) * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      double v;
      if (i == 0)
        v = D.at(0, j);
      else if (i == nx)
        v = D.at(nx - 1, j);
      else
        v = harmonic(D.at(i - 1, j), D.at(i, j));
      f.x[static_cast<std::size_t>(j) * (nx + 1) + i] = v;
    }
  if (g.dim() == 2) {
    f.y.resize(static_cast<std::size_t>(nx) * (ny + 1));
    for (int j = 0; j <= ny; ++j)
      for (int i = 0; i < nx; ++i) {
        double v;
        if (j == 0)
          v = D.at(i, 0);
        else if (j == ny)
          v = D.at(i, ny - 1);
        else
          v = harmonic(D.at(i, j - 1), D.at(i, j));
        f.y[static_cast<std::size_t>(j) * nx + i] = v;
      }
  }
  return f;
}

/// Symmetric positive definite operator in compressed sparse row form.
/// Assembled instances are M-matrices: positive diagonal, nonpositive
/// off-diagonals, and a dominance surplus of at least 1 from the reaction term.
class SparseOperator {
public:
  SparseOperator(Grid grid, std::vector<std::size_t> row_offsets, std::vector<std::size_t> cols,
                 std::vector<double> vals)
      : grid_(std::move(grid)),
        row_offsets_(std::move(row_offsets)),
        cols_(std::move(cols)),
        vals_(std::move(vals)) {
    if (row_offsets_.size() != grid_.size() + 1)
      throw std::invalid_argument("SparseOperator: row offsets do not match grid size");
    diag_.resize(grid_.size(), 0.0);
    for (std::size_t r = 0; r < grid_.size(); ++r)
      for (std::size_t p = row_offsets_[r]; p < row_offsets_[r + 1]; ++p)
        if (cols_[p] == r) diag_[r] = vals_[p];
  }

  std::size_t size() const { return grid_.size(); }
  const Grid& grid() const { return grid_; }
  double diagonal(std::size_t r) const { return diag_[r]; }

  void apply(std::span<const double> x, std::span<double> y) const {
    for (std::size_t r = 0; r < size(); ++r) {
      double s = 0.0;
      for (std::size_t p = row_offsets_[r]; p < row_offsets_[r + 1]; ++p)
        s += vals_[p] * x[cols_[p]];
      y[r] = s;
    }
  }

  ScalarField apply(const ScalarField& v) const {
    if (!(v.grid() == grid_))
      throw std::invalid_argument("SparseOperator::apply: dimension mismatch");
    ScalarField out(grid_);
    apply(v.values(), out.values());
    return out;
  }

  const std::vector<std::size_t>& row_offsets() const { return row_offsets_; }
  const std::vector<std::size_t>& cols() const { return cols_; }
  const std::vector<double>& vals() const { return vals_; }

private:
  Grid grid_;
  std::vector<std::size_t> row_offsets_;
  std::vector<std::size_t> cols_;
  std::vector<double> vals_;
  std::vector<double> diag_;
};

namespace detail {
inline SparseOperator assemble_impl(const Grid& g, const ScalarField& D, bool with_reaction) {
  if (!(D.grid() == g)) throw std::invalid_argument("assemble: coefficient not on grid");
  const FaceCoefficients f = face_average(D);
  const int nx = g.nodes(0);
  const int ny = g.dim() == 2 ? g.nodes(1) : 1;
  const double ihx2 = 1.0 / (g.spacing(0) * g.spacing(0));
  const double ihy2 = g.dim() == 2 ? 1.0 / (g.spacing(1) * g.spacing(1)) : 0.0;

  std::vector<std::size_t> offsets(g.size() + 1, 0);
  std::vector<std::size_t> cols;
  std::vector<double> vals;
  cols.reserve(g.size() * (g.dim() == 2 ? 5 : 3));
  vals.reserve(cols.capacity());

  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const std::size_t row = g.index(i, j);
      double diag = with_reaction ? 1.0 : 0.0;
      // columns in ascending order: down, left, diag, right, up
      double down = 0.0, left = 0.0, right = 0.0, up = 0.0;
      if (g.dim() == 2) {
        const double c = f.y_face(i, j) * ihy2;
        diag += c;
        if (j > 0) down = -c;
      }
      {
        const double c = f.x_face(i, j) * ihx2;
        diag += c;
        if (i > 0) left = -c;
      }
      {
        const double c = f.x_face(i + 1, j) * ihx2;
        diag += c;
        if (i < nx - 1) right = -c;
      }
      if (g.dim() == 2) {
        const double c = f.y_face(i, j + 1) * ihy2;
        diag += c;
        if (j < ny - 1) up = -c;
      }
      if (down != 0.0) { cols.push_back(row - static_cast<std::size_t>(nx)); vals.push_back(down); }
      if (left != 0.0) { cols.push_back(row - 1); vals.push_back(left); }
      cols.push_back(row); vals.push_back(diag);
      if (right != 0.0) { cols.push_back(row + 1); vals.push_back(right); }
      if (up != 0.0) { cols.push_back(row + static_cast<std::size_t>(nx)); vals.push_back(up); }
      offsets[row + 1] = cols.size();
    }
  return SparseOperator(g, std::move(offsets), std::move(cols), std::move(vals));
}
}  // namespace detail

/// Assemble -div(D grad .) + identity on the interior nodes with the 3-point
/// (1D) / 5-point (2D) flux stencil. Zero Dirichlet boundary is handled by
/// elimination: faces adjacent to the boundary contribute to the diagonal only.
inline SparseOperator assemble(const Grid& g, const ScalarField& D) {
  return detail::assemble_impl(g, D, true);
}

/// The diffusion part alone (no reaction). Used for quadratic-form checks and
/// flux bilinear forms.
inline SparseOperator assemble_diffusion_only(const Grid& g, const ScalarField& D) {
  return detail::assemble_impl(g, D, false);
}

/// Face-based Dirichlet energy sum over faces of D_face * (du/h)^2 * h^dim,
/// with ghost zeros across the boundary.
inline double weighted_gradient_energy(const ScalarField& u, const ScalarField& D) {
  require_same_grid(u, D, "weighted_gradient_energy");
  const Grid& g = u.grid();
  const FaceCoefficients f = face_average(D);
  const int nx = g.nodes(0);
  const int ny = g.dim() == 2 ? g.nodes(1) : 1;
  const double hx = g.spacing(0);
  double sum = 0.0;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      const double ul = i > 0 ? u.at(i - 1, j) : 0.0;
      const double ur = i < nx ? u.at(i, j) : 0.0;
      const double d = (ur - ul) / hx;
      sum += f.x_face(i, j) * d * d;
    }
  if (g.dim() == 2) {
    const double hy = g.spacing(1);
    for (int j = 0; j <= ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const double ud = j > 0 ? u.at(i, j - 1) : 0.0;
        const double uu = j < ny ? u.at(i, j) : 0.0;
        const double d = (uu - ud) / hy;
        sum += f.y_face(i, j) * d * d;
      }
  }
  return sum * g.cell_volume();
}

/// Nodal gradient magnitude |grad_h u|: per axis the average of the two face
/// difference quotients (a central difference), Euclidean norm across axes,
/// ghost zeros across the boundary.
inline std::vector<double> node_gradient_magnitudes(const ScalarField& u) {
  const Grid& g = u.grid();
  const int nx = g.nodes(0);
  const int ny = g.dim() == 2 ? g.nodes(1) : 1;
  std::vector<double> mag(g.size(), 0.0);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const double ul = i > 0 ? u.at(i - 1, j) : 0.0;
      const double ur = i < nx - 1 ? u.at(i + 1, j) : 0.0;
      const double gx = (ur - ul) / (2.0 * g.spacing(0));
      double m2 = gx * gx;
      if (g.dim() == 2) {
        const double ud = j > 0 ? u.at(i, j - 1) : 0.0;
        const double uu = j < ny - 1 ? u.at(i, j + 1) : 0.0;
        const double gy = (uu - ud) / (2.0 * g.spacing(1));
        m2 += gy * gy;
      }
      mag[g.index(i, j)] = std::sqrt(m2);
    }
  return mag;
}

/// Discrete W^{1,1} seminorm: sum over nodes of |grad_h u| * h^dim.
inline double gradient_l1(const ScalarField& u) {
  const auto mag = node_gradient_magnitudes(u);
  double sum = 0.0;
  for (double m : mag) sum += m;
  return sum * u.grid().cell_volume();
}

namespace detail {
inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}
inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }
}  // namespace detail

/// Conjugate gradients with diagonal (Jacobi) preconditioning. Returns x with
/// Euclidean residual ||A x - rhs|| <= tol * ||rhs||; a zero rhs short-circuits
/// to the zero field. Throws SolveError past 10 * dimension iterations.
inline ScalarField solve_spd(const SparseOperator& A, const ScalarField& rhs, double tol) {
  if (!(rhs.grid() == A.grid())) throw std::invalid_argument("solve_spd: dimension mismatch");
  if (!(tol > 0.0)) throw std::invalid_argument("solve_spd: tolerance must be positive");
  const std::size_t n = A.size();
  const double rhs_norm = detail::norm2(rhs.values());
  ScalarField x(A.grid(), 0.0);
  if (rhs_norm == 0.0) return x;

  std::vector<double> r = rhs.values();       // residual of x = 0
  std::vector<double> z(n), p(n), q(n);
  std::vector<double> history;
  for (std::size_t k = 0; k < n; ++k) z[k] = r[k] / A.diagonal(k);
  p = z;
  double rz = detail::dot(r, z);
  double res = detail::norm2(r);
  const std::size_t max_iter = 10 * n;
  for (std::size_t it = 0; it < max_iter; ++it) {
    if (res <= tol * rhs_norm) return x;
    A.apply(p, q);
    const double alpha = rz / detail::dot(p, q);
    for (std::size_t k = 0; k < n; ++k) {
      x[k] += alpha * p[k];
      r[k] -= alpha * q[k];
    }
    for (std::size_t k = 0; k < n; ++k) z[k] = r[k] / A.diagonal(k);
    const double rz_next = detail::dot(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t k = 0; k < n; ++k) p[k] = z[k] + beta * p[k];
    res = detail::norm2(r);
    history.push_back(res / rhs_norm);
  }
  if (res <= tol * rhs_norm) return x;
  throw SolveError("solve_spd: conjugate gradients exceeded " + std::to_string(max_iter) +
                       " iterations (relative residual " + format_double(res / rhs_norm) + ")",
                   std::move(history), res / rhs_norm);
}

}  // namespace degensys
