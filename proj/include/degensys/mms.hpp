#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "degensys/coupled.hpp"
#include "degensys/problem.hpp"
#include "degensys/util.hpp"

namespace degensys::mms {

using Expr = std::function<double(double, double)>;  // (x, y); y is 0 in 1D

/// A manufactured verification case: closed-form exact solutions vanishing on
/// the boundary, closed-form coefficients, and the hand-derived source terms
/// that make the pair solve the coupled system exactly.
struct ManufacturedCase {
  std::string name;
  int dim = 1;
  double extent_x = 1.0, extent_y = 1.0;
  Expr u_exact, z_exact;
  Expr coeff_a, coeff_A;    // elliptic coefficients of the two equations
  Expr offset_b, offset_B;  // degeneracy offsets
  Expr source_f, source_F;  // analytic sources derived from the exact pair
  double alpha = 1.0, beta = 1.0, lambda = 1.0, gamma = 1.0;
  double expected_order = 1.5;  // minimum observed order on the finest pair
};

namespace detail {

inline double central(const Expr& w, double x, double y, int axis, double d) {
  return axis == 0 ? (w(x + d, y) - w(x - d, y)) / (2.0 * d)
                   : (w(x, y + d) - w(x, y - d)) / (2.0 * d);
}

/// Source evaluated with no analytic derivatives at all: the flux
/// a grad(u) / (b + |z|)^2 is formed from centered differences of the closed
/// forms and its divergence is taken by centered differences again.
inline double source_by_differences(const ManufacturedCase& c, bool first_equation, double x,
                                    double y, double d) {
  const Expr& u = first_equation ? c.u_exact : c.z_exact;
  const Expr& other = first_equation ? c.z_exact : c.u_exact;
  const Expr& a = first_equation ? c.coeff_a : c.coeff_A;
  const Expr& b = first_equation ? c.offset_b : c.offset_B;
  const auto flux = [&](double px, double py, int axis) {
    const double den = b(px, py) + std::abs(other(px, py));
    return a(px, py) * central(u, px, py, axis, d) / (den * den);
  };
  double div = (flux(x + d, y, 0) - flux(x - d, y, 0)) / (2.0 * d);
  if (c.dim == 2) div += (flux(x, y + d, 1) - flux(x, y - d, 1)) / (2.0 * d);
  return -div + u(x, y);
}

inline void probe_nodes(const ManufacturedCase& c, int per_axis,
                        const std::function<void(double, double)>& visit) {
  const double hx = c.extent_x / (per_axis + 1);
  if (c.dim == 1) {
    for (int i = 0; i < per_axis; ++i) visit((i + 1) * hx, 0.0);
  } else {
    const double hy = c.extent_y / (per_axis + 1);
    for (int j = 0; j < per_axis; ++j)
      for (int i = 0; i < per_axis; ++i) visit((i + 1) * hx, (j + 1) * hy);
  }
}

}  // namespace detail

/// Registration-time validation. Checks that the exact pair vanishes on the
/// boundary, rejects exact solutions whose absolute value is not
/// differentiable where it matters (a sign change with nonzero slope), and
/// cross-checks each shipped analytic source against a finite-difference
/// evaluation of the divergence at one eighth of the h = 1/64 spacing.
inline void verify_case(const ManufacturedCase& c, int probe_nodes_per_axis = 63) {
  const auto check_boundary = [&](const Expr& w, const char* which) {
    double worst = 0.0;
    const int m = 64;
    for (int i = 0; i <= m; ++i) {
      const double tx = i * c.extent_x / m;
      if (c.dim == 1) {
        worst = std::max({worst, std::abs(w(0.0, 0.0)), std::abs(w(c.extent_x, 0.0))});
      } else {
        const double ty = i * c.extent_y / m;
        worst = std::max({worst, std::abs(w(tx, 0.0)), std::abs(w(tx, c.extent_y)),
                          std::abs(w(0.0, ty)), std::abs(w(c.extent_x, ty))});
      }
    }
    if (worst > 1e-12)
      throw std::invalid_argument("ManufacturedCase '" + c.name + "': " + which +
                                  " does not vanish on the boundary");
  };
  check_boundary(c.u_exact, "u_exact");
  check_boundary(c.z_exact, "z_exact");

  const auto check_sign = [&](const Expr& w, const char* which) {
    double lo = 0.0, hi = 0.0;
    detail::probe_nodes(c, 129, [&](double x, double y) {
      const double v = w(x, y);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    });
    const double scale = std::max(std::abs(lo), std::abs(hi));
    const double tol = 1e-12 * std::max(1.0, scale);
    if (lo < -tol && hi > tol)
      throw std::invalid_argument("ManufacturedCase '" + c.name + "': " + which +
                                  " changes sign, |.| would not be differentiable");
  };
  check_sign(c.u_exact, "u_exact");
  check_sign(c.z_exact, "z_exact");

  const double h = c.extent_x / (probe_nodes_per_axis + 1);
  const double d = h / 8.0;
  for (int eq = 0; eq < 2; ++eq) {
    const Expr& src = eq == 0 ? c.source_f : c.source_F;
    double max_err = 0.0, max_val = 1.0;
    detail::probe_nodes(c, probe_nodes_per_axis, [&](double x, double y) {
      const double analytic = src(x, y);
      const double fd = detail::source_by_differences(c, eq == 0, x, y, d);
      max_err = std::max(max_err, std::abs(analytic - fd));
      max_val = std::max(max_val, std::abs(analytic));
    });
    if (max_err > 1e-3 * max_val)
      throw std::invalid_argument("ManufacturedCase '" + c.name +
                                  "': analytic source disagrees with finite-difference check "
                                  "(relative error " +
                                  format_double(max_err / max_val) + ")");
  }
}

/// Sample the analytic sources on a grid.
inline std::pair<ScalarField, ScalarField> manufacture(const ManufacturedCase& c, const Grid& g) {
  return {ScalarField::from_function(g, c.source_f), ScalarField::from_function(g, c.source_F)};
}

/// Problem spec with the case's coefficients and sources sampled on a grid.
inline ProblemSpec make_problem(const ManufacturedCase& c, const Grid& g) {
  auto [f, F] = manufacture(c, g);
  return ProblemSpec{g,
                     ScalarField::from_function(g, c.coeff_a),
                     ScalarField::from_function(g, c.coeff_A),
                     ScalarField::from_function(g, c.offset_b),
                     ScalarField::from_function(g, c.offset_B),
                     std::move(f),
                     std::move(F),
                     c.alpha, c.beta, c.lambda, c.gamma};
}

inline Grid case_grid(const ManufacturedCase& c, int nodes_per_axis) {
  return c.dim == 1 ? Grid::line(nodes_per_axis, c.extent_x)
                    : Grid::rectangle(nodes_per_axis, nodes_per_axis, c.extent_x, c.extent_y);
}

struct RateRow {
  double h = 0.0;
  double error_u = 0.0, error_z = 0.0;
  double order_u = 0.0, order_z = 0.0;  // NaN on the first row, +inf for exact
};

struct RateTable {
  std::string case_name;
  std::vector<RateRow> rows;
  bool complete = true;  // false if a resolution failed to converge

  /// Observed order on the finest resolved pair (the u component).
  double final_order_u() const { return rows.empty() ? 0.0 : rows.back().order_u; }

  static std::string order_text(double p) {
    if (std::isnan(p)) return "";
    if (std::isinf(p)) return "exact";
    return format_double(p);
  }

  void write_csv(std::ostream& os, bool header = true) const {
    if (header) os << "case,h,error_u,error_z,order_u,order_z\n";
    for (const RateRow& r : rows)
      os << case_name << ',' << format_double(r.h) << ',' << format_double(r.error_u) << ','
         << format_double(r.error_z) << ',' << order_text(r.order_u) << ','
         << order_text(r.order_z) << '\n';
  }
};

namespace detail {
inline double observed_order(double coarse, double fine) {
  if (coarse <= 1e-14 && fine <= 1e-14) return std::numeric_limits<double>::infinity();
  if (fine <= 0.0) return std::numeric_limits<double>::infinity();
  return std::log2(coarse / fine);
}
}  // namespace detail

/// Solve the coupled system with the manufactured data on a dyadically refined
/// sequence of grids with truncation kept inactive (levels well above the exact
/// sup norms), and report discrete L2 errors with observed orders. A solver
/// failure aborts the study, returning the partial table.
inline RateTable convergence_study(const ManufacturedCase& c, std::span<const int> nodes_per_axis,
                                   const FixedPointConfig& cfg = {}) {
  if (nodes_per_axis.size() < 3)
    throw std::invalid_argument("convergence_study: need at least 3 resolutions");
  for (std::size_t r = 1; r < nodes_per_axis.size(); ++r)
    if (nodes_per_axis[r] != 2 * nodes_per_axis[r - 1] + 1)
      throw std::invalid_argument("convergence_study: resolutions must be dyadic (n -> 2n+1)");

  RateTable table;
  table.case_name = c.name;
  for (int nodes : nodes_per_axis) {
    const Grid g = case_grid(c, nodes);
    const ScalarField u_star = ScalarField::from_function(g, c.u_exact);
    const ScalarField z_star = ScalarField::from_function(g, c.z_exact);
    // Margins keep both truncations inactive throughout the iteration.
    const TruncationLevel rho = TruncationLevel::at(2.0 * linf_norm(z_star) + 1.0);
    const TruncationLevel sigma = TruncationLevel::at(2.0 * linf_norm(u_star) + 1.0);

    RateRow row;
    row.h = g.spacing(0);
    try {
      const CoupledSolution sol = solve_truncated(make_problem(c, g), rho, sigma, cfg);
      row.error_u = l2_norm(sol.u - u_star);
      row.error_z = l2_norm(sol.z - z_star);
    } catch (const SolveError&) {
      table.complete = false;
      break;
    }
    if (table.rows.empty()) {
      row.order_u = std::numeric_limits<double>::quiet_NaN();
      row.order_z = std::numeric_limits<double>::quiet_NaN();
    } else {
      row.order_u = detail::observed_order(table.rows.back().error_u, row.error_u);
      row.order_z = detail::observed_order(table.rows.back().error_z, row.error_z);
    }
    table.rows.push_back(row);
  }
  return table;
}

/// The registered verification cases. Hand-derived sources; validated by
/// verify_case on first access.
inline const std::vector<ManufacturedCase>& manufactured_cases() {
  static const std::vector<ManufacturedCase> cases = [] {
    const double pi = std::acos(-1.0);
    std::vector<ManufacturedCase> cs;

    const Expr one = [](double, double) { return 1.0; };
    const Expr zero = [](double, double) { return 0.0; };

    {
      // Frozen coefficient, 1D: z* = 0 makes the first equation linear with
      // D = 1, so f = pi^2 sin(pi x) + sin(pi x); the second equation is trivial.
      ManufacturedCase c;
      c.name = "sine-1d";
      c.dim = 1;
      c.u_exact = [pi](double x, double) { return std::sin(pi * x); };
      c.z_exact = zero;
      c.coeff_a = c.coeff_A = c.offset_b = c.offset_B = one;
      c.source_f = [pi](double x, double) { return (pi * pi + 1.0) * std::sin(pi * x); };
      c.source_F = zero;
      c.expected_order = 1.9;
      cs.push_back(std::move(c));
    }
    {
      // Frozen coefficient with a spatially varying a(x) = 1 + x^2:
      // f = -(a u')' + u = -2x pi cos(pi x) + (1 + x^2) pi^2 sin(pi x) + sin(pi x).
      ManufacturedCase c;
      c.name = "varying-1d";
      c.dim = 1;
      c.u_exact = [pi](double x, double) { return std::sin(pi * x); };
      c.z_exact = zero;
      c.coeff_a = [](double x, double) { return 1.0 + x * x; };
      c.coeff_A = one;
      c.offset_b = c.offset_B = one;
      c.source_f = [pi](double x, double) {
        return -2.0 * x * pi * std::cos(pi * x) + (1.0 + x * x) * pi * pi * std::sin(pi * x) +
               std::sin(pi * x);
      };
      c.source_F = zero;
      c.alpha = 1.0;
      c.beta = 2.0;
      c.expected_order = 1.9;
      cs.push_back(std::move(c));
    }
    {
      // Frozen coefficient, 2D.
      ManufacturedCase c;
      c.name = "sine-2d";
      c.dim = 2;
      c.u_exact = [pi](double x, double y) { return std::sin(pi * x) * std::sin(pi * y); };
      c.z_exact = zero;
      c.coeff_a = c.coeff_A = c.offset_b = c.offset_B = one;
      c.source_f = [pi](double x, double y) {
        return (2.0 * pi * pi + 1.0) * std::sin(pi * x) * std::sin(pi * y);
      };
      c.source_F = zero;
      c.expected_order = 1.8;
      cs.push_back(std::move(c));
    }
    {
      // Fully coupled 2D case; both exact solutions are nonnegative so the
      // absolute values in the coefficients stay smooth.
      //   u* = sin(pi x) sin(pi y),  z* = 16 x(1-x) y(1-y),  a = A = b = B = 1.
      // With s = 1 + z* and t = 1 + u*:
      //   f = -lap(u*)/s^2 + 2 grad(u*).grad(s)/s^3 + u*
      //   F = -lap(z*)/t^2 + 2 grad(z*).grad(t)/t^3 + z*
      ManufacturedCase c;
      c.name = "coupled-2d";
      c.dim = 2;
      c.u_exact = [pi](double x, double y) { return std::sin(pi * x) * std::sin(pi * y); };
      c.z_exact = [](double x, double y) { return 16.0 * x * (1.0 - x) * y * (1.0 - y); };
      c.coeff_a = c.coeff_A = c.offset_b = c.offset_B = one;
      c.source_f = [pi](double x, double y) {
        const double u = std::sin(pi * x) * std::sin(pi * y);
        const double ux = pi * std::cos(pi * x) * std::sin(pi * y);
        const double uy = pi * std::sin(pi * x) * std::cos(pi * y);
        const double lap_u = -2.0 * pi * pi * u;
        const double s = 1.0 + 16.0 * x * (1.0 - x) * y * (1.0 - y);
        const double sx = 16.0 * (1.0 - 2.0 * x) * y * (1.0 - y);
        const double sy = 16.0 * x * (1.0 - x) * (1.0 - 2.0 * y);
        return -lap_u / (s * s) + 2.0 * (ux * sx + uy * sy) / (s * s * s) + u;
      };
      c.source_F = [pi](double x, double y) {
        const double z = 16.0 * x * (1.0 - x) * y * (1.0 - y);
        const double zx = 16.0 * (1.0 - 2.0 * x) * y * (1.0 - y);
        const double zy = 16.0 * x * (1.0 - x) * (1.0 - 2.0 * y);
        const double lap_z = -32.0 * (y * (1.0 - y) + x * (1.0 - x));
        const double t = 1.0 + std::sin(pi * x) * std::sin(pi * y);
        const double tx = pi * std::cos(pi * x) * std::sin(pi * y);
        const double ty = pi * std::sin(pi * x) * std::cos(pi * y);
        return -lap_z / (t * t) + 2.0 * (zx * tx + zy * ty) / (t * t * t) + z;
      };
      c.expected_order = 1.5;
      cs.push_back(std::move(c));
    }
    for (const ManufacturedCase& c : cs) verify_case(c);
    return cs;
  }();
  return cases;
}

inline const ManufacturedCase& find_case(const std::string& name) {
  for (const ManufacturedCase& c : manufactured_cases())
    if (c.name == name) return c;
  throw std::invalid_argument("unknown manufactured case '" + name + "'");
}

}  // namespace degensys::mms
