#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "degensys/operators.hpp"
#include "degensys/problem.hpp"
#include "degensys/truncation.hpp"

namespace degensys {

struct FixedPointConfig {
  double tolerance = 1e-8;        // stop when both successive L2 differences fall below this
  int max_iterations = 200;
  double damping = 1.0;           // theta in (0, 1]; halved automatically on stagnation
  double linear_tolerance = 1e-10;
  bool z_first = false;           // sweep order; mirroring it makes role swaps exact

  void check() const {
    if (!(tolerance > 0.0)) throw std::invalid_argument("FixedPointConfig: tolerance must be positive");
    if (!(damping > 0.0 && damping <= 1.0))
      throw std::invalid_argument("FixedPointConfig: damping must lie in (0, 1]");
    if (max_iterations < 1) throw std::invalid_argument("FixedPointConfig: need at least one iteration");
  }
};

/// Truncation levels that make the bounded-data system nondegenerate: the sup
/// norms of the two data fields. Zero data gives level 0, which freezes the
/// coefficient at a/b^2.
inline std::pair<TruncationLevel, TruncationLevel> auto_levels(const ScalarField& rhs_u,
                                                               const ScalarField& rhs_z) {
  return {TruncationLevel::at(linf_norm(rhs_u)), TruncationLevel::at(linf_norm(rhs_z))};
}

struct CoupledSolution {
  ScalarField u, z;
  SolveReport report;
};

namespace detail {
inline double encode_level(TruncationLevel l) { return l.is_finite() ? l.value() : -1.0; }
}

/// Alternating Picard iteration for the truncated coupled system
///   -div(diff_u grad u / (offset_u + |T_rho(z)|)^2) + u = rhs_u
///   -div(diff_z grad z / (offset_z + |T_sigma(u)|)^2) + z = rhs_z
/// starting from zero iterates (so the sup-norm barrier holds at every step).
/// Each half-step freezes one unknown inside the coefficient and solves the
/// resulting SPD linear problem, then blends with the damping factor. Damping
/// is halved after 5 consecutive non-decreasing differences; nonconvergence is
/// only reported after at least 3 halvings have been tried.
inline CoupledSolution solve_truncated(const ProblemSpec& spec, TruncationLevel rho,
                                       TruncationLevel sigma, const FixedPointConfig& cfg = {},
                                       const ScalarField* warm_u = nullptr,
                                       const ScalarField* warm_z = nullptr) {
  cfg.check();
  if (const ValidationResult v = validate(spec); !v.ok())
    throw std::invalid_argument("solve_truncated: invalid problem\n" + v.message());

  const Grid& g = spec.grid;
  ScalarField u = warm_u ? *warm_u : ScalarField(g, 0.0);
  ScalarField z = warm_z ? *warm_z : ScalarField(g, 0.0);

  double theta = cfg.damping;
  int halvings = 0;
  int stall = 0;
  std::vector<double> diffs;
  bool converged = false;

  const auto update_u = [&]() {
    const ScalarField d1 = degenerate_coefficient(spec.diff_u, spec.offset_u, z, rho);
    const ScalarField u_star = solve_spd(assemble(g, d1), spec.rhs_u, cfg.linear_tolerance);
    ScalarField u_next = lin_combo(1.0 - theta, u, theta, u_star);
    const double diff = l2_norm(u_next - u);
    u = std::move(u_next);
    return diff;
  };
  const auto update_z = [&]() {
    const ScalarField d2 = degenerate_coefficient(spec.diff_z, spec.offset_z, u, sigma);
    const ScalarField z_star = solve_spd(assemble(g, d2), spec.rhs_z, cfg.linear_tolerance);
    ScalarField z_next = lin_combo(1.0 - theta, z, theta, z_star);
    const double diff = l2_norm(z_next - z);
    z = std::move(z_next);
    return diff;
  };
  const auto step = [&]() {
    // Alternating sweep: the second half-step sees the freshly updated iterate.
    const double d_first = cfg.z_first ? update_z() : update_u();
    const double d_second = cfg.z_first ? update_u() : update_z();
    return std::max(d_first, d_second);
  };

  const auto run_block = [&](int iterations) {
    for (int it = 0; it < iterations; ++it) {
      const double diff = step();
      if (!diffs.empty() && diff >= diffs.back()) {
        if (++stall >= 5) {
          theta *= 0.5;
          ++halvings;
          stall = 0;
        }
      } else {
        stall = 0;
      }
      diffs.push_back(diff);
      if (diff <= cfg.tolerance) {
        converged = true;
        return;
      }
    }
  };

  run_block(cfg.max_iterations);
  // Give the damping fallback a fair chance before reporting failure.
  while (!converged && halvings < 3) {
    theta *= 0.5;
    ++halvings;
    stall = 0;
    run_block(5);
  }
  if (!converged) {
    const double last = diffs.empty() ? 0.0 : diffs.back();
    throw SolveError("solve_truncated: no convergence after " + std::to_string(diffs.size()) +
                         " iterations (last difference " + format_double(last) + ")",
                     std::move(diffs), last);
  }

  SolveReport report;
  report.converged = true;
  report.iterations = static_cast<int>(diffs.size());
  report.step_differences = std::move(diffs);
  report.l2_u = l2_norm(u);
  report.linf_u = linf_norm(u);
  report.w11_u = gradient_l1(u);
  report.l2_z = l2_norm(z);
  report.linf_z = linf_norm(z);
  report.w11_z = gradient_l1(z);
  report.level_u = detail::encode_level(rho);
  report.level_z = detail::encode_level(sigma);
  return CoupledSolution{std::move(u), std::move(z), std::move(report)};
}

/// Euclidean residuals of the two discrete equations at (u, z), relative to the
/// data norm (absolute when the datum vanishes).
inline std::pair<double, double> residuals(const ProblemSpec& spec, const ScalarField& u,
                                           const ScalarField& z, TruncationLevel rho,
                                           TruncationLevel sigma) {
  const auto one_residual = [&](const ScalarField& a, const ScalarField& b, const ScalarField& v,
                                TruncationLevel level, const ScalarField& unknown,
                                const ScalarField& rhs) {
    const SparseOperator op = assemble(spec.grid, degenerate_coefficient(a, b, v, level));
    const ScalarField res = op.apply(unknown) - rhs;
    const double rn = detail::norm2(res.values());
    const double bn = detail::norm2(rhs.values());
    return bn > 0.0 ? rn / bn : rn;
  };
  const double r1 = one_residual(spec.diff_u, spec.offset_u, z, rho, u, spec.rhs_u);
  const double r2 = one_residual(spec.diff_z, spec.offset_z, u, sigma, z, spec.rhs_z);
  return {r1, r2};
}

}  // namespace degensys
