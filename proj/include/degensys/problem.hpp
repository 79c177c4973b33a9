#pragma once

#include <cstddef>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "degensys/grid.hpp"
#include "degensys/util.hpp"

namespace degensys {

/// Coefficients, degeneracy offsets, data and structural bounds for the coupled
/// system
///   -div(diff_u grad u / (offset_u + |z|)^2) + u = rhs_u
///   -div(diff_z grad z / (offset_z + |u|)^2) + z = rhs_z
/// with zero Dirichlet boundary. All six fields live on the same grid.
struct ProblemSpec {
  Grid grid;
  ScalarField diff_u, diff_z;      // elliptic coefficients, bounded by [alpha, beta]
  ScalarField offset_u, offset_z;  // degeneracy offsets, bounded by [lambda, gamma]
  ScalarField rhs_u, rhs_z;        // data
  double alpha = 1.0, beta = 1.0;
  double lambda = 1.0, gamma = 1.0;

  /// All-ones coefficients and offsets with the given data; handy in tests.
  static ProblemSpec with_unit_coefficients(const Grid& g, ScalarField rhs_u, ScalarField rhs_z) {
    return ProblemSpec{g,
                       ScalarField(g, 1.0), ScalarField(g, 1.0),
                       ScalarField(g, 1.0), ScalarField(g, 1.0),
                       std::move(rhs_u),   std::move(rhs_z),
                       1.0, 1.0, 1.0, 1.0};
  }
};

struct BoundViolation {
  std::string field;   // which member
  std::string bound;   // e.g. "below alpha"
  std::size_t node;    // flat node index of the first offending value
  double value;
};

struct ValidationResult {
  std::vector<std::string> structural;      // grid mismatches, bad constants
  std::vector<BoundViolation> violations;   // pointwise bound failures
  bool ok() const { return structural.empty() && violations.empty(); }

  std::string message() const {
    std::ostringstream os;
    for (const auto& s : structural) os << s << "\n";
    for (const auto& v : violations)
      os << v.field << " " << v.bound << " at node " << v.node << " (value "
         << format_double(v.value) << ")\n";
    return os.str();
  }
};

namespace detail {
inline void check_bounds(const ScalarField& f, const std::string& name, double lo,
                         const std::string& lo_name, double hi, const std::string& hi_name,
                         ValidationResult& r) {
  for (std::size_t k = 0; k < f.size(); ++k) {
    if (!std::isfinite(f[k])) {
      r.violations.push_back({name, "not finite", k, f[k]});
      return;  // one report per field and kind is enough
    }
  }
  for (std::size_t k = 0; k < f.size(); ++k)
    if (f[k] < lo) {
      r.violations.push_back({name, "below " + lo_name, k, f[k]});
      break;
    }
  for (std::size_t k = 0; k < f.size(); ++k)
    if (f[k] > hi) {
      r.violations.push_back({name, "above " + hi_name, k, f[k]});
      break;
    }
}
}  // namespace detail

/// Check every structural assumption: coefficient bounds, offset bounds, finite
/// data, and that all fields share the spec's grid. Grid mismatches are reported
/// as structural errors, distinct from bound violations.
inline ValidationResult validate(const ProblemSpec& s) {
  ValidationResult r;
  const auto on_grid = [&](const ScalarField& f, const char* name) {
    if (!(f.grid() == s.grid)) r.structural.push_back(std::string(name) + " is not on the spec grid");
  };
  on_grid(s.diff_u, "diff_u");
  on_grid(s.diff_z, "diff_z");
  on_grid(s.offset_u, "offset_u");
  on_grid(s.offset_z, "offset_z");
  on_grid(s.rhs_u, "rhs_u");
  on_grid(s.rhs_z, "rhs_z");
  if (!(s.alpha > 0.0)) r.structural.push_back("alpha must be positive");
  if (!(s.beta >= s.alpha)) r.structural.push_back("beta must be >= alpha");
  if (!(s.lambda > 0.0)) r.structural.push_back("lambda must be positive");
  if (!(s.gamma >= s.lambda)) r.structural.push_back("gamma must be >= lambda");
  if (!r.structural.empty()) return r;  // bounds are meaningless against a broken layout

  detail::check_bounds(s.diff_u, "diff_u", s.alpha, "alpha", s.beta, "beta", r);
  detail::check_bounds(s.diff_z, "diff_z", s.alpha, "alpha", s.beta, "beta", r);
  detail::check_bounds(s.offset_u, "offset_u", s.lambda, "lambda", s.gamma, "gamma", r);
  detail::check_bounds(s.offset_z, "offset_z", s.lambda, "lambda", s.gamma, "gamma", r);
  for (std::size_t k = 0; k < s.rhs_u.size(); ++k)
    if (!std::isfinite(s.rhs_u[k])) {
      r.violations.push_back({"rhs_u", "not finite", k, s.rhs_u[k]});
      break;
    }
  for (std::size_t k = 0; k < s.rhs_z.size(); ++k)
    if (!std::isfinite(s.rhs_z[k])) {
      r.violations.push_back({"rhs_z", "not finite", k, s.rhs_z[k]});
      break;
    }
  return r;
}

/// One inequality check: pass iff lhs <= rhs * tol_factor.
struct AuditRecord {
  std::string name;
  std::string context;  // rung index, threshold, fraction, ...
  double lhs = 0.0;
  double rhs = 0.0;
  double tol_factor = 1.0;
  bool pass = true;

  static AuditRecord check(std::string name, std::string context, double lhs, double rhs,
                           double tol_factor) {
    AuditRecord rec;
    rec.name = std::move(name);
    rec.context = std::move(context);
    rec.lhs = lhs;
    rec.rhs = rhs;
    rec.tol_factor = tol_factor;
    rec.pass = std::isfinite(lhs) && std::isfinite(rhs) && lhs <= rhs * tol_factor;
    return rec;
  }

  double margin() const { return rhs * tol_factor - lhs; }
};

/// Outcome of one coupled solve: iteration history plus the final norms of both
/// unknowns and any audits run against the result.
struct SolveReport {
  bool converged = false;
  int iterations = 0;
  std::vector<double> step_differences;  // successive-iterate L2 differences, one per iteration
  double l2_u = 0.0, linf_u = 0.0, w11_u = 0.0;
  double l2_z = 0.0, linf_z = 0.0, w11_z = 0.0;
  double level_u = 0.0, level_z = 0.0;  // truncation levels used (inf encoded as -1)
  std::vector<AuditRecord> audits;
};

/// Iterative solve that ran out of budget. Carries the residual/difference
/// history so callers can diagnose stagnation.
class SolveError : public std::runtime_error {
public:
  SolveError(const std::string& msg, std::vector<double> history, double final_residual)
      : std::runtime_error(msg), history_(std::move(history)), final_residual_(final_residual) {}

  const std::vector<double>& history() const { return history_; }
  double final_residual() const { return final_residual_; }

private:
  std::vector<double> history_;
  double final_residual_;
};

}  // namespace degensys
