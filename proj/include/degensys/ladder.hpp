#pragma once

#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "degensys/coupled.hpp"
#include "degensys/problem.hpp"
#include "degensys/truncation.hpp"
#include "degensys/util.hpp"

namespace degensys {

/// Strictly increasing sequence of approximation indices n.
struct LadderSchedule {
  std::vector<int> levels;

  static LadderSchedule geometric(int max_level = 64) {
    LadderSchedule s;
    for (int n = 1; n <= max_level; n *= 2) s.levels.push_back(n);
    return s;
  }

  void check() const {
    if (levels.empty()) throw std::invalid_argument("LadderSchedule: empty schedule");
    int prev = 0;
    for (int n : levels) {
      if (n < 1) throw std::invalid_argument("LadderSchedule: indices must be >= 1");
      if (n <= prev) throw std::invalid_argument("LadderSchedule: indices must be strictly increasing");
      prev = n;
    }
  }
};

/// One solved approximation level: bounded data, solution pair and its norms.
struct LadderRung {
  int n;
  ScalarField u, z;            // solution of the level-n system
  ScalarField data_u, data_z;  // the bounded approximants actually used
  SolveReport report;
  double l2_u, l2_z;
  double w11_u, w11_z;
  double data_gap_u, data_gap_z;  // L2 distance of the approximant to the datum
};

struct LadderReport {
  std::vector<LadderRung> rungs;
  std::vector<double> cauchy_u, cauchy_z;  // L2 differences between consecutive rungs

  const LadderRung& top() const { return rungs.back(); }

  void write_csv(std::ostream& os) const {
    os << "n,converged,iterations,l2_u,l2_z,linf_u,linf_z,w11_u,w11_z,"
          "data_gap_u,data_gap_z,level_u,level_z,cauchy_u,cauchy_z\n";
    for (std::size_t r = 0; r < rungs.size(); ++r) {
      const LadderRung& rr = rungs[r];
      os << rr.n << ',' << (rr.report.converged ? 1 : 0) << ',' << rr.report.iterations << ','
         << format_double(rr.l2_u) << ',' << format_double(rr.l2_z) << ','
         << format_double(rr.report.linf_u) << ',' << format_double(rr.report.linf_z) << ','
         << format_double(rr.w11_u) << ',' << format_double(rr.w11_z) << ','
         << format_double(rr.data_gap_u) << ',' << format_double(rr.data_gap_z) << ','
         << format_double(rr.report.level_u) << ',' << format_double(rr.report.level_z) << ',';
      if (r > 0)
        os << format_double(cauchy_u[r - 1]) << ',' << format_double(cauchy_z[r - 1]);
      else
        os << ',';
      os << '\n';
    }
  }
};

/// Run the approximation scheme: for each n build the bounded approximants,
/// pick the automatic truncation levels, and solve the coupled system, warm
/// starting from the previous rung. Nonconvergence is rethrown with the rung
/// index attached.
inline LadderReport run_ladder(const ProblemSpec& spec, const LadderSchedule& schedule,
                               const FixedPointConfig& cfg = {}, bool warm_start = true) {
  schedule.check();
  if (const ValidationResult v = validate(spec); !v.ok())
    throw std::invalid_argument("run_ladder: invalid problem\n" + v.message());

  LadderReport out;
  const ScalarField* prev_u = nullptr;
  const ScalarField* prev_z = nullptr;
  for (int n : schedule.levels) {
    ScalarField data_u = approximate_datum(spec.rhs_u, n);
    ScalarField data_z = approximate_datum(spec.rhs_z, n);
    const auto [rho, sigma] = auto_levels(data_u, data_z);

    ProblemSpec bounded = spec;
    bounded.rhs_u = data_u;
    bounded.rhs_z = data_z;
    CoupledSolution sol = [&] {
      try {
        return solve_truncated(bounded, rho, sigma, cfg, warm_start ? prev_u : nullptr,
                               warm_start ? prev_z : nullptr);
      } catch (const SolveError& e) {
        throw SolveError("ladder rung n=" + std::to_string(n) + ": " + e.what(), e.history(),
                         e.final_residual());
      }
    }();
    LadderRung rung{n,
                    std::move(sol.u),
                    std::move(sol.z),
                    std::move(data_u),
                    std::move(data_z),
                    std::move(sol.report),
                    0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
    rung.l2_u = rung.report.l2_u;
    rung.l2_z = rung.report.l2_z;
    rung.w11_u = rung.report.w11_u;
    rung.w11_z = rung.report.w11_z;
    rung.data_gap_u = l2_norm(rung.data_u - spec.rhs_u);
    rung.data_gap_z = l2_norm(rung.data_z - spec.rhs_z);

    if (!out.rungs.empty()) {
      out.cauchy_u.push_back(l2_norm(rung.u - out.rungs.back().u));
      out.cauchy_z.push_back(l2_norm(rung.z - out.rungs.back().z));
    }
    out.rungs.push_back(std::move(rung));
    prev_u = &out.rungs.back().u;
    prev_z = &out.rungs.back().z;
  }
  return out;
}

/// Residuals of the untruncated target system (infinite truncation level,
/// original data) at a computed pair — the discrete stand-in for passing to
/// the limit.
inline std::pair<double, double> limit_residual(const ProblemSpec& spec, const ScalarField& u,
                                                const ScalarField& z) {
  return residuals(spec, u, z, TruncationLevel::infinite(), TruncationLevel::infinite());
}

}  // namespace degensys
