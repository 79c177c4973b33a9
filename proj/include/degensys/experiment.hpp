#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "degensys/auditor.hpp"
#include "degensys/cases.hpp"
#include "degensys/config.hpp"
#include "degensys/coupled.hpp"
#include "degensys/field_io.hpp"
#include "degensys/ladder.hpp"
#include "degensys/mms.hpp"
#include "degensys/problem.hpp"
#include "degensys/util.hpp"

namespace degensys {

namespace detail {

inline const std::set<std::string>& allowed_keys(const std::string& command) {
  static const std::set<std::string> problem_keys = {
      "grid.nodes_x",      "grid.nodes_y",      "grid.extent_x",     "grid.extent_y",
      "problem.case",      "problem.diff_u",    "problem.diff_z",    "problem.offset_u",
      "problem.offset_z",  "problem.rhs_u",     "problem.rhs_z",     "problem.alpha",
      "problem.beta",      "problem.lambda",    "problem.gamma",
      "fixed_point.tolerance", "fixed_point.max_iterations", "fixed_point.damping",
      "fixed_point.linear_tolerance", "ladder.schedule", "output.directory"};
  static const std::set<std::string> mms_keys = {
      "mms.case", "mms.resolutions_1d", "mms.resolutions_2d",
      "fixed_point.tolerance", "fixed_point.max_iterations", "fixed_point.damping",
      "fixed_point.linear_tolerance", "output.directory"};
  return command == "mms" ? mms_keys : problem_keys;
}

inline void reject_unknown_keys(const Config& cfg, const std::string& command) {
  const auto& allowed = allowed_keys(command);
  for (const std::string& key : cfg.keys())
    if (!allowed.count(key))
      throw ConfigError(cfg.where(key) + ": unknown key '" + key + "' for command '" + command +
                        "'");
}

inline FixedPointConfig load_fixed_point(const Config& cfg) {
  FixedPointConfig fp;
  fp.tolerance = cfg.get_double("fixed_point.tolerance", fp.tolerance);
  fp.max_iterations = cfg.get_int("fixed_point.max_iterations", fp.max_iterations);
  fp.damping = cfg.get_double("fixed_point.damping", fp.damping);
  fp.linear_tolerance = cfg.get_double("fixed_point.linear_tolerance", fp.linear_tolerance);
  return fp;
}

inline ProblemSpec load_problem(const Config& cfg) {
  ProblemSpec spec = [&] {
    if (cfg.has("problem.case")) {
      for (const char* key :
           {"grid.nodes_x", "grid.nodes_y", "grid.extent_x", "grid.extent_y", "problem.diff_u",
            "problem.diff_z", "problem.offset_u", "problem.offset_z", "problem.rhs_u",
            "problem.rhs_z"})
        if (cfg.has(key))
          throw ConfigError(cfg.where(key) + std::string(": '") + key +
                            "' cannot be combined with a builtin case");
      return builtin_case(cfg.get_string("problem.case"));
    }
    if (!cfg.has("grid.nodes_x"))
      throw ConfigError("config needs either problem.case or a [grid] section with nodes_x");
    const int nx = cfg.get_int("grid.nodes_x", 0);
    const double ex = cfg.get_double("grid.extent_x", 1.0);
    const Grid g = cfg.has("grid.nodes_y")
                       ? Grid::rectangle(nx, cfg.get_int("grid.nodes_y", 0), ex,
                                         cfg.get_double("grid.extent_y", 1.0))
                       : Grid::line(nx, ex);
    const auto field = [&](const std::string& key, double fallback) {
      if (!cfg.has(key)) return ScalarField(g, fallback);
      ScalarField f = read_field_file(cfg.get_string(key));
      if (!(f.grid() == g))
        throw ConfigError(cfg.where(key) + ": field file '" + cfg.get_string(key) +
                          "' does not match the [grid] section");
      return f;
    };
    return ProblemSpec{g,
                       field("problem.diff_u", 1.0),   field("problem.diff_z", 1.0),
                       field("problem.offset_u", 1.0), field("problem.offset_z", 1.0),
                       field("problem.rhs_u", 0.0),    field("problem.rhs_z", 0.0),
                       1.0, 1.0, 1.0, 1.0};
  }();
  spec.alpha = cfg.get_double("problem.alpha", spec.alpha);
  spec.beta = cfg.get_double("problem.beta", spec.beta);
  spec.lambda = cfg.get_double("problem.lambda", spec.lambda);
  spec.gamma = cfg.get_double("problem.gamma", spec.gamma);

  if (const ValidationResult v = validate(spec); !v.ok())
    throw std::invalid_argument("invalid problem:\n" + v.message());
  return spec;
}

inline std::filesystem::path prepare_out_dir(const Config& cfg, const std::string& out_override) {
  std::filesystem::path dir =
      !out_override.empty() ? out_override : cfg.get_string("output.directory", ".");
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::ofstream open_out(const std::filesystem::path& dir, const std::string& name) {
  std::ofstream os(dir / name);
  if (!os) throw std::runtime_error("cannot write output file: " + (dir / name).string());
  return os;
}

inline void write_field_out(const std::filesystem::path& dir, const std::string& name,
                            const ScalarField& f) {
  std::ofstream os = open_out(dir, name);
  write_field(os, f);
}

inline bool all_required_pass(std::span<const AuditRecord> audits) {
  for (const AuditRecord& a : audits)
    if (!a.pass && !audit_is_advisory(a)) return false;
  return true;
}

inline void write_solve_report(std::ostream& os, const SolveReport& r, double res_u, double res_z) {
  os << "converged,iterations,final_diff,l2_u,linf_u,w11_u,l2_z,linf_z,w11_z,"
        "residual_u,residual_z,level_u,level_z\n";
  os << (r.converged ? 1 : 0) << ',' << r.iterations << ','
     << format_double(r.step_differences.empty() ? 0.0 : r.step_differences.back()) << ','
     << format_double(r.l2_u) << ',' << format_double(r.linf_u) << ',' << format_double(r.w11_u)
     << ',' << format_double(r.l2_z) << ',' << format_double(r.linf_z) << ','
     << format_double(r.w11_z) << ',' << format_double(res_u) << ',' << format_double(res_z)
     << ',' << format_double(r.level_u) << ',' << format_double(r.level_z) << '\n';
}

inline int run_solve(const Config& cfg, const std::filesystem::path& out) {
  const ProblemSpec spec = load_problem(cfg);
  const FixedPointConfig fp = load_fixed_point(cfg);
  const auto [rho, sigma] = auto_levels(spec.rhs_u, spec.rhs_z);
  const CoupledSolution sol = solve_truncated(spec, rho, sigma, fp);
  const auto [res_u, res_z] = residuals(spec, sol.u, sol.z, rho, sigma);
  const std::vector<AuditRecord> audits =
      standard_audits(spec, sol.u, sol.z, spec.rhs_u, spec.rhs_z);

  write_field_out(out, "solution_u.field", sol.u);
  write_field_out(out, "solution_z.field", sol.z);
  auto report = open_out(out, "report.csv");
  write_solve_report(report, sol.report, res_u, res_z);
  auto audit_os = open_out(out, "audits.csv");
  write_audit_csv(audit_os, audits);
  return all_required_pass(audits) ? 0 : 2;
}

inline int run_ladder_like(const Config& cfg, const std::filesystem::path& out, bool full_audit) {
  const ProblemSpec spec = load_problem(cfg);
  const FixedPointConfig fp = load_fixed_point(cfg);
  LadderSchedule schedule;
  schedule.levels = cfg.get_int_list("ladder.schedule", LadderSchedule::geometric().levels);
  const LadderReport ladder = run_ladder(spec, schedule, fp);

  std::vector<AuditRecord> audits;
  for (const LadderRung& rung : ladder.rungs) {
    const std::string ctx = "n=" + std::to_string(rung.n) + ",";
    for (auto& rec : standard_audits(spec, rung.u, rung.z, rung.data_u, rung.data_z, ctx))
      audits.push_back(std::move(rec));
  }
  if (full_audit) {
    const LadderRung& top = ladder.top();
    const std::string ctx = "n=" + std::to_string(top.n) + ",";
    const double fractions[] = {0.01, 0.1, 1.0};
    for (auto& rec : gradient_equiintegrability_profile(top.u, top.z, spec.rhs_u, spec.offset_u,
                                                        spec.alpha, fractions, ctx + "u,"))
      audits.push_back(std::move(rec));
    for (auto& rec : gradient_equiintegrability_profile(top.z, top.u, spec.rhs_z, spec.offset_z,
                                                        spec.alpha, fractions, ctx + "z,"))
      audits.push_back(std::move(rec));

    const FluxTable flux = flux_convergence(spec, ladder, sine_test_functions(spec.grid));
    for (const AuditRecord& rec : flux.audits) audits.push_back(rec);
    auto flux_os = open_out(out, "flux.csv");
    flux.write_csv(flux_os);
  }

  // Residuals of the untruncated target system at the top rung, next to the
  // truncated-system residuals at the same data for comparison.
  const LadderRung& top = ladder.top();
  const auto [lim_u, lim_z] = limit_residual(spec, top.u, top.z);
  const auto [tr_u, tr_z] =
      residuals(spec, top.u, top.z, TruncationLevel::at(top.report.level_u),
                TruncationLevel::at(top.report.level_z));
  auto limit_os = open_out(out, "limit.csv");
  limit_os << "residual_u,residual_z,truncated_residual_u,truncated_residual_z\n"
           << format_double(lim_u) << ',' << format_double(lim_z) << ',' << format_double(tr_u)
           << ',' << format_double(tr_z) << '\n';

  write_field_out(out, "solution_u.field", top.u);
  write_field_out(out, "solution_z.field", top.z);
  auto report_os = open_out(out, "report.csv");
  ladder.write_csv(report_os);
  auto audit_os = open_out(out, "audits.csv");
  write_audit_csv(audit_os, audits);
  return all_required_pass(audits) ? 0 : 2;
}

inline int run_mms(const Config& cfg, const std::filesystem::path& out) {
  const FixedPointConfig fp = load_fixed_point(cfg);
  const std::string which = cfg.get_string("mms.case", "all");
  const std::vector<int> res_1d = cfg.get_int_list("mms.resolutions_1d", {15, 31, 63});
  const std::vector<int> res_2d = cfg.get_int_list("mms.resolutions_2d", {7, 15, 31});

  std::vector<mms::RateTable> tables;
  for (const mms::ManufacturedCase& c : mms::manufactured_cases()) {
    if (which != "all" && which != c.name) continue;
    tables.push_back(mms::convergence_study(c, c.dim == 1 ? res_1d : res_2d, fp));
  }
  if (tables.empty()) throw std::invalid_argument("mms: no case named '" + which + "'");

  std::vector<AuditRecord> audits;
  auto rates = open_out(out, "rates.csv");
  bool header = true;
  for (const mms::RateTable& t : tables) {
    t.write_csv(rates, header);
    header = false;
    const mms::ManufacturedCase& c = mms::find_case(t.case_name);
    double observed = t.complete ? t.final_order_u() : 0.0;
    if (std::isinf(observed)) observed = 99.0;
    audits.push_back(AuditRecord::check("mms_order", "case=" + t.case_name, c.expected_order,
                                        observed, 1.0));
  }
  auto audit_os = open_out(out, "audits.csv");
  write_audit_csv(audit_os, audits);
  return all_required_pass(audits) ? 0 : 2;
}

}  // namespace detail

/// Run one workflow against a parsed config. Returns the process exit status:
/// 0 on success, 2 if the run completed but an audit failed, 1 on solver or
/// configuration errors (message on stderr).
inline int run_experiment(const std::string& command, const Config& cfg,
                          const std::string& out_override = "") {
  try {
    detail::reject_unknown_keys(cfg, command);
    const std::filesystem::path out = detail::prepare_out_dir(cfg, out_override);
    if (command == "solve") return detail::run_solve(cfg, out);
    if (command == "ladder") return detail::run_ladder_like(cfg, out, false);
    if (command == "audit") return detail::run_ladder_like(cfg, out, true);
    if (command == "mms") return detail::run_mms(cfg, out);
    std::cerr << "unknown command '" << command << "'\n";
    return 1;
  } catch (const SolveError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

inline int run_experiment_file(const std::string& command, const std::string& config_path,
                               const std::string& out_override = "") {
  try {
    const Config cfg = Config::parse_file(config_path);
    return run_experiment(command, cfg, out_override);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace degensys
