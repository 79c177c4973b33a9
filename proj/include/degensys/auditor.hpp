#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "degensys/ladder.hpp"
#include "degensys/operators.hpp"
#include "degensys/problem.hpp"
#include "degensys/truncation.hpp"

namespace degensys {

// Slack factor granted to continuum inequalities checked on a grid; quadrature
// and stencil consistency errors are O(h)-O(h^2), so 5% is ample at h = 1/64.
inline constexpr double kEstimateTolerance = 1.05;
inline constexpr double kBarrierTolerance = 1.0 + 1e-8;

/// Truncation thresholds at which the truncated estimates are checked.
struct ThresholdGrid {
  std::vector<double> values;  // nonnegative, sorted ascending

  /// 0 plus the quartiles of |u|: the thresholds where the level sets
  /// {|u| >= k} actually change.
  static ThresholdGrid with_quartiles(const ScalarField& u) {
    std::vector<double> mags(u.size());
    for (std::size_t k = 0; k < u.size(); ++k) mags[k] = std::abs(u[k]);
    std::sort(mags.begin(), mags.end());
    ThresholdGrid g;
    g.values.push_back(0.0);
    for (double q : {0.25, 0.5, 0.75}) {
      const std::size_t idx = static_cast<std::size_t>(q * static_cast<double>(mags.size() - 1));
      g.values.push_back(mags[idx]);
    }
    std::sort(g.values.begin(), g.values.end());
    return g;
  }
};

namespace detail {
/// Quadrature sum of f^2 over the level set {|u| >= k}.
inline double levelset_data_mass(const ScalarField& u, const ScalarField& f, double k) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    if (std::abs(u[i]) >= k) s += f[i] * f[i];
  return s * u.grid().cell_volume();
}
}  // namespace detail

/// Sup-norm barrier of the bounded-data solve: ||w||_inf <= ||g||_inf.
inline AuditRecord audit_linfty(const ScalarField& w, const ScalarField& g,
                                std::string context = "") {
  return AuditRecord::check("linfty_barrier", std::move(context), linf_norm(w), linf_norm(g),
                            kBarrierTolerance);
}

/// Truncated L2 estimate: ||G_k(u)||_2 <= (sum_{|u|>=k} f^2 h^dim)^{1/2}.
/// At k = 0 this is the plain L2 bound ||u||_2 <= ||f||_2.
inline AuditRecord audit_truncated_l2(const ScalarField& u, const ScalarField& f, double k,
                                      std::string context = "") {
  require_same_grid(u, f, "audit_truncated_l2");
  const double lhs = l2_norm(truncation_remainder(u, TruncationLevel::at(k)));
  const double rhs = std::sqrt(detail::levelset_data_mass(u, f, k));
  return AuditRecord::check("truncated_l2", std::move(context), lhs, rhs, kEstimateTolerance);
}

/// Weighted gradient estimate: alpha * energy of G_k(u) with weight
/// 1/(b + |z|)^2 is bounded by the level-set data mass (the squared right side
/// of the truncated L2 estimate).
inline AuditRecord audit_weighted_gradient(const ScalarField& u, const ScalarField& z,
                                           const ScalarField& f, const ScalarField& b, double k,
                                           double alpha, std::string context = "") {
  require_same_grid(u, z, "audit_weighted_gradient");
  const ScalarField weight =
      degenerate_coefficient(ScalarField(u.grid(), 1.0), b, z, TruncationLevel::infinite());
  const ScalarField tail = truncation_remainder(u, TruncationLevel::at(k));
  const double lhs = alpha * weighted_gradient_energy(tail, weight);
  const double rhs = detail::levelset_data_mass(u, f, k);
  return AuditRecord::check("weighted_gradient", std::move(context), lhs, rhs, kEstimateTolerance);
}

/// W^{1,1} bound: gradient_l1(u) <= ||f||_2 (||b||_2 + ||f||_2) / sqrt(alpha).
inline AuditRecord audit_w11(const ScalarField& u, const ScalarField& f, const ScalarField& b,
                             double alpha, std::string name = "w11", std::string context = "") {
  const double lhs = gradient_l1(u);
  const double rhs = l2_norm(f) * (l2_norm(b) + l2_norm(f)) / std::sqrt(alpha);
  return AuditRecord::check(std::move(name), std::move(context), lhs, rhs, kEstimateTolerance);
}

/// The W^{1,1} bounds for both unknowns. The z bound is emitted twice: once
/// with the constant ||F||(||b|| + ||f||)/sqrt(alpha) and once with the
/// symmetric constant ||F||(||B|| + ||F||)/sqrt(alpha); neither variant is
/// privileged (see README on audit naming).
inline std::vector<AuditRecord> audit_w11_variants(const ProblemSpec& spec, const ScalarField& u,
                                                   const ScalarField& z, std::string context = "") {
  std::vector<AuditRecord> out;
  out.push_back(audit_w11(u, spec.rhs_u, spec.offset_u, spec.alpha, "w11_u", context));
  const double lhs_z = gradient_l1(z);
  const double norm_f = l2_norm(spec.rhs_u);
  const double norm_F = l2_norm(spec.rhs_z);
  const double mixed = norm_F * (l2_norm(spec.offset_u) + norm_f) / std::sqrt(spec.alpha);
  const double symmetric = norm_F * (l2_norm(spec.offset_z) + norm_F) / std::sqrt(spec.alpha);
  out.push_back(AuditRecord::check("w11_z_mixed", context, lhs_z, mixed, kEstimateTolerance));
  out.push_back(AuditRecord::check("w11_z_symmetric", context, lhs_z, symmetric, kEstimateTolerance));
  return out;
}

/// Cauchy-Schwarz chain behind the W^{1,1} bound: gradient_l1(u) is controlled
/// by sqrt(data mass / alpha) times the L2 norm of the weight b + |z|.
inline AuditRecord audit_w11_chain(const ScalarField& u, const ScalarField& z,
                                   const ScalarField& f, const ScalarField& b, double alpha,
                                   std::string name = "w11_chain", std::string context = "") {
  const double lhs = gradient_l1(u);
  const double rhs = std::sqrt(detail::levelset_data_mass(u, f, 0.0) / alpha) *
                     (l2_norm(b) + l2_norm(z));
  return AuditRecord::check(std::move(name), std::move(context), lhs, rhs, kEstimateTolerance);
}

struct ProfilePoint {
  double fraction;
  double mass;
};

namespace detail {
/// Node order by decreasing integrand magnitude, ties broken by index so the
/// profile is deterministic.
inline std::vector<std::size_t> order_by_magnitude(std::span<const double> mags) {
  std::vector<std::size_t> idx(mags.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (mags[a] != mags[b]) return mags[a] > mags[b];
    return a < b;
  });
  return idx;
}

inline std::size_t worst_set_size(double fraction, std::size_t count) {
  const auto want = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(count)));
  return std::min(count, std::max<std::size_t>(want, 1));
}
}  // namespace detail

/// Worst-case L2 mass over node sets of given measure fraction: for each
/// fraction, the mass of u^2 over the nodes with largest |u| (on a finite grid
/// the supremum over sets of fixed measure is attained on top order
/// statistics). Nondecreasing in the fraction; equals ||u||_2^2 at fraction 1.
inline std::vector<ProfilePoint> equiintegrability_profile(const ScalarField& u,
                                                           std::span<const double> fractions) {
  std::vector<double> mags(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) mags[k] = std::abs(u[k]);
  const auto order = detail::order_by_magnitude(mags);
  std::vector<double> prefix(u.size() + 1, 0.0);
  for (std::size_t r = 0; r < order.size(); ++r)
    prefix[r + 1] = prefix[r] + u[order[r]] * u[order[r]];

  std::vector<ProfilePoint> out;
  out.reserve(fractions.size());
  for (double frac : fractions) {
    const std::size_t cnt = detail::worst_set_size(frac, u.size());
    out.push_back({frac, prefix[cnt] * u.grid().cell_volume()});
  }
  return out;
}

/// The equiintegrability majorant at threshold k and measure fraction delta:
/// 2 k^2 delta |Omega| + 2 sum_{|u|>=k} f^2 h^dim.
inline double equiintegrability_bound(const ScalarField& u, const ScalarField& f, double k,
                                      double fraction) {
  return 2.0 * k * k * fraction * u.grid().volume() +
         2.0 * detail::levelset_data_mass(u, f, k);
}

/// Worst-case mass at the given fraction against the majorant minimized over
/// the threshold grid.
inline AuditRecord audit_equiintegrability(const ScalarField& u, const ScalarField& f,
                                           const ThresholdGrid& thresholds, double fraction,
                                           std::string context = "") {
  const double fr[1] = {fraction};
  const double lhs = equiintegrability_profile(u, fr).front().mass;
  double rhs = std::numeric_limits<double>::infinity();
  for (double k : thresholds.values) rhs = std::min(rhs, equiintegrability_bound(u, f, k, fraction));
  return AuditRecord::check("equiintegrability", std::move(context), lhs, rhs, kEstimateTolerance);
}

/// Worst-case gradient mass over the cells with largest |grad_h u| against the
/// Cauchy-Schwarz majorant sqrt(||f||^2/alpha) (sqrt(int_E b) + sqrt(int_E z^2)).
inline std::vector<AuditRecord> gradient_equiintegrability_profile(
    const ScalarField& u, const ScalarField& z, const ScalarField& f, const ScalarField& b,
    double alpha, std::span<const double> fractions, std::string context_prefix = "") {
  require_same_grid(u, z, "gradient_equiintegrability_profile");
  const double vol = u.grid().cell_volume();
  const auto mags = node_gradient_magnitudes(u);
  const auto order = detail::order_by_magnitude(mags);

  std::vector<double> grad_prefix(order.size() + 1, 0.0);
  std::vector<double> b_prefix(order.size() + 1, 0.0);
  std::vector<double> z2_prefix(order.size() + 1, 0.0);
  for (std::size_t r = 0; r < order.size(); ++r) {
    const std::size_t i = order[r];
    grad_prefix[r + 1] = grad_prefix[r] + mags[i];
    b_prefix[r + 1] = b_prefix[r] + b[i];
    z2_prefix[r + 1] = z2_prefix[r] + z[i] * z[i];
  }
  const double data_factor = std::sqrt(detail::levelset_data_mass(u, f, 0.0) / alpha);

  std::vector<AuditRecord> out;
  out.reserve(fractions.size());
  for (double frac : fractions) {
    const std::size_t cnt = detail::worst_set_size(frac, u.size());
    const double lhs = grad_prefix[cnt] * vol;
    const double rhs =
        data_factor * (std::sqrt(b_prefix[cnt] * vol) + std::sqrt(z2_prefix[cnt] * vol));
    out.push_back(AuditRecord::check("gradient_equiintegrability",
                                     context_prefix + "delta=" + format_double(frac), lhs, rhs,
                                     kEstimateTolerance));
  }
  return out;
}

/// Tensor sine modes of orders 1..max_order, sampled on the grid. These are the
/// default test functions for the flux convergence table.
inline std::vector<ScalarField> sine_test_functions(const Grid& g, int max_order = 3) {
  std::vector<ScalarField> out;
  const double pi = std::acos(-1.0);
  for (int m = 1; m <= max_order; ++m) {
    if (g.dim() == 1) {
      out.push_back(ScalarField::from_function(
          g, [&](double x, double) { return std::sin(m * pi * x / g.extent(0)); }));
    } else {
      out.push_back(ScalarField::from_function(g, [&](double x, double y) {
        return std::sin(m * pi * x / g.extent(0)) * std::sin(m * pi * y / g.extent(1));
      }));
    }
  }
  return out;
}

/// Face-based bilinear form sum_faces D_face (du/h)(dv/h) h^dim.
inline double face_bilinear(const ScalarField& u, const ScalarField& v, const ScalarField& D) {
  require_same_grid(u, v, "face_bilinear");
  require_same_grid(u, D, "face_bilinear");
  const Grid& g = u.grid();
  const FaceCoefficients f = face_average(D);
  const int nx = g.nodes(0);
  const int ny = g.dim() == 2 ? g.nodes(1) : 1;
  const double hx = g.spacing(0);
  double sum = 0.0;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      const double du = ((i < nx ? u.at(i, j) : 0.0) - (i > 0 ? u.at(i - 1, j) : 0.0)) / hx;
      const double dv = ((i < nx ? v.at(i, j) : 0.0) - (i > 0 ? v.at(i - 1, j) : 0.0)) / hx;
      sum += f.x_face(i, j) * du * dv;
    }
  if (g.dim() == 2) {
    const double hy = g.spacing(1);
    for (int j = 0; j <= ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const double du = ((j < ny ? u.at(i, j) : 0.0) - (j > 0 ? u.at(i, j - 1) : 0.0)) / hy;
        const double dv = ((j < ny ? v.at(i, j) : 0.0) - (j > 0 ? v.at(i, j - 1) : 0.0)) / hy;
        sum += f.y_face(i, j) * du * dv;
      }
  }
  return sum * g.cell_volume();
}

/// Squared L2 norm of the flux D grad u, accumulated facewise:
/// sum_faces (D_face du/h)^2 h^dim.
inline double flux_l2_squared(const ScalarField& u, const ScalarField& D) {
  require_same_grid(u, D, "flux_l2_squared");
  const Grid& g = u.grid();
  const FaceCoefficients f = face_average(D);
  const int nx = g.nodes(0);
  const int ny = g.dim() == 2 ? g.nodes(1) : 1;
  const double hx = g.spacing(0);
  double sum = 0.0;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      const double du = ((i < nx ? u.at(i, j) : 0.0) - (i > 0 ? u.at(i - 1, j) : 0.0)) / hx;
      const double fl = f.x_face(i, j) * du;
      sum += fl * fl;
    }
  if (g.dim() == 2) {
    const double hy = g.spacing(1);
    for (int j = 0; j <= ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const double du = ((j < ny ? u.at(i, j) : 0.0) - (j > 0 ? u.at(i, j - 1) : 0.0)) / hy;
        const double fl = f.y_face(i, j) * du;
        sum += fl * fl;
      }
  }
  return sum * g.cell_volume();
}

/// Flux convergence table along a ladder: values of the untruncated flux form
/// against each test function per rung, their Cauchy differences between
/// consecutive rungs, and the flux L2 norms with their a priori bounds.
struct FluxTable {
  std::vector<int> levels;
  std::vector<std::string> test_names;
  std::vector<std::vector<double>> form_u, form_z;      // [rung][test]
  std::vector<std::vector<double>> cauchy_u, cauchy_z;  // [pair][test]
  std::vector<double> flux_l2_u, flux_l2_z;             // per rung, squared norms
  std::vector<AuditRecord> audits;

  /// Largest Cauchy difference of the final rung pair, over all test functions
  /// and both unknowns.
  double top_cauchy() const {
    double m = 0.0;
    if (!cauchy_u.empty())
      for (std::size_t t = 0; t < test_names.size(); ++t)
        m = std::max({m, std::abs(cauchy_u.back()[t]), std::abs(cauchy_z.back()[t])});
    return m;
  }

  void write_csv(std::ostream& os) const {
    os << "n";
    for (const auto& t : test_names) os << ",form_u_" << t << ",form_z_" << t;
    os << ",flux_l2_u,flux_l2_z\n";
    for (std::size_t r = 0; r < levels.size(); ++r) {
      os << levels[r];
      for (std::size_t t = 0; t < test_names.size(); ++t)
        os << ',' << format_double(form_u[r][t]) << ',' << format_double(form_z[r][t]);
      os << ',' << format_double(flux_l2_u[r]) << ',' << format_double(flux_l2_z[r]) << '\n';
    }
    os << "cauchy_pair";
    for (const auto& t : test_names) os << ",cauchy_u_" << t << ",cauchy_z_" << t;
    os << ",,\n";
    for (std::size_t p = 0; p < cauchy_u.size(); ++p) {
      os << levels[p] << "->" << levels[p + 1];
      for (std::size_t t = 0; t < test_names.size(); ++t)
        os << ',' << format_double(cauchy_u[p][t]) << ',' << format_double(cauchy_z[p][t]);
      os << ",,\n";
    }
  }
};

/// Evaluate the flux form with the *untruncated* coefficients on every rung.
/// The flux L2 audit uses the scalar-coefficient constant beta^2/(alpha
/// lambda^2); the constant as printed in the source estimate, alpha^2/lambda^2,
/// is reported alongside with the "_as_printed" suffix and is advisory only.
inline FluxTable flux_convergence(const ProblemSpec& spec, const LadderReport& ladder,
                                  const std::vector<ScalarField>& tests) {
  if (ladder.rungs.size() < 2)
    throw std::invalid_argument("flux_convergence: need at least two rungs");
  FluxTable table;
  for (std::size_t t = 0; t < tests.size(); ++t)
    table.test_names.push_back("sine" + std::to_string(t + 1));

  const double data_mass_u = detail::levelset_data_mass(spec.rhs_u, spec.rhs_u, 0.0);
  const double data_mass_z = detail::levelset_data_mass(spec.rhs_z, spec.rhs_z, 0.0);
  const double adjusted = spec.beta * spec.beta / (spec.alpha * spec.lambda * spec.lambda);
  const double printed = spec.alpha * spec.alpha / (spec.lambda * spec.lambda);

  for (const LadderRung& rung : ladder.rungs) {
    table.levels.push_back(rung.n);
    const ScalarField d_u =
        degenerate_coefficient(spec.diff_u, spec.offset_u, rung.z, TruncationLevel::infinite());
    const ScalarField d_z =
        degenerate_coefficient(spec.diff_z, spec.offset_z, rung.u, TruncationLevel::infinite());
    std::vector<double> row_u, row_z;
    for (const ScalarField& phi : tests) {
      row_u.push_back(face_bilinear(rung.u, phi, d_u));
      row_z.push_back(face_bilinear(rung.z, phi, d_z));
    }
    table.form_u.push_back(std::move(row_u));
    table.form_z.push_back(std::move(row_z));

    const double fl_u = flux_l2_squared(rung.u, d_u);
    const double fl_z = flux_l2_squared(rung.z, d_z);
    table.flux_l2_u.push_back(fl_u);
    table.flux_l2_z.push_back(fl_z);
    const std::string ctx = "n=" + std::to_string(rung.n);
    table.audits.push_back(
        AuditRecord::check("flux_l2_u", ctx, fl_u, adjusted * data_mass_u, kEstimateTolerance));
    table.audits.push_back(AuditRecord::check("flux_l2_u_as_printed", ctx, fl_u,
                                              printed * data_mass_u, kEstimateTolerance));
    table.audits.push_back(
        AuditRecord::check("flux_l2_z", ctx, fl_z, adjusted * data_mass_z, kEstimateTolerance));
    table.audits.push_back(AuditRecord::check("flux_l2_z_as_printed", ctx, fl_z,
                                              printed * data_mass_z, kEstimateTolerance));
  }
  for (std::size_t r = 1; r < ladder.rungs.size(); ++r) {
    std::vector<double> cu, cz;
    for (std::size_t t = 0; t < tests.size(); ++t) {
      cu.push_back(std::abs(table.form_u[r][t] - table.form_u[r - 1][t]));
      cz.push_back(std::abs(table.form_z[r][t] - table.form_z[r - 1][t]));
    }
    table.cauchy_u.push_back(std::move(cu));
    table.cauchy_z.push_back(std::move(cz));
  }
  return table;
}

/// Records whose verdicts are informational (printed-constant variants) and do
/// not count toward an overall pass/fail.
inline bool audit_is_advisory(const AuditRecord& rec) {
  return rec.name.size() > 11 && rec.name.rfind("_as_printed") == rec.name.size() - 11;
}

/// The standard estimate battery for one solved pair: barrier, truncated L2
/// and weighted gradient estimates over a threshold grid, the W^{1,1} bounds
/// with both constant variants, the Cauchy-Schwarz chains, and the
/// equiintegrability check at measure fraction 0.01.
inline std::vector<AuditRecord> standard_audits(const ProblemSpec& spec, const ScalarField& u,
                                                const ScalarField& z, const ScalarField& data_u,
                                                const ScalarField& data_z,
                                                const std::string& context = "") {
  std::vector<AuditRecord> out;
  out.push_back(audit_linfty(u, data_u, context + "u"));
  out.push_back(audit_linfty(z, data_z, context + "z"));

  const ThresholdGrid ks_u = ThresholdGrid::with_quartiles(u);
  const ThresholdGrid ks_z = ThresholdGrid::with_quartiles(z);
  for (double k : ks_u.values) {
    const std::string ctx = context + "u,k=" + format_double(k);
    out.push_back(audit_truncated_l2(u, spec.rhs_u, k, ctx));
    out.push_back(audit_weighted_gradient(u, z, spec.rhs_u, spec.offset_u, k, spec.alpha, ctx));
  }
  for (double k : ks_z.values) {
    const std::string ctx = context + "z,k=" + format_double(k);
    out.push_back(audit_truncated_l2(z, spec.rhs_z, k, ctx));
    out.push_back(audit_weighted_gradient(z, u, spec.rhs_z, spec.offset_z, k, spec.alpha, ctx));
  }
  for (auto& rec : audit_w11_variants(spec, u, z, context)) out.push_back(std::move(rec));
  out.push_back(audit_w11_chain(u, z, spec.rhs_u, spec.offset_u, spec.alpha, "w11_chain_u", context));
  out.push_back(audit_w11_chain(z, u, spec.rhs_z, spec.offset_z, spec.alpha, "w11_chain_z", context));
  out.push_back(audit_equiintegrability(u, spec.rhs_u, ks_u, 0.01, context + "u"));
  out.push_back(audit_equiintegrability(z, spec.rhs_z, ks_z, 0.01, context + "z"));
  return out;
}

inline void write_audit_csv(std::ostream& os, std::span<const AuditRecord> records) {
  os << "name,context,lhs,rhs,margin,verdict\n";
  for (const AuditRecord& r : records)
    os << r.name << ',' << r.context << ',' << format_double(r.lhs) << ',' << format_double(r.rhs)
       << ',' << format_double(r.margin()) << ',' << (r.pass ? "pass" : "fail") << '\n';
}

}  // namespace degensys
