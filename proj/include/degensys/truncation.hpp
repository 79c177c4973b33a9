#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "degensys/grid.hpp"

namespace degensys {

/// A clamp threshold for the truncation operator, or the distinguished
/// "infinite" level meaning no truncation at all. The infinite level is an
/// explicit state, not a large number, so untruncated coefficients are exact.
class TruncationLevel {
public:
  static TruncationLevel at(double k) {
    if (!(k >= 0.0) || !std::isfinite(k))
      throw std::invalid_argument("TruncationLevel: finite level must be >= 0");
    return TruncationLevel(k, true);
  }

  static TruncationLevel infinite() {
    return TruncationLevel(std::numeric_limits<double>::infinity(), false);
  }

  bool is_finite() const { return finite_; }
  double value() const { return value_; }

  friend bool operator==(const TruncationLevel&, const TruncationLevel&) = default;

private:
  TruncationLevel(double v, bool finite) : value_(v), finite_(finite) {}
  double value_;
  bool finite_;
};

/// Clamp s to the band [-k, k]; the infinite level is the identity.
inline double truncate(double s, TruncationLevel k) {
  if (!k.is_finite()) return s;
  return std::clamp(s, -k.value(), k.value());
}

/// Excess beyond the band: s minus its truncation. The split is exact in
/// floating point whenever the threshold lies on the ulp grid of s (dyadic
/// thresholds, or |s| <= k where the remainder is 0).
inline double truncation_remainder(double s, TruncationLevel k) {
  return s - truncate(s, k);
}

inline ScalarField truncation_remainder(const ScalarField& v, TruncationLevel k) {
  return v.map([k](double s) { return truncation_remainder(s, k); });
}

/// Bounded approximant f/(1 + |f|/n): |result| <= min(n, |f|) pointwise, and
/// the approximant converges to f in L2 as n grows.
inline ScalarField approximate_datum(const ScalarField& f, int n) {
  if (n < 1) throw std::invalid_argument("approximate_datum: n must be >= 1");
  const double nd = static_cast<double>(n);
  return f.map([nd](double v) { return v / (1.0 + std::abs(v) / nd); });
}

/// Nodewise coefficient a / (b + |T_level(v)|)^2. With a finite level this is
/// uniformly elliptic: alpha/(gamma+level)^2 <= D <= beta/lambda^2.
inline ScalarField degenerate_coefficient(const ScalarField& a, const ScalarField& b,
                                          const ScalarField& v, TruncationLevel level) {
  require_same_grid(a, b, "degenerate_coefficient");
  require_same_grid(a, v, "degenerate_coefficient");
  ScalarField out(a.grid());
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (!(b[k] > 0.0))
      throw std::invalid_argument("degenerate_coefficient: degeneracy offset must be positive");
    const double d = b[k] + std::abs(truncate(v[k], level));
    out[k] = a[k] / (d * d);
  }
  return out;
}

}  // namespace degensys
