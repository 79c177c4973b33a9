#pragma once

#include <string>

#include "degensys/operators.hpp"
#include "degensys/truncation.hpp"
#include "degensys/util.hpp"

namespace degensys {

inline constexpr const char* kVersion = "1.0.0";

/// Fingerprint of the numerical conventions: stencil weights, face averaging,
/// quadrature and truncation behavior, probed through the live code paths so
/// any change to a convention changes the fingerprint while identical sources
/// agree across builds.
inline std::uint64_t convention_fingerprint() {
  std::string probe;
  const auto add = [&probe](double v) { probe += format_double(v) + ";"; };

  {
    const Grid g = Grid::line(3);
    const ScalarField d(g, 1.0);
    const SparseOperator op = assemble(g, d);
    for (double v : op.vals()) add(v);

    ScalarField u(g);
    u[0] = 0.25; u[1] = 0.5; u[2] = 0.75;
    add(gradient_l1(u));
    add(weighted_gradient_energy(u, d));
    add(l2_norm(ScalarField(g, 1.0)));
  }
  {
    const Grid g = Grid::rectangle(3, 3, 2.0, 2.0);
    ScalarField d(g, 1.0);
    d.at(1, 1) = 3.0;  // exercises the harmonic face average
    const SparseOperator op = assemble(g, d);
    for (double v : op.vals()) add(v);
  }
  add(truncate(3.0, TruncationLevel::at(2.0)));
  add(approximate_datum(ScalarField(Grid::line(3), 3.0), 3)[0]);
  return fnv1a64(probe);
}

inline std::string version_string() {
  char hex[20];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(convention_fingerprint()));
  return std::string("degen-sys ") + kVersion + " conventions:" + hex;
}

}  // namespace degensys
