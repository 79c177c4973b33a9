#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "degensys/problem.hpp"

namespace degensys {

/// Built-in experiment cases, self-contained so every standard workflow can run
/// without external field files. Grids are sized so the spacing is 1/64.
inline std::vector<std::string> builtin_case_names() {
  return {"zero", "unit-interval-constant", "unit-square-constant", "unit-square-spike",
          "unit-square-varying"};
}

inline ProblemSpec builtin_case(const std::string& name) {
  const auto square = [] { return Grid::rectangle(63, 63); };

  if (name == "zero") {
    const Grid g = square();
    return ProblemSpec::with_unit_coefficients(g, ScalarField(g, 0.0), ScalarField(g, 0.0));
  }
  if (name == "unit-interval-constant") {
    const Grid g = Grid::line(63);
    return ProblemSpec::with_unit_coefficients(g, ScalarField(g, 1.0), ScalarField(g, 1.0));
  }
  if (name == "unit-square-constant") {
    const Grid g = square();
    return ProblemSpec::with_unit_coefficients(g, ScalarField(g, 1.0), ScalarField(g, 1.0));
  }
  if (name == "unit-square-spike") {
    // L2 but unbounded datum: 0.4 |x - x0|^{-1/2} with off-lattice centers,
    // the scenario that actually exercises the bounded approximants. The
    // amplitude keeps the rung-to-rung solution differences monotone on the
    // default ladder.
    const Grid g = square();
    const auto spike = [](double cx, double cy) {
      return [cx, cy](double x, double y) {
        const double r = std::hypot(x - cx, y - cy);
        return 0.4 / std::sqrt(std::max(r, 1e-12));
      };
    };
    return ProblemSpec::with_unit_coefficients(
        g, ScalarField::from_function(g, spike(std::sqrt(0.5), std::sqrt(1.0 / 3.0))),
        ScalarField::from_function(g, spike(std::sqrt(0.2), std::sqrt(1.0 / 7.0))));
  }
  if (name == "unit-square-varying") {
    const Grid g = square();
    const double pi = std::acos(-1.0);
    ProblemSpec s{
        g,
        ScalarField::from_function(g, [pi](double x, double y) {
          return 1.0 + 0.5 * std::sin(pi * x) * std::sin(pi * y);
        }),
        ScalarField::from_function(g, [](double x, double y) { return 1.0 + 0.5 * x * y; }),
        ScalarField::from_function(g, [pi](double x, double y) {
          return 1.0 + 0.25 * std::sin(pi * x) * std::sin(pi * y);
        }),
        ScalarField::from_function(g, [](double x, double) { return 1.0 + 0.25 * x; }),
        ScalarField::from_function(g, [pi](double x, double y) {
          return 4.0 * std::sin(pi * x) * std::sin(pi * y);
        }),
        ScalarField::from_function(g, [](double x, double y) { return 2.0 * (x + y); }),
        1.0, 1.5, 1.0, 1.25};
    return s;
  }
  std::string known;
  for (const auto& n : builtin_case_names()) known += " " + n;
  throw std::invalid_argument("unknown builtin case '" + name + "'; known cases:" + known);
}

}  // namespace degensys
