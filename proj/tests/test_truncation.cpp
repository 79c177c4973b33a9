#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "degensys/truncation.hpp"
#include "support/oracles.hpp"

using namespace degensys;
using Catch::Approx;

TEST_CASE("truncate clamps to the band") {
  const auto k2 = TruncationLevel::at(2.0);
  CHECK(truncate(3.0, k2) == 2.0);
  CHECK(truncate(-5.0, k2) == -2.0);
  CHECK(truncate(1.5, k2) == 1.5);
  CHECK(truncate(-5.0, TruncationLevel::infinite()) == -5.0);
  // level 0 freezes everything at 0
  CHECK(truncate(7.0, TruncationLevel::at(0.0)) == 0.0);
  CHECK_THROWS_AS(TruncationLevel::at(-1.0), std::invalid_argument);
}

TEST_CASE("truncation remainder") {
  const auto k2 = TruncationLevel::at(2.0);
  CHECK(truncation_remainder(3.0, k2) == 1.0);
  CHECK(truncation_remainder(1.0, k2) == 0.0);
  CHECK(truncation_remainder(-5.0, k2) == -3.0);  // s - T_k(s) = -5 - (-2)
  CHECK(truncation_remainder(4.0, TruncationLevel::infinite()) == 0.0);
}

TEST_CASE("truncation identities over random pairs") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> s_dist(-50.0, 50.0);
  std::uniform_real_distribution<double> k_dist(0.0, 10.0);
  // Thresholds are drawn on a dyadic grid: the split s = T_k(s) + G_k(s) is
  // then exact in IEEE arithmetic (both operands live on the ulp grid of s).
  // For a threshold with ulp far below ulp(s) the subtraction itself rounds,
  // so bitwise exactness is unattainable for arbitrary double thresholds.
  const auto dyadic = [&]() { return std::round(k_dist(rng) * 1024.0) / 1024.0; };
  for (int trial = 0; trial < 5000; ++trial) {
    const double s = s_dist(rng);
    const auto k = TruncationLevel::at(dyadic());
    const double t = truncate(s, k);
    CHECK(t + truncation_remainder(s, k) == s);  // exact split
    CHECK(std::abs(t) <= std::min(k.value(), std::abs(s)));
    CHECK(truncate(-s, k) == -t);  // odd
    const double s2 = s_dist(rng);
    if (s2 >= s) CHECK(truncate(s2, k) >= t);  // nondecreasing
  }
  // Arbitrary thresholds still split to within one rounding of s.
  for (int trial = 0; trial < 5000; ++trial) {
    const double s = s_dist(rng);
    const auto k = TruncationLevel::at(k_dist(rng));
    const double sum = truncate(s, k) + truncation_remainder(s, k);
    CHECK(std::abs(sum - s) <= std::abs(s) * 1e-15);
  }
}

TEST_CASE("bounded data approximant") {
  const Grid g = Grid::line(3);

  SECTION("pointwise examples") {
    CHECK(approximate_datum(ScalarField(g, 1.0), 1)[0] == Approx(0.5));
    CHECK(approximate_datum(ScalarField(g, 0.0), 5)[0] == 0.0);
    CHECK(approximate_datum(ScalarField(g, 3.0), 3)[0] == Approx(1.5));  // 3/(1 + 3/3)
    CHECK_THROWS_AS(approximate_datum(ScalarField(g, 1.0), 0), std::invalid_argument);
  }

  SECTION("sup bound, pointwise domination, monotone L2 convergence") {
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 10; ++trial) {
      const Grid gr = testing::random_grid(rng, 15);
      const ScalarField f = testing::random_field(gr, rng, -30.0, 30.0);
      double prev_gap = std::numeric_limits<double>::infinity();
      for (int n = 1; n <= 64; n *= 2) {
        const ScalarField fn = approximate_datum(f, n);
        CHECK(linf_norm(fn) <= n);
        for (std::size_t k = 0; k < f.size(); ++k) CHECK(std::abs(fn[k]) <= std::abs(f[k]));
        const double gap = l2_norm(fn - f);
        CHECK(gap < prev_gap);  // strictly decreasing: f is nonzero a.e. here
        prev_gap = gap;
      }
      CHECK(l2_norm(approximate_datum(f, 1 << 24) - f) < 1e-5 * l2_norm(f));
    }
  }
}

TEST_CASE("degenerate coefficient") {
  const Grid g = Grid::line(4);
  const ScalarField one(g, 1.0);

  SECTION("examples") {
    CHECK(degenerate_coefficient(one, one, ScalarField(g, 0.0), TruncationLevel::infinite())[0] ==
          Approx(1.0));
    const ScalarField two(g, 2.0), three(g, 3.0);
    CHECK(degenerate_coefficient(two, one, three, TruncationLevel::infinite())[0] ==
          Approx(0.125));  // 2 / (1+3)^2
    CHECK(degenerate_coefficient(two, one, three, TruncationLevel::at(1.0))[0] ==
          Approx(0.5));  // 2 / (1+1)^2
  }

  SECTION("nonpositive offset rejected") {
    ScalarField bad(g, 1.0);
    bad[2] = 0.0;
    CHECK_THROWS_WITH(
        degenerate_coefficient(one, bad, one, TruncationLevel::infinite()),
        Catch::Matchers::ContainsSubstring("offset"));
  }

  SECTION("uniform bounds with finite level") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 20; ++trial) {
      const Grid gr = testing::random_grid(rng, 9);
      const ProblemSpec s = testing::random_spec(rng, gr);
      const double level = 3.0;
      const ScalarField d = degenerate_coefficient(s.diff_u, s.offset_u,
                                                   testing::random_field(gr, rng, -20.0, 20.0),
                                                   TruncationLevel::at(level));
      const double lo = s.alpha / ((s.gamma + level) * (s.gamma + level));
      const double hi = s.beta / (s.lambda * s.lambda);
      for (std::size_t k = 0; k < d.size(); ++k) {
        CHECK(d[k] >= lo * (1.0 - 1e-12));
        CHECK(d[k] <= hi * (1.0 + 1e-12));
      }
    }
  }
}
