#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "its/polynomial.hpp"
#include "oracles.hpp"

using namespace its;

namespace {

void expect_roots(const std::vector<double>& got, const std::vector<double>& want, double tol) {
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(got[i], want[i], tol);
}

// Relative distance from x to the nearest entry of set.
double nearest(const std::vector<double>& set, double x) {
  double best = std::numeric_limits<double>::infinity();
  for (double y : set) best = std::min(best, std::abs(x - y) / std::max(1.0, std::abs(x)));
  return best;
}

}  // namespace

TEST(Quadratic, Cases) {
  expect_roots(solve_quadratic(1, -3, 2), {1, 2}, 1e-15);
  expect_roots(solve_quadratic(1, -2, 1), {1}, 1e-15);
  EXPECT_TRUE(solve_quadratic(1, 0, 1).empty());
  expect_roots(solve_quadratic(0, 2, -1), {0.5}, 1e-15);
  EXPECT_TRUE(solve_quadratic(0, 0, 1).empty());
  // Cancellation-prone: roots 1e-8 and 1e8.
  expect_roots(solve_quadratic(1, -(1e8 + 1e-8), 1), {1e-8, 1e8}, 1e-20);
}

TEST(Cubic, Cases) {
  expect_roots(solve_cubic(1, -6, 11, -6), {1, 2, 3}, 1e-12);
  expect_roots(solve_cubic(1, 0, 0, -8), {2}, 1e-12);
  expect_roots(solve_cubic(1, -3, 3, -1), {1}, 1e-9);
  expect_roots(solve_cubic(0, 1, -3, 2), {1, 2}, 1e-15);
  expect_roots(solve_cubic(2, 0, -2, 0), {-1, 0, 1}, 1e-12);
}

TEST(Quartic, AnalyticCases) {
  expect_roots(solve_quartic(1, -10, 35, -50, 24), {1, 2, 3, 4}, 1e-9);
  expect_roots(solve_quartic(1, 0, 0, 0, 0), {0}, 1e-9);
  expect_roots(solve_quartic(1, -7, 17, -17, 6), {1, 2, 3}, 1e-9);   // double root at 1
  expect_roots(solve_quartic(1, -5, 9, -7, 2), {1, 2}, 1e-9);        // triple root at 1
  EXPECT_TRUE(solve_quartic(1, 0, 5, 0, 4).empty());                 // (x^2+1)(x^2+4)
  expect_roots(solve_quartic(1, -4, 6, -4, 1), {1}, 1e-9);
  expect_roots(solve_quartic(1, -6, 13, -12, 4), {1, 2}, 1e-9);
  expect_roots(solve_quartic(-2, 20, -70, 100, -48), {1, 2, 3, 4}, 1e-9);
}

TEST(Quartic, DemotesWhenLeadingTermVanishes) {
  const auto r = solve_quartic_ex(0, 1, -6, 11, -6);
  EXPECT_TRUE(r.demoted);
  expect_roots(r.roots, {1, 2, 3}, 1e-12);
  expect_roots(solve_quartic(0, 0, 0, 2, -1), {0.5}, 1e-15);
  EXPECT_TRUE(solve_quartic(0, 0, 0, 0, 0).empty());
}

TEST(Quartic, ResidualsAtRoots) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    const std::vector<double> g{u(rng), u(rng), u(rng), u(rng), u(rng)};
    for (double x : solve_quartic(g[0], g[1], g[2], g[3], g[4])) {
      const double scale = std::abs(g[0]) * std::pow(std::abs(x), 4) + std::abs(g[1]) * std::pow(std::abs(x), 3) +
                           std::abs(g[2]) * x * x + std::abs(g[3]) * std::abs(x) + std::abs(g[4]);
      EXPECT_LE(std::abs(eval_poly(g, x)), 1e-12 * scale);
    }
  }
}

TEST(Quartic, MatchesCompanionMatrix) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const std::array<double, 5> g{u(rng), u(rng), u(rng), u(rng), u(rng)};
    const auto got = solve_quartic(g[0], g[1], g[2], g[3], g[4]);
    const auto want = its::testing::companion_real_roots(g);
    for (double x : want) worst = std::max(worst, nearest(got, x));
    for (double x : got) worst = std::max(worst, nearest(want, x));
  }
  EXPECT_LE(worst, 1e-7);
}

TEST(Quartic, ScaledRootsInUnitInterval) {
  // Roots in [0, 1] as the extremity code produces them.
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    std::vector<double> r{u(rng), u(rng), u(rng), u(rng)};
    std::sort(r.begin(), r.end());
    const double s = std::ldexp(1.0, static_cast<int>(rng() % 40) - 20);
    const double e1 = r[0] + r[1] + r[2] + r[3];
    const double e2 = r[0] * r[1] + r[0] * r[2] + r[0] * r[3] + r[1] * r[2] + r[1] * r[3] + r[2] * r[3];
    const double e3 = r[0] * r[1] * r[2] + r[0] * r[1] * r[3] + r[0] * r[2] * r[3] + r[1] * r[2] * r[3];
    const double e4 = r[0] * r[1] * r[2] * r[3];
    const auto got = solve_quartic(s, -s * e1, s * e2, -s * e3, s * e4);
    for (double x : r) {
      if (r.back() - r.front() < 1e-3) continue;
      double gap = 1.0;
      for (double y : r) if (y != x) gap = std::min(gap, std::abs(y - x));
      // Root conditioning degrades as neighbours close in.
      if (gap > 1e-2) EXPECT_LE(nearest(got, x), 1e-9);
    }
  }
}

TEST(EvalPoly, Horner) {
  EXPECT_EQ(eval_poly({1, -10, 35, -50, 24}, 5.0), 24.0);
  EXPECT_EQ(eval_poly({}, 3.0), 0.0);
  EXPECT_EQ(eval_poly({7}, 3.0), 7.0);
}
