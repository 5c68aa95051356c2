#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <set>
#include <unordered_set>

#include "qplan/types.hpp"

using namespace qplan;

TEST(Types, EuclideanExamples) {
  EXPECT_DOUBLE_EQ(euclidean(Cell{0, 0}, Cell{0, 0}), 0.0);
  EXPECT_DOUBLE_EQ(euclidean(Cell{0, 0}, Cell{3, 4}), 5.0);
  EXPECT_NEAR(euclidean(Cell{2, 2}, Cell{25, 14}), std::sqrt(673.0), 1e-12);
  EXPECT_NEAR(euclidean(Cell{2, 2}, Cell{25, 14}), 25.942, 1e-3);
}

TEST(Types, EuclideanIsSymmetricAndTriangular) {
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    auto pick = [&] { return Cell{static_cast<int>(rng.below(50)), static_cast<int>(rng.below(50))}; };
    const Cell a = pick(), b = pick(), c = pick();
    EXPECT_DOUBLE_EQ(euclidean(a, b), euclidean(b, a));
    EXPECT_LE(euclidean(a, c), euclidean(a, b) + euclidean(b, c) + 1e-12);
    EXPECT_LE(euclidean(a, b), manhattan(a, b) + 1e-12);
  }
}

TEST(Types, CellOfRoundsToNearestCenter) {
  EXPECT_EQ(cell_of({0.49, -0.49}), (Cell{0, 0}));
  EXPECT_EQ(cell_of({0.5, 0.0}), (Cell{1, 0}));
  EXPECT_EQ(cell_of({-0.51, 2.2}), (Cell{-1, 2}));
  for (int x = -3; x < 4; ++x) EXPECT_EQ(cell_of(center({x, x + 1})), (Cell{x, x + 1}));
}

TEST(Types, PolylineLength) {
  EXPECT_DOUBLE_EQ(polyline_length(std::vector<Cell>{}), 0.0);
  EXPECT_DOUBLE_EQ(polyline_length(std::vector<Cell>{{0, 0}}), 0.0);
  EXPECT_DOUBLE_EQ(polyline_length(std::vector<Cell>{{0, 0}, {3, 4}, {3, 0}}), 9.0);
  EXPECT_DOUBLE_EQ(polyline_length(std::vector<Point>{{0, 0}, {0.5, 0}}), 0.5);
}

TEST(Types, CellOrderingIsRowMajor) {
  std::set<Cell> s{{2, 1}, {0, 2}, {1, 1}, {5, 0}};
  std::vector<Cell> v(s.begin(), s.end());
  EXPECT_EQ(v, (std::vector<Cell>{{5, 0}, {1, 1}, {2, 1}, {0, 2}}));
  std::unordered_set<Cell> h{{1, 2}, {2, 1}, {1, 2}};
  EXPECT_EQ(h.size(), 2u);
}

TEST(Rng, SameSeedSameStream) {
  Rng a(99), b(99), c(100);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next();
    EXPECT_EQ(x, b.next());
    differs = differs || x != c.next();
  }
  EXPECT_TRUE(differs);
}

TEST(Rng, UniformRange) {
  Rng rng(1);
  double lo = 1.0, hi = 0.0, sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    lo = std::min(lo, u), hi = std::max(hi, u), sum += u;
  }
  EXPECT_LT(lo, 1e-3);
  EXPECT_GT(hi, 1.0 - 1e-3);
  EXPECT_NEAR(sum / n, 0.5, 0.01);
  const double v = rng.uniform(-2.0, 3.0);
  EXPECT_GE(v, -2.0);
  EXPECT_LT(v, 3.0);
}

TEST(Rng, BelowIsUniform) {
  // Chi-square with 6 degrees of freedom; 22.46 is the 0.999 quantile.
  Rng rng(2024);
  std::array<int, 7> counts{};
  const int n = 70000;
  for (int i = 0; i < n; ++i) {
    const auto k = rng.below(7);
    ASSERT_LT(k, 7u);
    ++counts[k];
  }
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - n / 7.0) * (c - n / 7.0) / (n / 7.0);
  EXPECT_LT(chi2, 22.46);
  EXPECT_EQ(Rng(3).below(1), 0u);
}
