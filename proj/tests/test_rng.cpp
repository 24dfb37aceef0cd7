#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "atlasid/rng.hpp"

using namespace atlasid;

TEST(Seeds, PinnedValue) {
  static_assert(derive_path_seed(0, 0) == 0x48218226ff3cd4bfULL);
  EXPECT_EQ(derive_path_seed(0, 0), 0x48218226ff3cd4bfULL);
}

TEST(Seeds, SplitMixReference) {
  // First output of SplitMix64 seeded with 0.
  SplitMix64 sm(0);
  EXPECT_EQ(sm.next(), 0xe220a8397b1dcdafULL);
}

TEST(Seeds, DistinctOverIndices) {
  for (std::uint64_t master : {0ULL, 1ULL, 0xC0FFEEULL, ~0ULL}) {
    std::set<std::uint64_t> seen;
    for (std::uint64_t k = 0; k < 10000; ++k) seen.insert(derive_path_seed(master, k));
    EXPECT_EQ(seen.size(), 10000u);
  }
  for (std::uint64_t s = 0; s < 1000; ++s) {
    EXPECT_NE(derive_path_seed(s, 0), derive_path_seed(s, 1));
    EXPECT_EQ(derive_path_seed(s, 3), derive_path_seed(s, 3));
  }
}

TEST(Xoshiro, GoldenStream) {
  Xoshiro256pp x(0);
  EXPECT_EQ(x(), 0x53175d61490b23dfULL);
  EXPECT_EQ(x(), 0x61da6f3dc380d507ULL);
  EXPECT_EQ(x(), 0x5c0fdf91ec9a7bfcULL);
}

TEST(PathRng, GoldenVariates) {
  PathRng r(derive_path_seed(0, 0));
  EXPECT_EQ(r.normal(), 1.6778678144841941);
  EXPECT_EQ(r.exponential(), 0.33388616351114436);
  EXPECT_EQ(r.normal(), 2.113233193355315);
  EXPECT_EQ(r.uniform_index(9), 9u);
}

TEST(PathRng, Deterministic) {
  PathRng a(42), b(42);
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(a.normal(), b.normal());
}

TEST(PathRng, NormalMoments) {
  PathRng r(derive_path_seed(3, 1));
  const int n = 400000;
  double s = 0, s2 = 0, s4 = 0;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    s += z;
    s2 += z * z;
    s4 += z * z * z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 4.0 / std::sqrt(n));
  EXPECT_NEAR(s2 / n, 1.0, 4.0 * std::sqrt(2.0 / n));
  EXPECT_NEAR(s4 / n, 3.0, 4.0 * std::sqrt(96.0 / n));
}

TEST(PathRng, ExponentialAndIndexRange) {
  PathRng r(9);
  const int n = 200000;
  double s = 0;
  for (int i = 0; i < n; ++i) {
    const double e = r.exponential();
    ASSERT_GE(e, 0.0);
    s += e;
  }
  EXPECT_NEAR(s / n, 1.0, 4.0 / std::sqrt(n));
  std::vector<int> counts(5, 0);
  for (int i = 0; i < 50000; ++i) {
    const auto k = r.uniform_index(4);
    ASSERT_LE(k, 4u);
    ++counts[k];
  }
  for (int c : counts) EXPECT_NEAR(c, 10000, 500);
}
