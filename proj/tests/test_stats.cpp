#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "atlasid/stats.hpp"

using namespace atlasid;

namespace {

std::vector<double> brownian(std::size_t len, std::uint64_t seed, double sigma = 1.0) {
  PathRng rng(seed);
  std::vector<double> z(len);
  double x = 0.0;
  for (double& v : z) {
    x += sigma * rng.normal();
    v = x;
  }
  return z;
}

// Direct double loop over all start points; independent of the estimator.
double naive_variogram(const std::vector<double>& z, std::uint64_t lag, double dt) {
  long double acc = 0;
  std::size_t count = 0;
  for (std::size_t s = 0; s + lag < z.size(); ++s) {
    const long double d = z[s + lag] - z[s];
    acc += d * d;
    ++count;
  }
  return static_cast<double>(acc / count / (lag * dt));
}

}  // namespace

TEST(Lags, Dyadic) {
  EXPECT_EQ(dyadic_lags(1), (std::vector<std::uint64_t>{1}));
  EXPECT_EQ(dyadic_lags(10), (std::vector<std::uint64_t>{1, 2, 4, 8}));
  EXPECT_EQ(dyadic_lags(524288).size(), 20u);
  EXPECT_THROW(dyadic_lags(0), Error);
  const std::vector<std::uint64_t> bad{1, 4, 4};
  EXPECT_THROW(validate_lags(bad), Error);
}

TEST(Variogram, LinearSeries) {
  std::vector<double> z(100);
  for (std::size_t s = 0; s < z.size(); ++s) z[s] = static_cast<double>(s);
  const std::vector<std::uint64_t> lags{1, 2, 4};
  const auto v = estimate_variogram(z, 1.0, lags);
  EXPECT_EQ(v.values, (std::vector<double>{1, 2, 4}));
  EXPECT_EQ(v.meta.steps, 100u);
}

TEST(Variogram, ConstantSeries) {
  const std::vector<double> z(64, 3.25);
  const auto v = estimate_variogram(z, 0.5, dyadic_lags(32));
  for (double x : v.values) EXPECT_EQ(x, 0.0);
  EXPECT_EQ(v.v0, 0.0);
  EXPECT_THROW(relative_variogram(v), Error);
}

TEST(Variogram, MatchesNaiveOracle) {
  const auto z = brownian(5000, 4, 0.3);
  const auto lags = dyadic_lags(2048);
  const auto v = estimate_variogram(z, 0.1, lags);
  for (std::size_t i = 0; i < lags.size(); ++i) {
    EXPECT_NEAR(v.values[i], naive_variogram(z, lags[i], 0.1), 1e-12 * v.values[i]);
  }
}

TEST(Variogram, LagTooLarge) {
  const std::vector<double> z(8, 0.0);
  const std::vector<std::uint64_t> lags{1, 8};
  EXPECT_THROW(estimate_variogram(z, 1.0, lags), Error);
  const std::vector<double> one(1, 0.0);
  const std::vector<std::uint64_t> l1{1};
  EXPECT_THROW(estimate_variogram(one, 1.0, l1), Error);
}

TEST(Variogram, ScaleEquivariance) {
  const auto z = brownian(4096, 8);
  for (double c : {3.0, 0.01, 123.456}) {
    std::vector<double> cz(z);
    for (double& x : cz) x *= c;
    const auto v = estimate_variogram(z, 1.0, dyadic_lags(1024));
    const auto w = estimate_variogram(cz, 1.0, dyadic_lags(1024));
    for (std::size_t i = 0; i < v.values.size(); ++i) {
      EXPECT_NEAR(w.values[i], c * c * v.values[i], 1e-12 * c * c * v.values[i]);
    }
    EXPECT_NEAR(w.v0, c * c * v.v0, 1e-12 * c * c * v.v0);
    const auto rv = relative_variogram(v), rw = relative_variogram(w);
    for (std::size_t i = 0; i < v.values.size(); ++i) {
      EXPECT_NEAR(rw.values[i], rv.values[i], 1e-12 * rv.values[i]);
    }
  }
}

TEST(Variogram, StreamingEqualsBatchBitwise) {
  const auto z = brownian(3000, 12);
  for (const auto& lags : {dyadic_lags(2048), std::vector<std::uint64_t>{3, 5, 100, 2999}}) {
    StreamingVariogram acc(lags, 0.25);
    for (double x : z) acc.push(x);
    EXPECT_EQ(acc.count(), z.size());
    const auto s = acc.finish();
    const auto b = estimate_variogram(z, 0.25, lags);
    EXPECT_EQ(s.values, b.values);
    EXPECT_EQ(s.v0, b.v0);
    EXPECT_EQ(s.meta.steps, b.meta.steps);
  }
  StreamingVariogram short_acc(dyadic_lags(8), 1.0);
  for (int i = 0; i < 8; ++i) short_acc.push(i);
  EXPECT_THROW(short_acc.finish(), Error);
}

TEST(Anchor, FirstLagRuleGivesUnitFirstValue) {
  const auto z = brownian(2000, 5);
  const auto v = estimate_variogram(z, 1.0, dyadic_lags(512), AnchorRule::first_lag);
  EXPECT_EQ(v.v0, v.values.front());
  EXPECT_EQ(relative_variogram(v).values.front(), 1.0);
}

// For V(t) = s (1 - c sqrt t) the two-point rule recovers s exactly.
TEST(Anchor, SqrtExtrapolationIsExactForSqrtLaw) {
  const double s = 2.5e-4, c = 0.7, dt = 1e-3;
  const std::vector<std::uint64_t> lags{1, 2, 4};
  std::vector<double> vals;
  for (auto l : lags) vals.push_back(s * (1.0 - c * std::sqrt(l * dt)));
  EXPECT_NEAR(small_lag_anchor(vals, lags, dt), s, 1e-15);
  EXPECT_EQ(small_lag_anchor(vals, lags, dt, AnchorRule::first_lag), vals[0]);
  // Increasing start: fall back to the first value.
  const std::vector<double> up{1.0, 1.1, 1.2};
  EXPECT_EQ(small_lag_anchor(up, lags, dt), 1.0);
  const std::vector<double> single{0.7};
  EXPECT_EQ(small_lag_anchor(single, lags, dt), 0.7);
}

TEST(Pool, Identities) {
  const auto v = estimate_variogram(brownian(1000, 1), 1.0, dyadic_lags(256));
  const std::vector<Variogram> one{v};
  const auto p1 = pool(one);
  EXPECT_EQ(p1.values, v.values);
  EXPECT_EQ(p1.v0, v.v0);
  EXPECT_FALSE(p1.has_std_errors());

  const std::vector<Variogram> copies(5, v);
  const auto p5 = pool(copies);
  for (std::size_t i = 0; i < v.values.size(); ++i) {
    EXPECT_NEAR(p5.values[i], v.values[i], 1e-15 * v.values[i]);
    EXPECT_EQ(p5.std_errors[i], 0.0);
  }
  EXPECT_EQ(p5.meta.paths, 5u);
  EXPECT_THROW(pool(std::span<const Variogram>{}), Error);
}

TEST(Pool, StdErrorOracle) {
  std::vector<Variogram> vs;
  for (std::uint64_t k = 0; k < 6; ++k) {
    vs.push_back(estimate_variogram(brownian(600, 100 + k), 1.0, dyadic_lags(64)));
  }
  const auto p = pool(vs);
  for (std::size_t i = 0; i < p.lags.size(); ++i) {
    double m = 0;
    for (const auto& v : vs) m += v.values[i];
    m /= 6;
    double ss = 0;
    for (const auto& v : vs) ss += (v.values[i] - m) * (v.values[i] - m);
    EXPECT_NEAR(p.values[i], m, 1e-14 * m);
    EXPECT_NEAR(p.std_errors[i], std::sqrt(ss / 5 / 6), 1e-12 * p.std_errors[i]);
  }
}

TEST(Pool, PermutationInvariantBitwise) {
  std::vector<Variogram> vs;
  for (std::uint64_t k = 0; k < 9; ++k) {
    vs.push_back(estimate_variogram(brownian(700, 300 + k), 1.0, dyadic_lags(128)));
  }
  const auto ref = pool(vs);
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 20; ++trial) {
    std::shuffle(vs.begin(), vs.end(), gen);
    const auto p = pool(vs);
    EXPECT_EQ(p.values, ref.values);
    EXPECT_EQ(p.std_errors, ref.std_errors);
    EXPECT_EQ(p.v0, ref.v0);
  }
}

TEST(Pool, RejectsMismatch) {
  auto a = estimate_variogram(brownian(100, 1), 1.0, dyadic_lags(32));
  auto b = estimate_variogram(brownian(100, 2), 1.0, dyadic_lags(16));
  EXPECT_THROW(pool(std::vector<Variogram>{a, b}), Error);
  b = estimate_variogram(brownian(100, 2), 0.5, dyadic_lags(32));
  EXPECT_THROW(pool(std::vector<Variogram>{a, b}), Error);
  b = a;
  b.meta.params = "depth=2";
  EXPECT_THROW(pool(std::vector<Variogram>{a, b}), Error);
}

// Brownian motion has V = 1 at every lag.
TEST(Variogram, BrownianEnsembleIsFlat) {
  std::vector<Variogram> vs;
  for (std::uint64_t k = 0; k < 32; ++k) {
    vs.push_back(estimate_variogram(brownian(1 << 18, derive_path_seed(17, k)), 1.0,
                                    dyadic_lags(1 << 16)));
  }
  const auto p = pool(vs);
  for (std::size_t i = 0; i < p.lags.size(); ++i) {
    EXPECT_LT(std::abs(p.values[i] - 1.0), 4.0 * p.std_errors[i]) << "lag " << p.lags[i];
  }
}

TEST(MeanCheck, Targets) {
  TopSeries s;
  s.params = make_simple({10, 1e-4, 1e-4});
  s.mean_values = std::vector<double>(100, 0.0);
  s.values = *s.mean_values;
  EXPECT_DOUBLE_EQ(mean_process_check(s, 16).target, 1e-5);
  s.params = canonical(1);
  EXPECT_DOUBLE_EQ(mean_process_check(s, 16).target, 1.0);
  EXPECT_THROW(mean_process_check(s, 60), Error);
  s.mean_values.reset();
  EXPECT_THROW(mean_process_check(s, 16), Error);
}

TEST(MeanCheck, SimulatedMeanIsScaledBrownian) {
  SimConfig cfg;
  cfg.steps = 200000;
  cfg.burn_in = 1000;
  cfg.record_mean = true;
  cfg.master_seed = 8;
  const auto s = simulate(make_simple({10, 1e-4, 1e-4}), cfg, 0);
  for (std::uint64_t w : {16u, 64u, 256u}) {
    const auto rep = mean_process_check(s, w);
    EXPECT_LT(std::abs(rep.z_score), 3.5) << "window " << w;
    EXPECT_EQ(rep.windows, (cfg.steps - 1) / w);
  }
}
