#pragma once

// Variogram estimation V(t) = E[(Z(t) - Z(0))^2 / t] on sampled paths.
//
// All overlapping start points are used at every lag. The batch estimator
// and the streaming accumulator perform the same additions in the same
// order, so they agree bitwise.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "atlasid/config.hpp"
#include "atlasid/engine.hpp"
#include "atlasid/error.hpp"

namespace atlasid {

struct VariogramMeta {
  std::string params;  // key=value echo, empty when unknown
  std::size_t paths = 1;
  std::uint64_t steps = 0;
  std::uint64_t burn_in = 0;
  std::uint64_t seed = 0;
};

struct Variogram {
  std::vector<std::uint64_t> lags;  // in steps, strictly increasing, >= 1
  double dt = 1.0;
  std::vector<double> values;
  double v0 = 0.0;                  // 0 when unset
  std::vector<double> std_errors;   // empty unless pooled over >= 2 paths
  VariogramMeta meta;

  double lag_time(std::size_t i) const {
    return static_cast<double>(lags[i]) * dt;
  }
  bool has_std_errors() const { return !std_errors.empty(); }
};

/// 1, 2, 4, ..., largest power of two <= max_lag.
inline std::vector<std::uint64_t> dyadic_lags(std::uint64_t max_lag) {
  if (max_lag < 1) throw Error(Errc::invalid_argument, "max lag must be >= 1");
  std::vector<std::uint64_t> lags;
  for (std::uint64_t l = 1; l <= max_lag && l != 0; l <<= 1) lags.push_back(l);
  return lags;
}

inline void validate_lags(std::span<const std::uint64_t> lags) {
  if (lags.empty()) throw Error(Errc::invalid_argument, "lag list is empty");
  if (lags.front() < 1) throw Error(Errc::invalid_argument, "lags must be >= 1");
  for (std::size_t i = 1; i < lags.size(); ++i) {
    if (lags[i] <= lags[i - 1]) {
      throw Error(Errc::invalid_argument, "lags must be strictly increasing", i);
    }
  }
}

/// How the small-lag anchor v0 ~ V(0) is taken from the first lags.
/// For a ranked process V(t) ~ V(0) (1 - c sqrt(t)) near zero, so the
/// first-lag value is biased low by O(sqrt(dt)); sqrt_extrapolation removes
/// the leading term using the first two lags whenever the variogram
/// decreases there, and falls back to the first-lag value otherwise.
enum class AnchorRule { first_lag, sqrt_extrapolation };

inline double small_lag_anchor(std::span<const double> values,
                               std::span<const std::uint64_t> lags, double dt,
                               AnchorRule rule = AnchorRule::sqrt_extrapolation) {
  if (values.empty()) return 0.0;
  const double v1 = values[0];
  if (rule == AnchorRule::first_lag || values.size() < 2) return v1;
  const double v2 = values[1];
  if (!(v1 >= v2)) return v1;
  const double r1 = std::sqrt(static_cast<double>(lags[0]) * dt);
  const double r2 = std::sqrt(static_cast<double>(lags[1]) * dt);
  const double v0 = (r2 * v1 - r1 * v2) / (r2 - r1);
  return v0 > 0.0 ? v0 : v1;
}

namespace detail {
inline double finish_lag(double sum_sq, std::uint64_t count, std::uint64_t lag,
                         double dt) {
  return sum_sq / static_cast<double>(count) /
         (static_cast<double>(lag) * dt);
}
}  // namespace detail

inline Variogram estimate_variogram(
    std::span<const double> z, double dt, std::span<const std::uint64_t> lags,
    AnchorRule rule = AnchorRule::sqrt_extrapolation) {
  validate_lags(lags);
  if (z.size() < 2) throw Error(Errc::out_of_range, "series too short");
  if (lags.back() >= z.size()) {
    throw Error(Errc::out_of_range,
                "lag " + std::to_string(lags.back()) +
                    " does not fit a series of length " +
                    std::to_string(z.size()));
  }
  Variogram v;
  v.lags.assign(lags.begin(), lags.end());
  v.dt = dt;
  v.values.reserve(lags.size());
  for (const std::uint64_t lag : lags) {
    const std::size_t count = z.size() - lag;
    double acc = 0.0;
    for (std::size_t s = 0; s < count; ++s) {
      const double d = z[s + lag] - z[s];
      acc += d * d;
    }
    v.values.push_back(detail::finish_lag(acc, count, lag, dt));
  }
  v.v0 = small_lag_anchor(v.values, v.lags, dt, rule);
  v.meta.steps = z.size();
  return v;
}

inline Variogram estimate_variogram(
    const TopSeries& series, std::span<const std::uint64_t> lags,
    AnchorRule rule = AnchorRule::sqrt_extrapolation) {
  Variogram v = estimate_variogram(series.values, series.dt, lags, rule);
  v.meta.params = params_echo(series.params);
  v.meta.seed = series.seed;
  return v;
}

/// Online version of estimate_variogram: keeps only the last max-lag values
/// in a ring buffer.
class StreamingVariogram {
 public:
  StreamingVariogram(std::vector<std::uint64_t> lags, double dt)
      : lags_(std::move(lags)), dt_(dt), sums_(lags_.size(), 0.0) {
    validate_lags(lags_);
    std::size_t cap = 1;
    while (cap <= lags_.back()) cap <<= 1;
    ring_.assign(cap, 0.0);
    mask_ = cap - 1;
  }

  void push(double z) {
    for (std::size_t i = 0; i < lags_.size(); ++i) {
      if (lags_[i] > count_) break;
      const double d = z - ring_[(count_ - lags_[i]) & mask_];
      sums_[i] += d * d;
    }
    ring_[count_ & mask_] = z;
    ++count_;
  }

  std::uint64_t count() const noexcept { return count_; }

  Variogram finish(AnchorRule rule = AnchorRule::sqrt_extrapolation) const {
    if (count_ < 2 || lags_.back() >= count_) {
      throw Error(Errc::out_of_range, "series too short for the lag grid");
    }
    Variogram v;
    v.lags = lags_;
    v.dt = dt_;
    for (std::size_t i = 0; i < lags_.size(); ++i) {
      v.values.push_back(
          detail::finish_lag(sums_[i], count_ - lags_[i], lags_[i], dt_));
    }
    v.v0 = small_lag_anchor(v.values, v.lags, dt_, rule);
    v.meta.steps = count_;
    return v;
  }

 private:
  std::vector<std::uint64_t> lags_;
  double dt_;
  std::vector<double> sums_;
  std::vector<double> ring_;
  std::uint64_t mask_ = 0;
  std::uint64_t count_ = 0;
};

/// Divides by the small-lag anchor; standard errors are divided alike
/// (the anchor is treated as a constant).
inline Variogram relative_variogram(const Variogram& v) {
  if (!(v.v0 > 0.0)) {
    throw Error(Errc::invalid_argument, "variogram anchor v0 is zero or unset");
  }
  Variogram r = v;
  for (double& x : r.values) x /= v.v0;
  for (double& e : r.std_errors) e /= v.v0;
  r.v0 = 1.0;
  return r;
}

namespace detail {
/// Sum in sorted order so the result does not depend on input order.
inline double ordered_sum(std::vector<double>& xs) {
  std::sort(xs.begin(), xs.end());
  double s = 0.0;
  for (double x : xs) s += x;
  return s;
}
}  // namespace detail

/// Across-path mean per lag; std error = sample std deviation / sqrt(paths).
inline Variogram pool(std::span<const Variogram> vs) {
  if (vs.empty()) throw Error(Errc::invalid_argument, "nothing to pool");
  const Variogram& first = vs.front();
  for (const auto& v : vs) {
    if (v.lags != first.lags || v.dt != first.dt ||
        v.meta.params != first.meta.params) {
      throw Error(Errc::invalid_argument,
                  "pooled variograms must share lags, dt and params");
    }
  }
  const std::size_t r = vs.size();
  Variogram out;
  out.lags = first.lags;
  out.dt = first.dt;
  out.meta = first.meta;
  out.meta.paths = 0;
  out.meta.steps = 0;
  for (const auto& v : vs) {
    out.meta.paths += v.meta.paths;
    out.meta.steps = std::max(out.meta.steps, v.meta.steps);
  }

  std::vector<double> column(r);
  const double rd = static_cast<double>(r);
  for (std::size_t i = 0; i < out.lags.size(); ++i) {
    for (std::size_t j = 0; j < r; ++j) column[j] = vs[j].values[i];
    const double mean = detail::ordered_sum(column) / rd;
    out.values.push_back(mean);
    if (r >= 2 && column.front() == column.back()) {
      out.std_errors.push_back(0.0);  // identical inputs, avoid rounding noise
    } else if (r >= 2) {
      for (double& c : column) c = (c - mean) * (c - mean);
      const double var = detail::ordered_sum(column) / (rd - 1.0);
      out.std_errors.push_back(std::sqrt(var / rd));
    }
  }
  for (std::size_t j = 0; j < r; ++j) column[j] = vs[j].v0;
  out.v0 = detail::ordered_sum(column) / rd;
  return out;
}

struct MeanCheckReport {
  double estimate = 0.0;
  double target = 0.0;
  double z_score = 0.0;
  std::size_t windows = 0;
};

/// Compares disjoint-window estimates of E[(Xbar(s+w) - Xbar(s))^2 / (w dt)]
/// with sigma2 / n.
inline MeanCheckReport mean_process_check(const TopSeries& series,
                                          std::uint64_t window) {
  if (!series.mean_values) {
    throw Error(Errc::invalid_argument, "series has no mean process");
  }
  if (window < 1) throw Error(Errc::invalid_argument, "window must be >= 1");
  const auto& m = *series.mean_values;
  const std::size_t windows = m.empty() ? 0 : (m.size() - 1) / window;
  if (windows < 2) {
    throw Error(Errc::out_of_range, "fewer than 2 windows fit the series");
  }
  const double scale = static_cast<double>(window) * series.dt;
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t j = 0; j < windows; ++j) {
    const double d = m[(j + 1) * window] - m[j * window];
    const double e = d * d / scale;
    sum += e;
    sum_sq += e * e;
  }
  const double w = static_cast<double>(windows);
  MeanCheckReport rep;
  rep.windows = windows;
  rep.estimate = sum / w;
  rep.target = series.params.sigma2() / static_cast<double>(series.params.n());
  const double var = std::max(0.0, (sum_sq - w * rep.estimate * rep.estimate) /
                                       (w - 1.0));
  const double se = std::sqrt(var / w);
  rep.z_score = se > 0.0 ? (rep.estimate - rep.target) / se : 0.0;
  return rep;
}

}  // namespace atlasid
