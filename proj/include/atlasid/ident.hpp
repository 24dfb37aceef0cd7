#pragma once

// Identification of a simple Atlas model (depth n, growth rate g, variance
// rate sigma2) from the variogram of its top-ranked process.
//
// sigma2 is the small-lag anchor of the variogram. The depth comes from the
// large-lag level of the relative variogram. The growth rate comes from the
// time scale a = g^2 / sigma2 that maps the observed relative variogram onto
// the canonical depth-n curve, which is built once by simulation.

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <span>
#include <utility>
#include <vector>

#include "atlasid/engine.hpp"
#include "atlasid/error.hpp"
#include "atlasid/model.hpp"
#include "atlasid/stats.hpp"

namespace atlasid {

struct CurveQuality {
  std::size_t paths = 16;
  std::uint64_t steps = std::uint64_t{1} << 22;
  double dt = 1e-3;
  std::uint64_t burn_in = 100000;
  std::uint64_t seed = 0xC0FFEE;
  std::size_t threads = 0;  // 0 = hardware concurrency; does not affect output

  friend bool operator==(const CurveQuality& a, const CurveQuality& b) {
    return a.paths == b.paths && a.steps == b.steps && a.dt == b.dt &&
           a.burn_in == b.burn_in && a.seed == b.seed;
  }
};

/// Piecewise cubic Hermite interpolant with Fritsch-Butland slopes. Each
/// piece is monotone, so a value never leaves the range of the two samples
/// that bracket it.
class MonotoneInterpolant {
 public:
  MonotoneInterpolant() = default;
  MonotoneInterpolant(std::vector<double> x, std::vector<double> y)
      : x_(std::move(x)), y_(std::move(y)) {
    if (x_.size() != y_.size() || x_.size() < 2) {
      throw Error(Errc::invalid_argument, "interpolant needs >= 2 samples");
    }
    for (std::size_t i = 1; i < x_.size(); ++i) {
      if (!(x_[i] > x_[i - 1])) {
        throw Error(Errc::invalid_argument, "grid must be strictly increasing",
                    i);
      }
    }
    const std::size_t m = x_.size();
    std::vector<double> h(m - 1), delta(m - 1);
    for (std::size_t i = 0; i + 1 < m; ++i) {
      h[i] = x_[i + 1] - x_[i];
      delta[i] = (y_[i + 1] - y_[i]) / h[i];
    }
    d_.assign(m, 0.0);
    d_.front() = delta.front();
    d_.back() = delta.back();
    for (std::size_t k = 1; k + 1 < m; ++k) {
      const double a = delta[k - 1], b = delta[k];
      if (a * b <= 0.0) continue;
      const double w1 = 2.0 * h[k] + h[k - 1];
      const double w2 = h[k] + 2.0 * h[k - 1];
      d_[k] = (w1 + w2) / (w1 / a + w2 / b);
    }
  }

  double lo() const { return x_.front(); }
  double hi() const { return x_.back(); }
  bool covers(double x) const { return x >= lo() && x <= hi(); }

  double operator()(double x) const {
    if (!covers(x)) throw Error(Errc::out_of_range, "outside interpolant support");
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    std::size_t i = static_cast<std::size_t>(it - x_.begin());
    i = std::clamp<std::size_t>(i, 1, x_.size() - 1) - 1;
    const double h = x_[i + 1] - x_[i];
    const double s = (x - x_[i]) / h;
    const double s2 = s * s, s3 = s2 * s;
    const double v = (2 * s3 - 3 * s2 + 1) * y_[i] + (s3 - 2 * s2 + s) * h * d_[i] +
                     (-2 * s3 + 3 * s2) * y_[i + 1] + (s3 - s2) * h * d_[i + 1];
    const double lo_y = std::min(y_[i], y_[i + 1]);
    const double hi_y = std::max(y_[i], y_[i + 1]);
    assert(v >= lo_y - 1e-12 * (1.0 + std::abs(lo_y)) &&
           v <= hi_y + 1e-12 * (1.0 + std::abs(hi_y)));
    return std::clamp(v, lo_y, hi_y);
  }

 private:
  std::vector<double> x_, y_, d_;
};

/// Pooled relative variogram of the canonical model of depth n on a log-lag
/// grid (natural log of lag time).
struct CanonicalCurve {
  std::size_t n = 0;
  std::vector<double> log_lags;
  std::vector<double> rel_values;
  std::vector<double> rel_std_errors;
  CurveQuality provenance;

  MonotoneInterpolant interpolant() const {
    return MonotoneInterpolant(log_lags, rel_values);
  }
};

struct DepthEstimate {
  std::size_t n_hat = 1;
  bool plateau_ok = false;
  double asymptote = 1.0;  // fitted large-lag level of the relative variogram
};

/// Fits rv(t) = alpha + B / t over the last four lags (weights 1/t) and
/// returns n_hat = round(1 / alpha). The 1/t term is the stationary
/// fluctuation of X(1) - Xbar, which is independent of the mean process.
/// plateau_ok: the last three values differ pairwise by less than
/// max(2 stderr, 0.1 / n_hat).
inline DepthEstimate estimate_depth(const Variogram& rv) {
  constexpr std::size_t kTail = 4;
  const std::size_t m = rv.values.size();
  if (m < kTail) throw Error(Errc::too_few_lags, "depth estimate needs >= 4 lags");
  if (!(rv.values.back() > 0.0)) {
    throw Error(Errc::invalid_argument, "relative variogram tail is not positive");
  }

  double sw = 0, su = 0, suu = 0, sy = 0, suy = 0;
  for (std::size_t i = m - kTail; i < m; ++i) {
    const double t = rv.lag_time(i);
    const double u = 1.0 / t;
    const double w = 1.0 / t;
    sw += w;
    su += w * u;
    suu += w * u * u;
    sy += w * rv.values[i];
    suy += w * u * rv.values[i];
  }
  const double det = sw * suu - su * su;
  const double alpha = (suu * sy - su * suy) / det;
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw Error(Errc::invalid_argument,
                "relative variogram has no positive large-lag level");
  }

  DepthEstimate est;
  est.asymptote = alpha;
  est.n_hat = static_cast<std::size_t>(std::max(1.0, std::round(1.0 / alpha)));

  const double floor_tol = 0.1 / static_cast<double>(est.n_hat);
  est.plateau_ok = true;
  for (std::size_t i = m - 3; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      double se = 0.0;
      if (rv.has_std_errors()) se = std::max(rv.std_errors[i], rv.std_errors[j]);
      if (!(std::abs(rv.values[i] - rv.values[j]) < std::max(2.0 * se, floor_tol))) {
        est.plateau_ok = false;
      }
    }
  }
  return est;
}

inline double estimate_sigma2(const Variogram& v) {
  if (!(v.v0 > 0.0)) throw Error(Errc::invalid_argument, "variogram anchor is unset");
  return v.v0;
}

/// Simulates the canonical model of depth n and pools the per-path relative
/// variograms on dyadic lags. Deterministic given the quality spec.
inline CanonicalCurve build_canonical_curve(std::size_t n,
                                            const CurveQuality& q = {}) {
  if (n < 2) throw Error(Errc::invalid_argument, "canonical curve needs depth >= 2");
  SimConfig cfg;
  cfg.dt = q.dt;
  cfg.steps = q.steps;
  cfg.burn_in = q.burn_in;
  cfg.paths = q.paths;
  cfg.master_seed = q.seed;
  cfg.init_mode = InitMode::exponential_gaps;
  cfg.validate();
  if (q.steps < 8) throw Error(Errc::invalid_argument, "curve needs >= 8 steps");

  const AtlasParams p = canonical(n);
  const auto lags = dyadic_lags(q.steps - 1);
  auto per_path = parallel_map(
      q.paths,
      [&](std::size_t k) {
        StreamingVariogram acc(lags, cfg.dt);
        simulate_into(p, cfg, k, [&](double top, double) { acc.push(top); });
        return relative_variogram(acc.finish());
      },
      q.threads);
  const Variogram pooled = pool(per_path);

  CanonicalCurve c;
  c.n = n;
  c.provenance = q;
  for (std::size_t i = 0; i < pooled.lags.size(); ++i) {
    c.log_lags.push_back(std::log(pooled.lag_time(i)));
  }
  c.rel_values = pooled.values;
  c.rel_std_errors = pooled.std_errors;
  return c;
}

struct TimeScaleFit {
  double a_hat = 1.0;
  double fit_rmse = 0.0;
  std::size_t lags_used = 0;
};

namespace detail {
inline constexpr std::size_t kMinFitLags = 3;

/// Mean squared residual of rv(t) against curve(a t) over the lags whose
/// image a t falls inside the curve support; +inf with fewer than 3.
struct TimeScaleObjective {
  std::vector<double> log_t;
  std::vector<double> values;
  const MonotoneInterpolant* curve;

  std::pair<double, std::size_t> operator()(double log_a) const {
    double sum = 0.0;
    std::size_t used = 0;
    for (std::size_t i = 0; i < log_t.size(); ++i) {
      const double x = log_a + log_t[i];
      if (!curve->covers(x)) continue;
      const double r = values[i] - (*curve)(x);
      sum += r * r;
      ++used;
    }
    if (used < kMinFitLags) {
      return {std::numeric_limits<double>::infinity(), used};
    }
    return {sum / static_cast<double>(used), used};
  }
};
}  // namespace detail

/// Golden-section minimum of f on [lo, hi] to within tol in x.
template <class F>
double golden_section_minimize(F&& f, double lo, double hi, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = f(c), fd = f(d);
  while (hi - lo > tol) {
    if (fc <= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = f(d);
    }
  }
  return 0.5 * (lo + hi);
}

/// Least-squares time scale a with rv(t) ~ curve(a t), searched over log a
/// in [log 1e-8, log 1e2]: a coarse scan brackets the minimum, then golden
/// section refines it to 1e-4 in log a. Only the lag times of rv matter.
inline TimeScaleFit fit_time_scale(const Variogram& rv, const CanonicalCurve& curve) {
  const MonotoneInterpolant interp = curve.interpolant();
  detail::TimeScaleObjective obj;
  obj.curve = &interp;
  for (std::size_t i = 0; i < rv.values.size(); ++i) {
    obj.log_t.push_back(std::log(rv.lag_time(i)));
    obj.values.push_back(rv.values[i]);
  }

  const double lo = std::log(1e-8), hi = std::log(1e2);
  constexpr std::size_t kGrid = 96;
  const double step = (hi - lo) / static_cast<double>(kGrid);
  std::size_t best = kGrid + 1;
  double best_val = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i <= kGrid; ++i) {
    const double v = obj(lo + step * static_cast<double>(i)).first;
    if (v < best_val) {
      best_val = v;
      best = i;
    }
  }
  if (best > kGrid) {
    throw Error(Errc::too_few_lags,
                "fewer than 3 lags overlap the canonical curve at any time scale");
  }
  if (best == 0 || best == kGrid) {
    throw Error(Errc::no_bracket, "time-scale minimum lies on the search boundary");
  }

  const double left = lo + step * static_cast<double>(best - 1);
  const double right = lo + step * static_cast<double>(best + 1);
  const double log_a = golden_section_minimize(
      [&](double x) { return obj(x).first; }, left, right, 1e-4);
  auto [mse, used] = obj(log_a);
  if (!std::isfinite(mse)) {
    throw Error(Errc::too_few_lags, "fewer than 3 lags overlap the canonical curve");
  }
  return {std::exp(log_a), std::sqrt(mse), used};
}

struct IdentificationResult {
  std::size_t n_hat = 1;
  double sigma2_hat = 0.0;
  double g_hat = 0.0;
  double a_hat = 0.0;
  double fit_rmse = 0.0;
  bool plateau_ok = false;
  double asymptote = 1.0;
};

using CurveProvider =
    std::function<std::shared_ptr<const CanonicalCurve>(std::size_t n)>;

/// Curves by depth, built on first use. Concurrent readers share a lock;
/// building takes it exclusively. An optional loader/saver pair lets the
/// CLI persist curves between runs.
class CurveCache {
 public:
  using Loader = std::function<std::shared_ptr<const CanonicalCurve>(
      std::size_t n, const CurveQuality&)>;
  using Saver = std::function<void(const CanonicalCurve&)>;

  explicit CurveCache(CurveQuality quality = {}, Loader loader = {},
                      Saver saver = {})
      : quality_(quality), loader_(std::move(loader)), saver_(std::move(saver)) {}

  std::shared_ptr<const CanonicalCurve> get(std::size_t n) {
    {
      std::shared_lock lock(mutex_);
      if (auto it = curves_.find(n); it != curves_.end()) return it->second;
    }
    std::unique_lock lock(mutex_);
    if (auto it = curves_.find(n); it != curves_.end()) return it->second;
    std::shared_ptr<const CanonicalCurve> curve;
    if (loader_) curve = loader_(n, quality_);
    if (!curve) {
      curve = std::make_shared<const CanonicalCurve>(build_canonical_curve(n, quality_));
      if (saver_) saver_(*curve);
    }
    curves_.emplace(n, curve);
    return curve;
  }

  void insert(std::shared_ptr<const CanonicalCurve> curve) {
    std::unique_lock lock(mutex_);
    curves_[curve->n] = std::move(curve);
  }

  const CurveQuality& quality() const noexcept { return quality_; }

  CurveProvider provider() {
    return [this](std::size_t n) { return get(n); };
  }

 private:
  CurveQuality quality_;
  Loader loader_;
  Saver saver_;
  std::shared_mutex mutex_;
  std::map<std::size_t, std::shared_ptr<const CanonicalCurve>> curves_;
};

/// Identifies (n, sigma2, g) of a simple Atlas model from the variogram of
/// its top-ranked process. A result with plateau_ok = false is still
/// returned; depth 1 short-circuits to g = 0.
inline IdentificationResult identify(const Variogram& v, const CurveProvider& curves) {
  IdentificationResult r;
  r.sigma2_hat = estimate_sigma2(v);
  const Variogram rv = relative_variogram(v);
  const DepthEstimate depth = estimate_depth(rv);
  r.n_hat = depth.n_hat;
  r.plateau_ok = depth.plateau_ok;
  r.asymptote = depth.asymptote;
  if (r.n_hat == 1) return r;

  const auto curve = curves(r.n_hat);
  const TimeScaleFit fit = fit_time_scale(rv, *curve);
  r.a_hat = fit.a_hat;
  r.fit_rmse = fit.fit_rmse;
  r.g_hat = growth_from_time_scale(r.a_hat, r.sigma2_hat);
  return r;
}

inline IdentificationResult identify(const Variogram& v, CurveCache& cache) {
  return identify(v, cache.provider());
}

}  // namespace atlasid
