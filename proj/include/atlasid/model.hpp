#pragma once

// Atlas model parameters: rank-indexed drifts g[0..n-1] (index 0 = top rank)
// and a common variance rate sigma2, plus the two exact parameter maps
// (value scaling and time change) and the reduction of a simple model to the
// canonical model of the same depth.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "atlasid/error.hpp"

namespace atlasid {

class AtlasParams {
 public:
  /// Validates and builds. Throws Error with SumNotZero,
  /// PartialSumNonNegative (index = offending prefix length m) or
  /// NonPositiveVariance.
  static AtlasParams make(std::vector<double> g, double sigma2);

  std::size_t n() const noexcept { return g_.size(); }
  std::span<const double> g() const noexcept { return g_; }
  /// Drift of rank k, 0-based (0 = top).
  double g(std::size_t k) const { return g_.at(k); }
  double sigma2() const noexcept { return sigma2_; }
  double sigma() const noexcept { return std::sqrt(sigma2_); }

  friend bool operator==(const AtlasParams&, const AtlasParams&) = default;

 private:
  AtlasParams(std::vector<double> g, double sigma2)
      : g_(std::move(g)), sigma2_(sigma2) {}

  std::vector<double> g_;
  double sigma2_;
};

struct SimpleAtlasSpec {
  std::size_t n = 1;
  double g = 0.0;
  double sigma2 = 1.0;
};

struct TransformFactors {
  double a = 1.0;  // time change
  double c = 1.0;  // value scale
};

inline double sum_zero_tolerance(std::span<const double> g) {
  double m = 1.0;
  for (double v : g) m = std::max(m, std::abs(v));
  return 1e-12 * m;
}

inline AtlasParams AtlasParams::make(std::vector<double> g, double sigma2) {
  if (g.empty()) {
    throw Error(Errc::invalid_argument, "drift vector must be nonempty");
  }
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!std::isfinite(g[k])) {
      throw Error(Errc::non_finite, "drift g[" + std::to_string(k + 1) +
                                        "] is not finite", k);
    }
  }
  if (!std::isfinite(sigma2)) {
    throw Error(Errc::non_finite, "sigma2 is not finite");
  }

  double prefix = 0.0;
  for (std::size_t m = 1; m < g.size(); ++m) {
    prefix += g[m - 1];
    if (!(prefix < 0.0)) {
      throw Error(Errc::partial_sum_non_negative,
                  "partial sum g[1]+...+g[" + std::to_string(m) +
                      "] must be negative",
                  m);
    }
  }
  prefix += g.back();
  if (std::abs(prefix) > sum_zero_tolerance(g)) {
    throw Error(Errc::sum_not_zero, "drifts must sum to zero");
  }
  if (!(sigma2 > 0.0)) {
    throw Error(Errc::non_positive_variance, "sigma2 must be positive");
  }
  return AtlasParams(std::move(g), sigma2);
}

inline AtlasParams make_atlas_params(std::vector<double> g, double sigma2) {
  return AtlasParams::make(std::move(g), sigma2);
}

/// g[k] = -g for k < n-1, g[n-1] = (n-1) g. For n = 1 the growth rate is
/// ignored and the single drift is 0.
inline AtlasParams make_simple(const SimpleAtlasSpec& spec) {
  if (spec.n < 1) throw Error(Errc::invalid_argument, "depth must be >= 1");
  if (spec.n == 1) return AtlasParams::make({0.0}, spec.sigma2);
  if (!(spec.g > 0.0)) {
    throw Error(Errc::invalid_argument, "growth rate g must be positive");
  }
  std::vector<double> g(spec.n, -spec.g);
  g.back() = static_cast<double>(spec.n - 1) * spec.g;
  return AtlasParams::make(std::move(g), spec.sigma2);
}

/// Canonical model of depth n: drift n*1{bottom} - 1, unit variance.
inline AtlasParams canonical(std::size_t n) {
  if (n < 1) throw Error(Errc::invalid_argument, "depth must be >= 1");
  if (n == 1) return AtlasParams::make({0.0}, 1.0);
  std::vector<double> g(n, -1.0);
  g.back() = static_cast<double>(n - 1);
  return AtlasParams::make(std::move(g), 1.0);
}

namespace detail {
inline void require_positive_factor(double a) {
  if (!(a > 0.0) || !std::isfinite(a)) {
    throw Error(Errc::invalid_argument, "factor must be positive and finite");
  }
}

inline AtlasParams map_params(const AtlasParams& p, double drift_factor,
                              double variance_factor) {
  std::vector<double> g(p.g().begin(), p.g().end());
  for (double& v : g) v *= drift_factor;
  return AtlasParams::make(std::move(g), p.sigma2() * variance_factor);
}
}  // namespace detail

/// (g, sigma2) -> (a g, a^2 sigma2). The resulting model is a * X.
inline AtlasParams scale_params(const AtlasParams& p, double a) {
  detail::require_positive_factor(a);
  return detail::map_params(p, a, a * a);
}

/// (g, sigma2) -> (a g, a sigma2). The resulting model behaves like X(a t).
inline AtlasParams time_change_params(const AtlasParams& p, double a) {
  detail::require_positive_factor(a);
  return detail::map_params(p, a, a);
}

/// Factors with scale_params(time_change_params(canonical(n), a), c) equal to
/// make_simple(spec): a = g^2 / sigma2, c = sigma2 / g.
inline TransformFactors canonical_reduction(const SimpleAtlasSpec& spec) {
  if (spec.n < 2) {
    throw Error(Errc::invalid_argument,
                "canonical reduction needs depth >= 2");
  }
  if (!(spec.g > 0.0) || !(spec.sigma2 > 0.0)) {
    throw Error(Errc::invalid_argument, "g and sigma2 must be positive");
  }
  return {spec.g * spec.g / spec.sigma2, spec.sigma2 / spec.g};
}

/// Recovers the growth rate of a simple model from its canonical time scale.
inline double growth_from_time_scale(double a, double sigma2) {
  return std::sqrt(a * sigma2);
}

/// Returns the growth rate if p is a simple Atlas model (all ranks but the
/// bottom share the drift -g), nothing otherwise.
inline std::optional<double> simple_growth(const AtlasParams& p) {
  if (p.n() == 1) return 0.0;
  const double g = -p.g(0);
  for (std::size_t k = 1; k + 1 < p.n(); ++k) {
    if (p.g(k) != p.g(0)) return std::nullopt;
  }
  return g;
}

}  // namespace atlasid
