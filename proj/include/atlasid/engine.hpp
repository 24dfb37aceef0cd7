#pragma once

// Euler-Maruyama simulation of an Atlas model with rank-dependent drift.
//
// Ranks are assigned by sorting values in descending order with ties going
// to the lower particle index. Each step applies
//   x_i <- x_i + g[rank(i)] dt + sigma sqrt(dt) xi_i
// with one standard normal xi_i per particle, drawn in particle order from
// the path's own stream.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "atlasid/error.hpp"
#include "atlasid/model.hpp"
#include "atlasid/rng.hpp"

namespace atlasid {

enum class InitMode { zeros, exponential_gaps };

inline const char* to_string(InitMode m) {
  return m == InitMode::zeros ? "zeros" : "exponential_gaps";
}

inline InitMode parse_init_mode(const std::string& s) {
  if (s == "zeros") return InitMode::zeros;
  if (s == "exponential_gaps") return InitMode::exponential_gaps;
  throw Error(Errc::parse, "unknown init mode '" + s + "'");
}

struct SimConfig {
  double dt = 1.0;
  std::uint64_t steps = 1;
  std::uint64_t burn_in = 100000;
  InitMode init_mode = InitMode::exponential_gaps;
  std::size_t paths = 1;
  std::uint64_t master_seed = 0;
  bool record_mean = false;

  void validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
      throw Error(Errc::invalid_argument, "dt must be > 0");
    }
    if (steps < 1) throw Error(Errc::invalid_argument, "steps must be >= 1");
    if (paths < 1) throw Error(Errc::invalid_argument, "paths must be >= 1");
  }
};

struct ParticleState {
  std::vector<double> x;
  double t = 0.0;
};

struct TopSeries {
  double dt = 1.0;
  std::vector<double> values;
  std::optional<std::vector<double>> mean_values;
  AtlasParams params = canonical(1);
  std::uint64_t seed = 0;
};

/// True when particle a outranks particle b.
inline bool outranks(std::span<const double> x, std::size_t a, std::size_t b) {
  return x[a] > x[b] || (x[a] == x[b] && a < b);
}

/// order[k] = index of the particle holding rank k (0 = top).
inline std::vector<std::size_t> rank_order(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [x](std::size_t a, std::size_t b) {
    return outranks(x, a, b);
  });
  return order;
}

/// Fisher-Yates shuffle driven by the path stream.
inline void shuffle(std::span<std::size_t> v, PathRng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[rng.uniform_index(i - 1)]);
  }
}

/// Initial configuration with zero sum. In exponential_gaps mode the gap
/// between ranks k and k+1 is exponential with rate -2 (g[1]+...+g[k]) /
/// sigma2 and ranks are assigned to particles uniformly at random.
inline ParticleState init_state(const AtlasParams& p, const SimConfig& cfg,
                                PathRng& rng) {
  const std::size_t n = p.n();
  ParticleState s{std::vector<double>(n, 0.0), 0.0};
  if (cfg.init_mode == InitMode::zeros || n == 1) return s;

  std::vector<double> by_rank(n, 0.0);
  double prefix = 0.0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    prefix += p.g(k);
    const double mean_gap = p.sigma2() / (-2.0 * prefix);
    by_rank[k + 1] = by_rank[k] - rng.exponential() * mean_gap;
  }
  std::vector<std::size_t> owner(n);
  std::iota(owner.begin(), owner.end(), std::size_t{0});
  shuffle(owner, rng);

  double sum = 0.0;
  for (double v : by_rank) sum += v;
  const double mean = sum / static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) s.x[owner[k]] = by_rank[k] - mean;
  return s;
}

/// One Euler-Maruyama step with a full re-rank. Reference implementation
/// for Stepper, which produces bitwise identical states.
inline ParticleState step(const ParticleState& state, const AtlasParams& p,
                          double dt, std::span<const double> noise) {
  const std::size_t n = p.n();
  if (state.x.size() != n || noise.size() != n) {
    throw Error(Errc::invalid_argument, "state/noise length must equal n");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(state.x[i]) || !std::isfinite(noise[i])) {
      throw Error(Errc::non_finite, "non-finite state or noise", i);
    }
  }
  const double noise_scale = p.sigma() * std::sqrt(dt);
  const auto order = rank_order(state.x);
  ParticleState next = state;
  for (std::size_t k = 0; k < n; ++k) {
    next.x[order[k]] += p.g(k) * dt;
  }
  for (std::size_t i = 0; i < n; ++i) next.x[i] += noise_scale * noise[i];
  next.t = state.t + dt;
  return next;
}

/// Stateful stepper that keeps the rank order between steps and repairs it
/// by insertion sort, which is linear when few ranks swap.
class Stepper {
 public:
  Stepper(const AtlasParams& p, double dt, ParticleState state)
      : drift_dt_(p.n()),
        noise_scale_(p.sigma() * std::sqrt(dt)),
        dt_(dt),
        state_(std::move(state)) {
    if (state_.x.size() != p.n()) {
      throw Error(Errc::invalid_argument, "state length must equal n");
    }
    for (std::size_t k = 0; k < p.n(); ++k) drift_dt_[k] = p.g(k) * dt;
    order_ = rank_order(state_.x);
  }

  /// Advances one step. Returns the new particle sum (non-finite on
  /// overflow, so callers can check a single value).
  double advance(std::span<const double> noise) {
    auto& x = state_.x;
    const std::size_t n = x.size();
    for (std::size_t k = 0; k < n; ++k) x[order_[k]] += drift_dt_[k];
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += noise_scale_ * noise[i];
      sum += x[i];
    }
    state_.t += dt_;
    if (std::isfinite(sum)) resort();
    return sum;
  }

  const ParticleState& state() const noexcept { return state_; }
  std::span<const std::size_t> order() const noexcept { return order_; }
  double top() const { return state_.x[order_.front()]; }

 private:
  void resort() {
    const std::span<const double> x = state_.x;
    for (std::size_t k = 1; k < order_.size(); ++k) {
      const std::size_t p = order_[k];
      std::size_t j = k;
      while (j > 0 && outranks(x, p, order_[j - 1])) {
        order_[j] = order_[j - 1];
        --j;
      }
      order_[j] = p;
    }
  }

  std::vector<double> drift_dt_;
  double noise_scale_;
  double dt_;
  ParticleState state_;
  std::vector<std::size_t> order_;
};

/// Runs one path and hands every recorded step to `sink(top, mean)`.
/// Fully determined by (p, cfg, path_index).
template <class Sink>
void simulate_into(const AtlasParams& p, const SimConfig& cfg,
                   std::size_t path_index, Sink&& sink) {
  cfg.validate();
  PathRng rng(derive_path_seed(cfg.master_seed, path_index));
  Stepper stepper(p, cfg.dt, init_state(p, cfg, rng));
  const std::size_t n = p.n();
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> noise(n);

  const std::uint64_t total = cfg.burn_in + cfg.steps;
  for (std::uint64_t s = 0; s < total; ++s) {
    for (double& xi : noise) xi = rng.normal();
    const double sum = stepper.advance(noise);
    if (!std::isfinite(sum)) {
      throw Error(Errc::non_finite,
                  "trajectory became non-finite at step " + std::to_string(s),
                  static_cast<std::size_t>(s));
    }
    if (s >= cfg.burn_in) sink(stepper.top(), sum * inv_n);
  }
}

inline TopSeries simulate(const AtlasParams& p, const SimConfig& cfg,
                          std::size_t path_index) {
  TopSeries out;
  out.dt = cfg.dt;
  out.params = p;
  out.seed = derive_path_seed(cfg.master_seed, path_index);
  out.values.reserve(cfg.steps);
  if (cfg.record_mean) {
    out.mean_values.emplace();
    out.mean_values->reserve(cfg.steps);
    simulate_into(p, cfg, path_index, [&](double top, double mean) {
      out.values.push_back(top);
      out.mean_values->push_back(mean);
    });
  } else {
    simulate_into(p, cfg, path_index,
                  [&](double top, double) { out.values.push_back(top); });
  }
  return out;
}

inline std::size_t default_threads() {
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : hc;
}

/// Evaluates fn(i) for i in [0, count) on up to `threads` workers and
/// returns results in index order. Results never depend on scheduling as
/// long as fn(i) depends only on i.
template <class Fn>
auto parallel_map(std::size_t count, Fn&& fn, std::size_t threads = 0)
    -> std::vector<decltype(fn(std::size_t{}))> {
  using R = decltype(fn(std::size_t{}));
  std::vector<std::optional<R>> slots(count);
  if (threads == 0) threads = default_threads();
  threads = std::max<std::size_t>(1, std::min(threads, count));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        slots[i].emplace(fn(i));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<R> out;
  out.reserve(count);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace atlasid
