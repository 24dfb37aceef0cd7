#pragma once

// Deterministic random streams keyed by (master seed, path index).
//
// Per-path seeds come from the SplitMix64 finalizer, which is a bijection on
// 64-bit words, so distinct path indices under one master seed never collide.
// Each path then drives its own xoshiro256++ generator; variates are drawn
// with Boost's ziggurat samplers, whose output does not depend on the
// standard library in use.

#include <array>
#include <cstdint>
#include <limits>

#include <boost/random/exponential_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>

namespace atlasid {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// derive_path_seed(0, 0) == 0x48218226ff3cd4bf.
constexpr std::uint64_t derive_path_seed(std::uint64_t master,
                                         std::uint64_t path_index) noexcept {
  return mix64(master ^ mix64(path_index + kGoldenGamma));
}

class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}
  constexpr std::uint64_t next() noexcept {
    state_ += kGoldenGamma;
    return mix64(state_);
  }

 private:
  std::uint64_t state_;
};

/// xoshiro256++ (Blackman & Vigna). Satisfies UniformRandomBitGenerator.
class Xoshiro256pp {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256pp(std::uint64_t seed) noexcept {
    SplitMix64 sm(seed);
    for (auto& w : s_) w = sm.next();
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> s_{};
};

/// Source of the variates a single path consumes.
class PathRng {
 public:
  explicit PathRng(std::uint64_t seed) : engine_(seed) {}

  double normal() { return normal_(engine_); }
  double exponential() { return exponential_(engine_); }
  std::size_t uniform_index(std::size_t upper_inclusive) {
    boost::random::uniform_int_distribution<std::size_t> d(0, upper_inclusive);
    return d(engine_);
  }

 private:
  Xoshiro256pp engine_;
  boost::random::normal_distribution<double> normal_;
  boost::random::exponential_distribution<double> exponential_;
};

}  // namespace atlasid
