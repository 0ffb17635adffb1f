#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string_view>
#include <vector>

#include "ovl/errors.hpp"

namespace ovl::rng {

/**
 * Deterministic random streams.
 *
 * Everything random in this library flows from one 64-bit seed through
 * named/indexed substreams, so reruns are bit-identical across platforms and
 * components cannot perturb one another's randomness. The generator is
 * splitmix64 and all distributions are sampled by explicit formulas below —
 * no stdlib distribution objects, whose output sequences are
 * implementation-defined.
 */

/// splitmix64 finalizer: advances `state` and returns a mixed 64-bit word.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Child seed for an indexed substream (counter-based split): trials and
/// epochs derive their own streams with hash(seed, index).
inline std::uint64_t derive(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t s = seed ^ (0xA0761D6478BD642FULL * (index + 1));
  return splitmix64(s);
}

/// Child seed for a named substream ("bounds", "generate", "train", ...).
inline std::uint64_t derive(std::uint64_t seed, std::string_view name) {
  // FNV-1a over the name, then mixed with the root seed.
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return derive(seed, h);
}

/// A deterministic stream of doubles/integers produced by splitmix64.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() { return splitmix64(state_); }

  /// Uniform in [0, 1) with 53-bit resolution.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform strictly inside (0, 1); safe as a log argument.
  double uniform_pos() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard exponential via inversion: −ln U, U ∈ (0,1). Strictly positive.
  double exponential() { return -std::log(uniform_pos()); }

  /// Standard normal via Box–Muller (cosine branch; one value per call, two
  /// uniforms consumed — keeps the stream stateless between calls).
  double normal() {
    const double u1 = uniform_pos();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  /// Vector of iid N(0, sigma^2) entries.
  Eigen::VectorXd gaussian_vector(int d, double sigma) {
    Eigen::VectorXd v(d);
    for (int i = 0; i < d; ++i) v[i] = sigma * normal();
    return v;
  }

  /// Uniform draw from the probability simplex (symmetric Dirichlet with
  /// concentration 1): n iid exponentials, normalized. Entries are strictly
  /// positive by construction.
  Eigen::VectorXd dirichlet_uniform(int n) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = exponential();
    return v / v.sum();
  }

  /// Index draw from a weight vector (weights need not be normalized).
  int discrete(const Eigen::VectorXd& weights) {
    const double total = weights.sum();
    if (!(total > 0.0)) throw InvalidParams("discrete: weights must have positive sum");
    double u = uniform() * total;
    for (int i = 0; i < weights.size(); ++i) {
      u -= weights[i];
      if (u < 0.0) return i;
    }
    return static_cast<int>(weights.size()) - 1;  // rounding tail
  }

  /// Fisher–Yates shuffled index vector [0, n).
  std::vector<int> shuffled_indices(int n) {
    std::vector<int> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    for (int i = n - 1; i > 0; --i) {
      const int j = static_cast<int>(next_u64() % static_cast<std::uint64_t>(i + 1));
      std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
    return idx;
  }

 private:
  std::uint64_t state_;
};

}  // namespace ovl::rng
