#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "dmof/common.hpp"

namespace dmof {

// Deterministic 64-bit generator (xoshiro256**) with splitmix64 seeding.
// All sampling helpers are hand-rolled so that a given (seed, stream) pair
// produces identical draws on every platform; std::uniform_* are
// implementation-defined and would break byte-stable outputs.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& s : state_) s = splitmix64(x);
  }

  // Derives an independent stream from (seed, ids...): used so that e.g.
  // trial t of sweep n never shares a stream with trial t+1.
  template <typename... Ids>
  static Rng stream(std::uint64_t seed, Ids... ids) {
    std::uint64_t h = seed;
    ((h = mix(h, static_cast<std::uint64_t>(ids))), ...);
    return Rng(h);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

  // Index i with probability weights[i] / sum(weights).
  std::size_t categorical(const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double u = uniform01() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
      acc += weights[i];
      if (u < acc) return i;
    }
    return weights.empty() ? 0 : weights.size() - 1;
  }

  // Exponential(1) via inverse CDF; uniform01 never returns 1.
  double exponential() { return -std::log1p(-uniform01()); }

  // Flat Dirichlet over n cells (normalized standard exponentials).
  std::vector<double> dirichlet(std::size_t n) {
    std::vector<double> v(n);
    double total = 0.0;
    for (auto& x : v) {
      x = exponential();
      total += x;
    }
    for (auto& x : v) x /= total;
    return v;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  static std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  static std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
    std::uint64_t x = h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
    return splitmix64(x);
  }

  std::uint64_t state_[4];
};

}  // namespace dmof
