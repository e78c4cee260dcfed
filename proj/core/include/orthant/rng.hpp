#pragma once

#include <cstdint>
#include <random>

#include "orthant/errors.hpp"
#include "orthant/linalg.hpp"

namespace orthant {

// Deterministic random source.  All sampling in the library goes through
// unit() + inverse-CDF so traces depend only on the seed, never on the
// standard library's distribution internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Uniform in [0, 1), 53-bit resolution.
  double unit() { return (gen_() >> 11) * 0x1.0p-53; }

  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

// Index of the first weight whose running sum exceeds quantile * total.
// With quantile 0 this is the first index carrying positive weight.
inline int sample_index(const Vec& weights, double quantile) {
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw PreconditionError("sample_index: negative weight");
    total += w;
  }
  if (total <= 0.0) throw PreconditionError("sample_index: zero total weight");
  const double target = quantile * total;
  double run = 0.0;
  int last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] > 0.0) last_positive = static_cast<int>(i);
    run += weights[i];
    if (run > target) return static_cast<int>(i);
  }
  return last_positive;  // quantile ~ 1 with rounding
}

inline int sample_index(const Vec& weights, Rng& rng) {
  return sample_index(weights, rng.unit());
}

}  // namespace orthant
