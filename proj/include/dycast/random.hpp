#pragma once

#include <cstdint>

namespace dycast {

// Deterministic pseudorandom generator used everywhere randomness is needed
// (boundary sampling, k-means, synthetic data). xoshiro256** seeded through
// splitmix64, so results are reproducible across platforms and standard
// library versions.
//
// Stream splitting: a consumer that needs several independent streams from
// one user-facing seed calls split(tag) with a distinct tag per stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  // Uniform in [0, 1), 53 bits of mantissa.
  double next_double();

  // Uniform integer in [0, n), unbiased. n must be > 0.
  std::uint64_t next_below(std::uint64_t n);

  bool next_bernoulli(double p);

  // Standard normal via Box-Muller (one spare cached).
  double next_gaussian();

  // Gamma(shape, scale) by Marsaglia-Tsang, shape > 0, scale > 0.
  double next_gamma(double shape, double scale);

  // Poisson(lambda), lambda >= 0. Large lambda is split additively so the
  // multiplication method never underflows.
  long long next_poisson(double lambda);

  // Negative binomial with mean mu >= 0 and dispersion alpha > 0
  // (variance mu + alpha*mu^2), drawn as a gamma-Poisson mixture.
  long long next_negative_binomial(double mu, double alpha);

  // Derive an independent generator for a named substream.
  Rng split(std::uint64_t tag) const;

 private:
  std::uint64_t state_[4];
  double cached_gaussian_ = 0.0;
  bool has_cached_gaussian_ = false;
};

// splitmix64 mix function, exposed for seed derivation.
std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace dycast
