#include "dycast/random.hpp"

#include <cmath>
#include <stdexcept>

#include "dycast/errors.hpp"

namespace dycast {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {
inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}
}  // namespace

Rng::Rng(std::uint64_t seed) {
  std::uint64_t s = seed;
  for (auto& word : state_) word = splitmix64(s);
}

std::uint64_t Rng::next_u64() {
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

double Rng::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::next_below(std::uint64_t n) {
  if (n == 0) throw ValidationError("Rng::next_below: n must be positive");
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    const std::uint64_t r = next_u64();
    if (r >= threshold) return r % n;
  }
}

bool Rng::next_bernoulli(double p) { return next_double() < p; }

double Rng::next_gaussian() {
  if (has_cached_gaussian_) {
    has_cached_gaussian_ = false;
    return cached_gaussian_;
  }
  double u1 = next_double();
  while (u1 <= 0.0) u1 = next_double();
  const double u2 = next_double();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * M_PI * u2;
  cached_gaussian_ = radius * std::sin(angle);
  has_cached_gaussian_ = true;
  return radius * std::cos(angle);
}

double Rng::next_gamma(double shape, double scale) {
  if (!(shape > 0.0) || !(scale > 0.0)) {
    throw ValidationError("Rng::next_gamma: shape and scale must be positive");
  }
  if (shape < 1.0) {
    // Boost: Gamma(a) = Gamma(a+1) * U^(1/a).
    const double boost = std::pow(next_double(), 1.0 / shape);
    return next_gamma(shape + 1.0, scale) * boost;
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = next_gaussian();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = next_double();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
    if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
      return d * v * scale;
    }
  }
}

long long Rng::next_poisson(double lambda) {
  if (lambda < 0.0) throw ValidationError("Rng::next_poisson: lambda must be >= 0");
  long long total = 0;
  // Split large rates so exp(-lambda) stays well away from underflow.
  while (lambda > 400.0) {
    total += next_poisson(400.0);
    lambda -= 400.0;
  }
  const double limit = std::exp(-lambda);
  double product = 1.0;
  long long count = -1;
  do {
    ++count;
    product *= next_double();
  } while (product > limit);
  return total + count;
}

long long Rng::next_negative_binomial(double mu, double alpha) {
  if (mu < 0.0 || !(alpha > 0.0)) {
    throw ValidationError("Rng::next_negative_binomial: mu >= 0 and alpha > 0 required");
  }
  if (mu == 0.0) return 0;
  const double r = 1.0 / alpha;
  const double rate = next_gamma(r, mu / r);
  return next_poisson(rate);
}

Rng Rng::split(std::uint64_t tag) const {
  std::uint64_t s = state_[0] ^ rotl(state_[3], 11) ^ (tag * 0x9e3779b97f4a7c15ULL);
  return Rng(splitmix64(s));
}

}  // namespace dycast
