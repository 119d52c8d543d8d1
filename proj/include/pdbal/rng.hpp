#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>

namespace pdbal {

// Counter-derived random streams. Every consumer of randomness receives its
// own stream, derived from a master seed plus integer tags, so results do not
// depend on evaluation order or thread count. The generator is xoshiro256**
// seeded through splitmix64; all samplers are implemented here rather than
// through <random> distributions, whose output sequences are not pinned by
// the standard.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : key_(seed) {
    std::uint64_t sm = seed;
    for (auto& s : state_) s = splitmix(sm);
  }

  // Child stream keyed on (this stream's seed, tags). Does not consume state.
  RandomStream child(std::uint64_t a, std::uint64_t b = 0,
                     std::uint64_t c = 0) const {
    std::uint64_t k = key_;
    k = combine(k, a);
    k = combine(k, b);
    k = combine(k, c);
    return RandomStream(k);
  }

  std::uint64_t key() const { return key_; }
  std::uint64_t draws_consumed() const { return draws_; }

  std::uint64_t next_u64() {
    ++draws_;
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

  // Uniform on [0,1), 53-bit resolution.
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on (0,1]; safe as a log() argument.
  double uniform_pos() { return 1.0 - uniform(); }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Unbiased integer in [0, n).
  std::uint64_t uniform_int(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_int: n must be positive");
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t x = next_u64();
      if (x >= threshold) return x % n;
    }
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Standard normal via Box-Muller; consumes exactly two uniforms.
  double normal() {
    const double u1 = uniform_pos();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  // Gamma(shape, scale 1), Marsaglia-Tsang; shape < 1 boosted through
  // G(a) = G(a+1) * U^{1/a}.
  double gamma(double shape) {
    if (!(shape > 0.0)) throw std::domain_error("gamma: shape must be > 0");
    if (shape < 1.0) {
      const double u = uniform_pos();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform_pos();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  double beta(double a, double b) {
    const double ga = gamma(a);
    const double gb = gamma(b);
    return ga / (ga + gb);
  }

  // Exact Poisson sampling: sequential inversion, with additive chunking for
  // large rates (Poisson(l1+l2) = Poisson(l1) + Poisson(l2)).
  long long poisson(double lambda) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
      throw std::domain_error("poisson: rate must be finite and nonnegative");
    long long total = 0;
    while (lambda > 30.0) {
      total += poisson_small(30.0);
      lambda -= 30.0;
    }
    return total + poisson_small(lambda);
  }

  // Index draw from an unnormalized nonnegative weight vector.
  std::size_t categorical(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double u = uniform() * total;
    for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
      u -= weights[i];
      if (u < 0.0) return i;
    }
    return weights.size() - 1;
  }

 private:
  long long poisson_small(double lambda) {
    if (lambda <= 0.0) return 0;
    const double u = uniform();
    double p = std::exp(-lambda);
    double cum = p;
    long long k = 0;
    const long long cap = 30 + 200;  // lambda <= 30 here; tail beyond is < 1e-60
    while (u > cum && k < cap) {
      ++k;
      p *= lambda / double(k);
      cum += p;
    }
    return k;
  }

  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  static std::uint64_t splitmix(std::uint64_t& s) {
    s += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  static std::uint64_t combine(std::uint64_t key, std::uint64_t tag) {
    std::uint64_t s = key ^ (tag + 0x9e3779b97f4a7c15ULL + (key << 6) + (key >> 2));
    return splitmix(s);
  }

  std::uint64_t state_[4];
  std::uint64_t key_;
  std::uint64_t draws_ = 0;
};

// FNV-1a over raw bytes; used to derive content-keyed substreams so that
// identical candidate rows score identically.
inline std::uint64_t fnv1a(const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 1469598103934665603ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace pdbal
