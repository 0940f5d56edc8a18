#pragma once

#include <cmath>
#include <cstdint>

namespace itr {

/// Counter-based 64-bit generator in the splitmix64 family.
///
/// The i-th output is finalize(key + i * gamma) with the splitmix64
/// finalizer, so the stream is a pure function of (key, counter).
/// Independent streams are obtained by re-keying with `stream(id)`;
/// generation order within a stream never depends on scheduling, which
/// is what makes parallel data generation bit-reproducible.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : key_(finalize(seed ^ kGamma)) {}

  /// Derive an independent stream; the parent is not advanced.
  CounterRng stream(std::uint64_t id) const {
    CounterRng r(0);
    r.key_ = finalize(key_ ^ finalize(id + kGamma));
    r.counter_ = 0;
    r.has_spare_ = false;
    return r;
  }

  std::uint64_t next_u64() { return finalize(key_ + (++counter_) * kGamma); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  bool bernoulli(double p) { return uniform01() < p; }

  /// Standard normal via Box-Muller (the polar-free, two-uniform form);
  /// the spare deviate is cached so draws come in a fixed order.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    double u2 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  static std::uint64_t finalize(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
  }

  /// Order-sensitive hash for deriving per-cell seeds.
  static std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
    return finalize(a ^ (finalize(b) + kGamma + (a << 6) + (a >> 2)));
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace itr
