#pragma once

#include <cstdint>
#include <stdexcept>

namespace cft {

/**
 * Counter-based pseudo-random generator, algorithm id "sm64ctr-v1".
 *
 * Output i of a stream keyed by `key` is
 *
 *     u64(i) = mix64(key + (i + 1) * 0x9E3779B97F4A7C15)
 *
 * where mix64 is the splitmix64 finalizer.  Streams are derived from a
 * master seed with derive_key(master, stream) = mix64(mix64(master ^ GOLDEN)
 * ^ stream).  Every draw is a pure function of (key, counter), so grids of
 * measurements can be generated in any order, or in parallel, and still
 * reproduce bit-identically.  The algorithm id is written into all output
 * file headers.
 *
 * Doubles are built from the top 53 bits, uniform in [0, 1).  Binomial
 * variates are the sum of n Bernoulli draws (one uniform each); this keeps
 * the sampler exact and platform-independent at the cost of O(n) per draw,
 * which is fine for the shot counts used here.
 */
inline constexpr const char* kRngAlgorithmId = "sm64ctr-v1";

namespace rng_detail {
inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}
}  // namespace rng_detail

inline std::uint64_t derive_key(std::uint64_t master_seed, std::uint64_t stream) {
  using namespace rng_detail;
  return mix64(mix64(master_seed ^ kGolden) ^ stream);
}

class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}
  CounterRng(std::uint64_t master_seed, std::uint64_t stream)
      : key_(derive_key(master_seed, stream)) {}

  std::uint64_t next_u64() {
    using namespace rng_detail;
    ++counter_;
    return mix64(key_ + counter_ * kGolden);
  }

  /// Uniform double in [0, 1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return next_double() < p; }

  /// Binomial(n, p) as a sum of Bernoulli draws.
  std::uint64_t binomial(std::uint64_t n, double p) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("binomial: p outside [0, 1]");
    std::uint64_t ups = 0;
    for (std::uint64_t i = 0; i < n; ++i) ups += bernoulli(p) ? 1 : 0;
    return ups;
  }

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace cft
