#pragma once

#include <cstdint>
#include <limits>

namespace regvb {

/// Counter-based generator: output n is a SplitMix64 finalization of (key, n).
/// The full state is the (key, counter) pair, so it can be copied, stored and
/// replayed. `split` derives an independent child stream from the key alone.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) noexcept : key_(mix(seed ^ 0x6a09e667f3bcc909ULL)) {}

  Rng split(std::uint64_t tag) const noexcept {
    Rng child(0);
    child.key_ = mix(key_ ^ mix(tag + 0x9e3779b97f4a7c15ULL));
    return child;
  }

  result_type operator()() noexcept { return mix(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  /// Uniform double in [0, 1).
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) noexcept {
    const std::uint64_t limit = max() - max() % n;
    std::uint64_t x;
    do {
      x = (*this)();
    } while (x >= limit);
    return x % n;
  }

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

  friend bool operator==(const Rng&, const Rng&) = default;

 private:
  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Sub-stream tags. Every random choice in a fit derives from one seed
/// through these fixed offsets.
namespace streams {
inline constexpr std::uint64_t kTopicInit = 1;
inline constexpr std::uint64_t kMinibatch = 2;
inline constexpr std::uint64_t kMStepInit = 3;
inline constexpr std::uint64_t kSynthetic = 4;
}  // namespace streams

}  // namespace regvb
