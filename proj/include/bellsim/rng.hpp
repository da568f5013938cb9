#pragma once

#include <cstdint>

namespace bellsim {

/// SplitMix64 (Steele, Lea & Flood). Tiny state, so a fresh generator per trial is cheap.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return finalize(state_);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  static constexpr std::uint64_t finalize(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// Seed for the substream of one trial; depends only on the three counters.
constexpr std::uint64_t substream_seed(std::uint64_t master_seed, std::uint64_t stream_index,
                                       std::uint64_t trial_index) {
  std::uint64_t z = SplitMix64::finalize(master_seed + 0x9E3779B97F4A7C15ULL);
  z = SplitMix64::finalize(z ^ (stream_index * 0xD1B54A32D192ED03ULL + 0x632BE59BD9B4E019ULL));
  return SplitMix64::finalize(z ^ (trial_index * 0xAEF17502108EF2D9ULL));
}

}  // namespace bellsim
