#pragma once

// Counter-based random stream. A stream is identified by a key of
// (seed, scenario, candidate); the i-th output is a SplitMix64 finaliser
// applied to (key digest, i). Streams with different keys are independent
// and any stream can be regenerated without replaying others, which keeps
// parallel simulations reproducible.

#include <cstdint>
#include <limits>

namespace assuredx {

struct StreamKey {
  std::uint64_t seed = 0;
  std::uint64_t scenario = 0;
  std::uint64_t candidate = 0;
};

class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(StreamKey key)
      : base_(mix(mix(mix(key.seed ^ 0x6a09e667f3bcc908ULL) ^ key.scenario) ^ key.candidate)) {}
  CounterRng(std::uint64_t seed, std::uint64_t scenario, std::uint64_t candidate)
      : CounterRng(StreamKey{seed, scenario, candidate}) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return mix(base_ + kGamma * ++counter_); }

  std::uint64_t position() const { return counter_; }

 private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t base_;
  std::uint64_t counter_ = 0;
};

}  // namespace assuredx
