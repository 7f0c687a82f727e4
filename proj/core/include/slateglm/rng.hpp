#pragma once

#include <cstdint>
#include <limits>

namespace slateglm {

// SplitMix64: a Weyl-sequence counter (increment 0x9E3779B97F4A7C15) pushed
// through the Stafford "mix13" finalizer
// (shifts 30/27/31, multipliers 0xBF58476D1CE4E5B9 and 0x94D049BB133111EB).
// Output depends only on the counter, so streams are identical on every
// platform and trivially derivable from (seed, stream id).
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  explicit SplitMix64(std::uint64_t seed = 0) : counter_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  result_type operator()() {
    counter_ += kGamma;
    return mix(counter_);
  }

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t counter_;
};

/// Named sub-streams of one experiment seed.
enum class Stream : std::uint64_t {
  kTheta = 1,
  kContexts = 2,
  kRewards = 3,
  kLearner = 4,
};

/// Seed for an independent stream derived from (seed, stream, index).
std::uint64_t derive_seed(std::uint64_t seed, Stream stream, std::uint64_t index = 0);

/// Deterministic sampling front-end over SplitMix64. Normals use Box-Muller
/// with a cached spare, so the sequence is fixed by the seed alone.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Unbiased integer in [0, n). n must be positive.
  std::uint64_t uniform_index(std::uint64_t n);
  /// Standard normal.
  double normal();
  /// Bernoulli(p).
  bool bernoulli(double p) { return uniform() < p; }

 private:
  SplitMix64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace slateglm
