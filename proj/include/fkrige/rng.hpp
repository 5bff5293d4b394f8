#pragma once

// Portable, seedable random streams. std::mt19937_64 is bit-exact across
// standard libraries; the distributions below are implemented here because
// the std:: distributions are not.
//
// Stream splitting: every (seed, replicate, purpose, item) tuple maps to an
// independent generator seeded through SplitMix64, so replicates and sites
// can be generated in any order or in parallel with identical results.

#include <cstddef>
#include <cstdint>
#include <random>

namespace fkrige {

enum class StreamPurpose : std::uint64_t {
  site_selection = 1,
  field = 2,
  noise = 3,
};

std::uint64_t splitmix64(std::uint64_t x);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  static Rng stream(std::uint64_t seed, std::uint64_t replicate, StreamPurpose purpose,
                    std::uint64_t item = 0);

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer in [0, bound) without modulo bias.
  std::uint64_t below(std::uint64_t bound);
  /// Standard normal via Box-Muller.
  double normal();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace fkrige
