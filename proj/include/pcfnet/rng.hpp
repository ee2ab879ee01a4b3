#pragma once
// Deterministic random number generation. A single splitmix64 stream backs
// every seeded draw in the project so that runs are reproducible bit for bit
// across platforms (std::shuffle and std::uniform_*_distribution are
// implementation-defined, so they are deliberately not used).

#include <cstdint>
#include <numeric>
#include <vector>

namespace pcfnet {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  bool bernoulli(double p) { return next_double() < p; }

  // Uniform integer in [0, n). Plain modulo draw: the tiny modulo bias is
  // irrelevant here and the result is fully specified.
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

  // In-place Fisher-Yates shuffle with explicitly specified draws.
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t state_;
};

// Derives an independent stream seed from a base seed. Streams keep the
// generator draws for payments, labels, corruption, splits, initialization
// and epoch shuffles from aliasing each other.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  Rng r(base ^ (0xD1B54A32D192ED03ULL * (stream + 1)));
  return r.next_u64();
}

// Stream ids used across the project (documented so pipelines can be
// reproduced from the seed alone).
namespace seed_stream {
constexpr std::uint64_t kPayments = 0;
constexpr std::uint64_t kTeacherLabels = 1;
constexpr std::uint64_t kCorruption = 2;
constexpr std::uint64_t kBalancedSplit = 3;
constexpr std::uint64_t kInit = 4;
constexpr std::uint64_t kEpochShuffleBase = 1000;  // + epoch index
}  // namespace seed_stream

}  // namespace pcfnet
