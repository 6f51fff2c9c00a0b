#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace gaminet {

// Deterministic random source. The engine is std::mt19937_64 (its output
// sequence is fixed by the standard) and all distributions are generated
// here rather than with std::*_distribution, so identical seeds give
// identical streams on every platform and compiler.
//
// Every consumer derives a named substream from one base seed, e.g.
//   Rng rng = Rng::substream(seed, "init-main", feature_index);
// which keeps initialization, splitting, batching and data generation
// independent of each other and of call order.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static Rng substream(std::uint64_t base_seed, std::string_view name,
                       std::uint64_t index = 0);

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via the Marsaglia polar method.
  double normal();

  double normal(double mean, double sd) { return mean + sd * normal(); }

  /// Unbiased integer in [0, n).
  std::uint64_t uniform_int(std::uint64_t n);

  /// Fisher-Yates permutation of 0..n-1.
  std::vector<int> permutation(int n);

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// FNV-1a hash of a string, used for substream naming.
std::uint64_t fnv1a64(std::string_view s);

/// splitmix64 mixing step, used to derive substream seeds.
std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace gaminet
