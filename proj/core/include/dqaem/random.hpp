#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string_view>

namespace dqaem {

inline constexpr std::string_view kRngName = "mt19937_64";
inline constexpr std::string_view kNormalMethod = "box-muller";

/// splitmix64 finalizer applied to master + index; used to fan one master seed
/// out to independent per-trial seeds.
std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index);

/// Seeded generator whose draws are identical on every platform.
///
/// std::uniform_real_distribution and std::normal_distribution are
/// implementation-defined, so both transforms are done here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal via Box-Muller.
  double normal();
  /// Index drawn from cumulative weights; `cumulative` must end at ~1.
  template <typename Range>
  std::size_t categorical(const Range& cumulative) {
    const double u = uniform();
    std::size_t idx = 0;
    for (double c : cumulative) {
      if (u < c) return idx;
      ++idx;
    }
    return idx - 1;
  }

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

}  // namespace dqaem
