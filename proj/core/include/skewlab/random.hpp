#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace skewlab {

/// Identifies one independent random stream: every Monte-Carlo sample draws
/// from `derive_seed(seed, pipeline, index)` so results do not depend on how
/// the index range is split across workers.
struct StreamKey {
  std::uint64_t seed = 0;
  std::string_view pipeline;
  std::uint64_t index = 0;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;
std::uint64_t hash_name(std::string_view name) noexcept;
std::uint64_t derive_seed(const StreamKey& key) noexcept;

/// 64-bit Mersenne twister with explicit, platform-independent conversions.
/// (std::uniform_real_distribution is implementation-defined, which would
/// break byte-identical outputs across standard libraries.)
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  explicit Rng(const StreamKey& key) : engine_(derive_seed(key)) {}

  std::uint64_t bits() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

}  // namespace skewlab
