#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace betacnmf {

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Stream seed for (master seed, purpose tag, index). Every random stream in
/// an experiment is derived this way, so results do not depend on the order
/// in which runs execute.
std::uint64_t derive_seed(std::uint64_t master, std::string_view purpose,
                          std::uint64_t index) noexcept;

/// Seedable 64-bit generator with explicit uniform and Box-Muller normal draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal deviate.
  double normal();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace betacnmf
