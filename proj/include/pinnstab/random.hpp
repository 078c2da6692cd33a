#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace pinnstab {

/// Seeded generator for one training run. Draws are built from raw 64-bit
/// outputs rather than std distributions so that sequences are identical
/// across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal via Box-Muller (one value per call, two uniforms).
  double normal();

  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Deterministic per-run seed from a master seed and a textual descriptor
/// of the run (system, IC, T, arm, replicate, ...).
std::uint64_t derive_seed(std::uint64_t master_seed, std::string_view descriptor);

}  // namespace pinnstab
