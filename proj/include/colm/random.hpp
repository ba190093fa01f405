#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace colm {

// FNV-1a over the bytes, folded with `seed` and finished with a splitmix64
// mix. Stable across platforms and runs.
std::uint64_t stable_hash(std::string_view bytes, std::uint64_t seed = 0);

std::uint64_t mix64(std::uint64_t x);

// Seeded generator whose outputs are identical on every standard library:
// std::mt19937_64 is fully specified, but the std distributions are not, so
// range reduction is done here.
class StableRng {
 public:
  explicit StableRng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, n). n must be positive.
  std::uint64_t index(std::uint64_t n) { return next() % n; }

  // Uniform in [0, 1).
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool coin() { return (next() >> 63) != 0; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace colm
