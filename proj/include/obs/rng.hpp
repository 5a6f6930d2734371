#pragma once

#include <cstdint>
#include <random>

namespace obs {

// Seeded generator with a fixed double extraction so streams are identical
// across standard libraries (std distributions are implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double unit() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  double uniform(double a, double b) { return a + (b - a) * unit(); }

  int uniform_int(int a, int b) {  // inclusive range
    return a + static_cast<int>(engine_() % static_cast<std::uint64_t>(b - a + 1));
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace obs
