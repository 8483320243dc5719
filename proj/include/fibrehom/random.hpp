#pragma once

#include <cstdint>
#include <random>

#include "fibrehom/types.hpp"

namespace fibrehom {

/// Seeded generator for fixtures. Draws go through std::mt19937_64 and the
/// standard distributions, so sequences are stable for a given toolchain.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  double normal() { return normal_(engine_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
  Complex complex_normal() {
    const double re = normal();
    return {re, normal()};
  }

  CMatrix gaussian(Index rows, Index cols);
  CVector gaussian(Index rows);
  CMatrix unitary(Index dim);

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace fibrehom
