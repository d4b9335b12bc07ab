#pragma once

// Deterministic random source for synthesis and bias randomization. The
// exact algorithm (mt19937_64 + explicit Box-Muller) is part of the file
// format contract so golden fixtures stay reproducible; see docs/formats.md.

#include <cstdint>
#include <random>

namespace pifeat {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform double in [0, 1) with 53 significant bits.
  double uniform01();

  /// Uniform double in [-half_width, +half_width].
  double uniform_symmetric(double half_width);

  /// Standard normal via Box-Muller (pairs cached).
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace pifeat
