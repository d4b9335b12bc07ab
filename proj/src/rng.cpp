#include "pifeat/rng.hpp"

#include <cmath>

namespace pifeat {

double Rng::uniform01() {
  // Top 53 bits of the 64-bit word, scaled by 2^-53.
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform_symmetric(double half_width) {
  return half_width * (2.0 * uniform01() - 1.0);
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform01();
  while (u1 <= 0.0) {
    u1 = uniform01();
  }
  const double u2 = uniform01();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * M_PI * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

}  // namespace pifeat
