#include "pifeat/trajectory.hpp"

#include <cmath>

namespace pifeat::traj {

std::vector<PlanarState> polar_integrate(const PlanarState& initial,
                                         std::span<const data::PolarOdometry> steps) {
  std::vector<PlanarState> states;
  states.reserve(steps.size() + 1);
  PlanarState s = initial;
  s.heading = lie::wrap_angle(s.heading);
  states.push_back(s);
  for (const data::PolarOdometry& step : steps) {
    s.heading = lie::wrap_angle(s.heading + step.delta_phi);
    s.x += step.delta_l * std::cos(s.heading);
    s.y += step.delta_l * std::sin(s.heading);
    states.push_back(s);
  }
  return states;
}

std::vector<lie::Pose> se3_chain(const lie::Pose& initial,
                                 std::span<const lie::Se3Tangent> deltas) {
  std::vector<lie::Pose> poses;
  poses.reserve(deltas.size() + 1);
  poses.push_back(initial);
  for (const lie::Se3Tangent& xi : deltas) {
    lie::Pose next = poses.back() * lie::se3_exp(xi);
    if (!next.rotation.is_valid()) {
      next.rotation = next.rotation.renormalized();  // throws InvalidRotation if degenerate
    }
    poses.push_back(next);
  }
  return poses;
}

}  // namespace pifeat::traj
