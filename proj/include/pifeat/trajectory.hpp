#pragma once

// Integration of per-window odometry predictions into trajectories: planar
// polar dead reckoning and SE(3) delta chaining.

#include <span>
#include <vector>

#include "pifeat/dataset.hpp"
#include "pifeat/lie.hpp"

namespace pifeat::traj {

struct PlanarState {
  double heading = 0.0;  // rad, wrapped to (-pi, pi]
  double x = 0.0;        // m
  double y = 0.0;        // m
};

/// Heading-first planar recursion: the updated heading drives the position
/// step. Returns steps + 1 states including the initial.
std::vector<PlanarState> polar_integrate(const PlanarState& initial,
                                         std::span<const data::PolarOdometry> steps);

/// T_{k+1} = T_k * se3_exp(xi_k); re-orthonormalizes on drift beyond 1e-9
/// and throws InvalidRotation when a rotation cannot be recovered.
std::vector<lie::Pose> se3_chain(const lie::Pose& initial,
                                 std::span<const lie::Se3Tangent> deltas);

}  // namespace pifeat::traj
