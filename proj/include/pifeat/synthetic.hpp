#pragma once

// Ground-truth trajectory generation and the exact inverse mapping from
// states to IMU measurements. This module is the oracle the preintegration
// and trajectory tests are checked against: integrating the generated
// measurements reproduces the generated states to floating-point accuracy.

#include <cstdint>
#include <span>
#include <vector>

#include "pifeat/imu.hpp"
#include "pifeat/lie.hpp"
#include "pifeat/preintegration.hpp"

namespace pifeat::synth {

struct NavState {
  lie::Rotation rotation;                              // body to world
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();  // m/s, world
  Eigen::Vector3d position = Eigen::Vector3d::Zero();  // m, world
  double time = 0.0;                                   // s
};

enum class TrajectoryKind {
  kConstantTwist,
  kPiecewiseConstantTwist,
  kSinusoidalPlanar,
};

struct TwistSegment {
  Eigen::Vector3d angular_velocity = Eigen::Vector3d::Zero();  // rad/s, body
  Eigen::Vector3d body_accel = Eigen::Vector3d::Zero();        // m/s^2, body specific force minus gravity effect
  double duration = 0.0;                                       // s
};

struct TrajectorySpec {
  TrajectoryKind kind = TrajectoryKind::kConstantTwist;
  // constant twist
  Eigen::Vector3d angular_velocity = Eigen::Vector3d::Zero();
  Eigen::Vector3d body_accel = Eigen::Vector3d::Zero();
  // piecewise constant twist
  std::vector<TwistSegment> segments;
  // sinusoidal planar: accel (sin, cos, 0)*amp, yaw rate cos()*amp
  double sine_accel_amplitude = 0.0;
  double sine_gyro_amplitude = 0.0;
  double sine_frequency_hz = 0.5;

  double rate_hz = 100.0;
  double duration_s = 1.0;
};

/// Forward recursion of the discrete kinematic model with zero noise and
/// bias. Returns round(rate * duration) + 1 states including the initial.
std::vector<NavState> generate_states(const TrajectorySpec& spec, const NavState& initial,
                                      const Eigen::Vector3d& gravity);

/// Algebraic inversion of the state recursion: body rates from consecutive
/// rotations, specific force from the velocity update. With zero noise and
/// bias, integrate_measurements() on the output reproduces the input states.
std::vector<ImuSample> states_to_measurements(std::span<const NavState> states,
                                              const Eigen::Vector3d& gravity,
                                              const BiasState& bias, const NoiseSpec& noise,
                                              std::uint64_t seed);

/// Strapdown dead reckoning: run the state recursion driven by measurements.
/// dt <= 0 infers the (uniform) period from the first timestamp gap.
std::vector<NavState> integrate_measurements(const NavState& initial,
                                             std::span<const ImuSample> samples,
                                             const Eigen::Vector3d& gravity,
                                             const BiasState& bias = {}, double dt = 0.0);

/// State reconstruction from a preintegrated window delta.
NavState apply_delta(const NavState& initial, const preint::PreintegratedDelta& delta,
                     const Eigen::Vector3d& gravity);

}  // namespace pifeat::synth
