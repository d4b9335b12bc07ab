#pragma once

#include <Eigen/Core>

namespace pifeat {

/// One timestamped gyro + accelerometer measurement.
struct ImuSample {
  double timestamp = 0.0;                       // s
  Eigen::Vector3d gyro = Eigen::Vector3d::Zero();   // rad/s, body frame
  Eigen::Vector3d accel = Eigen::Vector3d::Zero();  // m/s^2, specific force, body frame
};

struct BiasState {
  Eigen::Vector3d gyro_bias = Eigen::Vector3d::Zero();   // rad/s
  Eigen::Vector3d accel_bias = Eigen::Vector3d::Zero();  // m/s^2
};

/// Additive measurement noise scales plus half-widths for the uniform bias
/// randomization used as training-time augmentation.
struct NoiseSpec {
  double gyro_noise_std = 0.0;    // rad/s
  double accel_noise_std = 0.0;   // m/s^2
  double gyro_bias_range = 0.0;   // rad/s, uniform in [-r, r]
  double accel_bias_range = 0.0;  // m/s^2, uniform in [-r, r]
};

/// Standard gravity, world frame, z up.
inline Eigen::Vector3d standard_gravity() { return {0.0, 0.0, -9.80665}; }

}  // namespace pifeat
