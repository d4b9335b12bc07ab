#pragma once

// SO(3)/SE(3) primitives shared by every other component. All types are
// immutable values and all functions are pure; safe to use from any thread.

#include <Eigen/Core>

#include "pifeat/errors.hpp"

namespace pifeat::lie {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using So3Tangent = Eigen::Vector3d;

// se(3) tangent convention used everywhere in this project:
// components [0..2] translation (m), components [3..5] rotation (rad).
using Se3Tangent = Eigen::Matrix<double, 6, 1>;

inline constexpr double kOrthonormalTol = 1e-9;
inline constexpr double kSmallAngle = 1e-8;      // Taylor branch threshold
inline constexpr double kNearPiAngle = M_PI - 1e-6;  // near-pi log branch

/// 3x3 orthonormal matrix with det +1. Construction validates the
/// invariants to 1e-9 unless the unchecked tag is used.
class Rotation {
 public:
  struct UncheckedTag {};

  Rotation() : m_(Mat3::Identity()) {}
  explicit Rotation(const Mat3& m);                 // throws InvalidRotation
  Rotation(const Mat3& m, UncheckedTag) : m_(m) {}

  const Mat3& matrix() const { return m_; }
  Rotation inverse() const { return Rotation(m_.transpose(), UncheckedTag{}); }
  Rotation operator*(const Rotation& rhs) const {
    return Rotation(m_ * rhs.m_, UncheckedTag{});
  }
  Vec3 operator*(const Vec3& v) const { return m_ * v; }

  // Max deviation of R^T R from identity plus |det - 1|.
  double orthonormality_error() const;
  bool is_valid(double tol = kOrthonormalTol) const;

  // Nearest rotation via Gram-Schmidt; throws InvalidRotation when the
  // input is too degenerate to fix (det <= 0 or non-finite).
  Rotation renormalized() const;

 private:
  Mat3 m_;
};

/// Rigid transform: x_world = rotation * x_body + translation.
struct Pose {
  Rotation rotation;
  Vec3 translation = Vec3::Zero();

  Pose() = default;
  Pose(const Rotation& r, const Vec3& t) : rotation(r), translation(t) {}

  Pose inverse() const {
    const Rotation rinv = rotation.inverse();
    return Pose(rinv, -(rinv * translation));
  }
  Pose operator*(const Pose& rhs) const {
    return Pose(rotation * rhs.rotation,
                rotation * rhs.translation + translation);
  }
  Vec3 operator*(const Vec3& v) const { return rotation * v + translation; }
};

Mat3 hat(const So3Tangent& v);
So3Tangent vee(const Mat3& m);  // throws NotSkewSymmetric beyond 1e-9

Rotation so3_exp(const So3Tangent& v);
So3Tangent so3_log(const Rotation& r);  // angle in [0, pi]

// Left Jacobian of SO(3); couples the translational part of se3_exp.
Mat3 so3_left_jacobian(const So3Tangent& v);

Pose se3_exp(const Se3Tangent& xi);
Se3Tangent se3_log(const Pose& t);

/// Delta with ta * delta == tb, i.e. ta^-1 * tb.
Pose relative_pose(const Pose& ta, const Pose& tb);

/// Wrap an angle to (-pi, pi].
double wrap_angle(double radians);

}  // namespace pifeat::lie
