#include "pifeat/lie.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace pifeat::lie {

namespace {

bool all_finite(const Mat3& m) { return m.allFinite(); }

}  // namespace

Rotation::Rotation(const Mat3& m) : m_(m) {
  if (!all_finite(m_) || !is_valid()) {
    throw InvalidRotation("matrix is not a rotation (orthonormality/det check failed)");
  }
}

double Rotation::orthonormality_error() const {
  const Mat3 gram = m_.transpose() * m_ - Mat3::Identity();
  const double ortho = gram.cwiseAbs().maxCoeff();
  const double det = std::abs(m_.determinant() - 1.0);
  return std::max(ortho, det);
}

bool Rotation::is_valid(double tol) const {
  return all_finite(m_) && orthonormality_error() <= tol;
}

Rotation Rotation::renormalized() const {
  if (!all_finite(m_) || !(m_.determinant() > 0.0)) {
    throw InvalidRotation("matrix too degenerate to renormalize");
  }
  Eigen::JacobiSVD<Mat3> svd(m_, Eigen::ComputeFullU | Eigen::ComputeFullV);
  // a drifted rotation has singular values near 1; anything collapsed is
  // not recoverable
  if (svd.singularValues().minCoeff() < 1e-3) {
    throw InvalidRotation("matrix too degenerate to renormalize");
  }
  return Rotation(svd.matrixU() * svd.matrixV().transpose(), UncheckedTag{});
}

Mat3 hat(const So3Tangent& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
      -v.y(), v.x(), 0.0;
  return m;
}

So3Tangent vee(const Mat3& m) {
  const double asym = (m + m.transpose()).cwiseAbs().maxCoeff();
  if (!(asym <= 1e-9)) {
    throw NotSkewSymmetric("matrix is not antisymmetric within 1e-9");
  }
  return So3Tangent(0.5 * (m(2, 1) - m(1, 2)),
                    0.5 * (m(0, 2) - m(2, 0)),
                    0.5 * (m(1, 0) - m(0, 1)));
}

Rotation so3_exp(const So3Tangent& v) {
  const double theta2 = v.squaredNorm();
  const double theta = std::sqrt(theta2);
  // Rodrigues coefficients sin(t)/t and (1-cos(t))/t^2, Taylor below 1e-8.
  double a, b;
  if (theta < kSmallAngle) {
    a = 1.0 - theta2 / 6.0;
    b = 0.5 - theta2 / 24.0;
  } else {
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / theta2;
  }
  const Mat3 k = hat(v);
  return Rotation(Mat3::Identity() + a * k + b * (k * k), Rotation::UncheckedTag{});
}

So3Tangent so3_log(const Rotation& r) {
  if (!r.is_valid()) {
    throw InvalidRotation("so3_log input violates rotation invariants");
  }
  const Mat3& m = r.matrix();
  // w = sin(theta) * axis
  const So3Tangent w(0.5 * (m(2, 1) - m(1, 2)),
                     0.5 * (m(0, 2) - m(2, 0)),
                     0.5 * (m(1, 0) - m(0, 1)));
  const double sin_theta = w.norm();
  const double cos_theta = 0.5 * (m.trace() - 1.0);
  const double theta = std::atan2(sin_theta, cos_theta);  // in [0, pi]

  if (theta < kSmallAngle) {
    return w * (1.0 + theta * theta / 6.0);
  }
  if (theta > kNearPiAngle) {
    // sin(theta) ~ 0: recover the axis from (R + I)/2 ~ axis*axis^T,
    // reading the column under the dominant diagonal entry.
    const Mat3 b = 0.5 * (m + Mat3::Identity());
    int j = 0;
    b.diagonal().maxCoeff(&j);
    So3Tangent axis = b.col(j) / std::sqrt(b(j, j));
    axis.normalize();
    if (axis.dot(w) < 0.0) {
      axis = -axis;
    }
    return theta * axis;
  }
  return (theta / sin_theta) * w;
}

Mat3 so3_left_jacobian(const So3Tangent& v) {
  const double theta2 = v.squaredNorm();
  const double theta = std::sqrt(theta2);
  double b, c;  // (1-cos t)/t^2, (t - sin t)/t^3
  if (theta < kSmallAngle) {
    b = 0.5 - theta2 / 24.0;
    c = 1.0 / 6.0 - theta2 / 120.0;
  } else {
    b = (1.0 - std::cos(theta)) / theta2;
    c = (theta - std::sin(theta)) / (theta2 * theta);
  }
  const Mat3 k = hat(v);
  return Mat3::Identity() + b * k + c * (k * k);
}

Pose se3_exp(const Se3Tangent& xi) {
  const So3Tangent phi = xi.tail<3>();
  const Vec3 rho = xi.head<3>();
  return Pose(so3_exp(phi), so3_left_jacobian(phi) * rho);
}

Se3Tangent se3_log(const Pose& t) {
  const So3Tangent phi = so3_log(t.rotation);
  // J_l is well conditioned for angles in [0, pi]; solve instead of the
  // closed-form inverse to avoid its removable singularities.
  const Vec3 rho = so3_left_jacobian(phi).partialPivLu().solve(t.translation);
  Se3Tangent xi;
  xi << rho, phi;
  return xi;
}

Pose relative_pose(const Pose& ta, const Pose& tb) { return ta.inverse() * tb; }

double wrap_angle(double radians) {
  double a = std::remainder(radians, 2.0 * M_PI);  // (-pi, pi] up to the -pi edge
  if (a <= -M_PI) {
    a = M_PI;
  }
  return a;
}

}  // namespace pifeat::lie
