#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "pifeat/lie.hpp"
#include "support/series_oracle.hpp"

using namespace pifeat;
using namespace pifeat::lie;
using pifeat::testing::matrix_exp_series;
using pifeat::testing::twist4;

namespace {

std::mt19937_64 rng(12345);

Vec3 random_unit_axis() {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec3 v(n(rng), n(rng), n(rng));
  return v.normalized();
}

So3Tangent random_tangent(double max_angle) {
  std::uniform_real_distribution<double> u(0.0, max_angle);
  return u(rng) * random_unit_axis();
}

Pose random_pose() {
  std::normal_distribution<double> n(0.0, 2.0);
  return Pose(so3_exp(random_tangent(M_PI - 0.1)), Vec3(n(rng), n(rng), n(rng)));
}

}  // namespace

TEST_CASE("hat of zero is the zero matrix") {
  CHECK(hat(Vec3::Zero()).isZero(0.0));
}

TEST_CASE("hat matches the skew definition") {
  Mat3 expected;
  expected << 0, -3, 2, 3, 0, -1, -2, 1, 0;
  CHECK((hat(Vec3(1, 2, 3)) - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("hat acts as a cross product") {
  for (int i = 0; i < 50; ++i) {
    const Vec3 v = random_tangent(5.0);
    const Vec3 w = random_tangent(5.0);
    CHECK((hat(v) * w - v.cross(w)).norm() < 1e-15);
  }
}

TEST_CASE("vee inverts hat") {
  CHECK(vee(Mat3::Zero()).isZero(0.0));
  Mat3 m;
  m << 0, -3, 2, 3, 0, -1, -2, 1, 0;
  CHECK((vee(m) - Vec3(1, 2, 3)).norm() == 0.0);
  for (int i = 0; i < 50; ++i) {
    const Vec3 v = random_tangent(10.0);
    CHECK((vee(hat(v)) - v).norm() == 0.0);
  }
}

TEST_CASE("vee rejects non-skew input") {
  Mat3 sym;
  sym << 1, 2, 3, 2, 5, 6, 3, 6, 9;
  CHECK_THROWS_AS(vee(sym), NotSkewSymmetric);
}

TEST_CASE("so3_exp of zero is the identity") {
  CHECK((so3_exp(Vec3::Zero()).matrix() - Mat3::Identity()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("so3_exp quarter turn about x") {
  Mat3 expected;
  expected << 1, 0, 0, 0, 0, -1, 0, 1, 0;
  const Mat3 r = so3_exp(Vec3(M_PI / 2, 0, 0)).matrix();
  CHECK((r - expected).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("so3_exp matches the 20-term power series") {
  const Mat3 series = matrix_exp_series(pifeat::testing::skew3(Vec3(0.1, 0.2, 0.3)));
  CHECK((so3_exp(Vec3(0.1, 0.2, 0.3)).matrix() - series).cwiseAbs().maxCoeff() < 1e-12);

  for (int i = 0; i < 200; ++i) {
    const So3Tangent v = random_tangent(M_PI);
    const Mat3 oracle = matrix_exp_series(pifeat::testing::skew3(v));
    CHECK((so3_exp(v).matrix() - oracle).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("so3_log basics") {
  CHECK(so3_log(Rotation()).isZero(0.0));
  const So3Tangent v = so3_log(so3_exp(Vec3(M_PI / 2, 0, 0)));
  CHECK((v - Vec3(M_PI / 2, 0, 0)).norm() < 1e-12);
}

TEST_CASE("so3_log round trip near pi") {
  for (int i = 0; i < 100; ++i) {
    const So3Tangent v = (M_PI - 1e-7) * random_unit_axis();
    const So3Tangent back = so3_log(so3_exp(v));
    CHECK((back - v).norm() < 1e-6);
  }
}

TEST_CASE("so3 round trip over the regular range") {
  for (int i = 0; i < 10000; ++i) {
    const So3Tangent v = random_tangent(M_PI - 1e-6);
    CHECK((so3_log(so3_exp(v)) - v).norm() < 1e-9);
  }
}

TEST_CASE("so3_log rejects invalid rotations") {
  Mat3 bad = Mat3::Identity();
  bad(0, 0) = 1.5;
  CHECK_THROWS_AS(so3_log(Rotation(bad, Rotation::UncheckedTag{})), InvalidRotation);
}

TEST_CASE("se3_exp of zero and pure translation") {
  Se3Tangent zero = Se3Tangent::Zero();
  const Pose id = se3_exp(zero);
  CHECK(id.rotation.matrix().isApprox(Mat3::Identity(), 0.0));
  CHECK(id.translation.isZero(0.0));

  Se3Tangent xi;
  xi << 1, 2, 3, 0, 0, 0;
  const Pose t = se3_exp(xi);
  CHECK(t.rotation.matrix().isApprox(Mat3::Identity(), 0.0));
  CHECK((t.translation - Vec3(1, 2, 3)).norm() == 0.0);
}

TEST_CASE("se3_exp translation couples through the left Jacobian") {
  Se3Tangent xi;
  xi << 1, 0, 0, 0, 0, M_PI / 2;
  const Pose t = se3_exp(xi);
  const Vec3 expected = so3_left_jacobian(Vec3(0, 0, M_PI / 2)) * Vec3(1, 0, 0);
  CHECK((t.translation - expected).norm() < 1e-15);

  // Against a 20-term series of the homogeneous twist exponential.
  const Eigen::Matrix4d series = matrix_exp_series(twist4(xi));
  CHECK((t.rotation.matrix() - series.topLeftCorner<3, 3>()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((t.translation - series.topRightCorner<3, 1>()).norm() < 1e-12);
}

TEST_CASE("se3_exp matches the twist series oracle on random tangents") {
  std::normal_distribution<double> n(0.0, 1.5);
  for (int i = 0; i < 200; ++i) {
    Se3Tangent xi;
    xi << n(rng), n(rng), n(rng), random_tangent(M_PI - 0.05);
    const Eigen::Matrix4d series = matrix_exp_series(twist4(xi), 30);
    const Pose t = se3_exp(xi);
    CHECK((t.rotation.matrix() - series.topLeftCorner<3, 3>()).cwiseAbs().maxCoeff() < 1e-11);
    CHECK((t.translation - series.topRightCorner<3, 1>()).norm() < 1e-11);
  }
}

TEST_CASE("se3 round trip") {
  std::normal_distribution<double> n(0.0, 3.0);
  for (int i = 0; i < 10000; ++i) {
    Se3Tangent xi;
    xi << n(rng), n(rng), n(rng), random_tangent(M_PI - 1e-6);
    CHECK((se3_log(se3_exp(xi)) - xi).norm() < 1e-9);
  }
}

TEST_CASE("relative_pose composition") {
  const Pose a = random_pose();
  CHECK(relative_pose(a, a).rotation.matrix().isApprox(Mat3::Identity(), 1e-15));
  CHECK(relative_pose(a, a).translation.norm() < 1e-12);

  const Pose b = random_pose();
  const Pose from_identity = relative_pose(Pose(), b);
  CHECK(from_identity.rotation.matrix().isApprox(b.rotation.matrix(), 0.0));
  CHECK((from_identity.translation - b.translation).norm() == 0.0);

  for (int i = 0; i < 100; ++i) {
    const Pose ta = random_pose();
    const Pose tb = random_pose();
    const Pose delta = relative_pose(ta, tb);
    const Pose recomposed = ta * delta;
    CHECK((recomposed.rotation.matrix() - tb.rotation.matrix()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((recomposed.translation - tb.translation).norm() < 1e-12);
  }
}

TEST_CASE("group closure under long composition chains") {
  Rotation r;
  Pose t;
  for (int i = 0; i < 10000; ++i) {
    const Pose step(so3_exp(random_tangent(0.5)), Vec3(0.01, 0.0, -0.01));
    r = r * step.rotation;
    t = t * step;
  }
  CHECK(r.orthonormality_error() < 1e-9);
  CHECK(t.rotation.orthonormality_error() < 1e-9);
  CHECK(t.translation.allFinite());
}

TEST_CASE("renormalized recovers a drifted rotation") {
  Mat3 drifted = so3_exp(Vec3(0.3, -0.2, 0.9)).matrix();
  drifted(0, 1) += 1e-7;
  const Rotation fixed = Rotation(drifted, Rotation::UncheckedTag{}).renormalized();
  CHECK(fixed.orthonormality_error() < 1e-12);
  CHECK_THROWS_AS(Rotation(Mat3::Zero(), Rotation::UncheckedTag{}).renormalized(), InvalidRotation);
}

TEST_CASE("rotation constructor validates") {
  CHECK_THROWS_AS(Rotation{2.0 * Mat3::Identity()}, InvalidRotation);
  Mat3 reflect = Mat3::Identity();
  reflect(2, 2) = -1.0;
  CHECK_THROWS_AS(Rotation{reflect}, InvalidRotation);
}
