#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "pifeat/metrics.hpp"

using namespace pifeat;
using namespace pifeat::metrics;
using lie::Pose;
using lie::Rotation;
using Eigen::Vector3d;

namespace {

// straight line along x, one meter per frame
std::vector<Pose> straight_line(std::size_t frames, double step = 1.0) {
  std::vector<Pose> out;
  out.reserve(frames);
  for (std::size_t k = 0; k < frames; ++k) {
    out.emplace_back(Rotation{}, Vector3d(step * static_cast<double>(k), 0, 0));
  }
  return out;
}

Pose rigid(const Vector3d& axis_angle, const Vector3d& t) {
  return Pose(lie::so3_exp(axis_angle), t);
}

}  // namespace

TEST_CASE("perfect prediction scores zero everywhere") {
  const auto gt = straight_line(1001);
  const RelativeErrorReport report = kitti_relative_errors(gt, gt);
  REQUIRE(report.buckets.size() == 8);
  for (const auto& b : report.buckets) {
    CHECK(b.t_rel_percent == 0.0);
    CHECK(b.r_rel_deg_per_100m < 1e-9);
  }
  CHECK(report.avg_t_rel_percent == 0.0);
}

TEST_CASE("ten percent scale error in every bucket") {
  const auto gt = straight_line(1001, 1.0);
  const auto pred = straight_line(1001, 1.1);
  const RelativeErrorReport report = kitti_relative_errors(gt, pred);
  REQUIRE(report.buckets.size() == 8);
  for (const auto& b : report.buckets) {
    CHECK(std::abs(b.t_rel_percent - 10.0) < 0.01);
    CHECK(b.r_rel_deg_per_100m < 1e-9);
  }
}

TEST_CASE("one degree per hundred meters of rotation drift") {
  const std::size_t frames = 1001;
  const auto gt = straight_line(frames);
  std::vector<Pose> pred;
  pred.reserve(frames);
  for (std::size_t k = 0; k < frames; ++k) {
    const double yaw_deg = static_cast<double>(k) / 100.0;  // 1 deg per 100 m of arc
    pred.push_back(rigid(Vector3d(0, 0, yaw_deg * M_PI / 180.0), gt[k].translation));
  }
  const RelativeErrorReport report = kitti_relative_errors(gt, pred);
  for (const auto& b : report.buckets) {
    CHECK(std::abs(b.r_rel_deg_per_100m - 1.0) < 0.01);
  }
}

TEST_CASE("relative metric is invariant to a common rigid transform") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  const std::size_t frames = 400;
  std::vector<Pose> gt;
  std::vector<Pose> pred;
  Pose g(lie::so3_exp(Vector3d(0, 0, 0.001)), Vector3d(1.0, 0.02, 0));
  Pose p(lie::so3_exp(Vector3d(0, 0.0015, 0.001)), Vector3d(1.01, 0.03, 0));
  Pose gt_cur;
  Pose pred_cur;
  for (std::size_t k = 0; k < frames; ++k) {
    gt.push_back(gt_cur);
    pred.push_back(pred_cur);
    gt_cur = gt_cur * g;
    pred_cur = pred_cur * p;
  }
  const std::vector<double> lengths = {100.0, 200.0};
  const RelativeErrorReport base = kitti_relative_errors(gt, pred, lengths);

  const Pose rigid_move(lie::so3_exp(Vector3d(0.4, -0.2, 0.9)), Vector3d(100, -50, 30));
  std::vector<Pose> gt_moved;
  std::vector<Pose> pred_moved;
  for (std::size_t k = 0; k < frames; ++k) {
    gt_moved.push_back(rigid_move * gt[k]);
    pred_moved.push_back(rigid_move * pred[k]);
  }
  const RelativeErrorReport moved = kitti_relative_errors(gt_moved, pred_moved, lengths);
  REQUIRE(moved.buckets.size() == base.buckets.size());
  for (std::size_t i = 0; i < base.buckets.size(); ++i) {
    CHECK(moved.buckets[i].t_rel_percent ==
          doctest::Approx(base.buckets[i].t_rel_percent).epsilon(1e-9));
    CHECK(moved.buckets[i].r_rel_deg_per_100m ==
          doctest::Approx(base.buckets[i].r_rel_deg_per_100m).epsilon(1e-9));
  }
}

TEST_CASE("buckets beyond the path length are skipped, all-too-short throws") {
  const auto gt = straight_line(151);  // 150 m
  const RelativeErrorReport report = kitti_relative_errors(gt, gt);
  REQUIRE(report.buckets.size() == 1);
  CHECK(report.buckets.front().length_m == 100.0);

  const auto tiny = straight_line(5);
  CHECK_THROWS_AS(kitti_relative_errors(tiny, tiny), TrajectoryTooShort);

  CHECK_THROWS_AS(kitti_relative_errors(gt, straight_line(100)), LengthMismatch);
}

TEST_CASE("normalized displacement error") {
  const std::vector<Vector3d> gt = {Vector3d(2, 0, 0)};
  CHECK(normalized_displacement_error(gt, gt).mean_percent == 0.0);

  const std::vector<Vector3d> pred = {Vector3d(2, 0.11, 0)};
  // endpoint error 0.11 m over 2 m displacement
  CHECK(normalized_displacement_error(gt, pred).mean_percent ==
        doctest::Approx(5.5).epsilon(1e-12));

  const std::vector<Vector3d> gt_with_zero = {Vector3d(2, 0, 0), Vector3d::Zero()};
  const std::vector<Vector3d> pred_with_zero = {Vector3d(2, 0.11, 0), Vector3d(0.5, 0, 0)};
  const DisplacementErrorReport report =
      normalized_displacement_error(gt_with_zero, pred_with_zero);
  CHECK(report.windows_used == 1);
  CHECK(report.windows_skipped_zero == 1);
  CHECK(report.mean_percent == doctest::Approx(5.5).epsilon(1e-12));
}

TEST_CASE("injected displacement error is recovered") {
  // many 200-sample walking windows with a synthetic 5.52% endpoint error
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0.0, 1.0);
  const double target_percent = 5.52;
  std::vector<Vector3d> gt;
  std::vector<Vector3d> pred;
  for (int w = 0; w < 64; ++w) {
    Vector3d d(n(rng), n(rng), 0.1 * n(rng));
    if (d.norm() < 1e-3) {
      d = Vector3d(1, 0, 0);
    }
    // error vector orthogonal-ish with the exact requested magnitude
    Vector3d err = Vector3d(-d.y(), d.x(), 0).normalized();
    gt.push_back(d);
    pred.push_back(d + err * (target_percent / 100.0) * d.norm());
  }
  const DisplacementErrorReport report = normalized_displacement_error(gt, pred);
  CHECK(std::abs(report.mean_percent - target_percent) < 0.01);
}

TEST_CASE("rmse rates") {
  const std::vector<data::PolarOdometry> labels = {{1.0, 0.1}, {2.0, -0.2}};
  const RmseRates zero = rmse_rates(labels, labels, 2.0);
  CHECK(zero.delta_l_m_per_s == 0.0);
  CHECK(zero.delta_phi_rad_per_s == 0.0);

  // single window, 2 s, 0.2 m error -> 0.1 m/s
  const std::vector<data::PolarOdometry> pred = {{1.2, 0.1}};
  const std::vector<data::PolarOdometry> label = {{1.0, 0.1}};
  CHECK(rmse_rates(pred, label, 2.0).delta_l_m_per_s == doctest::Approx(0.1).epsilon(1e-12));

  // batch vs a scalar loop
  std::mt19937_64 rng(17);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<data::PolarOdometry> p(20);
  std::vector<data::PolarOdometry> l(20);
  for (int i = 0; i < 20; ++i) {
    p[i] = {n(rng), n(rng)};
    l[i] = {n(rng), n(rng)};
  }
  double sl = 0.0;
  double sp = 0.0;
  for (int i = 0; i < 20; ++i) {
    sl += std::pow((p[i].delta_l - l[i].delta_l) / 2.0, 2);
    sp += std::pow((p[i].delta_phi - l[i].delta_phi) / 2.0, 2);
  }
  const RmseRates rates = rmse_rates(p, l, 2.0);
  CHECK(rates.delta_l_m_per_s == doctest::Approx(std::sqrt(sl / 20.0)).epsilon(1e-12));
  CHECK(rates.delta_phi_rad_per_s == doctest::Approx(std::sqrt(sp / 20.0)).epsilon(1e-12));

  CHECK_THROWS_AS(rmse_rates(p, labels, 2.0), LengthMismatch);
}
