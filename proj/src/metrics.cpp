#include "pifeat/metrics.hpp"

#include <cmath>
#include <string>

namespace pifeat::metrics {

using lie::Pose;

std::vector<double> default_bucket_lengths() {
  return {100.0, 200.0, 300.0, 400.0, 500.0, 600.0, 700.0, 800.0};
}

namespace {

std::vector<double> arc_lengths(std::span<const Pose> trajectory) {
  std::vector<double> dist(trajectory.size(), 0.0);
  for (std::size_t i = 1; i < trajectory.size(); ++i) {
    dist[i] = dist[i - 1] + (trajectory[i].translation - trajectory[i - 1].translation).norm();
  }
  return dist;
}

// First frame at or beyond `length` meters of ground-truth arc from `start`.
std::ptrdiff_t segment_end(const std::vector<double>& dist, std::size_t start, double length) {
  for (std::size_t j = start + 1; j < dist.size(); ++j) {
    if (dist[j] - dist[start] >= length) {
      return static_cast<std::ptrdiff_t>(j);
    }
  }
  return -1;
}

}  // namespace

RelativeErrorReport kitti_relative_errors(std::span<const Pose> gt_trajectory,
                                          std::span<const Pose> pred_trajectory,
                                          std::span<const double> lengths) {
  if (gt_trajectory.size() != pred_trajectory.size()) {
    throw LengthMismatch("trajectories differ in length: " +
                         std::to_string(gt_trajectory.size()) + " vs " +
                         std::to_string(pred_trajectory.size()));
  }
  if (gt_trajectory.size() < 2) {
    throw TrajectoryTooShort("need at least two poses");
  }
  const std::vector<double> default_lengths = default_bucket_lengths();
  if (lengths.empty()) {
    lengths = default_lengths;
  }

  const std::vector<double> dist = arc_lengths(gt_trajectory);

  RelativeErrorReport report;
  double pooled_t = 0.0;
  double pooled_r = 0.0;
  for (const double length : lengths) {
    BucketError bucket;
    bucket.length_m = length;
    double sum_t = 0.0;
    double sum_r = 0.0;
    for (std::size_t start = 0; start < gt_trajectory.size(); ++start) {
      const std::ptrdiff_t end = segment_end(dist, start, length);
      if (end < 0) {
        break;  // no later start can reach this length either
      }
      const auto j = static_cast<std::size_t>(end);
      const Pose gt_delta = lie::relative_pose(gt_trajectory[start], gt_trajectory[j]);
      const Pose pred_delta = lie::relative_pose(pred_trajectory[start], pred_trajectory[j]);
      const Pose error = lie::relative_pose(pred_delta, gt_delta);
      const double t_err = error.translation.norm();
      const double r_err_deg = lie::so3_log(error.rotation).norm() * 180.0 / M_PI;
      sum_t += t_err / length * 100.0;        // percent
      sum_r += r_err_deg / (length / 100.0);  // deg per 100 m
      ++bucket.segments;
    }
    if (bucket.segments > 0) {
      bucket.t_rel_percent = sum_t / static_cast<double>(bucket.segments);
      bucket.r_rel_deg_per_100m = sum_r / static_cast<double>(bucket.segments);
      pooled_t += sum_t;
      pooled_r += sum_r;
      report.segments += bucket.segments;
      report.buckets.push_back(bucket);
    }
  }
  if (report.segments == 0) {
    throw TrajectoryTooShort("ground-truth path shorter than every bucket length");
  }
  report.avg_t_rel_percent = pooled_t / static_cast<double>(report.segments);
  report.avg_r_rel_deg_per_100m = pooled_r / static_cast<double>(report.segments);
  return report;
}

DisplacementErrorReport normalized_displacement_error(
    std::span<const Eigen::Vector3d> gt_displacements,
    std::span<const Eigen::Vector3d> pred_displacements) {
  if (gt_displacements.size() != pred_displacements.size()) {
    throw LengthMismatch("displacement lists differ in length");
  }
  DisplacementErrorReport report;
  double sum = 0.0;
  for (std::size_t i = 0; i < gt_displacements.size(); ++i) {
    const double gt_len = gt_displacements[i].norm();
    if (gt_len == 0.0) {
      ++report.windows_skipped_zero;
      continue;
    }
    sum += (pred_displacements[i] - gt_displacements[i]).norm() / gt_len * 100.0;
    ++report.windows_used;
  }
  if (report.windows_used > 0) {
    report.mean_percent = sum / static_cast<double>(report.windows_used);
  }
  return report;
}

RmseRates rmse_rates(std::span<const data::PolarOdometry> predictions,
                     std::span<const data::PolarOdometry> labels, double window_seconds) {
  if (predictions.size() != labels.size()) {
    throw LengthMismatch("polar prediction/label lists differ in length");
  }
  if (predictions.empty() || !(window_seconds > 0.0)) {
    throw ConfigError("rmse_rates needs a nonempty batch and positive window duration");
  }
  double sum_l = 0.0;
  double sum_phi = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double dl = (predictions[i].delta_l - labels[i].delta_l) / window_seconds;
    const double dphi = (predictions[i].delta_phi - labels[i].delta_phi) / window_seconds;
    sum_l += dl * dl;
    sum_phi += dphi * dphi;
  }
  const auto n = static_cast<double>(predictions.size());
  return RmseRates{std::sqrt(sum_l / n), std::sqrt(sum_phi / n)};
}

}  // namespace pifeat::metrics
