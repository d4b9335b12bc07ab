#pragma once

// Odometry evaluation metrics: length-bucketed relative errors over
// trajectory sub-sequences, displacement-normalized window errors, and
// per-window RMSE rates.

#include <span>
#include <vector>

#include "pifeat/dataset.hpp"
#include "pifeat/lie.hpp"

namespace pifeat::metrics {

struct BucketError {
  double length_m = 0.0;
  double t_rel_percent = 0.0;       // mean over segments of this length
  double r_rel_deg_per_100m = 0.0;  // mean over segments of this length
  std::size_t segments = 0;
};

struct RelativeErrorReport {
  std::vector<BucketError> buckets;
  double avg_t_rel_percent = 0.0;       // pooled over every evaluated segment
  double avg_r_rel_deg_per_100m = 0.0;
  std::size_t segments = 0;
};

std::vector<double> default_bucket_lengths();  // 100, 200, ..., 800 m

/// Endpoint pose error of every sub-sequence whose ground-truth arc length
/// reaches a bucket length, starting from every frame. Buckets longer than
/// the trajectory are skipped; TrajectoryTooShort only if none fit.
RelativeErrorReport kitti_relative_errors(
    std::span<const lie::Pose> gt_trajectory, std::span<const lie::Pose> pred_trajectory,
    std::span<const double> lengths = {});

struct DisplacementErrorReport {
  double mean_percent = 0.0;
  std::size_t windows_used = 0;
  std::size_t windows_skipped_zero = 0;  // zero ground-truth displacement
};

/// Per-window endpoint error norm divided by the ground-truth displacement
/// length, in percent, averaged over windows.
DisplacementErrorReport normalized_displacement_error(
    std::span<const Eigen::Vector3d> gt_displacements,
    std::span<const Eigen::Vector3d> pred_displacements);

struct RmseRates {
  double delta_l_m_per_s = 0.0;
  double delta_phi_rad_per_s = 0.0;
};

/// RMSE of per-window polar errors expressed as rates over the window
/// duration.
RmseRates rmse_rates(std::span<const data::PolarOdometry> predictions,
                     std::span<const data::PolarOdometry> labels, double window_seconds);

}  // namespace pifeat::metrics
