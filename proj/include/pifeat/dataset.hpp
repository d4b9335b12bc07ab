#pragma once

// Recording ingestion: parse IMU/pose files into time-aligned records, cut
// them into labeled windows, and derive the label statistics the geodesic
// loss needs. File formats are documented in docs/formats.md; small golden
// fixtures live under tests/fixtures/ so tests run without any dataset
// download.

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "pifeat/imu.hpp"
#include "pifeat/lie.hpp"
#include "pifeat/preintegration.hpp"

namespace pifeat::data {

struct TimedPose {
  double time = 0.0;
  lie::Pose pose;
};

struct SequenceRecord {
  std::vector<ImuSample> imu;
  std::vector<TimedPose> poses;
  std::string frame_convention = "world_from_body";
  double imu_rate_hz = 0.0;
  double pose_rate_hz = 0.0;
};

/// Per-window planar motion: traveled distance and heading change.
struct PolarOdometry {
  double delta_l = 0.0;    // m, >= 0
  double delta_phi = 0.0;  // rad, in (-pi, pi]
};

enum class InputKind { kRaw, kAveraged, kPreintegrated };

InputKind input_kind_from_string(const std::string& s);
std::string to_string(InputKind kind);

struct WindowedExample {
  InputKind kind = InputKind::kPreintegrated;
  std::variant<std::vector<ImuSample>,            // kRaw
               std::vector<preint::AveragedSample>,   // kAveraged
               std::vector<preint::FeatureVector>>    // kPreintegrated
      features;
  lie::Se3Tangent se3_label = lie::Se3Tangent::Zero();
  PolarOdometry polar_label;
  std::size_t first_sample = 0;  // inclusive
  std::size_t last_sample = 0;   // inclusive

  std::size_t feature_count() const;
};

inline constexpr double kCovarianceEpsilon = 1e-8;

struct EmpiricalCovariance {
  Eigen::Matrix<double, 6, 6> sigma = Eigen::Matrix<double, 6, 6>::Identity();
  std::size_t count = 0;
  lie::Se3Tangent mean = lie::Se3Tangent::Zero();
};

/// IMU CSV `t,gx,gy,gz,ax,ay,az` plus either the pose CSV
/// `t,r00..r22,tx,ty,tz` or (kitti_native_poses) the 12-number per line
/// devkit layout with implied timestamps index * 0.1 s.
SequenceRecord parse_kitti_sequence(const std::filesystem::path& imu_path,
                                    const std::filesystem::path& pose_path,
                                    bool kitti_native_poses = false);

/// Single-file recording with ground truth at IMU rate:
/// `t,gx,gy,gz,ax,ay,az,r00..r22,tx,ty,tz`.
SequenceRecord parse_oxford_sequence(const std::filesystem::path& path);

/// Standalone pose-file readers (same layouts as above), for trajectory
/// evaluation inputs.
std::vector<TimedPose> parse_pose_file(const std::filesystem::path& path);
std::vector<TimedPose> parse_kitti_native_pose_file(const std::filesystem::path& path);

/// xi = log(prev^-1 * cur), translation-then-rotation ordering.
lie::Se3Tangent se3_label(const lie::Pose& prev, const lie::Pose& cur);

/// Heading change = z of so3_log of the relative rotation; distance =
/// planar norm of the endpoint displacement.
PolarOdometry polar_labels(const lie::Pose& window_first, const lie::Pose& window_last);

/// Disjoint or strided windows of `window` samples with labels computed
/// between the poses matched to the first and last sample of each window
/// (nearest timestamp within half the nominal pose period).
std::vector<WindowedExample> make_windows(const SequenceRecord& record, std::size_t window,
                                          std::size_t stride, InputKind kind, int n);

/// Unbiased covariance of the labels plus epsilon * I regularization.
EmpiricalCovariance empirical_covariance(std::span<const lie::Se3Tangent> labels,
                                         double epsilon = kCovarianceEpsilon);

struct SplitPolicy {
  std::vector<std::string> train;
  std::vector<std::string> test;
};

/// Fixed train/test sequence ids for the named dataset.
SplitPolicy split_policy(const std::string& dataset);

}  // namespace pifeat::data
