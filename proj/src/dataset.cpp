#include "pifeat/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "pifeat/csv.hpp"

namespace pifeat::data {

using lie::Pose;
using lie::Rotation;

namespace {

bool looks_like_header(const csv::Row& row) {
  if (row.fields.empty()) {
    return false;
  }
  char* end = nullptr;
  const std::string& f = row.fields.front();
  std::strtod(f.c_str(), &end);
  return end == f.c_str();
}

void check_monotonic(const std::vector<double>& times, const std::filesystem::path& path) {
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (times[i] <= times[i - 1]) {
      throw NonMonotonicTimestamps(path.string() + ": timestamps not strictly increasing (row " +
                                   std::to_string(i + 1) + ")");
    }
  }
}

double estimate_rate(const std::vector<double>& times) {
  if (times.size() < 2) {
    return 0.0;
  }
  std::vector<double> gaps;
  gaps.reserve(times.size() - 1);
  for (std::size_t i = 1; i < times.size(); ++i) {
    gaps.push_back(times[i] - times[i - 1]);
  }
  std::nth_element(gaps.begin(), gaps.begin() + gaps.size() / 2, gaps.end());
  const double median = gaps[gaps.size() / 2];
  return median > 0.0 ? 1.0 / median : 0.0;
}

// Ground-truth files carry limited decimal precision; renormalize small
// orthonormality violations, reject anything worse.
Rotation parse_rotation(const Eigen::Matrix3d& m, const std::filesystem::path& path,
                        std::size_t line_number) {
  Rotation r(m, Rotation::UncheckedTag{});
  if (r.is_valid()) {
    return r;
  }
  if (r.is_valid(1e-5)) {
    return r.renormalized();
  }
  throw ParseError(path.string() + ":" + std::to_string(line_number) +
                   ": rotation block is not orthonormal");
}

std::vector<ImuSample> parse_imu_csv(const std::filesystem::path& path) {
  const auto rows = csv::read_rows(path);
  std::vector<ImuSample> samples;
  samples.reserve(rows.size());
  std::vector<double> times;
  for (const csv::Row& row : rows) {
    if (samples.empty() && looks_like_header(row)) {
      continue;
    }
    if (row.fields.size() != 7) {
      throw ParseError(path.string() + ":" + std::to_string(row.line_number) +
                       ": expected 7 fields, got " + std::to_string(row.fields.size()));
    }
    ImuSample s;
    s.timestamp = csv::parse_double(row.fields[0], path, row.line_number);
    for (int i = 0; i < 3; ++i) {
      s.gyro[i] = csv::parse_double(row.fields[1 + i], path, row.line_number);
      s.accel[i] = csv::parse_double(row.fields[4 + i], path, row.line_number);
    }
    times.push_back(s.timestamp);
    samples.push_back(s);
  }
  check_monotonic(times, path);
  return samples;
}

std::vector<TimedPose> parse_pose_csv(const std::filesystem::path& path) {
  const auto rows = csv::read_rows(path);
  std::vector<TimedPose> poses;
  std::vector<double> times;
  for (const csv::Row& row : rows) {
    if (poses.empty() && looks_like_header(row)) {
      continue;
    }
    if (row.fields.size() != 13) {
      throw ParseError(path.string() + ":" + std::to_string(row.line_number) +
                       ": expected 13 fields, got " + std::to_string(row.fields.size()));
    }
    TimedPose tp;
    tp.time = csv::parse_double(row.fields[0], path, row.line_number);
    Eigen::Matrix3d m;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) {
        m(r, c) = csv::parse_double(row.fields[1 + 3 * r + c], path, row.line_number);
      }
    }
    Eigen::Vector3d t;
    for (int i = 0; i < 3; ++i) {
      t[i] = csv::parse_double(row.fields[10 + i], path, row.line_number);
    }
    tp.pose = Pose(parse_rotation(m, path, row.line_number), t);
    times.push_back(tp.time);
    poses.push_back(tp);
  }
  check_monotonic(times, path);
  return poses;
}

// KITTI devkit layout: 12 numbers per line, rows of [R | t], timestamps
// implied at 10 Hz.
std::vector<TimedPose> parse_kitti_native_poses(const std::filesystem::path& path) {
  const auto rows = csv::read_rows(path, ' ');
  std::vector<TimedPose> poses;
  poses.reserve(rows.size());
  for (std::size_t index = 0; index < rows.size(); ++index) {
    const csv::Row& row = rows[index];
    if (row.fields.size() != 12) {
      throw ParseError(path.string() + ":" + std::to_string(row.line_number) +
                       ": expected 12 fields, got " + std::to_string(row.fields.size()));
    }
    Eigen::Matrix3d m;
    Eigen::Vector3d t;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) {
        m(r, c) = csv::parse_double(row.fields[4 * r + c], path, row.line_number);
      }
      t[r] = csv::parse_double(row.fields[4 * r + 3], path, row.line_number);
    }
    TimedPose tp;
    tp.time = 0.1 * static_cast<double>(index);
    tp.pose = Pose(parse_rotation(m, path, row.line_number), t);
    poses.push_back(tp);
  }
  return poses;
}

void validate_record(const SequenceRecord& record, const std::filesystem::path& context) {
  if (record.imu.empty()) {
    throw ParseError(context.string() + ": no IMU samples");
  }
  if (record.poses.empty()) {
    throw ParseError(context.string() + ": no poses");
  }
  const double slack = record.pose_rate_hz > 0.0 ? 0.5 / record.pose_rate_hz : 0.0;
  if (record.poses.front().time < record.imu.front().timestamp - slack ||
      record.poses.back().time > record.imu.back().timestamp + slack) {
    throw AlignmentError(context.string() + ": pose timestamps fall outside the IMU time span");
  }
}

// Nearest pose within half the nominal pose period, or nullptr.
const TimedPose* find_pose(const SequenceRecord& record, double time) {
  const double tol = record.pose_rate_hz > 0.0 ? 0.5 / record.pose_rate_hz
                                               : 0.5 / record.imu_rate_hz;
  auto it = std::lower_bound(record.poses.begin(), record.poses.end(), time,
                             [](const TimedPose& p, double t) { return p.time < t; });
  const TimedPose* best = nullptr;
  double best_dist = tol;
  if (it != record.poses.end() && std::abs(it->time - time) <= best_dist) {
    best = &*it;
    best_dist = std::abs(it->time - time);
  }
  if (it != record.poses.begin()) {
    const TimedPose* prev = &*(it - 1);
    if (std::abs(prev->time - time) <= best_dist) {
      best = prev;
    }
  }
  return best;
}

}  // namespace

InputKind input_kind_from_string(const std::string& s) {
  if (s == "raw") return InputKind::kRaw;
  if (s == "averaged") return InputKind::kAveraged;
  if (s == "preintegrated") return InputKind::kPreintegrated;
  throw ConfigError("unknown input kind '" + s + "' (raw|averaged|preintegrated)");
}

std::string to_string(InputKind kind) {
  switch (kind) {
    case InputKind::kRaw: return "raw";
    case InputKind::kAveraged: return "averaged";
    case InputKind::kPreintegrated: return "preintegrated";
  }
  return "?";
}

std::size_t WindowedExample::feature_count() const {
  return std::visit([](const auto& v) { return v.size(); }, features);
}

std::vector<TimedPose> parse_pose_file(const std::filesystem::path& path) {
  return parse_pose_csv(path);
}

std::vector<TimedPose> parse_kitti_native_pose_file(const std::filesystem::path& path) {
  return parse_kitti_native_poses(path);
}

SequenceRecord parse_kitti_sequence(const std::filesystem::path& imu_path,
                                    const std::filesystem::path& pose_path,
                                    bool kitti_native_poses) {
  SequenceRecord record;
  record.imu = parse_imu_csv(imu_path);
  record.poses = kitti_native_poses ? parse_kitti_native_poses(pose_path)
                                    : parse_pose_csv(pose_path);
  std::vector<double> imu_times;
  imu_times.reserve(record.imu.size());
  for (const auto& s : record.imu) imu_times.push_back(s.timestamp);
  std::vector<double> pose_times;
  pose_times.reserve(record.poses.size());
  for (const auto& p : record.poses) pose_times.push_back(p.time);
  record.imu_rate_hz = estimate_rate(imu_times);
  record.pose_rate_hz = kitti_native_poses ? 10.0 : estimate_rate(pose_times);
  validate_record(record, imu_path);
  return record;
}

SequenceRecord parse_oxford_sequence(const std::filesystem::path& path) {
  const auto rows = csv::read_rows(path);
  SequenceRecord record;
  std::vector<double> times;
  for (const csv::Row& row : rows) {
    if (record.imu.empty() && looks_like_header(row)) {
      continue;
    }
    if (row.fields.size() != 19) {
      throw ParseError(path.string() + ":" + std::to_string(row.line_number) +
                       ": expected 19 fields, got " + std::to_string(row.fields.size()));
    }
    ImuSample s;
    s.timestamp = csv::parse_double(row.fields[0], path, row.line_number);
    for (int i = 0; i < 3; ++i) {
      s.gyro[i] = csv::parse_double(row.fields[1 + i], path, row.line_number);
      s.accel[i] = csv::parse_double(row.fields[4 + i], path, row.line_number);
    }
    Eigen::Matrix3d m;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) {
        m(r, c) = csv::parse_double(row.fields[7 + 3 * r + c], path, row.line_number);
      }
    }
    Eigen::Vector3d t;
    for (int i = 0; i < 3; ++i) {
      t[i] = csv::parse_double(row.fields[16 + i], path, row.line_number);
    }
    record.imu.push_back(s);
    record.poses.push_back(TimedPose{s.timestamp, Pose(parse_rotation(m, path, row.line_number), t)});
    times.push_back(s.timestamp);
  }
  check_monotonic(times, path);
  record.imu_rate_hz = estimate_rate(times);
  record.pose_rate_hz = record.imu_rate_hz;
  validate_record(record, path);
  return record;
}

lie::Se3Tangent se3_label(const Pose& prev, const Pose& cur) {
  return lie::se3_log(lie::relative_pose(prev, cur));
}

PolarOdometry polar_labels(const Pose& window_first, const Pose& window_last) {
  PolarOdometry out;
  const Rotation rel = window_first.rotation.inverse() * window_last.rotation;
  out.delta_phi = lie::wrap_angle(lie::so3_log(rel).z());
  const Eigen::Vector3d d = window_last.translation - window_first.translation;
  out.delta_l = std::hypot(d.x(), d.y());
  return out;
}

std::vector<WindowedExample> make_windows(const SequenceRecord& record, std::size_t window,
                                          std::size_t stride, InputKind kind, int n) {
  if (window == 0 || stride == 0) {
    throw ConfigError("window and stride must be positive");
  }
  if (kind != InputKind::kRaw) {
    if (n <= 0 || window % static_cast<std::size_t>(n) != 0) {
      throw RemainderPolicyViolation("window " + std::to_string(window) +
                                     " is not divisible by integration factor " +
                                     std::to_string(n));
    }
  }
  const double dt = 1.0 / record.imu_rate_hz;
  std::vector<WindowedExample> examples;
  for (std::size_t start = 0; start + window <= record.imu.size(); start += stride) {
    const std::size_t last = start + window - 1;
    const TimedPose* first_pose = find_pose(record, record.imu[start].timestamp);
    const TimedPose* last_pose = find_pose(record, record.imu[last].timestamp);
    if (first_pose == nullptr || last_pose == nullptr) {
      throw AlignmentError("no ground-truth pose near window [" + std::to_string(start) + ", " +
                           std::to_string(last) + "]");
    }
    WindowedExample ex;
    ex.kind = kind;
    ex.first_sample = start;
    ex.last_sample = last;
    ex.se3_label = se3_label(first_pose->pose, last_pose->pose);
    ex.polar_label = polar_labels(first_pose->pose, last_pose->pose);
    const std::span<const ImuSample> slice(record.imu.data() + start, window);
    switch (kind) {
      case InputKind::kRaw:
        ex.features = std::vector<ImuSample>(slice.begin(), slice.end());
        break;
      case InputKind::kAveraged:
        ex.features = preint::average_baseline(slice, n);
        break;
      case InputKind::kPreintegrated:
        ex.features = preint::extract_features(slice, n, BiasState{}, dt);
        break;
    }
    examples.push_back(std::move(ex));
  }
  return examples;
}

EmpiricalCovariance empirical_covariance(std::span<const lie::Se3Tangent> labels,
                                         double epsilon) {
  if (labels.size() < 2) {
    throw InsufficientSamples("covariance needs at least two labels");
  }
  EmpiricalCovariance out;
  out.count = labels.size();
  lie::Se3Tangent mean = lie::Se3Tangent::Zero();
  for (const auto& xi : labels) {
    mean += xi;
  }
  mean /= static_cast<double>(labels.size());
  out.mean = mean;
  Eigen::Matrix<double, 6, 6> sigma = Eigen::Matrix<double, 6, 6>::Zero();
  for (const auto& xi : labels) {
    const lie::Se3Tangent d = xi - mean;
    sigma += d * d.transpose();
  }
  sigma /= static_cast<double>(labels.size() - 1);
  out.sigma = sigma + epsilon * Eigen::Matrix<double, 6, 6>::Identity();
  return out;
}

SplitPolicy split_policy(const std::string& dataset) {
  if (dataset == "kitti") {
    return SplitPolicy{{"00", "01", "02", "04", "06", "08", "09"}, {"05", "07", "10"}};
  }
  throw UnknownDataset("no split policy for dataset '" + dataset + "'");
}

}  // namespace pifeat::data
