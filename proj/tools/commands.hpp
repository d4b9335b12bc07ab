#pragma once

// Subcommand implementations behind the pifeat CLI. Kept as a library so
// integration tests can drive them in-process; tools/main.cpp only parses
// flags. Every command validates its config before writing anything and
// writes outputs atomically (complete or absent).

#include <cstdint>
#include <filesystem>
#include <string>

#include <Eigen/Core>

#include "pifeat/imu.hpp"

namespace pifeat::cli {

struct RunConfig {
  // common
  std::uint64_t seed = 42;
  std::size_t window = 0;  // 0 -> per-format default (1280 kitti, 200 oxford)
  std::size_t stride = 0;  // 0 -> window
  int factor = 10;         // integration factor n
  std::string input_kind = "preintegrated";
  Eigen::Vector3d gravity = standard_gravity();
  std::string remainder_policy = "strict";  // strict | drop-tail

  // inputs
  std::string imu_path;
  std::string pose_path;
  bool kitti_poses = false;
  std::string format = "kitti";  // kitti (two files) | oxford (single file)
  std::string features_path;
  std::string predictions_path;
  std::string archive_path;
  std::string gt_path;

  // outputs
  std::string out_path;
  std::string out_poses_path;
  std::string out_labels_path;
  std::string out_json_path;
  std::string out_csv_path;

  // synth
  std::string traj_kind = "constant-twist";
  Eigen::Vector3d omega = Eigen::Vector3d::Zero();
  Eigen::Vector3d accel = Eigen::Vector3d::Zero();
  double rate_hz = 100.0;
  double duration_s = 10.0;
  double gyro_noise = 0.0;
  double accel_noise = 0.0;
  double gyro_bias_range = 0.0;
  double accel_bias_range = 0.0;

  // integrate
  std::string mode = "se3";  // se3 | polar

  // bench
  int runs = 100;
};

/// Merge a JSON config file under the current values (missing keys keep
/// their defaults). CLI flags are applied after this, so flags win.
void apply_config_file(RunConfig& config, const std::filesystem::path& path);

/// PIFEAT_SEED env override for the default seed.
std::uint64_t default_seed_from_env();

void cmd_synth(const RunConfig& config);
void cmd_extract(const RunConfig& config);
void cmd_infer(const RunConfig& config);
void cmd_integrate(const RunConfig& config);
void cmd_eval(const RunConfig& config);
void cmd_bench(const RunConfig& config);

/// Exit code for an exception class (documented in the README).
int exit_code_for_current_exception();

}  // namespace pifeat::cli
