// pifeat: batch front door for the feature extraction / inference /
// evaluation pipeline. All outputs are CSV/JSON except the PIWA weight
// archive; see docs/formats.md.

#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

using pifeat::cli::RunConfig;

void add_vec3_option(CLI::App* app, const std::string& name, Eigen::Vector3d& into,
                     const std::string& help) {
  app->add_option_function<std::vector<double>>(
         name,
         [&into](const std::vector<double>& v) {
           into = Eigen::Vector3d(v[0], v[1], v[2]);
         },
         help)
      ->expected(3)
      ->delimiter(',');
}

void add_common_options(CLI::App* app, RunConfig& config, std::string& config_path) {
  app->add_option("--config", config_path, "JSON config file (flags override it)");
  app->add_option("--seed", config.seed, "deterministic seed");
  app->add_option("--window", config.window,
                  "window length in IMU samples (default: 1280 kitti, 200 oxford)");
  app->add_option("--stride", config.stride, "window stride (default: window)");
  app->add_option("--factor,-n", config.factor, "integration factor n");
  app->add_option("--kind", config.input_kind, "input kind: raw|averaged|preintegrated");
  app->add_option("--remainder-policy", config.remainder_policy,
                  "strict|drop-tail for windows not divisible by n");
  add_vec3_option(app, "--gravity", config.gravity, "world gravity vector");
}

}  // namespace

namespace {

// Find --config before the CLI11 parse so file values sit under flag values.
std::string prescan_config_path(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config" && i + 1 < argc) {
      return argv[i + 1];
    }
    if (arg.rfind("--config=", 0) == 0) {
      return arg.substr(9);
    }
  }
  return {};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"IMU preintegrated features for inertial odometry"};
  app.require_subcommand(1);

  RunConfig config;
  std::string config_path;
  try {
    config.seed = pifeat::cli::default_seed_from_env();
    const std::string pre = prescan_config_path(argc, argv);
    if (!pre.empty()) {
      pifeat::cli::apply_config_file(config, pre);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return pifeat::cli::exit_code_for_current_exception();
  }

  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic IMU + pose recording");
  add_common_options(synth, config, config_path);
  synth->add_option("--traj-kind", config.traj_kind,
                    "constant-twist|piecewise-constant-twist|sinusoidal-planar");
  add_vec3_option(synth, "--omega", config.omega, "body angular velocity [rad/s]");
  add_vec3_option(synth, "--accel", config.accel, "body acceleration [m/s^2]");
  synth->add_option("--rate", config.rate_hz, "sample rate [Hz]");
  synth->add_option("--duration", config.duration_s, "duration [s]");
  synth->add_option("--gyro-noise", config.gyro_noise, "gyro noise std [rad/s]");
  synth->add_option("--accel-noise", config.accel_noise, "accel noise std [m/s^2]");
  synth->add_option("--gyro-bias-range", config.gyro_bias_range, "uniform bias half-width");
  synth->add_option("--accel-bias-range", config.accel_bias_range, "uniform bias half-width");
  synth->add_option("--out", config.out_path, "output IMU CSV")->required();
  synth->add_option("--out-poses", config.out_poses_path, "output pose CSV")->required();

  CLI::App* extract = app.add_subcommand("extract", "cut a recording into feature windows");
  add_common_options(extract, config, config_path);
  extract->add_option("--imu", config.imu_path, "IMU CSV (or combined oxford file)")->required();
  extract->add_option("--poses", config.pose_path, "pose file (kitti format)");
  extract->add_flag("--kitti-poses", config.kitti_poses, "pose file uses the 12-number layout");
  extract->add_option("--format", config.format, "recording format: kitti|oxford");
  extract->add_option("--out", config.out_path, "output features CSV")->required();
  extract->add_option("--out-labels", config.out_labels_path, "optional labels CSV");

  CLI::App* infer = app.add_subcommand("infer", "run a weight archive over feature windows");
  add_common_options(infer, config, config_path);
  infer->add_option("--archive", config.archive_path, "PIWA weight archive")->required();
  infer->add_option("--features", config.features_path, "features CSV from extract")->required();
  infer->add_option("--out", config.out_path, "output predictions CSV")->required();

  CLI::App* integrate = app.add_subcommand("integrate", "chain predictions into a trajectory");
  add_common_options(integrate, config, config_path);
  integrate->add_option("--predictions", config.predictions_path, "predictions CSV")->required();
  integrate->add_option("--mode", config.mode, "se3|polar");
  integrate->add_option("--out", config.out_path, "output trajectory CSV")->required();

  CLI::App* eval = app.add_subcommand("eval", "relative errors between two trajectories");
  add_common_options(eval, config, config_path);
  eval->add_option("--gt", config.gt_path, "ground-truth pose file")->required();
  eval->add_option("--predictions", config.predictions_path, "predicted pose file")->required();
  eval->add_flag("--kitti-poses", config.kitti_poses, "pose files use the 12-number layout");
  eval->add_option("--out-json", config.out_json_path, "metrics JSON")->required();
  eval->add_option("--out-csv", config.out_csv_path, "per-bucket CSV");

  CLI::App* bench = app.add_subcommand("bench", "time feature extraction and inference");
  add_common_options(bench, config, config_path);
  bench->add_option("--runs", config.runs, "timing repetitions (>= 1)");
  bench->add_option("--rate", config.rate_hz, "sample rate [Hz]");
  bench->add_option("--out", config.out_path, "timing JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      pifeat::cli::cmd_synth(config);
    } else if (extract->parsed()) {
      pifeat::cli::cmd_extract(config);
    } else if (infer->parsed()) {
      pifeat::cli::cmd_infer(config);
    } else if (integrate->parsed()) {
      pifeat::cli::cmd_integrate(config);
    } else if (eval->parsed()) {
      pifeat::cli::cmd_eval(config);
    } else if (bench->parsed()) {
      pifeat::cli::cmd_bench(config);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return pifeat::cli::exit_code_for_current_exception();
  }
  return 0;
}
