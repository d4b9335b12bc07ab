#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <random>
#include <vector>

#include <json.hpp>

#include "pifeat/csv.hpp"
#include "pifeat/dataset.hpp"
#include "pifeat/inference.hpp"
#include "pifeat/losses.hpp"
#include "pifeat/metrics.hpp"
#include "pifeat/preintegration.hpp"
#include "pifeat/synthetic.hpp"
#include "pifeat/trajectory.hpp"
#include "pifeat/weight_archive.hpp"

namespace pifeat::cli {

namespace {

using csv::format_double;
using csv::format_float;

void require_config(bool ok, const std::string& message) {
  if (!ok) {
    throw ConfigError(message);
  }
}

// 1280-sample windows for vehicle recordings, 200 for pedestrian ones
std::size_t effective_window(const RunConfig& c) {
  if (c.window != 0) {
    return c.window;
  }
  return c.format == "oxford" ? 200 : 1280;
}

std::size_t effective_stride(const RunConfig& c, std::size_t window) {
  return c.stride == 0 ? window : c.stride;
}

void validate_remainder_policy(const RunConfig& c) {
  if (c.remainder_policy != "strict" && c.remainder_policy != "drop-tail") {
    throw ConfigError("unknown remainder policy '" + c.remainder_policy +
                      "' (strict|drop-tail)");
  }
}

Eigen::Vector3d vec_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) {
    throw ConfigError("expected a 3-element array");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

synth::TrajectorySpec trajectory_spec(const RunConfig& c) {
  synth::TrajectorySpec spec;
  if (c.traj_kind == "constant-twist") {
    spec.kind = synth::TrajectoryKind::kConstantTwist;
  } else if (c.traj_kind == "piecewise-constant-twist") {
    spec.kind = synth::TrajectoryKind::kPiecewiseConstantTwist;
    // two half-duration segments: the configured twist, then its mirror
    spec.segments = {
        synth::TwistSegment{c.omega, c.accel, c.duration_s / 2.0},
        synth::TwistSegment{-c.omega, -c.accel, c.duration_s / 2.0},
    };
  } else if (c.traj_kind == "sinusoidal-planar") {
    spec.kind = synth::TrajectoryKind::kSinusoidalPlanar;
    spec.sine_accel_amplitude = c.accel.norm();
    spec.sine_gyro_amplitude = c.omega.norm();
  } else {
    throw ConfigError("unknown trajectory kind '" + c.traj_kind + "'");
  }
  spec.angular_velocity = c.omega;
  spec.body_accel = c.accel;
  spec.rate_hz = c.rate_hz;
  spec.duration_s = c.duration_s;
  return spec;
}

void write_pose_row(std::ostream& out, double time, const lie::Pose& pose) {
  out << format_double(time);
  const Eigen::Matrix3d& m = pose.rotation.matrix();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      out << ',' << format_double(m(r, c));
    }
  }
  for (int i = 0; i < 3; ++i) {
    out << ',' << format_double(pose.translation[i]);
  }
  out << '\n';
}

data::SequenceRecord load_record(const RunConfig& c) {
  if (c.format == "oxford") {
    require_config(!c.imu_path.empty(), "oxford format needs --imu (single combined file)");
    return data::parse_oxford_sequence(c.imu_path);
  }
  require_config(c.format == "kitti", "unknown --format '" + c.format + "' (kitti|oxford)");
  require_config(!c.imu_path.empty() && !c.pose_path.empty(),
                 "kitti format needs --imu and --poses");
  return data::parse_kitti_sequence(c.imu_path, c.pose_path, c.kitti_poses);
}

struct TimingStats {
  double median_us = 0.0;
  double p95_us = 0.0;
};

TimingStats stats_from(std::vector<double>& samples_us) {
  std::sort(samples_us.begin(), samples_us.end());
  TimingStats s;
  s.median_us = samples_us[samples_us.size() / 2];
  s.p95_us = samples_us[std::min(samples_us.size() - 1,
                                 static_cast<std::size_t>(0.95 * samples_us.size()))];
  return s;
}

nn::WeightArchive random_archive(const nn::ArchiveMetadata& metadata, std::uint64_t seed) {
  nn::WeightArchive archive = nn::zero_archive(metadata);
  std::mt19937_64 engine(seed);
  std::uniform_real_distribution<float> u(-0.2f, 0.2f);
  for (auto& [name, tensor] : archive.tensors) {
    for (float& v : tensor.data) {
      v = u(engine);
    }
  }
  return archive;
}

}  // namespace

void apply_config_file(RunConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open config file " + path.string());
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("bad config JSON in " + path.string() + ": " + e.what());
  }
  const auto get = [&](const char* key, auto& into) {
    if (j.contains(key)) {
      into = j.at(key).template get<std::decay_t<decltype(into)>>();
    }
  };
  get("seed", config.seed);
  get("window", config.window);
  get("stride", config.stride);
  get("factor", config.factor);
  get("input_kind", config.input_kind);
  get("remainder_policy", config.remainder_policy);
  get("imu", config.imu_path);
  get("poses", config.pose_path);
  get("format", config.format);
  get("features", config.features_path);
  get("predictions", config.predictions_path);
  get("archive", config.archive_path);
  get("gt", config.gt_path);
  get("out", config.out_path);
  get("out_poses", config.out_poses_path);
  get("out_labels", config.out_labels_path);
  get("out_json", config.out_json_path);
  get("out_csv", config.out_csv_path);
  get("traj_kind", config.traj_kind);
  get("rate", config.rate_hz);
  get("duration", config.duration_s);
  get("gyro_noise", config.gyro_noise);
  get("accel_noise", config.accel_noise);
  get("gyro_bias_range", config.gyro_bias_range);
  get("accel_bias_range", config.accel_bias_range);
  get("mode", config.mode);
  get("runs", config.runs);
  if (j.contains("kitti_poses")) {
    config.kitti_poses = j.at("kitti_poses").get<bool>();
  }
  if (j.contains("omega")) {
    config.omega = vec_from_json(j.at("omega"));
  }
  if (j.contains("accel")) {
    config.accel = vec_from_json(j.at("accel"));
  }
  if (j.contains("gravity")) {
    config.gravity = vec_from_json(j.at("gravity"));
  }
}

std::uint64_t default_seed_from_env() {
  if (const char* env = std::getenv("PIFEAT_SEED"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0') {
      return static_cast<std::uint64_t>(v);
    }
    throw ConfigError("PIFEAT_SEED is not an unsigned integer");
  }
  return 42;
}

void cmd_synth(const RunConfig& config) {
  require_config(!config.out_path.empty() && !config.out_poses_path.empty(),
                 "synth needs --out (IMU CSV) and --out-poses (pose CSV)");
  require_config(config.duration_s > 0.0 && config.rate_hz > 0.0,
                 "synth needs positive --rate and --duration");

  const synth::TrajectorySpec spec = trajectory_spec(config);
  synth::NavState initial;
  const auto states = synth::generate_states(spec, initial, config.gravity);

  NoiseSpec noise;
  noise.gyro_noise_std = config.gyro_noise;
  noise.accel_noise_std = config.accel_noise;
  noise.gyro_bias_range = config.gyro_bias_range;
  noise.accel_bias_range = config.accel_bias_range;
  const BiasState bias = preint::randomize_bias(noise, config.seed);
  const auto samples =
      synth::states_to_measurements(states, config.gravity, bias, noise, config.seed + 1);

  csv::AtomicFileWriter imu_writer(config.out_path);
  imu_writer.stream() << "t,gx,gy,gz,ax,ay,az\n";
  for (const ImuSample& s : samples) {
    imu_writer.stream() << format_double(s.timestamp);
    for (int i = 0; i < 3; ++i) imu_writer.stream() << ',' << format_double(s.gyro[i]);
    for (int i = 0; i < 3; ++i) imu_writer.stream() << ',' << format_double(s.accel[i]);
    imu_writer.stream() << '\n';
  }

  csv::AtomicFileWriter pose_writer(config.out_poses_path);
  pose_writer.stream() << "t,r00,r01,r02,r10,r11,r12,r20,r21,r22,tx,ty,tz\n";
  // one pose per IMU sample timestamp, so the files re-parse as a record
  for (std::size_t k = 0; k < samples.size(); ++k) {
    write_pose_row(pose_writer.stream(), states[k].time,
                   lie::Pose(states[k].rotation, states[k].position));
  }
  imu_writer.commit();
  pose_writer.commit();
}

void cmd_extract(const RunConfig& config) {
  require_config(!config.out_path.empty(), "extract needs --out (features CSV)");
  validate_remainder_policy(config);
  const data::InputKind kind = data::input_kind_from_string(config.input_kind);

  std::size_t window = effective_window(config);
  const std::size_t n = static_cast<std::size_t>(config.factor);
  if (kind != data::InputKind::kRaw && config.remainder_policy == "drop-tail" &&
      config.factor > 0 && window % n != 0) {
    window -= window % n;  // explicit opt-in to trimming the window
  }

  const data::SequenceRecord record = load_record(config);
  const auto examples =
      data::make_windows(record, window, effective_stride(config, window), kind, config.factor);

  csv::AtomicFileWriter writer(config.out_path);
  std::ostream& out = writer.stream();
  if (kind == data::InputKind::kPreintegrated) {
    out << "window,step,f0,f1,f2,f3,f4,f5,f6,f7,f8\n";
  } else {
    out << "window,step,gx,gy,gz,ax,ay,az\n";
  }
  for (std::size_t w = 0; w < examples.size(); ++w) {
    const data::WindowedExample& ex = examples[w];
    const std::size_t rows = ex.feature_count();
    for (std::size_t step = 0; step < rows; ++step) {
      out << w << ',' << step;
      switch (kind) {
        case data::InputKind::kPreintegrated: {
          const auto& f = std::get<std::vector<preint::FeatureVector>>(ex.features)[step];
          for (int i = 0; i < 9; ++i) out << ',' << format_double(f[i]);
          break;
        }
        case data::InputKind::kAveraged: {
          const auto& a = std::get<std::vector<preint::AveragedSample>>(ex.features)[step];
          for (int i = 0; i < 6; ++i) out << ',' << format_double(a[i]);
          break;
        }
        case data::InputKind::kRaw: {
          const auto& s = std::get<std::vector<ImuSample>>(ex.features)[step];
          for (int i = 0; i < 3; ++i) out << ',' << format_double(s.gyro[i]);
          for (int i = 0; i < 3; ++i) out << ',' << format_double(s.accel[i]);
          break;
        }
      }
      out << '\n';
    }
  }

  if (!config.out_labels_path.empty()) {
    csv::AtomicFileWriter labels(config.out_labels_path);
    labels.stream() << "window,first_sample,last_sample,xi0,xi1,xi2,xi3,xi4,xi5,dl,dphi\n";
    for (std::size_t w = 0; w < examples.size(); ++w) {
      const data::WindowedExample& ex = examples[w];
      labels.stream() << w << ',' << ex.first_sample << ',' << ex.last_sample;
      for (int i = 0; i < 6; ++i) labels.stream() << ',' << format_double(ex.se3_label[i]);
      labels.stream() << ',' << format_double(ex.polar_label.delta_l) << ','
                      << format_double(ex.polar_label.delta_phi) << '\n';
    }
    labels.commit();
  }
  writer.commit();
}

void cmd_infer(const RunConfig& config) {
  require_config(!config.archive_path.empty(), "infer needs --archive");
  require_config(!config.features_path.empty(), "infer needs --features");
  require_config(!config.out_path.empty(), "infer needs --out");

  const nn::WeightArchive archive = nn::load_archive(config.archive_path);
  const nn::ModelSpec spec = nn::make_model_spec(archive.metadata);

  // group feature rows by the leading window index
  const auto rows = csv::read_rows(config.features_path);
  std::vector<std::vector<std::vector<float>>> windows;
  for (const csv::Row& row : rows) {
    if (windows.empty() && !row.fields.empty() && row.fields.front() == "window") {
      continue;  // header
    }
    if (row.fields.size() < 3) {
      throw ParseError(config.features_path + ":" + std::to_string(row.line_number) +
                       ": expected window,step,values");
    }
    const auto w = static_cast<std::size_t>(
        csv::parse_double(row.fields[0], config.features_path, row.line_number));
    if (w >= windows.size()) {
      windows.resize(w + 1);
    }
    std::vector<float> values;
    values.reserve(row.fields.size() - 2);
    for (std::size_t i = 2; i < row.fields.size(); ++i) {
      values.push_back(static_cast<float>(
          csv::parse_double(row.fields[i], config.features_path, row.line_number)));
    }
    windows[w].push_back(std::move(values));
  }

  csv::AtomicFileWriter writer(config.out_path);
  std::ostream& out = writer.stream();
  const bool polar = spec.architecture != nn::Architecture::kBaselineSe3;
  out << (polar ? "window,dl,dphi\n" : "window,step,xi0,xi1,xi2,xi3,xi4,xi5\n");
  for (std::size_t w = 0; w < windows.size(); ++w) {
    const auto& steps = windows[w];
    if (steps.empty()) {
      throw ParseError(config.features_path + ": window " + std::to_string(w) + " has no rows");
    }
    nn::Tensor input = nn::Tensor::zeros({steps.size(), steps.front().size()});
    for (std::size_t t = 0; t < steps.size(); ++t) {
      if (steps[t].size() != steps.front().size()) {
        throw ParseError(config.features_path + ": ragged rows in window " + std::to_string(w));
      }
      for (std::size_t d = 0; d < steps[t].size(); ++d) {
        input.at2(t, d) = steps[t][d];
      }
    }
    const nn::ModelOutput result = nn::run_model(spec, archive, input);
    if (polar) {
      out << w << ',' << format_float(static_cast<float>(result.polar.delta_l)) << ','
          << format_float(static_cast<float>(result.polar.delta_phi)) << '\n';
    } else {
      for (std::size_t t = 0; t < result.se3_steps.size(); ++t) {
        out << w << ',' << t;
        for (int i = 0; i < 6; ++i) {
          out << ',' << format_float(static_cast<float>(result.se3_steps[t][i]));
        }
        out << '\n';
      }
    }
  }
  writer.commit();
}

void cmd_integrate(const RunConfig& config) {
  require_config(!config.predictions_path.empty(), "integrate needs --predictions");
  require_config(!config.out_path.empty(), "integrate needs --out");

  const auto rows = csv::read_rows(config.predictions_path);
  if (config.mode == "polar") {
    std::vector<data::PolarOdometry> steps;
    for (const csv::Row& row : rows) {
      if (steps.empty() && !row.fields.empty() && row.fields.front() == "window") {
        continue;
      }
      if (row.fields.size() != 3) {
        throw ParseError(config.predictions_path + ":" + std::to_string(row.line_number) +
                         ": expected window,dl,dphi");
      }
      steps.push_back(data::PolarOdometry{
          csv::parse_double(row.fields[1], config.predictions_path, row.line_number),
          csv::parse_double(row.fields[2], config.predictions_path, row.line_number)});
    }
    const auto states = traj::polar_integrate(traj::PlanarState{}, steps);
    csv::AtomicFileWriter writer(config.out_path);
    writer.stream() << "step,phi,x,y\n";
    for (std::size_t k = 0; k < states.size(); ++k) {
      writer.stream() << k << ',' << format_double(states[k].heading) << ','
                      << format_double(states[k].x) << ',' << format_double(states[k].y) << '\n';
    }
    writer.commit();
    return;
  }
  require_config(config.mode == "se3", "unknown --mode '" + config.mode + "' (se3|polar)");

  std::vector<lie::Se3Tangent> deltas;
  for (const csv::Row& row : rows) {
    if (deltas.empty() && !row.fields.empty() && row.fields.front() == "window") {
      continue;
    }
    if (row.fields.size() != 8) {
      throw ParseError(config.predictions_path + ":" + std::to_string(row.line_number) +
                       ": expected window,step,xi0..xi5");
    }
    lie::Se3Tangent xi;
    for (int i = 0; i < 6; ++i) {
      xi[i] = csv::parse_double(row.fields[2 + i], config.predictions_path, row.line_number);
    }
    deltas.push_back(xi);
  }
  const auto poses = traj::se3_chain(lie::Pose{}, deltas);
  csv::AtomicFileWriter writer(config.out_path);
  writer.stream() << "t,r00,r01,r02,r10,r11,r12,r20,r21,r22,tx,ty,tz\n";
  for (std::size_t k = 0; k < poses.size(); ++k) {
    write_pose_row(writer.stream(), static_cast<double>(k), poses[k]);
  }
  writer.commit();
}

void cmd_eval(const RunConfig& config) {
  require_config(!config.gt_path.empty() && !config.predictions_path.empty(),
                 "eval needs --gt and --predictions (pose CSVs)");
  require_config(!config.out_json_path.empty(), "eval needs --out-json");

  std::vector<lie::Pose> gt;
  std::vector<lie::Pose> pred;
  const auto read_pose_file = [&](const std::string& path, std::vector<lie::Pose>& into) {
    const auto record = config.kitti_poses ? data::parse_kitti_native_pose_file(path)
                                           : data::parse_pose_file(path);
    into.reserve(record.size());
    for (const auto& tp : record) {
      into.push_back(tp.pose);
    }
  };
  read_pose_file(config.gt_path, gt);
  read_pose_file(config.predictions_path, pred);

  const metrics::RelativeErrorReport report = metrics::kitti_relative_errors(gt, pred);

  nlohmann::json j;
  j["avg_t_rel_percent"] = report.avg_t_rel_percent;
  j["avg_r_rel_deg_per_100m"] = report.avg_r_rel_deg_per_100m;
  j["segments"] = report.segments;
  j["buckets"] = nlohmann::json::array();
  for (const auto& b : report.buckets) {
    j["buckets"].push_back({{"length_m", b.length_m},
                            {"t_rel_percent", b.t_rel_percent},
                            {"r_rel_deg_per_100m", b.r_rel_deg_per_100m},
                            {"segments", b.segments}});
  }
  csv::AtomicFileWriter json_writer(config.out_json_path);
  json_writer.stream() << j.dump(2) << '\n';
  json_writer.commit();

  if (!config.out_csv_path.empty()) {
    csv::AtomicFileWriter csv_writer(config.out_csv_path);
    csv_writer.stream() << "length_m,t_rel_percent,r_rel_deg_per_100m,segments\n";
    for (const auto& b : report.buckets) {
      csv_writer.stream() << format_double(b.length_m) << ',' << format_double(b.t_rel_percent)
                          << ',' << format_double(b.r_rel_deg_per_100m) << ',' << b.segments
                          << '\n';
    }
    csv_writer.commit();
  }
}

void cmd_bench(const RunConfig& config_in) {
  RunConfig config = config_in;
  if (config.window == 0) {
    config.window = 200;
  }
  require_config(config.runs > 0, "bench needs --runs >= 1");
  require_config(!config.out_path.empty(), "bench needs --out (timing JSON)");
  require_config(config.factor > 0 && config.window % static_cast<std::size_t>(config.factor) == 0,
                 "bench window must be divisible by the integration factor");

  using clock = std::chrono::steady_clock;
  const auto to_us = [](clock::duration d) {
    return std::chrono::duration<double, std::micro>(d).count();
  };

  // fixture window of samples for the extraction timing
  synth::TrajectorySpec spec;
  spec.kind = synth::TrajectoryKind::kSinusoidalPlanar;
  spec.sine_accel_amplitude = 1.0;
  spec.sine_gyro_amplitude = 0.5;
  spec.rate_hz = config.rate_hz;
  spec.duration_s = static_cast<double>(config.window) / config.rate_hz;
  const auto states = synth::generate_states(spec, synth::NavState{}, config.gravity);
  const auto samples = synth::states_to_measurements(states, config.gravity, BiasState{},
                                                     NoiseSpec{}, config.seed);
  const double dt = 1.0 / config.rate_hz;

  std::vector<double> extract_us;
  extract_us.reserve(static_cast<std::size_t>(config.runs));
  std::vector<preint::FeatureVector> features;
  for (int r = 0; r < config.runs; ++r) {
    const auto t0 = clock::now();
    features = preint::extract_features(samples, config.factor, BiasState{}, dt);
    extract_us.push_back(to_us(clock::now() - t0));
  }

  nn::ArchiveMetadata pre_meta;
  pre_meta.architecture = nn::Architecture::kBaselineSe3;
  pre_meta.input_kind = data::InputKind::kPreintegrated;
  pre_meta.integration_factor = config.factor;
  pre_meta.window = static_cast<int>(config.window);
  const nn::WeightArchive pre_archive = random_archive(pre_meta, config.seed);

  nn::ArchiveMetadata raw_meta = pre_meta;
  raw_meta.input_kind = data::InputKind::kRaw;
  const nn::WeightArchive raw_archive = random_archive(raw_meta, config.seed + 1);

  const nn::Tensor pre_input = nn::pack_features(features);
  const nn::Tensor raw_input = nn::pack_raw(samples);

  const auto time_model = [&](const nn::WeightArchive& archive, const nn::Tensor& input) {
    std::vector<double> us;
    us.reserve(static_cast<std::size_t>(config.runs));
    (void)nn::run_model(archive, input);  // warm up
    for (int r = 0; r < config.runs; ++r) {
      const auto t0 = clock::now();
      (void)nn::run_model(archive, input);
      us.push_back(to_us(clock::now() - t0));
    }
    return us;
  };

  std::vector<double> pre_us = time_model(pre_archive, pre_input);
  std::vector<double> raw_us = time_model(raw_archive, raw_input);

  const TimingStats extract_stats = stats_from(extract_us);
  const TimingStats pre_stats = stats_from(pre_us);
  const TimingStats raw_stats = stats_from(raw_us);

  nlohmann::json j;
  j["runs"] = config.runs;
  j["window"] = config.window;
  j["integration_factor"] = config.factor;
  j["feature_extraction_us"] = {{"median", extract_stats.median_us},
                                {"p95", extract_stats.p95_us}};
  j["preintegrated_inference_us"] = {{"median", pre_stats.median_us},
                                     {"p95", pre_stats.p95_us}};
  j["raw_inference_us"] = {{"median", raw_stats.median_us}, {"p95", raw_stats.p95_us}};
  j["raw_over_preintegrated_ratio"] = raw_stats.median_us / pre_stats.median_us;

  csv::AtomicFileWriter writer(config.out_path);
  writer.stream() << j.dump(2) << '\n';
  writer.commit();
}

int exit_code_for_current_exception() {
  try {
    throw;
  } catch (const ConfigError&) {
    return 2;
  } catch (const ParseError&) {
    return 3;
  } catch (const NonMonotonicTimestamps&) {
    return 4;
  } catch (const NonUniformTimestamps&) {
    return 4;
  } catch (const AlignmentError&) {
    return 4;
  } catch (const ShapeMismatch&) {
    return 5;
  } catch (const ArchitectureMismatch&) {
    return 5;
  } catch (const IoError&) {
    return 6;
  } catch (const Error&) {
    return 7;
  } catch (...) {
    return 1;
  }
}

}  // namespace pifeat::cli
