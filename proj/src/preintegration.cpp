#include "pifeat/preintegration.hpp"

#include <cmath>
#include <cstddef>
#include <string>

#include "pifeat/rng.hpp"

namespace pifeat::preint {

using lie::Rotation;

void Accumulator::add(const ImuSample& sample) {
  const Eigen::Vector3d omega = sample.gyro - bias_.gyro_bias;
  const Eigen::Vector3d accel = sample.accel - bias_.accel_bias;
  // Position first: it consumes the running delta_v and delta_r of index k,
  // before this step advances them.
  delta_.delta_p += delta_.delta_v * dt_ + 0.5 * (delta_.delta_r * accel) * dt_ * dt_;
  delta_.delta_v += (delta_.delta_r * accel) * dt_;
  delta_.delta_r = delta_.delta_r * lie::so3_exp(omega * dt_);
  delta_.delta_t += dt_;
  delta_.count += 1;
}

namespace {

void validate_timestamps(std::span<const ImuSample> samples, double dt) {
  std::size_t jitter_count = 0;
  for (std::size_t i = 1; i < samples.size(); ++i) {
    const double gap = samples[i].timestamp - samples[i - 1].timestamp;
    if (gap <= 0.0) {
      throw NonMonotonicTimestamps("timestamps not strictly increasing at sample " +
                                   std::to_string(i));
    }
    if (std::abs(gap - dt) > 0.1 * dt) {
      ++jitter_count;
    }
  }
  if (jitter_count > 0) {
    warn("TimestampJitter: " + std::to_string(jitter_count) +
         " sample gaps deviate from nominal dt by more than 10%");
  }
}

std::size_t chunk_count(std::size_t total, int n, RemainderPolicy policy) {
  if (n <= 0) {
    throw RemainderPolicyViolation("integration factor must be positive");
  }
  if (policy == RemainderPolicy::kStrict && total % static_cast<std::size_t>(n) != 0) {
    throw RemainderPolicyViolation("sample count " + std::to_string(total) +
                                   " is not divisible by integration factor " +
                                   std::to_string(n));
  }
  return total / static_cast<std::size_t>(n);
}

}  // namespace

PreintegratedDelta preintegrate(std::span<const ImuSample> samples,
                                const BiasState& bias, double dt) {
  if (samples.empty()) {
    throw EmptyWindow("preintegrate requires at least one sample");
  }
  validate_timestamps(samples, dt);
  Accumulator acc(bias, dt);
  for (const ImuSample& s : samples) {
    acc.add(s);
  }
  return acc.delta();
}

std::vector<FeatureVector> extract_features(std::span<const ImuSample> samples,
                                            int n, const BiasState& bias, double dt,
                                            RemainderPolicy policy) {
  const std::size_t chunks = chunk_count(samples.size(), n, policy);
  std::vector<FeatureVector> features;
  features.reserve(chunks);
  for (std::size_t c = 0; c < chunks; ++c) {
    const auto window = samples.subspan(c * static_cast<std::size_t>(n),
                                        static_cast<std::size_t>(n));
    features.push_back(flatten(preintegrate(window, bias, dt)));
  }
  return features;
}

std::vector<AveragedSample> average_baseline(std::span<const ImuSample> samples, int n,
                                             RemainderPolicy policy) {
  const std::size_t chunks = chunk_count(samples.size(), n, policy);
  std::vector<AveragedSample> out;
  out.reserve(chunks);
  for (std::size_t c = 0; c < chunks; ++c) {
    Eigen::Vector3d gyro_sum = Eigen::Vector3d::Zero();
    Eigen::Vector3d accel_sum = Eigen::Vector3d::Zero();
    for (int k = 0; k < n; ++k) {
      const ImuSample& s = samples[c * static_cast<std::size_t>(n) + k];
      gyro_sum += s.gyro;
      accel_sum += s.accel;
    }
    AveragedSample avg;
    avg << gyro_sum / n, accel_sum / n;
    out.push_back(avg);
  }
  return out;
}

BiasState randomize_bias(const NoiseSpec& spec, std::uint64_t seed) {
  if (spec.gyro_bias_range < 0.0 || spec.accel_bias_range < 0.0) {
    throw ConfigError("bias ranges must be nonnegative");
  }
  Rng rng(seed);
  BiasState bias;
  for (int i = 0; i < 3; ++i) {
    bias.gyro_bias[i] = rng.uniform_symmetric(spec.gyro_bias_range);
  }
  for (int i = 0; i < 3; ++i) {
    bias.accel_bias[i] = rng.uniform_symmetric(spec.accel_bias_range);
  }
  return bias;
}

FeatureVector flatten(const PreintegratedDelta& delta) {
  FeatureVector f;
  f << lie::so3_log(delta.delta_r), delta.delta_v, delta.delta_p;
  return f;
}

PreintegratedDelta delta_from_features(const FeatureVector& f, double delta_t,
                                       std::size_t count) {
  PreintegratedDelta delta;
  delta.delta_r = lie::so3_exp(f.head<3>());
  delta.delta_v = f.segment<3>(3);
  delta.delta_p = f.tail<3>();
  delta.delta_t = delta_t;
  delta.count = count;
  return delta;
}

}  // namespace pifeat::preint
