#pragma once

// Windowed motion constraints (delta rotation / velocity / position) computed
// from raw IMU samples, plus the flattened 9-d feature form fed to the
// sequence models and the naive per-axis averaging baseline.
//
// Everything here is a pure function over immutable inputs; windows are
// independent and may be processed in parallel by the caller.

#include <cstdint>
#include <span>
#include <vector>

#include "pifeat/imu.hpp"
#include "pifeat/lie.hpp"

namespace pifeat::preint {

struct PreintegratedDelta {
  lie::Rotation delta_r;
  Eigen::Vector3d delta_v = Eigen::Vector3d::Zero();  // m/s, frame of window start
  Eigen::Vector3d delta_p = Eigen::Vector3d::Zero();  // m, frame of window start
  double delta_t = 0.0;                               // s
  std::size_t count = 0;                              // samples consumed
};

/// 9-d feature: [ so3_log(delta_r), delta_v, delta_p ].
using FeatureVector = Eigen::Matrix<double, 9, 1>;
using AveragedSample = Eigen::Matrix<double, 6, 1>;  // [gyro, accel] means

enum class RemainderPolicy {
  kStrict,    // window length must divide evenly (default)
  kDropTail,  // silently discard the remainder
};

/// Left-to-right fold of the delta recursion. Resuming a copied accumulator
/// over the tail of a window is bit-identical to folding the whole window.
class Accumulator {
 public:
  Accumulator(const BiasState& bias, double dt)
      : bias_(bias), dt_(dt) {}

  void add(const ImuSample& sample);
  const PreintegratedDelta& delta() const { return delta_; }

 private:
  BiasState bias_;
  double dt_;
  PreintegratedDelta delta_;
};

/// Deterministic form of the delta recursion over one window (noise terms
/// never enter here; see synthetic_imu for measurement contamination).
/// Throws EmptyWindow / NonMonotonicTimestamps; emits a TimestampJitter
/// warning when observed sample spacing deviates from dt by more than 10%.
PreintegratedDelta preintegrate(std::span<const ImuSample> samples,
                                const BiasState& bias, double dt);

/// One feature per disjoint chunk of `n` samples.
std::vector<FeatureVector> extract_features(std::span<const ImuSample> samples,
                                            int n, const BiasState& bias, double dt,
                                            RemainderPolicy policy = RemainderPolicy::kStrict);

/// Per-chunk arithmetic mean of gyro (3) and accel (3).
std::vector<AveragedSample> average_baseline(std::span<const ImuSample> samples, int n,
                                             RemainderPolicy policy = RemainderPolicy::kStrict);

/// Uniform bias draw in [-range, +range] per component, deterministic per seed.
BiasState randomize_bias(const NoiseSpec& spec, std::uint64_t seed);

FeatureVector flatten(const PreintegratedDelta& delta);
PreintegratedDelta delta_from_features(const FeatureVector& f, double delta_t,
                                       std::size_t count = 0);

}  // namespace pifeat::preint
