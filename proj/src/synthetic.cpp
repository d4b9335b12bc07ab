#include "pifeat/synthetic.hpp"

#include <cmath>
#include <string>

#include "pifeat/rng.hpp"

namespace pifeat::synth {

using lie::Rotation;
using Eigen::Vector3d;

namespace {

struct BodySignal {
  Vector3d omega;
  Vector3d accel;
};

BodySignal body_signal(const TrajectorySpec& spec, double t) {
  switch (spec.kind) {
    case TrajectoryKind::kConstantTwist:
      return {spec.angular_velocity, spec.body_accel};
    case TrajectoryKind::kPiecewiseConstantTwist: {
      double start = 0.0;
      for (const TwistSegment& seg : spec.segments) {
        if (t < start + seg.duration) {
          return {seg.angular_velocity, seg.body_accel};
        }
        start += seg.duration;
      }
      if (spec.segments.empty()) {
        return {Vector3d::Zero(), Vector3d::Zero()};
      }
      return {spec.segments.back().angular_velocity, spec.segments.back().body_accel};
    }
    case TrajectoryKind::kSinusoidalPlanar: {
      const double w = 2.0 * M_PI * spec.sine_frequency_hz * t;
      return {Vector3d(0.0, 0.0, spec.sine_gyro_amplitude * std::cos(w)),
              Vector3d(spec.sine_accel_amplitude * std::sin(w),
                       spec.sine_accel_amplitude * std::cos(w), 0.0)};
    }
  }
  return {Vector3d::Zero(), Vector3d::Zero()};
}

NavState step(const NavState& s, const Vector3d& omega, const Vector3d& accel,
              const Vector3d& gravity, double dt, double next_time) {
  NavState next;
  const Vector3d world_accel = s.rotation * accel;
  next.position = s.position + s.velocity * dt + 0.5 * gravity * dt * dt +
                  0.5 * world_accel * dt * dt;
  next.velocity = s.velocity + gravity * dt + world_accel * dt;
  next.rotation = s.rotation * lie::so3_exp(omega * dt);
  next.time = next_time;
  return next;
}

}  // namespace

std::vector<NavState> generate_states(const TrajectorySpec& spec, const NavState& initial,
                                      const Vector3d& gravity) {
  if (!(spec.rate_hz > 0.0) || !(spec.duration_s > 0.0)) {
    throw ConfigError("trajectory spec requires positive rate and duration");
  }
  const double dt = 1.0 / spec.rate_hz;
  const auto steps = static_cast<std::size_t>(std::llround(spec.duration_s * spec.rate_hz));

  std::vector<NavState> states;
  states.reserve(steps + 1);
  states.push_back(initial);
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = initial.time + static_cast<double>(k) * dt;
    const BodySignal sig = body_signal(spec, t - initial.time);
    states.push_back(step(states.back(), sig.omega, sig.accel, gravity, dt,
                          initial.time + static_cast<double>(k + 1) * dt));
  }
  return states;
}

std::vector<ImuSample> states_to_measurements(std::span<const NavState> states,
                                              const Vector3d& gravity,
                                              const BiasState& bias, const NoiseSpec& noise,
                                              std::uint64_t seed) {
  if (states.size() < 2) {
    throw EmptyWindow("need at least two states to derive measurements");
  }
  if (noise.gyro_noise_std < 0.0 || noise.accel_noise_std < 0.0) {
    throw ConfigError("noise standard deviations must be nonnegative");
  }
  const double dt = states[1].time - states[0].time;
  for (std::size_t k = 1; k < states.size(); ++k) {
    const double gap = states[k].time - states[k - 1].time;
    if (std::abs(gap - dt) > 1e-9) {
      throw NonUniformTimestamps("state spacing varies at index " + std::to_string(k));
    }
  }

  Rng rng(seed);
  std::vector<ImuSample> samples;
  samples.reserve(states.size() - 1);
  for (std::size_t k = 0; k + 1 < states.size(); ++k) {
    const NavState& a = states[k];
    const NavState& b = states[k + 1];
    ImuSample s;
    s.timestamp = a.time;
    s.gyro = lie::so3_log(a.rotation.inverse() * b.rotation) / dt + bias.gyro_bias;
    s.accel = (a.rotation.inverse() * (b.velocity - a.velocity - gravity * dt)) / dt +
              bias.accel_bias;
    for (int i = 0; i < 3; ++i) {
      s.gyro[i] += rng.normal(0.0, noise.gyro_noise_std);
    }
    for (int i = 0; i < 3; ++i) {
      s.accel[i] += rng.normal(0.0, noise.accel_noise_std);
    }
    samples.push_back(s);
  }
  return samples;
}

std::vector<NavState> integrate_measurements(const NavState& initial,
                                             std::span<const ImuSample> samples,
                                             const Vector3d& gravity, const BiasState& bias,
                                             double dt) {
  if (samples.empty()) {
    throw EmptyWindow("integrate_measurements requires at least one sample");
  }
  if (!(dt > 0.0)) {
    if (samples.size() < 2) {
      throw NonUniformTimestamps("cannot infer dt from a single sample; pass dt explicitly");
    }
    dt = samples[1].timestamp - samples[0].timestamp;
    if (!(dt > 0.0)) {
      throw NonMonotonicTimestamps("timestamps not strictly increasing");
    }
  }
  std::vector<NavState> states;
  states.reserve(samples.size() + 1);
  states.push_back(initial);
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const Vector3d omega = samples[k].gyro - bias.gyro_bias;
    const Vector3d accel = samples[k].accel - bias.accel_bias;
    states.push_back(step(states.back(), omega, accel, gravity, dt,
                          samples[k].timestamp + dt));
  }
  return states;
}

NavState apply_delta(const NavState& initial, const preint::PreintegratedDelta& delta,
                     const Vector3d& gravity) {
  NavState out;
  const double t = delta.delta_t;
  out.rotation = initial.rotation * delta.delta_r;
  out.velocity = initial.velocity + gravity * t + initial.rotation * delta.delta_v;
  // The accumulated per-step gravity contribution over a uniform window
  // telescopes to g*t^2/2.
  out.position = initial.position + initial.velocity * t + 0.5 * gravity * t * t +
                 initial.rotation * delta.delta_p;
  out.time = initial.time + t;
  return out;
}

}  // namespace pifeat::synth
