#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "nvpiezo/core/error.hpp"
#include "nvpiezo/micromag/llg.hpp"
#include "nvpiezo/probe/stray_field.hpp"

namespace nvpiezo::probe {

struct FieldSample {
  double t = 0.0;
  Vec3 B = Vec3::Zero();  // NV frame: (B_x, B_y transverse; B_z along the axis), T
};

struct FieldTrajectory {
  double interval = 0.0;
  std::vector<FieldSample> samples;
  std::uint64_t seed = 0;

  std::size_t size() const { return samples.size(); }

  /// Component series (0 = x, 1 = y, 2 = z).
  std::vector<double> component(int c) const {
    std::vector<double> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(s.B[c]);
    return out;
  }

  Vec3 mean() const {
    Vec3 acc = Vec3::Zero();
    for (const auto& s : samples) acc += s.B;
    return samples.empty() ? acc : Vec3(acc / static_cast<double>(samples.size()));
  }
};

/// Number of integrator steps between samples; the interval must be a whole
/// multiple of dt.
inline long steps_per_sample(double sample_interval, double dt) {
  if (!(sample_interval >= dt * (1.0 - 1e-9)))
    throw DomainError("sample interval must be >= the integrator time step");
  const double ratio = sample_interval / dt;
  const long k = std::lround(ratio);
  if (std::abs(ratio - static_cast<double>(k)) > 1e-6 * ratio)
    throw DomainError("sample interval must be a whole multiple of the integrator time step");
  return k;
}

/// Samples recorded for (duration, interval).
inline long planned_sample_count(double duration, double sample_interval) {
  if (!(duration >= 10.0 * sample_interval * (1.0 - 1e-12)))
    throw DomainError("duration must cover at least 10 sample intervals");
  return std::lround(duration / sample_interval);
}

/// Advance the simulation for `duration`, sampling the NV-frame field every
/// `sample_interval`. Samples are taken after each block of steps.
inline FieldTrajectory record_field_trajectory(micromag::MagState& state, micromag::HeunIntegrator& integ,
                                               const FieldProbe& probe, double duration, double sample_interval) {
  const long n = planned_sample_count(duration, sample_interval);
  const long k = steps_per_sample(sample_interval, integ.dt());
  FieldTrajectory traj;
  traj.interval = static_cast<double>(k) * integ.dt();
  traj.seed = integ.environment().seed;
  traj.samples.reserve(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) {
    for (long s = 0; s < k; ++s) integ.step(state);
    traj.samples.push_back({state.time, probe(state.m)});
  }
  return traj;
}

}  // namespace nvpiezo::probe
