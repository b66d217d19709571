#pragma once

// Computational stages behind the CLI commands. No file I/O here; the
// command layer persists what these return.

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nvpiezo/app/workers.hpp"
#include "nvpiezo/core/config.hpp"
#include "nvpiezo/core/constants.hpp"
#include "nvpiezo/micromag/llg.hpp"
#include "nvpiezo/noise/correlation.hpp"
#include "nvpiezo/noise/fit.hpp"
#include "nvpiezo/nvspin/coherence.hpp"
#include "nvpiezo/nvspin/hamiltonian.hpp"
#include "nvpiezo/nvspin/sensitivity.hpp"
#include "nvpiezo/probe/stray_field.hpp"
#include "nvpiezo/probe/trajectory.hpp"
#include "nvpiezo/transduce/coupling.hpp"

namespace nvpiezo::app {

inline Vec3 initial_direction(const ValidatedModel& m) {
  const double h = m.environment.H_ext.norm();
  return h > 0.0 ? Vec3(m.environment.H_ext / h) : Vec3::UnitZ();
}

inline probe::FieldProbe make_probe(const ValidatedModel& m) {
  return probe::FieldProbe(m.material, m.grid, m.nv.resolved_position(m.grid), constants::mu0 * m.environment.H_ext,
                           probe::NVFrame(m.nv.axis));
}

inline std::vector<double> linspace(double a, double b, std::size_t n) {
  if (n == 0) throw DomainError("need at least one point");
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

/// Deterministic relaxation from the seeded, slightly tilted initial state.
inline micromag::RelaxReport relax_deterministic(const ValidatedModel& m,
                                                 const std::shared_ptr<const micromag::MicromagSystem>& sys,
                                                 micromag::MagState& state) {
  state = micromag::perturbed_uniform(m.grid, initial_direction(m), m.run.init_perturbation, m.environment.seed);
  Environment cold = m.environment;
  cold.temperature = 0.0;
  micromag::HeunIntegrator integ(sys, cold);
  auto rep = micromag::relax_to_steady_state(state, integ, m.run.relax_tol, m.run.max_steps);
  state.time = 0.0;
  return rep;
}

// ---------------------------------------------------------------- stress sweep

struct SweepPoint {
  double sigma = 0.0;
  Vec3 B = Vec3::Zero();      // NV frame, time-averaged when T > 0
  Vec3 m_avg = Vec3::Zero();  // volume and time average
  nvspin::Resonances res;
  micromag::RelaxReport relax;
  bool ok = false;            // usable for the gradient fit
  std::string status = "ok";
};

struct SweepResult {
  std::vector<SweepPoint> points;
  std::optional<transduce::LinearFit> fit;
  std::vector<std::string> warnings;
};

/// One sweep point. At T > 0 every point uses the same thermal seed so the
/// differences between points are not dominated by independent noise.
inline SweepPoint sweep_point(const ValidatedModel& m, const micromag::MicromagSystem& base,
                              const probe::FieldProbe& probe, double sigma) {
  SweepPoint pt;
  pt.sigma = sigma;
  auto sys = std::make_shared<const micromag::MicromagSystem>(base.with_stress(StressLoad{sigma, m.stress.theta}));
  micromag::MagState s;
  pt.relax = relax_deterministic(m, sys, s);
  if (m.environment.temperature > 0.0) {
    micromag::HeunIntegrator integ(sys, m.environment);
    micromag::relax_to_steady_state(s, integ, m.run.relax_tol, m.run.max_steps, m.run.equilibration_time);
    const long per = probe::steps_per_sample(m.run.sample_interval, integ.dt());
    const long n = probe::planned_sample_count(m.run.averaging_time, m.run.sample_interval);
    Vec3 B = Vec3::Zero(), mm = Vec3::Zero();
    for (long i = 0; i < n; ++i) {
      for (long k = 0; k < per; ++k) integ.step(s);
      B += probe(s.m);
      mm += s.average();
    }
    pt.B = B / static_cast<double>(n);
    pt.m_avg = mm / static_cast<double>(n);
    pt.relax.stochastic = true;
    pt.ok = true;
  } else {
    pt.B = probe(s.m);
    pt.m_avg = s.average();
    pt.ok = pt.relax.converged;
    if (!pt.ok) pt.status = "not converged (torque " + std::to_string(pt.relax.torque) + ")";
  }
  pt.res = nvspin::resonance_frequencies(m.nv, pt.B);
  return pt;
}

inline SweepResult run_stress_sweep(const ValidatedModel& m, const std::vector<double>& sigmas, unsigned workers = 0) {
  if (sigmas.empty()) throw DomainError("stress sweep needs at least one point");
  const micromag::MicromagSystem base(m.material, m.grid, m.stress, m.environment.H_ext);
  const auto probe = make_probe(m);
  SweepResult r;
  r.points.resize(sigmas.size());
  parallel_for(sigmas.size(), workers, [&](std::size_t i) {
    try {
      r.points[i] = sweep_point(m, base, probe, sigmas[i]);
    } catch (const Error& e) {
      r.points[i] = SweepPoint{};
      r.points[i].sigma = sigmas[i];
      r.points[i].status = std::string("failed: ") + e.what();
    }
  });
  std::vector<double> s, d;
  for (const auto& p : r.points) {
    if (p.ok) {
      s.push_back(p.sigma);
      d.push_back(p.res.Delta);
    } else {
      r.warnings.push_back("point sigma=" + std::to_string(p.sigma) + " Pa excluded: " + p.status);
    }
  }
  if (sigmas.size() == 1) return r;
  if (s.size() < 3)
    r.warnings.push_back("fewer than 3 usable points; no gradient fit");
  else
    r.fit = transduce::fit_stress_gradient(s, d);
  return r;
}

// --------------------------------------------------------- noise characterization

struct NoiseRun {
  noise::Correlation correlation;  // seed average
  noise::NoiseFit fit;
  probe::FieldTrajectory first;    // trajectory of the first seed
  Vec3 mean_B = Vec3::Zero();
  nvspin::Resonances resonances;   // at mean_B
  micromag::RelaxReport relax;
};

inline NoiseRun run_noise_characterization(const ValidatedModel& m, double duration, int n_seeds,
                                           unsigned workers = 0) {
  if (!(m.environment.temperature > 0.0))
    throw DomainError("temperature is 0 K: there is no thermal noise to characterize");
  if (!(m.material.alpha > 0.0)) throw DomainError("alpha must be > 0 for thermal noise");
  if (n_seeds < 1) throw DomainError("need at least one seed");
  const long n = probe::planned_sample_count(duration, m.run.sample_interval);
  if (n < 1000)
    throw DomainError("duration " + std::to_string(duration) + " s gives " + std::to_string(n) +
                      " samples at the configured interval; at least 1000 are needed");
  auto sys = std::make_shared<const micromag::MicromagSystem>(m.material, m.grid, m.stress, m.environment.H_ext);
  const auto probe = make_probe(m);
  micromag::MagState start;
  NoiseRun out;
  out.relax = relax_deterministic(m, sys, start);

  std::vector<probe::FieldTrajectory> trajs(static_cast<std::size_t>(n_seeds));
  parallel_for(trajs.size(), workers, [&](std::size_t k) {
    Environment env = m.environment;
    env.seed = m.environment.seed + k;
    micromag::MagState s = start;
    micromag::HeunIntegrator integ(sys, env);
    micromag::relax_to_steady_state(s, integ, m.run.relax_tol, m.run.max_steps, m.run.equilibration_time);
    trajs[k] = probe::record_field_trajectory(s, integ, probe, duration, m.run.sample_interval);
    trajs[k].seed = env.seed;
  });
  std::vector<noise::Correlation> cs;
  for (const auto& t : trajs) {
    cs.push_back(noise::autocorrelation(t));
    out.mean_B += t.mean();
  }
  out.mean_B /= static_cast<double>(trajs.size());
  out.correlation = noise::average(cs);
  out.fit = noise::fit_damped_cosine(out.correlation, m.run.max_lag, n_seeds);
  out.resonances = nvspin::resonance_frequencies(m.nv, out.mean_B);
  out.first = std::move(trajs.front());
  return out;
}

// ------------------------------------------------------------------ sensitivity

struct SensitivityInputs {
  std::optional<noise::NoiseFit> fit;  // none = noiseless
  double dDelta_dsigma = 0.0;          // Hz/Pa
  double omega_minus1 = 0.0;           // Hz
  std::optional<double> Delta0;        // Hz; snaps t_a to quadrature when given
};

struct SensitivityReport {
  nvspin::NoiseRates rates;
  nvspin::SensitivityCurve curve;
  std::vector<nvspin::CoherenceFactors> factors;  // along curve.t_a
  double eta_F = 0.0;      // N/√Hz
  double eta_e = 0.0;      // (V/m)/√Hz
  double eta_T = 0.0;      // K/√Hz
  double dDelta_dE = 0.0;  // Hz/(V/m)
  double dDelta_dT = 0.0;  // Hz/K
};

inline SensitivityReport run_sensitivity(const ValidatedModel& m, const SensitivityInputs& in,
                                         const std::vector<double>& ta_grid) {
  SensitivityReport r;
  if (in.fit) r.rates = nvspin::rates_from_fit(*in.fit, in.omega_minus1);
  r.curve = nvspin::optimize_interrogation_time(m.protocol, r.rates, in.dDelta_dsigma, ta_grid, in.Delta0);
  for (double t : r.curve.t_a) r.factors.push_back(nvspin::coherence_factors(r.rates, t));
  const auto& tc = m.transducer;
  r.eta_F = transduce::force_sensitivity(r.curve.eta_opt, tc.contact_area);
  r.eta_e = transduce::electric_field_sensitivity(tc, r.curve.eta_opt);
  r.eta_T = transduce::temperature_sensitivity(tc, r.curve.eta_opt);
  r.dDelta_dE = transduce::electric_field_coupling(tc, in.dDelta_dsigma);
  r.dDelta_dT = transduce::temperature_coupling(tc, in.dDelta_dsigma);
  return r;
}

}  // namespace nvpiezo::app
