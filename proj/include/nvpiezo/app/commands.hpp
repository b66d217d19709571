#pragma once

// CLI commands: run a pipeline stage and persist its outputs plus a
// RunManifest in the output directory. Commands share nothing but files.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "nvpiezo/app/io.hpp"
#include "nvpiezo/app/pipeline.hpp"
#include "nvpiezo/app/validate.hpp"
#include "nvpiezo/noise/spectrum.hpp"
#include "nvpiezo/transduce/force_trace.hpp"

namespace nvpiezo::app {

struct CommonOptions {
  fs::path out_dir = "out";
  unsigned workers = 0;
  std::ostream* log = &std::cerr;
};

inline ValidatedModel load_config(const fs::path& path, std::optional<std::uint64_t> seed = std::nullopt) {
  auto m = validate_config(read_json(path));
  if (seed) m.environment.seed = *seed;
  return m;
}

namespace detail {

inline json warnings_json(const std::vector<std::string>& w) { return json(w); }

inline void log_warnings(const CommonOptions& o, const std::vector<std::string>& w) {
  for (const auto& s : w) *o.log << "warning: " << s << "\n";
}

inline std::optional<double> number_or_null(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<double>();
}

}  // namespace detail

// ---------------------------------------------------------------- sweep-stress

struct SweepOptions {
  double sigma_min = 0.0;
  double sigma_max = 0.2e6;  // Pa
  std::size_t n_points = 5;
};

inline SweepResult cmd_sweep_stress(const ValidatedModel& m, const SweepOptions& o, const CommonOptions& c) {
  if (o.n_points < 1) throw DomainError("--points must be >= 1");
  if (o.n_points > 1 && !(o.sigma_max > o.sigma_min)) throw DomainError("--sigma-max must exceed --sigma-min");
  RunContext run(c.out_dir, "sweep-stress", m);
  detail::log_warnings(c, m.warnings);
  const auto r = run_stress_sweep(m, linspace(o.sigma_min, o.sigma_max, o.n_points), c.workers);
  detail::log_warnings(c, r.warnings);

  CsvTable t("odmr_sweep", 1,
             {"sigma_Pa", "omega_minus1_Hz", "omega_plus1_Hz", "Delta_Hz", "B_x_T", "B_y_T", "B_z_T", "m_x", "m_y",
              "m_z", "relax_steps", "converged", "status"});
  t.meta("temperature_K", m.environment.temperature);
  t.meta("seed", std::to_string(m.environment.seed));
  for (const auto& p : r.points)
    t.row({num(p.sigma), num(p.res.omega_minus1), num(p.res.omega_plus1), num(p.res.Delta), num(p.B.x()),
           num(p.B.y()), num(p.B.z()), num(p.m_avg.x()), num(p.m_avg.y()), num(p.m_avg.z()),
           std::to_string(p.relax.steps), p.ok ? "1" : "0", "\"" + p.status + "\""});
  run.write("odmr_sweep.csv", t);

  json g = {{"n_points", r.points.size()}, {"temperature", m.environment.temperature}, {"warnings", r.warnings}};
  if (r.fit) {
    g["dDelta_dsigma"] = r.fit->slope;
    g["intercept"] = r.fit->intercept;
    g["r2"] = r.fit->r2;
    g["Delta0"] = r.fit->intercept;
  } else {
    g["dDelta_dsigma"] = nullptr;
    g["Delta0"] = r.points.front().res.Delta;
  }
  g["omega_minus1"] = r.points.front().res.omega_minus1;
  run.write("gradient.json", g);
  run.finish();
  if (r.fit)
    *c.log << "dDelta/dsigma = " << r.fit->slope << " MHz/MPa, R^2 = " << r.fit->r2 << "\n";
  return r;
}

// ---------------------------------------------------------- characterize-noise

struct NoiseOptions {
  std::optional<double> duration;  // s per seed; default run.noise_duration
  std::optional<int> n_seeds;       // default run.n_seeds
};

inline NoiseRun cmd_characterize_noise(const ValidatedModel& m, const NoiseOptions& o, const CommonOptions& c) {
  const double duration = o.duration.value_or(m.run.noise_duration);
  const int seeds = o.n_seeds.value_or(m.run.n_seeds);
  const auto r = run_noise_characterization(m, duration, seeds, c.workers);
  RunContext run(c.out_dir, "characterize-noise", m);
  detail::log_warnings(c, m.warnings);
  run.manifest().seeds.clear();
  for (int k = 0; k < seeds; ++k) run.manifest().seeds.push_back(m.environment.seed + static_cast<std::uint64_t>(k));

  const auto& cr = r.correlation;
  CsvTable corr("correlation", 1, {"lag_s", "R_x", "R_y", "R_z", "fit_x", "fit_y", "fit_z"});
  corr.meta("units", "(rad/s)^2");
  corr.meta("n_seeds", std::to_string(seeds));
  for (std::size_t i = 0; i < cr.size(); ++i) {
    const double tau = static_cast<double>(i) * cr.lag_step;
    auto model = [&](std::size_t k) {
      const auto& d = r.fit.component[k];
      return d.R0 * std::exp(-d.xi * tau) * std::cos(d.omega0 * tau);
    };
    corr.row({tau, cr.R[0][i], cr.R[1][i], cr.R[2][i], model(0), model(1), model(2)});
  }
  run.write("correlation.csv", corr);

  CsvTable psd("psd", 1, {"omega_rad_s", "S_x", "S_y", "S_z"});
  psd.meta("model", "damped-cosine fit");
  const double w_max = 4.0 * std::max({r.fit.component[0].omega0 + 5 * r.fit.component[0].xi,
                                       r.fit.component[2].omega0 + 5 * r.fit.component[2].xi, 1e9});
  for (int i = 0; i <= 400; ++i) {
    const double w = w_max * i / 400.0;
    psd.row({w, noise::psd_from_fit(r.fit.component[0], w), noise::psd_from_fit(r.fit.component[1], w),
             noise::psd_from_fit(r.fit.component[2], w)});
  }
  run.write("psd.csv", psd);

  {
    const auto& tr = r.first;
    std::vector<double> comp[3];
    for (std::size_t k = 0; k < 3; ++k) {
      comp[k] = tr.component(k);
      for (double& v : comp[k]) v *= constants::gamma_e;
    }
    const std::size_t seg = std::min<std::size_t>(1024, comp[0].size());
    noise::Spectrum sp[3];
    for (std::size_t k = 0; k < 3; ++k) sp[k] = noise::psd_periodogram(comp[k], tr.interval, seg);
    CsvTable pg("psd_periodogram", 1, {"omega_rad_s", "S_x", "S_y", "S_z"});
    pg.meta("seed", std::to_string(tr.seed));
    for (std::size_t i = 0; i < sp[0].omega.size(); ++i) pg.row({sp[0].omega[i], sp[0].S[i], sp[1].S[i], sp[2].S[i]});
    run.write("psd_periodogram.csv", pg);

    CsvTable traj("trajectory", 1, {"t_s", "B_x_T", "B_y_T", "B_z_T"});
    traj.meta("seed", std::to_string(tr.seed));
    traj.meta("interval_s", tr.interval);
    for (const auto& s : tr.samples) traj.row({s.t, s.B.x(), s.B.y(), s.B.z()});
    run.write("trajectory.csv", traj);
  }

  json fit = noise_fit_json(r.fit);
  fit["omega_minus1"] = r.resonances.omega_minus1;
  fit["Delta0"] = r.resonances.Delta;
  fit["mean_B"] = {r.mean_B.x(), r.mean_B.y(), r.mean_B.z()};
  fit["duration"] = duration;
  fit["sample_interval"] = m.run.sample_interval;
  run.write("noise_fit.json", fit);
  run.finish();
  const auto& x = r.fit.component[0];
  *c.log << "transverse fit: xi = " << x.xi * 1e-9 << " ns^-1, omega0/2pi = " << x.omega0 / constants::two_pi * 1e-9
         << " GHz\n";
  return r;
}

// ----------------------------------------------------------------- sensitivity

struct SensitivityOptions {
  std::optional<fs::path> noise_fit_file;
  std::optional<fs::path> gradient_file;
  bool noiseless = false;
  double ta_min = 10e-9, ta_max = 10e-6;
  std::size_t ta_points = 200;
};

/// Collects the sensing inputs from prior command outputs, falling back to
/// config literals. Missing pieces name the command that produces them.
inline SensitivityInputs resolve_sensing_inputs(const ValidatedModel& m, const std::optional<fs::path>& noise_file,
                                                const std::optional<fs::path>& gradient_file, bool noiseless,
                                                bool need_Delta0) {
  SensitivityInputs in;
  std::optional<double> w_noise, w_grad, D_grad;
  std::optional<double> slope = m.sensing.dDelta_dsigma;
  if (gradient_file) {
    const json g = read_json(*gradient_file);
    slope = detail::number_or_null(g, "dDelta_dsigma");
    if (!slope) throw DomainError(gradient_file->string() + " has no fitted gradient; rerun `sweep-stress` with >= 3 points");
    w_grad = detail::number_or_null(g, "omega_minus1");
    D_grad = detail::number_or_null(g, "Delta0");
  }
  if (!slope)
    throw DomainError("dDelta/dsigma unknown: run `nvpiezo sweep-stress` and pass --gradient, or set protocol.dDelta_dsigma");
  in.dDelta_dsigma = *slope;
  if (!noiseless) {
    if (noise_file) {
      const json j = read_json(*noise_file);
      in.fit = noise_fit_from_json(j, noise_file->string());
      w_noise = detail::number_or_null(j, "omega_minus1");
    } else if (m.sensing.noise_fit) {
      in.fit = m.sensing.noise_fit;
    } else {
      throw DomainError(
          "noise fit unknown: run `nvpiezo characterize-noise` and pass --noise-fit, set protocol.noise_fit, or use "
          "--noiseless");
    }
    const auto w = w_noise ? w_noise : (m.sensing.omega_minus1 ? m.sensing.omega_minus1 : w_grad);
    if (!w)
      throw DomainError("omega_minus1 unknown: take it from `characterize-noise` output or set protocol.omega_minus1");
    in.omega_minus1 = *w;
  }
  in.Delta0 = m.sensing.Delta0 ? m.sensing.Delta0 : D_grad;
  if (need_Delta0 && !in.Delta0)
    throw DomainError("Delta0 unknown: run `nvpiezo sweep-stress` and pass --gradient, or set protocol.Delta0");
  return in;
}

inline SensitivityReport cmd_sensitivity(const ValidatedModel& m, const SensitivityOptions& o, const CommonOptions& c) {
  const auto in = resolve_sensing_inputs(m, o.noise_fit_file, o.gradient_file, o.noiseless, false);
  const auto grid = nvspin::log_grid(o.ta_min, o.ta_max, o.ta_points);
  const auto r = run_sensitivity(m, in, grid);
  RunContext run(c.out_dir, "sensitivity", m);
  detail::log_warnings(c, m.warnings);

  CsvTable curve("sensitivity_curve", 1, {"t_a_s", "eta_sigma_Pa_per_rtHz", "eta_F_N_per_rtHz", "chi_par", "chi_perp"});
  for (std::size_t i = 0; i < r.curve.t_a.size(); ++i)
    curve.row({r.curve.t_a[i], r.curve.eta[i], r.curve.eta[i] * m.transducer.contact_area, r.factors[i].chi_par,
               r.factors[i].chi_perp});
  run.write("sensitivity_curve.csv", curve);

  // Ramsey signal around the working point at t_opt and 4 t_opt
  CsvTable sig("signal_grid", 1, {"t_a_s", "sigma_Pa", "Delta_Hz", "P"});
  const double base = in.Delta0.value_or(0.0);
  for (double ta : {r.curve.t_opt, 4.0 * r.curve.t_opt}) {
    const auto f = nvspin::coherence_factors(r.rates, ta);
    const double span = 2.0 / (r.curve.t_opt * std::abs(in.dDelta_dsigma));
    for (int i = 0; i <= 200; ++i) {
      const double s = -span + 2.0 * span * i / 200.0;
      const double D = base + in.dDelta_dsigma * s;
      sig.row({ta, s, D, nvspin::ramsey_signal(D, f, ta)});
    }
  }
  run.write("signal_grid.csv", sig);

  json j = {{"t_opt", r.curve.t_opt},
            {"eta_sigma", r.curve.eta_opt},
            {"eta_F", r.eta_F},
            {"eta_e", r.eta_e},
            {"eta_T", r.eta_T},
            {"dDelta_dsigma", in.dDelta_dsigma},
            {"dDelta_dE", r.dDelta_dE},
            {"dDelta_dT", r.dDelta_dT},
            {"S_z0", r.rates.S_z0},
            {"S_perp", r.rates.S_perp},
            {"noiseless", !in.fit.has_value()},
            {"contrast", m.protocol.contrast},
            {"t_prep", m.protocol.t_prep},
            {"tau", m.protocol.tau},
            {"contact_area", m.transducer.contact_area},
            {"reference",
             {{"direct_electric_Hz_per_V_per_m", transduce::reference::electric_hz_per_v_per_m},
              {"direct_thermal_Hz_per_K", transduce::reference::thermal_hz_per_k},
              {"direct_pressure_Hz_per_Pa", transduce::reference::pressure_hz_per_pa}}}};
  run.write("sensitivity.json", j);
  run.finish();
  *c.log << "eta_sigma = " << r.curve.eta_opt << " Pa/sqrt(Hz) at t_a = " << r.curve.t_opt * 1e9
         << " ns, eta_F = " << r.eta_F * 1e15 << " fN/sqrt(Hz)\n";
  return r;
}

// ------------------------------------------------------------------ force-trace

struct ForceOptions {
  std::optional<fs::path> trace_file;
  double velocity = 100e-9;
  double stiffness = 1e-3;
  double unbind_force = 50e-12;
  double duration = 1.0;
  double start_delay = 0.2;
  double resolution = 0.5e-9;
  std::optional<fs::path> noise_fit_file;
  std::optional<fs::path> gradient_file;
  bool noiseless = false;
};

struct ForceSummary {
  transduce::FluorescenceTrace trace;
  double step = 0.0;        // largest |P_i+1 - P_i| of the noiseless signal
  double shot_noise = 0.0;  // shot-noise std on either side of that step (max)
  std::size_t step_index = 0;
};

inline ForceSummary cmd_force_trace(const ValidatedModel& m, const ForceOptions& o, const CommonOptions& c) {
  const bool have_noise = !o.noiseless && (o.noise_fit_file || m.sensing.noise_fit);
  const auto in = resolve_sensing_inputs(m, o.noise_fit_file, o.gradient_file, !have_noise, true);
  const auto force = o.trace_file ? read_force_trace(*o.trace_file)
                                  : transduce::synthesize_unbinding_trace(o.velocity, o.stiffness, o.unbind_force,
                                                                          o.duration, o.resolution, o.start_delay);
  transduce::ForceReadout rd;
  rd.dDelta_dsigma = in.dDelta_dsigma;
  rd.Delta0 = *in.Delta0;
  rd.omega_minus1 = in.omega_minus1;
  rd.fit = in.fit;
  ForceSummary s;
  s.trace = transduce::simulate_force_trace(force, m.transducer, rd, m.protocol, m.environment.seed);
  const auto& tr = s.trace;
  const double tau_r = force.time_resolution();
  for (std::size_t i = 0; i + 1 < tr.P.size(); ++i) {
    const double d = std::abs(tr.P[i + 1] - tr.P[i]);
    if (d > s.step) {
      s.step = d;
      s.step_index = i;
    }
  }
  s.shot_noise = std::max(transduce::shot_noise_std(tr.P[s.step_index], tau_r, tr.t_a, m.protocol.t_prep),
                          transduce::shot_noise_std(tr.P[s.step_index + 1], tau_r, tr.t_a, m.protocol.t_prep));

  RunContext run(c.out_dir, "force-trace", m);
  detail::log_warnings(c, m.warnings);
  detail::log_warnings(c, tr.warnings);
  if (!o.trace_file) run.write("force_input.csv", force_trace_table(force));
  CsvTable t("fluorescence", 1, {"t_s", "F_N", "sigma_Pa", "Delta_Hz", "P", "P_noisy"});
  t.meta("t_a_s", tr.t_a);
  t.meta("tau_r_s", tau_r);
  for (std::size_t i = 0; i < tr.t.size(); ++i) t.row({tr.t[i], tr.F[i], tr.sigma[i], tr.Delta[i], tr.P[i], tr.P_noisy[i]});
  run.write("fluorescence.csv", t);
  json j = {{"t_a", tr.t_a},
            {"tau_r", tau_r},
            {"largest_step", s.step},
            {"step_time", tr.t[s.step_index + 1]},
            {"shot_noise_std", s.shot_noise},
            {"step_over_noise", s.shot_noise > 0.0 ? s.step / s.shot_noise : INFINITY},
            {"noiseless_spin", !in.fit.has_value()},
            {"warnings", tr.warnings}};
  run.write("force_summary.json", j);
  run.finish();
  *c.log << "largest fluorescence step " << s.step << " = " << s.step / s.shot_noise << " x shot-noise std\n";
  return s;
}

// --------------------------------------------------------------------- validate

inline std::vector<CheckResult> cmd_validate(const ValidatedModel& m, const CommonOptions& c, std::ostream& out) {
  const auto checks = run_validation(m);
  RunContext run(c.out_dir, "validate", m);
  json j = json::array();
  for (const auto& r : checks) {
    out << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
    j.push_back({{"name", r.name}, {"passed", r.passed}, {"detail", r.detail}});
  }
  run.write("validate_report.json", j);
  run.finish();
  return checks;
}

}  // namespace nvpiezo::app
