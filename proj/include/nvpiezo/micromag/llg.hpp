#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "nvpiezo/core/error.hpp"
#include "nvpiezo/core/model.hpp"
#include "nvpiezo/micromag/fields.hpp"

namespace nvpiezo::micromag {

/// Landau-Lifshitz form of the LLG equation for a unit vector:
/// dm/dt = -γ' m×H - γ' α m×(m×H), γ' = γ·mu0 (H in A/m).
inline Vec3 llg_rhs(const Vec3& m, const Vec3& H, const MaterialParams& p) {
  const double g = p.gamma_llg();
  const Vec3 mxh = m.cross(H);
  return -g * mxh - g * p.alpha * m.cross(mxh);
}

/// Largest |m×H|/|H| over the cells.
inline double max_torque(const std::vector<Vec3>& m, const std::vector<Vec3>& H) {
  double t = 0.0;
  for (std::size_t k = 0; k < m.size(); ++k) {
    const double h = H[k].norm();
    if (h > 0.0) t = std::max(t, m[k].cross(H[k]).norm() / h);
  }
  return t;
}

/// Stochastic Heun (Stratonovich) integrator. The thermal field of step n is
/// drawn once and used in both predictor and corrector; m is renormalized
/// after every step.
class HeunIntegrator {
 public:
  HeunIntegrator(std::shared_ptr<const MicromagSystem> system, const Environment& env, std::uint64_t first_step = 0)
      : sys_(std::move(system)),
        env_(env),
        thermal_sd_(thermal_field_sigma(sys_->params(), sys_->grid(), env.temperature, env.dt)),
        step_(first_step) {}
  HeunIntegrator(const MicromagSystem& system, const Environment& env, std::uint64_t first_step = 0)
      : HeunIntegrator(std::make_shared<const MicromagSystem>(system), env, first_step) {}

  const MicromagSystem& system() const { return *sys_; }
  const Environment& environment() const { return env_; }

  double dt() const { return env_.dt; }
  std::uint64_t steps_taken() const { return step_; }
  bool thermal() const { return thermal_sd_ > 0.0; }

  /// Deterministic field at the state before the last step (for torque checks).
  const std::vector<Vec3>& last_field() const { return h0_; }

  void step(MagState& s) {
    const auto& p = sys_->params();
    const std::size_t n = s.m.size();
    if (thermal()) thermal_field(p, sys_->grid(), env_.temperature, env_.dt, env_.seed, step_, h_th_);

    sys_->total_field(s.m, h0_);
    f0_.resize(n);
    pred_.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      const Vec3 H = thermal() ? Vec3(h0_[k] + h_th_[k]) : h0_[k];
      f0_[k] = llg_rhs(s.m[k], H, p);
      pred_[k] = s.m[k] + env_.dt * f0_[k];
    }
    sys_->total_field(pred_, h1_);
    bool finite = true;
    for (std::size_t k = 0; k < n; ++k) {
      const Vec3 H = thermal() ? Vec3(h1_[k] + h_th_[k]) : h1_[k];
      const Vec3 f1 = llg_rhs(pred_[k], H, p);
      Vec3 next = s.m[k] + 0.5 * env_.dt * (f0_[k] + f1);
      next.normalize();
      finite = finite && next.allFinite();
      s.m[k] = next;
    }
    ++step_;
    s.time += env_.dt;
    if (!finite)
      throw NumericalError("non-finite magnetization at t = " + std::to_string(s.time) +
                           " s; the time step is too large, try a smaller dt");
  }

 private:
  std::shared_ptr<const MicromagSystem> sys_;
  Environment env_;
  double thermal_sd_;
  std::uint64_t step_;
  std::vector<Vec3> h0_, h1_, h_th_, f0_, pred_;
};

/// One integration step; `step_index` selects the thermal realization.
inline MagState step_heun(const MagState& state, const MicromagSystem& system, const Environment& env,
                          std::uint64_t step_index = 0) {
  HeunIntegrator integ(system, env, step_index);
  MagState s = state;
  integ.step(s);
  return s;
}

struct RelaxReport {
  bool converged = false;
  long steps = 0;
  double torque = std::numeric_limits<double>::infinity();
  double time = 0.0;
  bool stochastic = false;
};

/// Integrate toward steady state.
/// T = 0: until max |m×H|/|H| < tol, or max_steps (then the lowest-torque
/// state seen is returned with converged = false).
/// T > 0: for `equilibration_time`, after which the state is returned as is.
inline RelaxReport relax_to_steady_state(MagState& state, HeunIntegrator& integ, double tol, long max_steps,
                                         double equilibration_time = 0.0) {
  RelaxReport rep;
  const auto& system = integ.system();
  const double dt = integ.dt();
  if (integ.thermal()) {
    rep.stochastic = true;
    const long n = static_cast<long>(std::llround(equilibration_time / dt));
    for (long i = 0; i < n; ++i) integ.step(state);
    rep.steps = n;
    rep.converged = true;
    rep.time = state.time;
    return rep;
  }
  if (std::isinf(tol)) {
    rep.converged = true;
    rep.torque = 0.0;
    rep.time = state.time;
    return rep;
  }
  std::vector<Vec3> H;
  system.total_field(state.m, H);
  double torque = max_torque(state.m, H);
  MagState best = state;
  double best_torque = torque;
  long steps = 0;
  while (torque >= tol && steps < max_steps) {
    integ.step(state);
    ++steps;
    system.total_field(state.m, H);
    torque = max_torque(state.m, H);
    if (torque < best_torque) {
      best_torque = torque;
      best = state;
    }
  }
  rep.steps = steps;
  if (torque < tol) {
    rep.converged = true;
    rep.torque = torque;
  } else {
    state = best;
    rep.torque = best_torque;
  }
  rep.time = state.time;
  return rep;
}

inline RelaxReport relax_to_steady_state(MagState& state, const MicromagSystem& system, const Environment& env,
                                         double tol, long max_steps, double equilibration_time = 0.0) {
  HeunIntegrator integ(system, env);
  return relax_to_steady_state(state, integ, tol, max_steps, equilibration_time);
}

}  // namespace nvpiezo::micromag
