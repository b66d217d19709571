#pragma once

// Fast invariant suite behind `nvpiezo validate`. Each check uses the
// material and time step of the configuration under test.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "nvpiezo/core/config.hpp"
#include "nvpiezo/core/constants.hpp"
#include "nvpiezo/core/rng.hpp"
#include "nvpiezo/micromag/demag.hpp"
#include "nvpiezo/micromag/llg.hpp"
#include "nvpiezo/nvspin/lindblad.hpp"
#include "nvpiezo/probe/stray_field.hpp"

namespace nvpiezo::app {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

namespace detail {

inline std::vector<Vec3> random_unit_state(std::size_t n, std::uint64_t seed) {
  const CounterRng r(seed, Stream::synthetic);
  std::vector<Vec3> m(n);
  for (std::size_t k = 0; k < n; ++k)
    m[k] = Vec3(r.gaussian_at(3 * k), r.gaussian_at(3 * k + 1), r.gaussian_at(3 * k + 2)).normalized();
  return m;
}

/// max_k |H_k - H_fd,k| / max_k |H_fd,k| for one energy term.
inline double gradient_mismatch(const micromag::MicromagSystem& sys, unsigned term, std::vector<Vec3> m) {
  const auto& p = sys.params();
  const double V = sys.grid().cell_volume();
  const micromag::MicromagSystem one(p, sys.grid(), sys.stress(), sys.applied_field(), term);
  const auto analytic = one.fields(m).total();
  auto energy = [&](const std::vector<Vec3>& x) { return one.energy(x).total(); };
  const double h = 1e-6;
  double worst = 0.0, scale = 0.0;
  for (std::size_t k = 0; k < m.size(); ++k) {
    Vec3 fd;
    for (int c = 0; c < 3; ++c) {
      const double keep = m[k][c];
      m[k][c] = keep + h;
      const double ep = energy(m);
      m[k][c] = keep - h;
      const double em = energy(m);
      m[k][c] = keep;
      fd[c] = -(ep - em) / (2 * h) / (constants::mu0 * p.Ms * V);
    }
    worst = std::max(worst, (fd - analytic[k]).norm());
    scale = std::max(scale, fd.norm());
  }
  return scale > 0.0 ? worst / scale : worst;
}

inline std::string fmt(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.3g", v);
  return b;
}

}  // namespace detail

inline std::vector<CheckResult> run_validation(const ValidatedModel& model) {
  using namespace micromag;
  std::vector<CheckResult> out;
  const auto& p = model.material;
  const double dx = model.grid.dx;

  // effective-field terms against finite-difference energy gradients
  {
    const Grid g{2, 2, 2, dx};
    const StressLoad s{1e8, model.stress.theta};
    const Vec3 H = model.environment.H_ext.norm() > 0.0 ? model.environment.H_ext : Vec3(1e5, 2e4, -3e4);
    const MicromagSystem sys(p, g, s, H);
    const auto m = detail::random_unit_state(g.cell_count(), 11);
    const std::pair<const char*, unsigned> terms[] = {{"exchange", exchange},
                                                      {"anisotropy", anisotropy},
                                                      {"demag", demag},
                                                      {"magnetoelastic", magnetoelastic},
                                                      {"zeeman", zeeman}};
    for (const auto& [name, t] : terms) {
      const double e = detail::gradient_mismatch(sys, t, m);
      out.push_back({std::string("gradient/") + name, e < 1e-6, "relative mismatch " + detail::fmt(e)});
    }
  }

  // single-cube demag factor
  {
    const DemagKernel k(Grid{1, 1, 1, dx});
    double trace = 0.0, worst = 0.0;
    for (int c = 0; c < 3; ++c) {
      std::vector<Vec3> h;
      k.field({Vec3::Unit(c)}, 1.0, h);
      trace += -h[0][c];
      worst = std::max(worst, std::abs(-h[0][c] - 1.0 / 3.0));
    }
    const bool ok = std::abs(trace - 1.0) < 1e-10 && worst < 1e-10;
    out.push_back({"demag/cube_factor", ok, "trace " + detail::fmt(trace) + ", max |N_ii - 1/3| " + detail::fmt(worst)});
  }

  // thermal-field variance against the fluctuation-dissipation amplitude
  {
    const double T = model.environment.temperature > 0.0 ? model.environment.temperature : 300.0;
    MaterialParams q = p;
    if (!(q.alpha > 0.0)) q.alpha = 0.1;
    const Grid g{1, 1, 1, dx};
    const double dt = model.environment.dt;
    const double expected = 2.0 * q.alpha * constants::k_boltzmann * T /
                            (q.gamma_llg() * constants::mu0 * q.Ms * std::pow(dx, 3) * dt);
    const double sd = thermal_field_sigma(q, g, T, dt);
    std::vector<Vec3> h;
    double s2 = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
      thermal_field(q, g, T, dt, model.environment.seed, static_cast<std::uint64_t>(i), h);
      s2 += h[0].x() * h[0].x();
    }
    const double rel = std::abs(s2 / n - expected) / expected;
    const bool ok = rel < 0.05 && std::abs(sd * sd - expected) < 1e-12 * expected;
    out.push_back({"thermal/fdt_variance", ok, "relative variance error " + detail::fmt(rel)});
  }

  // Lindblad evolution against the closed-form density matrix
  {
    double worst = 0.0;
    bool physical = true;
    const double t = 200e-9;
    for (double phase : {0.0, 0.3, 1.7, 6.0})
      for (double rt : {0.0, 0.1, 1.0, 3.0}) {
        const double Delta = phase / (constants::two_pi * t);
        const nvspin::LindbladRates r{rt / t, 0.5 * rt / t, 0.0};
        const auto rho = nvspin::evolve_master_equation(nvspin::initial_density(), Delta, r, t);
        worst = std::max(worst, (rho - nvspin::closed_form_density(Delta, r, t)).cwiseAbs().maxCoeff());
        try {
          nvspin::check_density(rho, 1e-9);
        } catch (const Error&) {
          physical = false;
        }
      }
    out.push_back({"nvspin/lindblad_oracle", worst < 1e-6 && physical,
                   "max deviation " + detail::fmt(worst) + (physical ? "" : ", density matrix unphysical")});
  }

  // tensile stress along [111] must pull m onto that axis (lambda111 > 0)
  {
    const Vec3 u = Vec3(1, 1, 1).normalized();
    const Grid g{1, 1, 1, dx};
    const MicromagSystem sys(p, g, {2e8, u}, Vec3::Zero());
    MagState s = MagState::uniform(g, Vec3(0.3, -0.2, 0.93).normalized());
    Environment env;
    env.dt = model.environment.dt;
    const auto rep = relax_to_steady_state(s, sys, env, 1e-6, 400000);
    const double c = std::abs(s.average().dot(u));
    out.push_back({"micromag/magnetoelastic_relaxation", rep.converged && c > 0.95,
                   "|m.u| = " + detail::fmt(c) + (rep.converged ? "" : " (not converged)")});
  }

  // undamped Heun: unit norm and energy drift over 1e4 steps at the configured dt
  {
    MaterialParams q = p;
    q.alpha = 0.0;
    const Grid g{2, 2, 2, dx};
    const Vec3 H = model.environment.H_ext.norm() > 0.0 ? model.environment.H_ext : Vec3(0, 0, 0.235 / constants::mu0);
    const MicromagSystem sys(q, g, {}, H, zeeman);
    HeunIntegrator integ(sys, Environment{H, 0.0, model.environment.dt, 0});
    MagState s = MagState::uniform(g, Vec3(1, 0, 1));
    const double e0 = sys.energy(s.m).total();
    double norm_err = 0.0;
    bool finite = true;
    try {
      for (int i = 0; i < 10000; ++i) {
        integ.step(s);
        norm_err = std::max(norm_err, s.max_norm_error());
      }
    } catch (const NumericalError&) {
      finite = false;
    }
    const double drift = finite ? std::abs(sys.energy(s.m).total() - e0) / std::abs(e0) : INFINITY;
    out.push_back({"micromag/energy_drift", finite && drift < 1e-6 && norm_err < 1e-9,
                   "relative drift " + detail::fmt(drift) + ", max |m|-1 " + detail::fmt(norm_err)});
  }
  // halving dt: film stray field at the NV after 20 ps of damped motion from
  // the seeded initial state must agree to 1%
  {
    const MicromagSystem sys(p, model.grid, model.stress, model.environment.H_ext);
    const Vec3 at = model.nv.resolved_position(model.grid);
    const double span = 20e-12;
    auto run = [&](double dt) {
      MagState s = micromag::perturbed_uniform(model.grid, model.environment.H_ext.norm() > 0.0
                                                               ? model.environment.H_ext.normalized()
                                                               : Vec3::UnitZ(),
                                               model.run.init_perturbation, model.environment.seed);
      HeunIntegrator integ(sys, Environment{model.environment.H_ext, 0.0, dt, 0});
      const auto n = std::lround(span / dt);
      for (long i = 0; i < n; ++i) integ.step(s);
      return probe::film_field_at(s.m, p, model.grid, at);
    };
    double rel = INFINITY;
    try {
      const Vec3 b1 = run(model.environment.dt), b2 = run(0.5 * model.environment.dt);
      rel = (b1 - b2).norm() / b2.norm();
    } catch (const NumericalError&) {
    }
    out.push_back({"micromag/dt_convergence", rel < 0.01, "relative change of the NV stray field " + detail::fmt(rel)});
  }
  return out;
}

}  // namespace nvpiezo::app
