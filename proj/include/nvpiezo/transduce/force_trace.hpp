#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "nvpiezo/core/error.hpp"
#include "nvpiezo/core/model.hpp"
#include "nvpiezo/core/rng.hpp"
#include "nvpiezo/noise/types.hpp"
#include "nvpiezo/nvspin/coherence.hpp"
#include "nvpiezo/nvspin/sensitivity.hpp"
#include "nvpiezo/transduce/types.hpp"

namespace nvpiezo::transduce {

/// Linear loading ramp F = k·v·(t - start_delay) that drops to zero once it
/// reaches unbind_force. Sampled every resolution / v.
inline ForceTrace synthesize_unbinding_trace(double velocity, double stiffness, double unbind_force, double duration,
                                             double resolution = 0.5e-9, double start_delay = 0.0) {
  if (!(velocity > 0.0) || !(duration > 0.0) || !(resolution > 0.0) || !(unbind_force > 0.0))
    throw DomainError("velocity, duration, resolution and unbind force must be > 0");
  if (stiffness < 0.0 || start_delay < 0.0) throw DomainError("stiffness and start delay must be >= 0");
  ForceTrace tr;
  tr.velocity = velocity;
  tr.resolution = resolution;
  const double dt = resolution / velocity;
  const auto n = static_cast<std::size_t>(std::floor(duration / dt)) + 1;
  tr.t.reserve(n);
  tr.F.reserve(n);
  bool broken = false;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * dt;
    double F = t > start_delay ? stiffness * velocity * (t - start_delay) : 0.0;
    if (broken || F > unbind_force) {
      broken = true;
      F = 0.0;
    }
    tr.t.push_back(t);
    tr.F.push_back(F);
  }
  return tr;
}

/// Checks the record: strictly increasing times spaced by delta_d / v.
inline void check_trace(const ForceTrace& tr) {
  if (tr.t.size() != tr.F.size()) throw DomainError("force trace columns differ in length");
  if (tr.t.size() < 2) throw DomainError("force trace needs at least two samples");
  if (!(tr.velocity > 0.0) || !(tr.resolution > 0.0)) throw DomainError("velocity and resolution must be > 0");
  const double tau_r = tr.time_resolution();
  for (std::size_t i = 1; i < tr.t.size(); ++i) {
    const double d = tr.t[i] - tr.t[i - 1];
    if (!(d > 0.0)) throw DomainError("force trace times must be strictly increasing");
    if (std::abs(d - tau_r) > 1e-6 * tau_r)
      throw DomainError("force trace spacing " + std::to_string(d) + " s differs from delta_d/v = " +
                        std::to_string(tau_r) + " s");
  }
}

struct ForceReadout {
  double dDelta_dsigma = 0.0;          // Hz/Pa
  double Delta0 = 0.0;                 // Hz at zero force
  double omega_minus1 = 0.0;           // Hz, for S_perp
  std::optional<noise::NoiseFit> fit;  // none = noiseless spin
  bool snap_to_quadrature = true;      // move t_a to the nearest |sin(2πΔ0 t_a)| = 1
};

struct FluorescenceTrace {
  std::vector<double> t, F, sigma, Delta, P, P_noisy;
  double t_a = 0.0;
  double shot_noise_scale = 0.0;  // 1/sqrt(tau_r/(t_a+t_p))
  std::vector<std::string> warnings;
};

/// Shot-noise std of P for one time bin, sqrt(P(1-P)) / sqrt(tau_r/(t_a+t_p)).
inline double shot_noise_std(double P, double tau_r, double t_a, double t_prep) {
  const double p = std::clamp(P, 0.0, 1.0);
  return std::sqrt(p * (1.0 - p)) / std::sqrt(tau_r / (t_a + t_prep));
}

/// Per bin: sigma = F/area, Delta = Delta0 + dDelta/dsigma·sigma, P from the
/// Ramsey formula at fixed t_a, plus seeded Gaussian shot noise.
inline FluorescenceTrace simulate_force_trace(const ForceTrace& trace, const TransducerConstants& c,
                                              const ForceReadout& in, const SensingProtocol& protocol,
                                              std::uint64_t seed) {
  check_trace(trace);
  if (!(c.contact_area > 0.0)) throw DomainError("contact area must be > 0");
  FluorescenceTrace out;
  out.t_a = in.snap_to_quadrature ? nvspin::snap_to_quadrature(protocol.t_a, in.Delta0) : protocol.t_a;
  const double tau_r = trace.time_resolution();
  nvspin::NoiseRates rates;
  if (in.fit) {
    rates = nvspin::rates_from_fit(*in.fit, in.omega_minus1);
    double xi_min = in.fit->component[0].xi;
    for (const auto& d : in.fit->component) xi_min = std::min(xi_min, d.xi);
    if (tau_r < 10.0 / xi_min)
      out.warnings.push_back("time resolution " + std::to_string(tau_r) +
                             " s is shorter than 10/xi; the quasi-static assumption does not hold");
  }
  const auto factors = nvspin::coherence_factors(rates, out.t_a);
  out.shot_noise_scale = 1.0 / std::sqrt(tau_r / (out.t_a + protocol.t_prep));
  const CounterRng rng(seed, Stream::shot_noise);
  const std::size_t n = trace.t.size();
  for (auto* v : {&out.t, &out.F, &out.sigma, &out.Delta, &out.P, &out.P_noisy}) v->reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double sigma = trace.F[i] / c.contact_area;
    const double Delta = in.Delta0 + in.dDelta_dsigma * sigma;
    const double P = nvspin::ramsey_signal(Delta, factors, out.t_a);
    out.t.push_back(trace.t[i]);
    out.F.push_back(trace.F[i]);
    out.sigma.push_back(sigma);
    out.Delta.push_back(Delta);
    out.P.push_back(P);
    out.P_noisy.push_back(P + shot_noise_std(P, tau_r, out.t_a, protocol.t_prep) * rng.gaussian_at(i));
  }
  return out;
}

}  // namespace nvpiezo::transduce
