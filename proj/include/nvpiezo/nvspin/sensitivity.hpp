#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "nvpiezo/core/constants.hpp"
#include "nvpiezo/core/error.hpp"
#include "nvpiezo/core/model.hpp"
#include "nvpiezo/nvspin/coherence.hpp"

namespace nvpiezo::nvspin {

/// Shot-noise-limited stress sensitivity at the slope-optimal phase, Pa/√Hz
/// when protocol.tau = 1 s. dDelta_dsigma in Hz/Pa (sign ignored).
inline double sensitivity(const SensingProtocol& p, const CoherenceFactors& f, double dDelta_dsigma) {
  if (dDelta_dsigma == 0.0 || !std::isfinite(dDelta_dsigma))
    throw DomainError("dDelta/dsigma is zero: the stress is not transduced");
  const double cp2 = f.chi_perp * f.chi_perp;
  const double num = std::sqrt((3.0 + cp2) * (5.0 - cp2));
  const double den = 8.0 * constants::pi * p.contrast * f.chi_perp * f.chi_par * p.t_a * std::abs(dDelta_dsigma);
  return num / den * std::sqrt((p.t_a + p.t_prep) / p.tau);
}

struct SensitivityCurve {
  std::vector<double> t_a;
  std::vector<double> eta;
  double t_opt = 0.0;
  double eta_opt = std::numeric_limits<double>::infinity();
};

/// Nearest interrogation time with 2πΔt ≡ π/2 (mod π), i.e. |sin| = 1.
inline double snap_to_quadrature(double t, double Delta) {
  if (Delta == 0.0) return t;
  const double period = 1.0 / (2.0 * std::abs(Delta));  // spacing of quadrature points
  const double k = std::max(0.0, std::round(t / period - 0.5));
  return (k + 0.5) * period;
}

/// Evaluate eta on the grid (snapped to quadrature points when Delta is
/// given) and return the minimizer with the whole curve.
inline SensitivityCurve optimize_interrogation_time(const SensingProtocol& tmpl, const NoiseRates& rates,
                                                    double dDelta_dsigma, const std::vector<double>& grid,
                                                    std::optional<double> Delta = std::nullopt) {
  if (grid.empty()) throw DomainError("interrogation-time grid is empty");
  SensitivityCurve c;
  for (double t : grid) {
    const double ta = Delta ? snap_to_quadrature(t, *Delta) : t;
    if (!(ta > 0.0)) throw DomainError("interrogation times must be > 0");
    if (!c.t_a.empty() && std::abs(ta - c.t_a.back()) <= 1e-15 * ta) continue;
    SensingProtocol p = tmpl;
    p.t_a = ta;
    const double eta = sensitivity(p, coherence_factors(rates, ta), dDelta_dsigma);
    c.t_a.push_back(ta);
    c.eta.push_back(eta);
    if (eta < c.eta_opt) {
      c.eta_opt = eta;
      c.t_opt = ta;
    }
  }
  return c;
}

/// Logarithmically spaced grid of n points in [lo, hi].
inline std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0 && hi >= lo) || n == 0) throw DomainError("log grid needs 0 < lo <= hi and n >= 1");
  std::vector<double> g(n);
  if (n == 1) {
    g[0] = lo;
    return g;
  }
  for (std::size_t i = 0; i < n; ++i)
    g[i] = lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(n - 1));
  return g;
}

}  // namespace nvpiezo::nvspin
