#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "nvpiezo/core/error.hpp"
#include "nvpiezo/transduce/types.hpp"

namespace nvpiezo::transduce {

/// Direct (non-piezomagnetic) couplings of the NV spin, kept for comparison
/// in reports only.
namespace reference {
inline constexpr double electric_hz_per_v_per_m = 10.0 / 100.0;  // 10 Hz/(V/cm)
inline constexpr double thermal_hz_per_k = 74e3;
inline constexpr double pressure_hz_per_pa = 15e3 / 1e6;         // 15 kHz/MPa
}  // namespace reference

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Ordinary least squares Delta = slope·sigma + intercept.
/// R² is 1 when the data have no spread at all.
inline LinearFit fit_stress_gradient(const std::vector<double>& sigma, const std::vector<double>& Delta) {
  if (sigma.size() != Delta.size()) throw DomainError("sigma and Delta must have the same length");
  if (sigma.size() < 3) throw DomainError("at least 3 sweep points are needed");
  const double n = static_cast<double>(sigma.size());
  double ms = 0, md = 0;
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    ms += sigma[i];
    md += Delta[i];
  }
  ms /= n;
  md /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    sxx += (sigma[i] - ms) * (sigma[i] - ms);
    sxy += (sigma[i] - ms) * (Delta[i] - md);
    syy += (Delta[i] - md) * (Delta[i] - md);
  }
  if (!(sxx > 0.0) || sxx <= 1e-24 * n * ms * ms) throw DomainError("sweep stresses are degenerate (no spread)");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = md - f.slope * ms;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    const double r = Delta[i] - (f.slope * sigma[i] + f.intercept);
    ss_res += r * r;
  }
  f.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return f;
}

/// dDelta/dE = epsilon_e·Y·dDelta/dsigma, Hz per (V/m).
inline double electric_field_coupling(const TransducerConstants& c, double dDelta_dsigma) {
  return c.epsilon_e * c.Y_piezo * dDelta_dsigma;
}

/// eta_e = eta_sigma / (epsilon_e·Y), (V/m)/√Hz.
inline double electric_field_sensitivity(const TransducerConstants& c, double eta_sigma) {
  return eta_sigma / (c.epsilon_e * c.Y_piezo);
}

/// dDelta/dT = epsilon_T·Y·dDelta/dsigma, Hz/K.
inline double temperature_coupling(const TransducerConstants& c, double dDelta_dsigma) {
  return c.epsilon_T * c.Y_thermal * dDelta_dsigma;
}

/// eta_T = eta_sigma / (epsilon_T·Y), K/√Hz.
inline double temperature_sensitivity(const TransducerConstants& c, double eta_sigma) {
  return eta_sigma / (c.epsilon_T * c.Y_thermal);
}

/// eta_F = eta_sigma·area, N/√Hz.
inline double force_sensitivity(double eta_sigma, double contact_area) {
  if (!(contact_area > 0.0)) throw DomainError("contact area must be > 0");
  return eta_sigma * contact_area;
}

}  // namespace nvpiezo::transduce
