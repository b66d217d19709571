#pragma once

#include <cmath>
#include <complex>

#include "nvpiezo/core/constants.hpp"
#include "nvpiezo/core/error.hpp"
#include "nvpiezo/noise/spectrum.hpp"
#include "nvpiezo/noise/types.hpp"

namespace nvpiezo::nvspin {

/// Spectral values entering the Markovian decoherence model, s^-1.
struct NoiseRates {
  double S_z0 = 0.0;     // S_z(0)
  double S_perp = 0.0;   // S_perp(|omega_-1|)
};

/// S_z at zero frequency and S_perp = (S_x + S_y)/2 at the angular frequency
/// of the 0 -> -1 transition (magnitude; the spectrum is even).
inline NoiseRates rates_from_fit(const noise::NoiseFit& f, double omega_minus1_hz) {
  NoiseRates r;
  r.S_z0 = noise::psd_from_fit(f.component[noise::Z], 0.0);
  r.S_perp = noise::psd_perp(f, constants::two_pi * std::abs(omega_minus1_hz));
  return r;
}

struct CoherenceFactors {
  double chi_par = 1.0;
  double chi_perp = 1.0;
};

/// chi_par = exp(-4 t S_z(0)), chi_perp = exp(-t S_perp / 2).
inline CoherenceFactors coherence_factors(double S_z0, double S_perp, double t) {
  if (S_z0 < 0.0 || S_perp < 0.0) throw DomainError("spectral densities must be >= 0");
  if (t < 0.0) throw DomainError("time must be >= 0");
  return {std::exp(-4.0 * t * S_z0), std::exp(-0.5 * t * S_perp)};
}

inline CoherenceFactors coherence_factors(const NoiseRates& r, double t) {
  return coherence_factors(r.S_z0, r.S_perp, t);
}

/// Dephasing envelope without the long-time approximation,
/// exp(-4 ∫_0^t (t - s) R_z(s) ds), for the damped-cosine correlation.
inline double chi_par_exact(const noise::DampedCosine& z, double t) {
  if (t < 0.0) throw DomainError("time must be >= 0");
  const std::complex<double> a(z.xi, -z.omega0);
  // ∫_0^t (t-s) e^{-a s} ds = t/a - (1 - e^{-a t})/a²
  const std::complex<double> I = t / a - (1.0 - std::exp(-a * t)) / (a * a);
  return std::exp(-4.0 * z.R0 * I.real());
}

/// Ramsey population P = (3 + chi_perp²)/8 + cos(2π Delta t_a) chi_perp chi_par / 2,
/// Delta in Hz.
inline double ramsey_signal(double Delta, const CoherenceFactors& f, double t_a) {
  return (3.0 + f.chi_perp * f.chi_perp) / 8.0 + 0.5 * std::cos(constants::two_pi * Delta * t_a) * f.chi_perp * f.chi_par;
}

}  // namespace nvpiezo::nvspin
