#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "nvpiezo/core/constants.hpp"
#include "nvpiezo/core/error.hpp"
#include "nvpiezo/noise/types.hpp"

namespace nvpiezo::noise {

/// Lorentzian pair of a damped cosine, normalized so ∫S dω/π = R0 over the
/// whole line.
inline double psd_from_fit(const DampedCosine& f, double omega) {
  const double a = omega - f.omega0, b = omega + f.omega0;
  return 0.5 * f.R0 * (f.xi / (f.xi * f.xi + a * a) + f.xi / (f.xi * f.xi + b * b));
}

inline std::vector<double> psd_from_fit(const DampedCosine& f, const std::vector<double>& omega) {
  std::vector<double> s;
  s.reserve(omega.size());
  for (double w : omega) s.push_back(psd_from_fit(f, w));
  return s;
}

/// Transverse spectrum S_perp = (S_x + S_y)/2.
inline double psd_perp(const NoiseFit& f, double omega) {
  return 0.5 * (psd_from_fit(f.component[X], omega) + psd_from_fit(f.component[Y], omega));
}

struct Spectrum {
  std::vector<double> omega;  // rad/s, 0 .. pi/dt
  std::vector<double> S;      // same units as psd_from_fit
};

/// Welch estimate with Hann windows and 50% overlap:
/// S(ω) = (dt/2)·|Σ w_n x_n e^{-iωn dt}|² / Σ w_n², averaged over segments,
/// which matches psd_from_fit (white noise of variance v gives v·dt/2).
inline Spectrum psd_periodogram(const std::vector<double>& x, double dt, std::size_t segment = 1024) {
  if (!(dt > 0.0)) throw DomainError("sample spacing must be > 0");
  if (segment < 8) throw DomainError("segment length must be >= 8");
  if (segment > x.size()) throw DomainError("segment length exceeds the series length");
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());

  std::vector<double> w(segment);
  double w2 = 0.0;
  for (std::size_t i = 0; i < segment; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(constants::two_pi * static_cast<double>(i) / static_cast<double>(segment));
    w2 += w[i] * w[i];
  }
  const std::size_t half = segment / 2 + 1;
  Spectrum out;
  out.S.assign(half, 0.0);
  out.omega.resize(half);
  for (std::size_t k = 0; k < half; ++k)
    out.omega[k] = constants::two_pi * static_cast<double>(k) / (static_cast<double>(segment) * dt);

  Eigen::FFT<double> fft;
  std::vector<double> buf(segment);
  std::vector<std::complex<double>> spec;
  const std::size_t hop = segment / 2;
  std::size_t count = 0;
  for (std::size_t start = 0; start + segment <= x.size(); start += hop) {
    for (std::size_t i = 0; i < segment; ++i) buf[i] = w[i] * (x[start + i] - mean);
    fft.fwd(spec, buf);
    for (std::size_t k = 0; k < half; ++k) out.S[k] += std::norm(spec[k]);
    ++count;
  }
  for (auto& s : out.S) s *= 0.5 * dt / (w2 * static_cast<double>(count));
  return out;
}

}  // namespace nvpiezo::noise
