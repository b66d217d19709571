#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "nvpiezo/core/constants.hpp"
#include "nvpiezo/core/error.hpp"
#include "nvpiezo/noise/types.hpp"
#include "nvpiezo/probe/trajectory.hpp"

namespace nvpiezo::noise {

namespace detail {

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace detail

/// Mean-subtracted biased autocorrelation, R[k] = (1/N) Σ_i x_i x_{i+k} for
/// k = 0..N-1, by zero-padded FFT.
inline std::vector<double> autocorrelation(const std::vector<double>& x) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  const std::size_t m = detail::next_pow2(2 * n);
  std::vector<double> padded(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) padded[i] = x[i] - mean;
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spec;
  fft.fwd(spec, padded);
  for (auto& c : spec) c = std::norm(c);
  std::vector<double> back;
  fft.inv(back, spec);
  std::vector<double> r(back.begin(), back.begin() + static_cast<std::ptrdiff_t>(n));
  for (auto& v : r) v /= static_cast<double>(n);
  return r;
}

/// Field-noise correlation of a trajectory, in (rad/s)² (field times gamma).
inline Correlation autocorrelation(const probe::FieldTrajectory& tr, double gamma = constants::gamma_e) {
  if (tr.size() < 1000) throw DomainError("autocorrelation needs at least 1000 samples, got " + std::to_string(tr.size()));
  const double dt = tr.samples[1].t - tr.samples[0].t;
  if (!(dt > 0.0)) throw DomainError("trajectory timestamps must be strictly increasing");
  for (std::size_t i = 1; i < tr.size(); ++i) {
    const double step = tr.samples[i].t - tr.samples[i - 1].t;
    if (std::abs(step - dt) > 1e-6 * dt)
      throw DomainError("trajectory spacing is not uniform at sample " + std::to_string(i));
  }
  Correlation c;
  c.lag_step = dt;
  for (int k = 0; k < 3; ++k) {
    auto x = tr.component(k);
    for (auto& v : x) v *= gamma;
    c.R[static_cast<std::size_t>(k)] = autocorrelation(x);
  }
  return c;
}

/// Average of per-seed correlations (truncated to the shortest).
inline Correlation average(const std::vector<Correlation>& cs) {
  if (cs.empty()) throw DomainError("no correlations to average");
  std::size_t n = cs.front().size();
  for (const auto& c : cs) {
    if (std::abs(c.lag_step - cs.front().lag_step) > 1e-9 * c.lag_step)
      throw DomainError("correlations with different lag spacing cannot be averaged");
    n = std::min(n, c.size());
  }
  Correlation out;
  out.lag_step = cs.front().lag_step;
  for (std::size_t k = 0; k < 3; ++k) {
    out.R[k].assign(n, 0.0);
    for (const auto& c : cs)
      for (std::size_t i = 0; i < n; ++i) out.R[k][i] += c.R[k][i];
    for (auto& v : out.R[k]) v /= static_cast<double>(cs.size());
  }
  return out;
}

}  // namespace nvpiezo::noise
