#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace nvpiezo::noise {

enum Component : std::size_t { X = 0, Y = 1, Z = 2 };

/// Damped-cosine model R(t) = R0·exp(-xi·t)·cos(omega0·t) for one field
/// component, in angular-frequency units: R0 in (rad/s)^2.
struct DampedCosine {
  double R0 = 0.0;
  double xi = 1.0;      // s^-1
  double omega0 = 0.0;  // rad/s
  double residual = 0.0;  // RMS fit residual relative to R0

  friend bool operator==(const DampedCosine&, const DampedCosine&) = default;
};

/// Per-component fits (x, y transverse; z along the NV axis).
struct NoiseFit {
  std::array<DampedCosine, 3> component{};
  int n_seeds = 1;

  friend bool operator==(const NoiseFit&, const NoiseFit&) = default;
};

/// Sampled autocorrelation, one array per component, common lag spacing.
struct Correlation {
  double lag_step = 0.0;  // s
  std::array<std::vector<double>, 3> R{};

  std::size_t size() const { return R[0].size(); }
};

}  // namespace nvpiezo::noise
