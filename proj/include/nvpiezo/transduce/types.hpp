#pragma once

#include <vector>

namespace nvpiezo::transduce {

/// Stress-generating elements attached to the piezomagnetic film (SI).
struct TransducerConstants {
  double epsilon_e = 2.0e-10;    // piezoelectric strain per field, m/V (0.0002 (MV/m)^-1)
  double Y_piezo = 1.0e11;       // Pa
  double epsilon_T = 2.3e-5;     // thermal expansion, 1/K
  double Y_thermal = 7.0e10;     // Pa
  double contact_area = 15e-9 * 15e-9;  // m^2

  friend bool operator==(const TransducerConstants&, const TransducerConstants&) = default;
};

/// Force-versus-time record sampled at the time resolution tau_r = delta_d / v.
struct ForceTrace {
  std::vector<double> t;  // s
  std::vector<double> F;  // N
  double velocity = 100e-9;      // pulling speed, m/s
  double resolution = 0.5e-9;    // spatial resolution delta_d, m

  double time_resolution() const { return resolution / velocity; }
};

}  // namespace nvpiezo::transduce
