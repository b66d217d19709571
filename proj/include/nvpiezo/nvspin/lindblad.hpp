#pragma once

#include <algorithm>
#include <cmath>
#include <complex>

#include <Eigen/Dense>

#include "nvpiezo/core/constants.hpp"
#include "nvpiezo/core/error.hpp"
#include "nvpiezo/nvspin/coherence.hpp"
#include "nvpiezo/nvspin/hamiltonian.hpp"

namespace nvpiezo::nvspin {

/// Coefficients of the dissipators, s^-1:
///   dephasing · L[S_z] + relax_minus · (L[|0><-1|] + L[|-1><0|])
///                      + relax_plus  · (L[|0><+1|] + L[|+1><0|]).
struct LindbladRates {
  double dephasing = 0.0;
  double relax_minus = 0.0;
  double relax_plus = 0.0;
};

/// Rates that reproduce chi_par = exp(-4 t S_z(0)) and chi_perp =
/// exp(-t S_perp / 2) in the Ramsey populations and coherence.
inline LindbladRates lindblad_rates(const NoiseRates& r) {
  return {2.0 * r.S_z0 + r.S_perp / 8.0, r.S_perp / 2.0, 0.0};
}

/// (|+1> + |-1>)/√2, the state prepared by the first pulse.
inline CVec3 bright_state() {
  const double s = 1.0 / std::sqrt(2.0);
  return CVec3(s, 0.0, s);
}

inline CMat3 initial_density() {
  const CVec3 b = bright_state();
  return b * b.adjoint();
}

namespace detail {

inline void add_dissipator(const CMat3& L, double rate, const CMat3& rho, CMat3& out) {
  if (rate == 0.0) return;
  const CMat3 LdL = L.adjoint() * L;
  out += rate * (L * rho * L.adjoint() - 0.5 * (LdL * rho + rho * LdL));
}

inline CMat3 jump(int to, int from) {
  CMat3 m = CMat3::Zero();
  m(to, from) = 1.0;
  return m;
}

}  // namespace detail

/// dρ/dt in the frame where the ±1 levels sit at ±πΔ (Δ in Hz).
inline CMat3 lindblad_rhs(const CMat3& rho, double Delta, const LindbladRates& r) {
  const std::complex<double> i(0.0, 1.0);
  CMat3 H = CMat3::Zero();
  H(plus1, plus1) = constants::pi * Delta;
  H(minus1, minus1) = -constants::pi * Delta;
  CMat3 d = -i * (H * rho - rho * H);
  detail::add_dissipator(spin1().Sz, r.dephasing, rho, d);
  detail::add_dissipator(detail::jump(zero, minus1), r.relax_minus, rho, d);
  detail::add_dissipator(detail::jump(minus1, zero), r.relax_minus, rho, d);
  detail::add_dissipator(detail::jump(zero, plus1), r.relax_plus, rho, d);
  detail::add_dissipator(detail::jump(plus1, zero), r.relax_plus, rho, d);
  return d;
}

inline void check_density(const CMat3& rho, double tol = 1e-10) {
  if ((rho - rho.adjoint()).norm() > tol) throw DomainError("density matrix is not Hermitian");
  if (std::abs(rho.trace() - 1.0) > tol) throw DomainError("density matrix trace is not 1");
  const CMat3 herm = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<CMat3> es(herm, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -tol) throw DomainError("density matrix is not positive semidefinite");
}

/// Fixed-step RK4 integration of the master equation from rho0 to time t.
inline CMat3 evolve_master_equation(const CMat3& rho0, double Delta, const LindbladRates& r, double t) {
  check_density(rho0);
  if (t < 0.0) throw DomainError("time must be >= 0");
  if (r.dephasing < 0.0 || r.relax_minus < 0.0 || r.relax_plus < 0.0) throw DomainError("rates must be >= 0");
  if (t == 0.0) return rho0;
  const double fastest =
      std::max({constants::two_pi * std::abs(Delta), 2.0 * r.dephasing, 2.0 * r.relax_minus, 2.0 * r.relax_plus});
  const long steps = std::max(200L, static_cast<long>(std::ceil(fastest * t / 0.01)));
  const double h = t / static_cast<double>(steps);
  CMat3 rho = rho0;
  for (long n = 0; n < steps; ++n) {
    const CMat3 k1 = lindblad_rhs(rho, Delta, r);
    const CMat3 k2 = lindblad_rhs(rho + 0.5 * h * k1, Delta, r);
    const CMat3 k3 = lindblad_rhs(rho + 0.5 * h * k2, Delta, r);
    const CMat3 k4 = lindblad_rhs(rho + h * k3, Delta, r);
    rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return rho;
}

/// Closed-form solution from the bright state when relax_plus = 0:
/// p_-1 = (1 + e^{-2Γt})/4, p_0 = (1 - e^{-2Γt})/4, p_+1 = 1/2,
/// ρ_{+1,-1} = e^{-(2γ_φ + Γ/2)t} e^{-i2πΔt}/2.
inline CMat3 closed_form_density(double Delta, const LindbladRates& r, double t) {
  if (r.relax_plus != 0.0) throw DomainError("closed form requires relax_plus = 0");
  const double g = r.relax_minus;
  const double e = std::exp(-2.0 * g * t);
  const std::complex<double> q =
      0.5 * std::exp(-(2.0 * r.dephasing + 0.5 * g) * t) * std::polar(1.0, -constants::two_pi * Delta * t);
  CMat3 rho = CMat3::Zero();
  rho(plus1, plus1) = 0.5;
  rho(zero, zero) = 0.25 * (1.0 - e);
  rho(minus1, minus1) = 0.25 * (1.0 + e);
  rho(plus1, minus1) = q;
  rho(minus1, plus1) = std::conj(q);
  return rho;
}

/// Probability of returning to the bright state, which the closing pulse maps
/// onto the measured population.
inline double readout(const CMat3& rho) {
  const CVec3 b = bright_state();
  return (b.adjoint() * rho * b)(0, 0).real();
}

}  // namespace nvpiezo::nvspin
