#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <string>

#include <Eigen/Dense>

#include "nvpiezo/core/constants.hpp"
#include "nvpiezo/core/error.hpp"
#include "nvpiezo/core/model.hpp"

namespace nvpiezo::nvspin {

using CMat3 = Eigen::Matrix3cd;
using CVec3 = Eigen::Vector3cd;

/// Basis order used throughout: {|+1>, |0>, |-1>}.
enum Level : int { plus1 = 0, zero = 1, minus1 = 2 };

struct SpinOperators {
  CMat3 Sx, Sy, Sz;
};

inline const SpinOperators& spin1() {
  static const SpinOperators ops = [] {
    using C = std::complex<double>;
    const double s = 1.0 / std::sqrt(2.0);
    const C i(0.0, 1.0);
    SpinOperators o;
    o.Sx << 0, s, 0, s, 0, s, 0, s, 0;
    o.Sy << C(0), -i * s, C(0), i * s, C(0), -i * s, C(0), i * s, C(0);
    o.Sz << 1, 0, 0, 0, 0, 0, 0, 0, -1;
    return o;
  }();
  return ops;
}

/// Ground-state Hamiltonian in angular-frequency units (rad/s).
struct SpinHamiltonian {
  CMat3 H = CMat3::Zero();
};

/// H = 2π[D Sz² + E (Sx² − Sy²)] + γ (B_z Sz + B_x Sx + B_y Sy), with B in
/// NV-frame components (T) and D, E in Hz.
inline SpinHamiltonian build_hamiltonian(double D, double E, const Vec3& B_nv) {
  const auto& o = spin1();
  SpinHamiltonian h;
  h.H = constants::two_pi * (D * o.Sz * o.Sz + E * (o.Sx * o.Sx - o.Sy * o.Sy)) +
        constants::gamma_e * (B_nv.z() * o.Sz + B_nv.x() * o.Sx + B_nv.y() * o.Sy);
  return h;
}

inline SpinHamiltonian build_hamiltonian(const NVConfig& nv, const Vec3& B_nv) {
  return build_hamiltonian(nv.D, nv.E_strain, B_nv);
}

/// Transition frequencies from m_s = 0 to the states continuous with
/// |-1> and |+1>, in Hz. Delta = omega_plus1 - omega_minus1.
struct Resonances {
  double omega_minus1 = 0.0;
  double omega_plus1 = 0.0;
  double Delta = 0.0;
};

/// Eigenvalues (rad/s) in ascending order.
inline Eigen::Vector3d eigenfrequencies(const SpinHamiltonian& h) {
  Eigen::SelfAdjointEigenSolver<CMat3> es(h.H, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

/// Diagonalize and label each eigenvector by its dominant basis overlap
/// (best of the six assignments). Eigenvalues closer than 1 kHz count as
/// degenerate; an assignment that is ambiguous between two non-degenerate
/// levels raises DomainError.
inline Resonances resonance_frequencies(const SpinHamiltonian& h) {
  static constexpr double degenerate = constants::two_pi * 1e3;
  static constexpr double ambiguity = 1e-6;
  Eigen::SelfAdjointEigenSolver<CMat3> es(h.H);
  if (es.info() != Eigen::Success) throw NumericalError("spin Hamiltonian diagonalization failed");
  const Eigen::Vector3d w = es.eigenvalues();
  Eigen::Matrix3d overlap;  // overlap(basis, eigvec)
  for (int b = 0; b < 3; ++b)
    for (int v = 0; v < 3; ++v) overlap(b, v) = std::norm(es.eigenvectors()(b, v));

  std::array<int, 3> perm{0, 1, 2};  // perm[basis] = eigenvector index
  std::array<int, 3> best{}, second{};
  double best_score = -1.0, second_score = -1.0;
  do {
    const double s = overlap(0, perm[0]) + overlap(1, perm[1]) + overlap(2, perm[2]);
    if (s > best_score) {
      second_score = best_score;
      second = best;
      best_score = s;
      best = perm;
    } else if (s > second_score) {
      second_score = s;
      second = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  if (best_score - second_score < ambiguity) {
    // the competing assignment swaps some levels; fine if they are degenerate
    static constexpr const char* names[3] = {"|+1>", "|0>", "|-1>"};
    for (int b = 0; b < 3; ++b) {
      if (best[static_cast<std::size_t>(b)] == second[static_cast<std::size_t>(b)]) continue;
      const double gap = std::abs(w[best[static_cast<std::size_t>(b)]] - w[second[static_cast<std::size_t>(b)]]);
      if (gap >= degenerate) {
        int other = 0;
        for (int c = 0; c < 3; ++c)
          if (c != b && best[static_cast<std::size_t>(c)] == second[static_cast<std::size_t>(b)]) other = c;
        throw DomainError(std::string("ambiguous level assignment between ") + names[b] + " and " + names[other] +
                          ": eigenvectors are strongly mixed but not degenerate");
      }
    }
  }
  const double e_plus = w[best[plus1]], e_zero = w[best[zero]], e_minus = w[best[minus1]];
  Resonances r;
  r.omega_plus1 = (e_plus - e_zero) / constants::two_pi;
  r.omega_minus1 = (e_minus - e_zero) / constants::two_pi;
  r.Delta = r.omega_plus1 - r.omega_minus1;
  if (std::abs(e_plus - e_minus) < degenerate) r.Delta = 0.0;
  return r;
}

inline Resonances resonance_frequencies(const NVConfig& nv, const Vec3& B_nv) {
  return resonance_frequencies(build_hamiltonian(nv, B_nv));
}

}  // namespace nvpiezo::nvspin
