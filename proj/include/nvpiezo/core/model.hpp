#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>

#include <Eigen/Dense>

#include "nvpiezo/core/constants.hpp"
#include "nvpiezo/core/units.hpp"

namespace nvpiezo {

using Vec3 = Eigen::Vector3d;

/// Magnetic constants of a cubic magnetostrictive material (SI).
struct MaterialParams {
  double Ms = 0.0;         // saturation magnetization, A/m
  double A_ex = 0.0;       // exchange stiffness, J/m
  double K1 = 0.0;         // cubic anisotropy, J/m^3
  double K2 = 0.0;         // J/m^3
  double lambda100 = 0.0;  // magnetostriction along <100>
  double lambda111 = 0.0;  // magnetostriction along <111>
  double alpha = 0.0;      // Gilbert damping
  double gamma = constants::gamma_e;  // rad/(s·T)

  /// sqrt(2 A / (mu0 Ms^2)).
  double exchange_length() const { return std::sqrt(2.0 * A_ex / (constants::mu0 * Ms * Ms)); }

  /// Gyromagnetic prefactor of the LLG equation when H is in A/m,
  /// gamma·mu0 in m/(A·s).
  double gamma_llg() const { return gamma * constants::mu0; }

  friend bool operator==(const MaterialParams&, const MaterialParams&) = default;
};

/// Tb0.27Dy0.73Fe2 constants used throughout the examples and tests.
inline MaterialParams builtin_terfenol_d() {
  MaterialParams p;
  p.Ms = 8.0e5;
  p.A_ex = 9.0e-12;
  p.K1 = -0.8e5;
  p.K2 = -1.8e5;
  p.lambda100 = 9.0e-5;
  p.lambda111 = 164.0e-5;
  p.alpha = 0.1;
  p.gamma = constants::gamma_e;
  return p;
}

/// Regular grid of cubic cells. The film occupies [0,nx·dx]×[0,ny·dx]×[0,nz·dx];
/// the diamond (and the NV) lies at z < 0.
struct Grid {
  int nx = 1;
  int ny = 1;
  int nz = 1;
  double dx = 1e-9;

  std::size_t cell_count() const {
    return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) * static_cast<std::size_t>(nz);
  }
  double cell_volume() const { return dx * dx * dx; }
  std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(nx) * (static_cast<std::size_t>(j) + static_cast<std::size_t>(ny) * static_cast<std::size_t>(k));
  }
  Eigen::Vector3i coords(std::size_t idx) const {
    const int i = static_cast<int>(idx % static_cast<std::size_t>(nx));
    const int j = static_cast<int>((idx / static_cast<std::size_t>(nx)) % static_cast<std::size_t>(ny));
    const int k = static_cast<int>(idx / (static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny)));
    return {i, j, k};
  }
  Vec3 cell_center(std::size_t idx) const {
    const auto c = coords(idx);
    return {(c.x() + 0.5) * dx, (c.y() + 0.5) * dx, (c.z() + 0.5) * dx};
  }
  Vec3 extent() const { return {nx * dx, ny * dx, nz * dx}; }

  friend bool operator==(const Grid&, const Grid&) = default;
};

/// Uniaxial stress of magnitude sigma (Pa, tension positive) along the unit
/// direction theta, expressed in crystal axes.
struct StressLoad {
  double sigma = 0.0;
  Vec3 theta = Vec3::UnitZ();

  friend bool operator==(const StressLoad& a, const StressLoad& b) {
    return a.sigma == b.sigma && a.theta == b.theta;
  }
};

struct Environment {
  Vec3 H_ext = Vec3::Zero();  // A/m
  double temperature = 0.0;   // K
  double dt = 1.0e-13;        // s
  std::uint64_t seed = 0;

  friend bool operator==(const Environment& a, const Environment& b) {
    return a.H_ext == b.H_ext && a.temperature == b.temperature && a.dt == b.dt && a.seed == b.seed;
  }
};

struct NVConfig {
  double D = constants::nv_zero_field_splitting;  // Hz
  double E_strain = 0.0;                          // Hz
  double depth = 15.0e-9;                         // m below the film/diamond interface
  std::optional<Vec3> position;                   // overrides the centred default
  Vec3 axis = Vec3::UnitZ();

  /// NV location: explicit position, or on the film's central vertical axis
  /// at `depth` below the interface.
  Vec3 resolved_position(const Grid& grid) const {
    if (position) return *position;
    const Vec3 ext = grid.extent();
    return {0.5 * ext.x(), 0.5 * ext.y(), -depth};
  }

  friend bool operator==(const NVConfig& a, const NVConfig& b) {
    return a.D == b.D && a.E_strain == b.E_strain && a.depth == b.depth && a.position == b.position &&
           a.axis == b.axis;
  }
};

/// Ramsey readout parameters.
struct SensingProtocol {
  double contrast = 0.3;     // C
  double t_prep = 600e-9;    // preparation + readout per run, s
  double t_a = 150e-9;       // interrogation time, s
  double tau = 1.0;          // total measurement time, s

  friend bool operator==(const SensingProtocol&, const SensingProtocol&) = default;
};

}  // namespace nvpiezo
