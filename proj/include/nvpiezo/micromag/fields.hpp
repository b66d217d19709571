#pragma once

// Effective-field terms and the matching discrete energies. Every field is
// H_k = -(1/(mu0·Ms·V)) ∂E/∂m_k of its energy, exactly, so relaxation under
// the deterministic LLG is a descent of total_energy().

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "nvpiezo/core/constants.hpp"
#include "nvpiezo/core/error.hpp"
#include "nvpiezo/core/model.hpp"
#include "nvpiezo/core/rng.hpp"
#include "nvpiezo/micromag/demag.hpp"

namespace nvpiezo::micromag {

/// Per-cell unit magnetization and simulation time.
struct MagState {
  std::vector<Vec3> m;
  double time = 0.0;

  std::size_t size() const { return m.size(); }

  static MagState uniform(const Grid& g, const Vec3& dir) {
    return MagState{std::vector<Vec3>(g.cell_count(), dir.normalized()), 0.0};
  }

  Vec3 average() const {
    Vec3 s = Vec3::Zero();
    for (const auto& v : m) s += v;
    return s / static_cast<double>(m.size());
  }

  double max_norm_error() const {
    double e = 0.0;
    for (const auto& v : m) e = std::max(e, std::abs(v.norm() - 1.0));
    return e;
  }
};

/// Seeded uniform start along `dir` with a small random tilt per cell.
inline MagState perturbed_uniform(const Grid& g, const Vec3& dir, double amplitude, std::uint64_t seed) {
  MagState s = MagState::uniform(g, dir);
  const CounterRng rng(seed, Stream::initial_state);
  for (std::size_t k = 0; k < s.m.size(); ++k) {
    Vec3 v = s.m[k];
    for (int c = 0; c < 3; ++c) v[c] += amplitude * rng.gaussian_at(3 * k + static_cast<std::size_t>(c));
    s.m[k] = v.normalized();
  }
  return s;
}

enum Term : unsigned {
  exchange = 1U << 0,
  anisotropy = 1U << 1,
  demag = 1U << 2,
  magnetoelastic = 1U << 3,
  zeeman = 1U << 4,
  all_deterministic = exchange | anisotropy | demag | magnetoelastic | zeeman,
};

/// Field contributions, A/m, one vector per cell each.
struct FieldSet {
  std::vector<Vec3> exchange, anisotropy, demag, magnetoelastic, zeeman, thermal;

  /// Always summed in the declaration order above.
  std::vector<Vec3> total() const {
    std::vector<Vec3> t(exchange.size(), Vec3::Zero());
    for (std::size_t k = 0; k < t.size(); ++k) {
      t[k] = exchange[k];
      t[k] += anisotropy[k];
      t[k] += demag[k];
      t[k] += magnetoelastic[k];
      t[k] += zeeman[k];
      if (!thermal.empty()) t[k] += thermal[k];
    }
    return t;
  }
};

struct EnergyBreakdown {
  double exchange = 0, anisotropy = 0, demag = 0, magnetoelastic = 0, zeeman = 0;
  double total() const { return exchange + anisotropy + demag + magnetoelastic + zeeman; }
};

// ---------------------------------------------------------------------------
// Individual terms. Field functions fill `out` (resized to the cell count).

/// 6-neighbour Laplacian with free (Neumann) boundaries:
/// H = 2A/(mu0 Ms dx^2) · sum_nb (m_nb - m).
inline void exchange_field(const std::vector<Vec3>& m, const MaterialParams& p, const Grid& g, std::vector<Vec3>& out) {
  out.assign(m.size(), Vec3::Zero());
  const double c = 2.0 * p.A_ex / (constants::mu0 * p.Ms * g.dx * g.dx);
  for (int k = 0; k < g.nz; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        const std::size_t idx = g.index(i, j, k);
        Vec3 acc = Vec3::Zero();
        const Vec3& mi = m[idx];
        if (i > 0) acc += m[g.index(i - 1, j, k)] - mi;
        if (i + 1 < g.nx) acc += m[g.index(i + 1, j, k)] - mi;
        if (j > 0) acc += m[g.index(i, j - 1, k)] - mi;
        if (j + 1 < g.ny) acc += m[g.index(i, j + 1, k)] - mi;
        if (k > 0) acc += m[g.index(i, j, k - 1)] - mi;
        if (k + 1 < g.nz) acc += m[g.index(i, j, k + 1)] - mi;
        out[idx] = c * acc;
      }
}

inline double exchange_energy(const std::vector<Vec3>& m, const MaterialParams& p, const Grid& g) {
  double e = 0.0;
  for (int k = 0; k < g.nz; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        const Vec3& mi = m[g.index(i, j, k)];
        if (i + 1 < g.nx) e += (m[g.index(i + 1, j, k)] - mi).squaredNorm();
        if (j + 1 < g.ny) e += (m[g.index(i, j + 1, k)] - mi).squaredNorm();
        if (k + 1 < g.nz) e += (m[g.index(i, j, k + 1)] - mi).squaredNorm();
      }
  return p.A_ex * g.cell_volume() / (g.dx * g.dx) * e;
}

/// Cubic anisotropy energy density K1(b1²b2²+b2²b3²+b1²b3²) + K2 b1²b2²b3², J/m^3.
inline double anisotropy_energy_density(const Vec3& b, const MaterialParams& p) {
  const double x2 = b.x() * b.x(), y2 = b.y() * b.y(), z2 = b.z() * b.z();
  return p.K1 * (x2 * y2 + y2 * z2 + x2 * z2) + p.K2 * x2 * y2 * z2;
}

inline Vec3 anisotropy_field_cell(const Vec3& b, const MaterialParams& p) {
  const double x2 = b.x() * b.x(), y2 = b.y() * b.y(), z2 = b.z() * b.z();
  const Vec3 grad(2.0 * b.x() * (p.K1 * (y2 + z2) + p.K2 * y2 * z2),
                  2.0 * b.y() * (p.K1 * (x2 + z2) + p.K2 * x2 * z2),
                  2.0 * b.z() * (p.K1 * (x2 + y2) + p.K2 * x2 * y2));
  return -grad / (constants::mu0 * p.Ms);
}

inline void anisotropy_field(const std::vector<Vec3>& m, const MaterialParams& p, std::vector<Vec3>& out) {
  out.resize(m.size());
  for (std::size_t k = 0; k < m.size(); ++k) out[k] = anisotropy_field_cell(m[k], p);
}

inline double anisotropy_energy(const std::vector<Vec3>& m, const MaterialParams& p, const Grid& g) {
  double e = 0.0;
  for (const auto& b : m) e += anisotropy_energy_density(b, p);
  return e * g.cell_volume();
}

/// Magnetoelastic energy density under uniaxial stress, J/m^3:
/// sigma·[-(3/2)λ100 Σ b_i²θ_i² - (3/2)λ111 Σ_{i≠j} b_i b_j θ_i θ_j].
inline double magnetoelastic_energy_density(const Vec3& b, const MaterialParams& p, const StressLoad& s) {
  const Vec3& t = s.theta;
  double diag = 0.0;
  for (int i = 0; i < 3; ++i) diag += b[i] * b[i] * t[i] * t[i];
  const double off = 2.0 * (b.x() * b.y() * t.x() * t.y() + b.y() * b.z() * t.y() * t.z() + b.x() * b.z() * t.x() * t.z());
  return s.sigma * (-1.5 * p.lambda100 * diag - 1.5 * p.lambda111 * off);
}

inline Vec3 magnetoelastic_field_cell(const Vec3& b, const MaterialParams& p, const StressLoad& s) {
  const Vec3& t = s.theta;
  const double bt = b.dot(t);
  Vec3 grad;
  for (int i = 0; i < 3; ++i) {
    const double others = bt - b[i] * t[i];
    grad[i] = s.sigma * (-3.0 * p.lambda100 * b[i] * t[i] * t[i] - 3.0 * p.lambda111 * t[i] * others);
  }
  return -grad / (constants::mu0 * p.Ms);
}

inline void magnetoelastic_field(const std::vector<Vec3>& m, const MaterialParams& p, const StressLoad& s,
                                 std::vector<Vec3>& out) {
  out.resize(m.size());
  for (std::size_t k = 0; k < m.size(); ++k) out[k] = magnetoelastic_field_cell(m[k], p, s);
}

inline double magnetoelastic_energy(const std::vector<Vec3>& m, const MaterialParams& p, const StressLoad& s,
                                    const Grid& g) {
  if (s.sigma == 0.0) return 0.0;
  double e = 0.0;
  for (const auto& b : m) e += magnetoelastic_energy_density(b, p, s);
  return e * g.cell_volume();
}

inline double demag_energy(const std::vector<Vec3>& m, const std::vector<Vec3>& h_demag, const MaterialParams& p,
                           const Grid& g) {
  double e = 0.0;
  for (std::size_t k = 0; k < m.size(); ++k) e += m[k].dot(h_demag[k]);
  return -0.5 * constants::mu0 * p.Ms * g.cell_volume() * e;
}

inline double zeeman_energy(const std::vector<Vec3>& m, const Vec3& H, const MaterialParams& p, const Grid& g) {
  double e = 0.0;
  for (const auto& v : m) e += v.dot(H);
  return -constants::mu0 * p.Ms * g.cell_volume() * e;
}

/// Standard deviation of each thermal-field component, A/m:
/// sqrt(2 α kB T / (γ_llg mu0 Ms dx^3 dt)), γ_llg = γ·mu0.
inline double thermal_field_sigma(const MaterialParams& p, const Grid& g, double temperature, double dt) {
  if (temperature < 0.0) throw DomainError("temperature must be >= 0");
  if (!(dt > 0.0)) throw DomainError("dt must be > 0");
  if (temperature == 0.0) return 0.0;
  if (p.alpha == 0.0) throw DomainError("thermal field needs alpha > 0 when temperature > 0");
  return std::sqrt(2.0 * p.alpha * constants::k_boltzmann * temperature /
                   (p.gamma_llg() * constants::mu0 * p.Ms * g.cell_volume() * dt));
}

/// Thermal field realization for integration step `step`: i.i.d. Gaussian per
/// cell and component, a pure function of (seed, step, cell).
inline void thermal_field(const MaterialParams& p, const Grid& g, double temperature, double dt, std::uint64_t seed,
                          std::uint64_t step, std::vector<Vec3>& out) {
  const double sd = thermal_field_sigma(p, g, temperature, dt);
  const std::size_t n = g.cell_count();
  out.assign(n, Vec3::Zero());
  if (sd == 0.0) return;
  const CounterRng rng(seed, Stream::thermal);
  const std::uint64_t base = step * 3 * static_cast<std::uint64_t>(n);
  for (std::size_t k = 0; k < n; ++k)
    for (int c = 0; c < 3; ++c) out[k][c] = sd * rng.gaussian_at(base + 3 * k + static_cast<std::uint64_t>(c));
}

// ---------------------------------------------------------------------------

/// Deterministic part of the micromagnetic model with a precomputed demag
/// kernel. Immutable after construction; field evaluation is const.
class MicromagSystem {
 public:
  MicromagSystem(MaterialParams p, Grid g, StressLoad s, Vec3 H_ext, unsigned terms = all_deterministic)
      : params_(p), grid_(g), stress_(s), H_ext_(std::move(H_ext)), terms_(terms) {
    if (terms_ & demag) kernel_ = DemagKernel(grid_);
  }

  const MaterialParams& params() const { return params_; }
  const Grid& grid() const { return grid_; }
  const StressLoad& stress() const { return stress_; }
  const Vec3& applied_field() const { return H_ext_; }
  unsigned terms() const { return terms_; }
  const DemagKernel& kernel() const { return kernel_; }

  MicromagSystem with_stress(const StressLoad& s) const {
    MicromagSystem copy = *this;
    copy.stress_ = s;
    return copy;
  }

  FieldSet fields(const std::vector<Vec3>& m) const {
    FieldSet f;
    const std::size_t n = m.size();
    if (terms_ & exchange) exchange_field(m, params_, grid_, f.exchange); else f.exchange.assign(n, Vec3::Zero());
    if (terms_ & anisotropy) anisotropy_field(m, params_, f.anisotropy); else f.anisotropy.assign(n, Vec3::Zero());
    if (terms_ & demag) kernel_.field(m, params_.Ms, f.demag); else f.demag.assign(n, Vec3::Zero());
    if (terms_ & magnetoelastic) magnetoelastic_field(m, params_, stress_, f.magnetoelastic);
    else f.magnetoelastic.assign(n, Vec3::Zero());
    f.zeeman.assign(n, (terms_ & zeeman) ? H_ext_ : Vec3::Zero());
    return f;
  }

  /// Total deterministic field into `out`; same summation order as FieldSet::total().
  void total_field(const std::vector<Vec3>& m, std::vector<Vec3>& out) const {
    const std::size_t n = m.size();
    if (terms_ & exchange) exchange_field(m, params_, grid_, out); else out.assign(n, Vec3::Zero());
    for (std::size_t k = 0; k < n; ++k) {
      if (terms_ & anisotropy) out[k] += anisotropy_field_cell(m[k], params_);
    }
    if (terms_ & demag) {
      thread_local std::vector<Vec3> scratch;
      kernel_.field(m, params_.Ms, scratch);
      for (std::size_t k = 0; k < n; ++k) out[k] += scratch[k];
    }
    for (std::size_t k = 0; k < n; ++k) {
      if (terms_ & magnetoelastic) out[k] += magnetoelastic_field_cell(m[k], params_, stress_);
      if (terms_ & zeeman) out[k] += H_ext_;
    }
  }

  EnergyBreakdown energy(const std::vector<Vec3>& m) const {
    EnergyBreakdown e;
    if (terms_ & exchange) e.exchange = exchange_energy(m, params_, grid_);
    if (terms_ & anisotropy) e.anisotropy = anisotropy_energy(m, params_, grid_);
    if (terms_ & demag) {
      std::vector<Vec3> h;
      kernel_.field(m, params_.Ms, h);
      e.demag = demag_energy(m, h, params_, grid_);
    }
    if (terms_ & magnetoelastic) e.magnetoelastic = magnetoelastic_energy(m, params_, stress_, grid_);
    if (terms_ & zeeman) e.zeeman = zeeman_energy(m, H_ext_, params_, grid_);
    return e;
  }

 private:
  MaterialParams params_;
  Grid grid_;
  StressLoad stress_;
  Vec3 H_ext_;
  unsigned terms_;
  DemagKernel kernel_;
};

}  // namespace nvpiezo::micromag
