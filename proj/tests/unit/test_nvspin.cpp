#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include <gtest/gtest.h>

#include "nvpiezo/nvspin/coherence.hpp"
#include "nvpiezo/nvspin/hamiltonian.hpp"
#include "nvpiezo/nvspin/lindblad.hpp"
#include "nvpiezo/nvspin/sensitivity.hpp"
#include "support/synthetic_noise.hpp"

using namespace nvpiezo;
using namespace nvpiezo::nvspin;

namespace {

const double D = 2.87e9;
const double gamma_hz = constants::gamma_e_hz_per_tesla;  // Hz/T

std::vector<double> sorted_eigs_hz(const SpinHamiltonian& h) {
  const auto w = eigenfrequencies(h);
  return {w[0] / constants::two_pi, w[1] / constants::two_pi, w[2] / constants::two_pi};
}

}  // namespace

// ---------------------------------------------------------------- Hamiltonian

TEST(Hamiltonian, SpinAlgebra) {
  const auto& o = spin1();
  const std::complex<double> i(0, 1);
  EXPECT_LT((o.Sx * o.Sy - o.Sy * o.Sx - i * o.Sz).norm(), 1e-14);
  EXPECT_LT((o.Sx * o.Sx + o.Sy * o.Sy + o.Sz * o.Sz - 2.0 * CMat3::Identity()).norm(), 1e-14);
  // S_x² - S_y² couples only |+1> and |-1>
  const CMat3 q = o.Sx * o.Sx - o.Sy * o.Sy;
  EXPECT_NEAR(q(plus1, minus1).real(), 1.0, 1e-15);
  EXPECT_NEAR(std::abs(q(zero, zero)) + std::abs(q(plus1, plus1)), 0.0, 1e-15);
}

TEST(Hamiltonian, HermitianForArbitraryField) {
  const auto h = build_hamiltonian(D, 5e6, Vec3(0.01, -0.02, 0.235));
  EXPECT_LT((h.H - h.H.adjoint()).norm(), 1e-12 * h.H.norm());
}

TEST(Hamiltonian, ZeroFieldSplitting) {
  const auto e = sorted_eigs_hz(build_hamiltonian(D, 0.0, Vec3::Zero()));
  EXPECT_NEAR(e[0], 0.0, 1e-3);
  EXPECT_NEAR(e[1], D, 1e-3);
  EXPECT_NEAR(e[2], D, 1e-3);
}

TEST(Hamiltonian, StrainSplitsPlusMinus) {
  const double E = 7e6;
  const auto e = sorted_eigs_hz(build_hamiltonian(D, E, Vec3::Zero()));
  EXPECT_NEAR(e[0], 0.0, 1e-3);
  EXPECT_NEAR(e[1], D - E, 1e-3);
  EXPECT_NEAR(e[2], D + E, 1e-3);
}

TEST(Hamiltonian, TransverseFieldSecondOrder) {
  // V = γ B Sx couples |0> to the bright ±1 combination with element γB;
  // second order: 0 -> -(γB)²/D, bright -> D + (γB)²/D, dark unshifted.
  for (double B : {5e-4, 1e-3, 2e-3}) {
    const double v = gamma_hz * B;
    const auto e = sorted_eigs_hz(build_hamiltonian(D, 0.0, Vec3(B, 0, 0)));
    const double shift = v * v / D;
    EXPECT_NEAR(e[0], -shift, 0.01 * shift) << B;
    EXPECT_NEAR(e[1], D, 1e-6 * D);
    EXPECT_NEAR(e[2], D + shift, 0.01 * shift) << B;
  }
  const auto a = sorted_eigs_hz(build_hamiltonian(D, 0.0, Vec3(1e-3, 0, 0)));
  const auto b = sorted_eigs_hz(build_hamiltonian(D, 0.0, Vec3(2e-3, 0, 0)));
  EXPECT_NEAR(b[0] / a[0], 4.0, 0.01);
}

// ----------------------------------------------------------------- resonances

TEST(Resonances, ZeroFieldNoSplitting) {
  const auto r = resonance_frequencies(build_hamiltonian(D, 0.0, Vec3::Zero()));
  EXPECT_EQ(r.Delta, 0.0);
  EXPECT_NEAR(r.omega_minus1, D, 1e-3);
}

TEST(Resonances, AxialBiasExact) {
  const double B = 2350 * units::gauss;
  const auto r = resonance_frequencies(build_hamiltonian(D, 0.0, Vec3(0, 0, B)));
  EXPECT_NEAR(r.omega_plus1, D + gamma_hz * B, 1e-6);
  EXPECT_NEAR(r.omega_minus1, D - gamma_hz * B, 1e-6);
  EXPECT_NEAR(r.Delta, 2 * gamma_hz * B, 1e-6);
  EXPECT_NEAR(r.Delta, 13.17e9, 0.01e9);
  EXPECT_LT(r.omega_minus1, 0.0);
}

TEST(Resonances, InvariantUnderIdentityShift) {
  auto h = build_hamiltonian(D, 3e6, Vec3(2e-3, -1e-3, 0.1));
  const auto a = resonance_frequencies(h);
  h.H += 1.7e12 * CMat3::Identity();
  const auto b = resonance_frequencies(h);
  EXPECT_NEAR(a.omega_minus1, b.omega_minus1, 1e-3);
  EXPECT_NEAR(a.omega_plus1, b.omega_plus1, 1e-3);
  EXPECT_NEAR(a.Delta, b.Delta, 1e-3);
}

TEST(Resonances, StrainOnlyIsAmbiguous) {
  // eigenstates (|+1> ± |-1>)/√2 split by 2E: labels cannot be assigned
  EXPECT_THROW(resonance_frequencies(build_hamiltonian(D, 5e6, Vec3::Zero())), DomainError);
  // a modest axial field restores the labels
  EXPECT_NO_THROW(resonance_frequencies(build_hamiltonian(D, 5e6, Vec3(0, 0, 0.01))));
}

TEST(Resonances, SmallTransverseFieldKeepsLabels) {
  const double Bz = 0.235;
  const auto r = resonance_frequencies(build_hamiltonian(D, 0.0, Vec3(1e-3, 0, Bz)));
  EXPECT_NEAR(r.Delta, 2 * gamma_hz * Bz, 1e-3 * r.Delta);
  EXPECT_GT(r.Delta, 0.0);
}

// ------------------------------------------------------------------ coherence

TEST(Coherence, NoiselessAndTimeZero) {
  for (double t : {0.0, 1e-9, 1e-3}) {
    const auto f = coherence_factors(0.0, 0.0, t);
    EXPECT_EQ(f.chi_par, 1.0);
    EXPECT_EQ(f.chi_perp, 1.0);
  }
  const auto f0 = coherence_factors(1e6, 2e6, 0.0);
  EXPECT_EQ(f0.chi_par, 1.0);
  EXPECT_EQ(f0.chi_perp, 1.0);
}

TEST(Coherence, Formula) {
  const auto f = coherence_factors(1e5, 4e5, 2e-6);
  EXPECT_NEAR(f.chi_par, std::exp(-4 * 2e-6 * 1e5), 1e-15);
  EXPECT_NEAR(f.chi_perp, std::exp(-2e-6 * 4e5 / 2), 1e-15);
}

TEST(Coherence, MonotoneAndRejectsNegative) {
  double last_par = 1.0, last_perp = 1.0;
  for (double t = 0; t < 1e-5; t += 1e-7) {
    const auto f = coherence_factors(3e5, 7e5, t);
    EXPECT_LE(f.chi_par, last_par);
    EXPECT_LE(f.chi_perp, last_perp);
    EXPECT_GT(f.chi_par, 0.0);
    last_par = f.chi_par;
    last_perp = f.chi_perp;
  }
  EXPECT_THROW(coherence_factors(-1.0, 0.0, 1.0), DomainError);
  EXPECT_THROW(coherence_factors(0.0, -1.0, 1.0), DomainError);
}

TEST(Coherence, RatesFromFit) {
  noise::NoiseFit f;
  f.component[noise::X] = {4e12, 2.8e9, 2.1e10, 0};
  f.component[noise::Y] = {2e12, 2.8e9, 2.1e10, 0};
  f.component[noise::Z] = {1e11, 3e9, 0.0, 0};
  const auto r = rates_from_fit(f, -3.7e9);
  EXPECT_NEAR(r.S_z0, 1e11 / 3e9, 1e-12 * 1e11 / 3e9);
  const double w = constants::two_pi * 3.7e9;
  const double sx = noise::psd_from_fit(f.component[noise::X], w), sy = noise::psd_from_fit(f.component[noise::Y], w);
  EXPECT_NEAR(r.S_perp, 0.5 * (sx + sy), 1e-12 * r.S_perp);
  EXPECT_EQ(rates_from_fit(f, 3.7e9).S_perp, r.S_perp);
}

// Weak noise: the long-time form matches the exact double integral once ξt > 10.
TEST(Coherence, AsymptoticMatchesExactIntegral) {
  const noise::DampedCosine z{1e15, 2.8e9, 2 * constants::pi * 3.38e9, 0};
  const double S0 = noise::psd_from_fit(z, 0.0);
  for (double xt : {10.0, 30.0, 100.0, 1000.0}) {
    const double t = xt / z.xi;
    const double asym = coherence_factors(S0, 0.0, t).chi_par;
    EXPECT_NEAR(asym / chi_par_exact(z, t), 1.0, 0.02) << xt;
  }
  EXPECT_EQ(chi_par_exact(z, 0.0), 1.0);
}

// χ∥(t) = <exp(i 2 ∫_0^t δ_z ds)> by brute force over synthetic trajectories.
TEST(Coherence, MonteCarloDephasing) {
  const double xi = 2.8e9, w0 = 2 * constants::pi * 3.38e9;
  const double xt = 40.0, t = xt / xi;
  // R0 chosen so that 4 t S_z(0) = 0.5
  const double R0 = 0.5 / (4 * t * xi / (xi * xi + w0 * w0));
  const noise::DampedCosine z{R0, xi, w0, 0};
  const double h = 2e-12;
  const auto steps = static_cast<std::size_t>(std::llround(t / h));
  const int n = 4000;
  double acc = 0.0;
  for (int k = 0; k < n; ++k) {
    testsupport::DampedCosineProcess proc(R0, xi, w0, h, 1000 + static_cast<std::uint64_t>(k));
    double phase = 0.0, prev = proc.value();
    for (std::size_t i = 0; i < steps; ++i) {
      const double next = proc.next();
      phase += h * 0.5 * (prev + next);
      prev = next;
    }
    acc += std::cos(2.0 * phase);
  }
  const double mc = acc / n;
  const double formula = coherence_factors(noise::psd_from_fit(z, 0.0), 0.0, t).chi_par;
  EXPECT_NEAR(mc / formula, 1.0, 0.05) << "mc " << mc << " formula " << formula;
  EXPECT_NEAR(mc / chi_par_exact(z, t), 1.0, 0.05);
}

// --------------------------------------------------------------------- Ramsey

TEST(Ramsey, Limits) {
  EXPECT_DOUBLE_EQ(ramsey_signal(1.3e6, {1.0, 1.0}, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(ramsey_signal(1.3e6, {0.0, 0.0}, 1e-6), 3.0 / 8.0);
  EXPECT_NEAR(ramsey_signal(1e6, {1.0, 1.0}, 0.5e-6), 0.0, 1e-15);
}

TEST(Ramsey, BoundedForAllFactors) {
  for (double cp = 0; cp <= 1.0; cp += 0.05)
    for (double cz = 0; cz <= 1.0; cz += 0.05)
      for (double phase = 0; phase < 7; phase += 0.1) {
        const double P = ramsey_signal(1.0, {cz, cp}, phase / constants::two_pi);
        EXPECT_GE(P, 0.0);
        EXPECT_LE(P, 1.0 + 1e-15);
      }
}

// ------------------------------------------------------------- master equation

TEST(MasterEquation, RatesZeroIsUnitary) {
  const double Delta = 2.3e6, t = 0.37e-6;
  const auto rho = evolve_master_equation(initial_density(), Delta, {}, t);
  EXPECT_NEAR(rho(plus1, plus1).real(), 0.5, 1e-9);
  EXPECT_NEAR(rho(minus1, minus1).real(), 0.5, 1e-9);
  EXPECT_NEAR(std::abs(rho(zero, zero)), 0.0, 1e-12);
  const auto expected = 0.5 * std::polar(1.0, -constants::two_pi * Delta * t);
  EXPECT_LT(std::abs(rho(plus1, minus1) - expected), 1e-8);
}

TEST(MasterEquation, ClosedFormTracePreserved) {
  for (double t : {0.0, 1e-7, 1e-5})
    EXPECT_NEAR(closed_form_density(1e6, {3e5, 2e5, 0}, t).trace().real(), 1.0, 1e-15);
}

TEST(MasterEquation, NumericMatchesClosedForm) {
  double worst = 0.0;
  for (double Delta : {0.0, 1.7e6, 13.2e6})
    for (double g : {0.0, 1e5, 1e6})
      for (double phi : {0.0, 3e5, 2e6})
        for (double t : {0.1e-6, 0.5e-6, 2e-6}) {
          const LindbladRates r{phi, g, 0.0};
          const auto num = evolve_master_equation(initial_density(), Delta, r, t);
          const auto ref = closed_form_density(Delta, r, t);
          worst = std::max(worst, (num - ref).cwiseAbs().maxCoeff());
          ASSERT_NO_THROW(check_density(num));
        }
  EXPECT_LT(worst, 1e-6);
}

TEST(MasterEquation, RamseyFromEvolution) {
  const NoiseRates nr{1.5e5, 8e5};
  const auto r = lindblad_rates(nr);
  for (double Delta : {0.4e6, 3.3e6})
    for (double t : {0.05e-6, 0.3e-6, 1.1e-6}) {
      const double P = readout(evolve_master_equation(initial_density(), Delta, r, t));
      EXPECT_NEAR(P, ramsey_signal(Delta, coherence_factors(nr, t), t), 1e-6) << Delta << " " << t;
    }
}

TEST(MasterEquation, StaysPhysicalWithBothChannels) {
  const LindbladRates r{4e5, 7e5, 3e5};
  CMat3 rho = initial_density();
  for (int i = 0; i < 20; ++i) {
    rho = evolve_master_equation(rho, 5e6, r, 0.1e-6);
    EXPECT_LT((rho - rho.adjoint()).norm(), 1e-12);
    EXPECT_NEAR(rho.trace().real(), 1.0, 1e-12);
    Eigen::SelfAdjointEigenSolver<CMat3> es(rho, Eigen::EigenvaluesOnly);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10);
  }
  EXPECT_THROW(closed_form_density(1e6, r, 1e-6), DomainError);
}

TEST(MasterEquation, RejectsInvalidState) {
  CMat3 bad = initial_density();
  bad(0, 0) += 0.1;
  EXPECT_THROW(evolve_master_equation(bad, 1e6, {}, 1e-6), DomainError);
  CMat3 nonherm = initial_density();
  nonherm(0, 2) += std::complex<double>(0, 0.1);
  EXPECT_THROW(evolve_master_equation(nonherm, 1e6, {}, 1e-6), DomainError);
  CMat3 negative = CMat3::Zero();
  negative(0, 0) = 1.2;
  negative(2, 2) = -0.2;
  EXPECT_THROW(evolve_master_equation(negative, 1e6, {}, 1e-6), DomainError);
}

// ---------------------------------------------------------------- sensitivity

TEST(Sensitivity, NoiselessClosedForm) {
  SensingProtocol p;
  p.contrast = 0.3;
  p.t_prep = 600e-9;
  p.t_a = 150e-9;
  const double slope = 17e6 / 1e6;  // Hz/Pa
  const double expected = 4.0 / (8 * constants::pi * 0.3 * 150e-9 * slope) * std::sqrt(150e-9 + 600e-9);
  EXPECT_NEAR(sensitivity(p, {1.0, 1.0}, slope), expected, 1e-12 * expected);
  EXPECT_EQ(sensitivity(p, {1.0, 1.0}, -slope), sensitivity(p, {1.0, 1.0}, slope));
}

TEST(Sensitivity, InverseInContrast) {
  SensingProtocol p;
  const CoherenceFactors f{0.8, 0.6};
  const double a = sensitivity(p, f, 17.0);
  p.contrast *= 2;
  EXPECT_NEAR(sensitivity(p, f, 17.0), a / 2, 1e-15 * a);
}

TEST(Sensitivity, ZeroSlopeRejected) {
  EXPECT_THROW(sensitivity(SensingProtocol{}, {1, 1}, 0.0), DomainError);
}

TEST(Optimize, NoiselessMonotone) {
  const auto grid = log_grid(10e-9, 10e-6, 60);
  const auto c = optimize_interrogation_time(SensingProtocol{}, {0.0, 0.0}, 17.0, grid);
  for (std::size_t i = 1; i < c.eta.size(); ++i) EXPECT_LT(c.eta[i], c.eta[i - 1]);
  EXPECT_EQ(c.t_opt, grid.back());
}

TEST(Optimize, DecoherenceGivesInteriorMinimum) {
  const auto grid = log_grid(10e-9, 20e-6, 200);
  const auto c = optimize_interrogation_time(SensingProtocol{}, {2e5, 5e5}, 17.0, grid);
  const auto it = std::min_element(c.eta.begin(), c.eta.end());
  const auto i = static_cast<std::size_t>(it - c.eta.begin());
  EXPECT_GT(i, 0U);
  EXPECT_LT(i, c.eta.size() - 1);
  for (std::size_t k = 1; k <= i; ++k) EXPECT_LE(c.eta[k], c.eta[k - 1]);
  for (std::size_t k = i + 1; k < c.eta.size(); ++k) EXPECT_GE(c.eta[k], c.eta[k - 1]);
  EXPECT_EQ(c.eta_opt, *it);
}

TEST(Optimize, SinglePointAndQuadratureSnap) {
  const auto one = optimize_interrogation_time(SensingProtocol{}, {1e5, 1e5}, 17.0, {300e-9});
  ASSERT_EQ(one.t_a.size(), 1U);
  EXPECT_EQ(one.t_opt, 300e-9);
  const double Delta = 13.17e9;
  const auto c = optimize_interrogation_time(SensingProtocol{}, {1e5, 1e5}, 17.0, log_grid(100e-9, 1e-6, 20), Delta);
  for (double t : c.t_a) EXPECT_NEAR(std::abs(std::sin(constants::two_pi * Delta * t)), 1.0, 1e-6);
  EXPECT_THROW(optimize_interrogation_time(SensingProtocol{}, {}, 17.0, {}), DomainError);
}
