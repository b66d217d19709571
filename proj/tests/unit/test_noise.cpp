#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/quadrature/sinh_sinh.hpp>
#include <gtest/gtest.h>

#include "nvpiezo/noise/correlation.hpp"
#include "nvpiezo/noise/fit.hpp"
#include "nvpiezo/noise/spectrum.hpp"
#include "support/synthetic_noise.hpp"

using namespace nvpiezo;
using namespace nvpiezo::noise;
using testsupport::damped_cosine;

namespace {

const double kXi = 2.8e9;
const double kW0 = 2 * constants::pi * 3.38e9;

std::vector<double> exact_correlation(double R0, double xi, double w0, double dt, std::size_t n) {
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = damped_cosine(R0, xi, w0, static_cast<double>(i) * dt);
  return r;
}

}  // namespace

// ------------------------------------------------------------ correlation

TEST(Autocorrelation, ConstantSeriesIsZero) {
  const std::vector<double> x(5000, 3.7);
  for (double r : autocorrelation(x)) EXPECT_LT(std::abs(r), 1e-20);
}

TEST(Autocorrelation, MatchesDirectSum) {
  const auto x = testsupport::white_noise(3000, 2.0, 1);
  const auto r = autocorrelation(x);
  ASSERT_EQ(r.size(), x.size());
  double mean = 0;
  for (double v : x) mean += v;
  mean /= double(x.size());
  for (std::size_t k : {0, 1, 7, 100, 2999}) {
    double s = 0;
    for (std::size_t i = 0; i + k < x.size(); ++i) s += (x[i] - mean) * (x[i + k] - mean);
    EXPECT_NEAR(r[k], s / double(x.size()), 1e-12);
  }
}

TEST(Autocorrelation, WhiteNoise) {
  const std::size_t n = 100000;
  const double v = 4.0;
  const auto r = autocorrelation(testsupport::white_noise(n, v, 2));
  EXPECT_NEAR(r[0], v, 3 * v * std::sqrt(2.0 / n));
  // each lag is ~N(0, v²/N); a 3-sigma excursion is allowed at the Gaussian tail rate
  int outside = 0;
  for (std::size_t k = 1; k <= 1000; ++k) {
    EXPECT_LT(std::abs(r[k]), 5 * v / std::sqrt(double(n))) << k;
    if (std::abs(r[k]) > 3 * v / std::sqrt(double(n))) ++outside;
  }
  EXPECT_LE(outside, 10);
}

TEST(Autocorrelation, SyntheticDampedCosine) {
  const double h = 10e-12, R0 = 1.0;
  testsupport::DampedCosineProcess proc(R0, kXi, kW0, h, 3);
  const auto r = autocorrelation(proc.series(1 << 18));
  for (std::size_t k = 0; k < 100; ++k)
    EXPECT_NEAR(r[k], damped_cosine(R0, kXi, kW0, double(k) * h), 0.05 * R0) << k;
}

TEST(Autocorrelation, TrajectoryUnitsAndChecks) {
  probe::FieldTrajectory tr;
  tr.interval = 1e-12;
  const auto x = testsupport::white_noise(2000, 1e-12, 4);
  for (std::size_t i = 0; i < x.size(); ++i) tr.samples.push_back({double(i) * 1e-12, Vec3(x[i], 0.0, 2 * x[i])});
  const auto c = autocorrelation(tr);
  const auto raw = autocorrelation(x);
  const double g2 = constants::gamma_e * constants::gamma_e;
  EXPECT_NEAR(c.R[X][0], g2 * raw[0], 1e-9 * g2 * raw[0]);
  EXPECT_NEAR(c.R[Z][0], 4 * g2 * raw[0], 1e-9 * g2 * raw[0]);
  EXPECT_LT(std::abs(c.R[Y][0]), 1e-20);
  EXPECT_DOUBLE_EQ(c.lag_step, 1e-12);

  auto bad = tr;
  bad.samples[500].t += 0.3e-12;
  EXPECT_THROW(autocorrelation(bad), DomainError);
  auto short_tr = tr;
  short_tr.samples.resize(999);
  EXPECT_THROW(autocorrelation(short_tr), DomainError);
}

TEST(Autocorrelation, BoundedByZeroLag) {
  testsupport::DampedCosineProcess proc(2.0, kXi, kW0, 10e-12, 5);
  const auto r = autocorrelation(proc.series(20000));
  EXPECT_GE(r[0], 0.0);
  for (double v : r) EXPECT_LE(std::abs(v), r[0] * (1 + 1e-12));
}

TEST(Autocorrelation, SeedAverage) {
  Correlation a, b;
  a.lag_step = b.lag_step = 1e-12;
  for (std::size_t k = 0; k < 3; ++k) {
    a.R[k] = {1, 2, 3, 4};
    b.R[k] = {3, 4, 5};
  }
  const auto m = average({a, b});
  EXPECT_EQ(m.size(), 3U);
  EXPECT_EQ(m.R[Y][1], 3.0);
  b.lag_step = 2e-12;
  EXPECT_THROW(average({a, b}), DomainError);
}

// -------------------------------------------------------------------- fit

TEST(Fit, RecoversExactDampedCosine) {
  const double dt = 10e-12;
  const auto r = exact_correlation(1.0, kXi, kW0, dt, 4000);
  const auto f = fit_damped_cosine(r, dt);
  EXPECT_NEAR(f.xi, kXi, 0.01 * kXi);
  EXPECT_NEAR(f.omega0, kW0, 0.01 * kW0);
  EXPECT_NEAR(f.R0, 1.0, 0.01);
  EXPECT_LT(f.residual, 1e-6);
}

TEST(Fit, PureExponential) {
  const double dt = 10e-12;
  const auto r = exact_correlation(3e14, kXi, 0.0, dt, 4000);
  const auto f = fit_damped_cosine(r, dt);
  EXPECT_NEAR(f.xi, kXi, 0.01 * kXi);
  EXPECT_LT(f.omega0, 1e-3 * kXi);
  EXPECT_NEAR(f.R0, 3e14, 0.01 * 3e14);
}

TEST(Fit, NoisyInputWithinTenPercent) {
  const double dt = 10e-12;
  for (std::uint64_t seed : {1, 2, 3}) {
    auto r = exact_correlation(1.0, kXi, kW0, dt, 4000);
    const auto noise = testsupport::white_noise(r.size(), 0.05 * 0.05, seed);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] += noise[i];
    const auto f = fit_damped_cosine(r, dt);
    EXPECT_NEAR(f.xi, kXi, 0.10 * kXi) << seed;
    EXPECT_NEAR(f.omega0, kW0, 0.10 * kW0) << seed;
    EXPECT_NEAR(f.R0, 1.0, 0.10) << seed;
  }
}

TEST(Fit, ScaleEquivariance) {
  const double dt = 10e-12;
  auto r = exact_correlation(1.0, kXi, kW0, dt, 3000);
  const auto noise = testsupport::white_noise(r.size(), 0.02 * 0.02, 9);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += noise[i];
  const auto f1 = fit_damped_cosine(r, dt);
  auto r4 = r;
  for (auto& v : r4) v *= 4.0;  // trajectory scaled by 2
  const auto f4 = fit_damped_cosine(r4, dt);
  EXPECT_EQ(f4.R0, 4.0 * f1.R0);
  EXPECT_EQ(f4.xi, f1.xi);
  EXPECT_EQ(f4.omega0, f1.omega0);
  auto r9 = r;
  for (auto& v : r9) v *= 9.0;
  const auto f9 = fit_damped_cosine(r9, dt);
  EXPECT_NEAR(f9.R0, 9.0 * f1.R0, 1e-9 * f9.R0);
  EXPECT_NEAR(f9.xi, f1.xi, 1e-9 * f1.xi);
}

TEST(Fit, SyntheticProcessSeedAveraged) {
  const double h = 10e-12;
  std::vector<Correlation> per_seed;
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    Correlation c;
    c.lag_step = h;
    for (std::uint64_t k = 0; k < 3; ++k) {
      testsupport::DampedCosineProcess proc(1.0, kXi, kW0, h, seed, k);
      c.R[k] = autocorrelation(proc.series(1 << 15));
    }
    per_seed.push_back(c);
  }
  const auto fit = fit_damped_cosine(average(per_seed), 0.0, 8);
  EXPECT_EQ(fit.n_seeds, 8);
  for (const auto& f : fit.component) {
    EXPECT_NEAR(f.xi, kXi, 0.10 * kXi);
    EXPECT_NEAR(f.omega0, kW0, 0.05 * kW0);
  }
}

TEST(Fit, InitialGuesses) {
  const double dt = 1e-12;
  const auto r = exact_correlation(2.0, kXi, kW0, dt, 20000);
  const auto g = initial_guess(r, dt);
  EXPECT_EQ(g.R0, 2.0);
  EXPECT_NEAR(g.omega0, kW0, 0.01 * kW0);
  EXPECT_NEAR(g.max_lag, 5.0 / g.xi, 1e-20);
  EXPECT_GT(g.xi, 0.3 * kXi);
  EXPECT_LT(g.xi, 3.0 * kXi);
}

TEST(Fit, Errors) {
  EXPECT_THROW(fit_damped_cosine(std::vector<double>{0.0, 0.0, 0.0, 0.0, 0.0}, 1e-12), DomainError);
  EXPECT_THROW(fit_damped_cosine(std::vector<double>{-1.0, 0.0, 0.0, 0.0, 0.0}, 1e-12), DomainError);
  std::vector<double> growing(400);
  for (std::size_t i = 0; i < growing.size(); ++i) growing[i] = std::exp(1e9 * double(i) * 1e-11);
  EXPECT_THROW(fit_damped_cosine(growing, 1e-11), NumericalError);
}

// --------------------------------------------------------------- spectrum

TEST(Psd, LorentzianLimits) {
  const DampedCosine exp_only{5.0, kXi, 0.0, 0.0};
  EXPECT_NEAR(psd_from_fit(exp_only, 0.0), 5.0 / kXi, 1e-15 * 5.0 / kXi);
  EXPECT_NEAR(psd_from_fit(exp_only, 3e9), 5.0 * kXi / (kXi * kXi + 9e18), 1e-25);
  const DampedCosine f{5.0, kXi, kW0, 0.0};
  EXPECT_NEAR(psd_from_fit(f, 0.0), 5.0 * kXi / (kXi * kXi + kW0 * kW0), 1e-24);
}

TEST(Psd, EvenAndNonNegative) {
  const DampedCosine f{1.0, kXi, kW0, 0.0};
  for (double w = 0; w < 1e11; w += 1.37e9) {
    EXPECT_EQ(psd_from_fit(f, w), psd_from_fit(f, -w));
    EXPECT_GE(psd_from_fit(f, w), 0.0);
  }
}

TEST(Psd, WienerKhinchin) {
  for (const DampedCosine& f : {DampedCosine{1.0, kXi, kW0, 0}, DampedCosine{7e13, kXi, 0.0, 0},
                                DampedCosine{2.0, 5e8, 3e10, 0}}) {
    boost::math::quadrature::sinh_sinh<double> integrator;
    const double scale = f.xi + f.omega0;
    const double I = integrator.integrate([&](double u) { return psd_from_fit(f, u * scale) * scale; });
    EXPECT_NEAR(I / constants::pi, f.R0, 0.01 * f.R0);
  }
}

TEST(Periodogram, WhiteNoiseLevel) {
  const double v = 3.0, dt = 1e-12;
  const auto s = psd_periodogram(testsupport::white_noise(1 << 18, v, 6), dt, 1024);
  double mean = 0;
  for (std::size_t k = 1; k + 1 < s.S.size(); ++k) mean += s.S[k];
  mean /= double(s.S.size() - 2);
  EXPECT_NEAR(mean, v * dt / 2, 0.03 * v * dt / 2);
  EXPECT_NEAR(s.omega.back(), constants::pi / dt, 1e-6 * constants::pi / dt);
}

TEST(Periodogram, ConstantIsZero) {
  const auto s = psd_periodogram(std::vector<double>(4096, -2.5), 1e-12, 512);
  for (double v : s.S) EXPECT_LT(std::abs(v), 1e-40);
}

TEST(Periodogram, SegmentTooLong) {
  EXPECT_THROW(psd_periodogram(std::vector<double>(100, 0.0), 1e-12, 128), DomainError);
}

TEST(Periodogram, SyntheticPeakAndLevel) {
  const double h = 10e-12;
  testsupport::DampedCosineProcess proc(1.0, kXi, kW0, h, 7);
  const auto s = psd_periodogram(proc.series(1 << 19), h, 2048);
  const auto peak = std::max_element(s.S.begin() + 1, s.S.end()) - s.S.begin();
  EXPECT_NEAR(s.omega[static_cast<std::size_t>(peak)], kW0, 0.05 * kW0);
  // both estimators share the normalization of psd_from_fit
  const DampedCosine f{1.0, kXi, kW0, 0};
  EXPECT_NEAR(s.S[static_cast<std::size_t>(peak)], psd_from_fit(f, s.omega[static_cast<std::size_t>(peak)]),
              0.15 * psd_from_fit(f, kW0));
}
