#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/NonLinearOptimization>

#include "nvpiezo/core/constants.hpp"
#include "nvpiezo/core/error.hpp"
#include "nvpiezo/noise/types.hpp"

namespace nvpiezo::noise {

struct FitGuess {
  double R0 = 0.0;
  double xi = 0.0;
  double omega0 = 0.0;
  double max_lag = 0.0;
};

namespace detail {

// Residuals of R0·exp(-xi t)·cos(w t) against data, in scaled parameters
// q = (R0/s_R, xi/s_xi, w/s_w) so all three are O(1).
struct DampedCosineFunctor {
  using Scalar = double;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;

  const std::vector<double>* R;
  std::size_t n;
  double dt;
  double sR, sxi, sw;
  bool with_omega;

  int inputs() const { return with_omega ? 3 : 2; }
  int values() const { return static_cast<int>(n); }

  int operator()(const Eigen::VectorXd& q, Eigen::VectorXd& f) const {
    const double R0 = q[0] * sR, xi = q[1] * sxi, w = with_omega ? q[2] * sw : 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) * dt;
      f[static_cast<Eigen::Index>(i)] = (R0 * std::exp(-xi * t) * std::cos(w * t) - (*R)[i]) / sR;
    }
    return 0;
  }

  int df(const Eigen::VectorXd& q, Eigen::MatrixXd& J) const {
    const double R0 = q[0] * sR, xi = q[1] * sxi, w = with_omega ? q[2] * sw : 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      const double t = static_cast<double>(i) * dt;
      const double e = std::exp(-xi * t), c = std::cos(w * t), s = std::sin(w * t);
      J(r, 0) = e * c;
      J(r, 1) = -R0 * t * e * c * sxi / sR;
      if (with_omega) J(r, 2) = -R0 * t * e * s * sw / sR;
    }
    return 0;
  }
};

}  // namespace detail

/// Initial guesses: R0 = R(0); omega0 from the first zero crossing
/// (a quarter period), 0 if none; xi from the log-envelope slope.
inline FitGuess initial_guess(const std::vector<double>& R, double dt) {
  if (R.empty() || !(R[0] > 0.0)) throw DomainError("correlation must have R(0) > 0 to be fitted");
  FitGuess g;
  g.R0 = R[0];
  const std::size_t n = R.size();

  // decay: first lag where |R| falls below R0/e, from the running envelope
  std::size_t cross = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (R[i] <= 0.0) {
      cross = i;
      break;
    }
  double tz = 0.0;
  if (cross > 0) {
    // linear interpolation of the crossing time
    const double a = R[cross - 1], b = R[cross];
    tz = (static_cast<double>(cross - 1) + a / (a - b)) * dt;
  }

  // envelope = running max of |R| from the tail inward
  std::vector<double> env(n);
  double run = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    run = std::max(run, std::abs(R[i]));
    env[i] = run;
  }
  std::size_t ie = n - 1;
  for (std::size_t i = 0; i < n; ++i)
    if (env[i] < g.R0 / std::exp(1.0)) {
      ie = i;
      break;
    }
  const double te = std::max(static_cast<double>(ie), 1.0) * dt;
  g.xi = 1.0 / te;
  // an oscillation counts only if the zero crossing precedes the envelope decay
  g.omega0 = (cross > 0 && tz < 2.0 * te) ? constants::pi / (2.0 * tz) : 0.0;
  g.max_lag = 5.0 / g.xi;
  return g;
}

/// Least-squares fit of R(t) = R0·exp(-xi t)·cos(omega0 t) over lags
/// <= max_lag (0 selects 5/xi_guess). Throws NumericalError when the solver
/// fails or returns an unphysical decay rate.
inline DampedCosine fit_damped_cosine(const std::vector<double>& R, double dt, double max_lag = 0.0) {
  if (!(dt > 0.0)) throw DomainError("lag step must be > 0");
  const FitGuess g = initial_guess(R, dt);
  const double window = max_lag > 0.0 ? max_lag : g.max_lag;
  const std::size_t n = std::min(R.size(), static_cast<std::size_t>(std::floor(window / dt)) + 1);
  if (n < 4) throw DomainError("fit window holds fewer than 4 lags");

  auto solve = [&](bool with_omega, double w0) {
    detail::DampedCosineFunctor f{&R, n, dt, g.R0, g.xi, w0 > 0.0 ? w0 : g.xi, with_omega};
    Eigen::VectorXd q(f.inputs());
    q[0] = 1.0;
    q[1] = 1.0;
    if (with_omega) q[2] = 1.0;
    Eigen::LevenbergMarquardt<detail::DampedCosineFunctor> lm(f);
    lm.parameters.maxfev = 2000;
    lm.parameters.xtol = 1e-12;
    lm.parameters.ftol = 1e-14;
    const auto status = lm.minimize(q);
    Eigen::VectorXd res(f.values());
    f(q, res);
    DampedCosine d;
    d.R0 = q[0] * f.sR;
    d.xi = q[1] * f.sxi;
    d.omega0 = with_omega ? std::abs(q[2] * f.sw) : 0.0;
    d.residual = std::sqrt(res.squaredNorm() / static_cast<double>(n));
    return std::pair{d, status};
  };

  auto [fit, status] = g.omega0 > 0.0 ? solve(true, g.omega0) : solve(false, 0.0);
  if (g.omega0 == 0.0) {
    // a slow oscillation hidden inside the decay: keep it only if it helps
    auto [alt, st2] = solve(true, 0.5 * g.xi);
    if (alt.residual < 0.999 * fit.residual && alt.xi > 0.0) {
      fit = alt;
      status = st2;
    }
  }
  using Status = Eigen::LevenbergMarquardtSpace::Status;
  const bool failed = status == Status::ImproperInputParameters || status == Status::TooManyFunctionEvaluation ||
                      !(fit.xi > 0.0) || !std::isfinite(fit.R0) || !(fit.R0 >= 0.0);
  if (failed) {
    std::ostringstream os;
    os << "damped-cosine fit did not converge (status " << static_cast<int>(status) << "): guess R0=" << g.R0
       << " xi=" << g.xi << " omega0=" << g.omega0 << ", result R0=" << fit.R0 << " xi=" << fit.xi
       << " omega0=" << fit.omega0 << ", window " << n << " lags";
    throw NumericalError(os.str());
  }
  return fit;
}

/// Per-component fit of a (seed-averaged) correlation.
inline NoiseFit fit_damped_cosine(const Correlation& c, double max_lag = 0.0, int n_seeds = 1) {
  NoiseFit out;
  out.n_seeds = n_seeds;
  for (std::size_t k = 0; k < 3; ++k) out.component[k] = fit_damped_cosine(c.R[k], c.lag_step, max_lag);
  return out;
}

}  // namespace nvpiezo::noise
