#pragma once

// Cell-averaged demagnetization tensor for a regular grid of cubic cells
// (Newell, Williams & Dunlop 1993), evaluated by direct summation.
// H_i = -Ms · sum_j N(r_i - r_j) m_j.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "nvpiezo/core/constants.hpp"
#include "nvpiezo/core/model.hpp"

namespace nvpiezo::micromag {

namespace detail {

// Sum with smallest magnitudes first and Kahan compensation; the 27-point
// stencils below cancel heavily.
template <std::size_t N>
double accurate_sum(std::array<double, N> v) {
  std::sort(v.begin(), v.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
  double sum = 0.0;
  double c = 0.0;
  for (double x : v) {
    const double y = x - c;
    const double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
  return sum;
}

inline double newell_f(double x, double y, double z) {
  x = std::abs(x);
  y = std::abs(y);
  z = std::abs(z);
  const double xsq = x * x, ysq = y * y, zsq = z * z;
  const double Rsq = xsq + ysq + zsq;
  if (Rsq <= 0.0) return 0.0;
  const double R = std::sqrt(Rsq);
  std::array<double, 4> piece{};
  if (z > 0.0) {
    piece[0] = 2.0 * (2.0 * xsq - ysq - zsq) * R;
    if (x * y * z > 0.0) piece[1] = -12.0 * x * y * z * std::atan2(y * z, x * R);
    if (y > 0.0 && xsq + zsq > 0.0) piece[2] = 3.0 * y * (zsq - xsq) * std::log1p(2.0 * y * (y + R) / (xsq + zsq));
    if (xsq + ysq > 0.0) piece[3] = 3.0 * z * (ysq - xsq) * std::log1p(2.0 * z * (z + R) / (xsq + ysq));
  } else if (x == y) {
    const double K = 2.0 * std::sqrt(2.0) - 6.0 * std::log(1.0 + std::sqrt(2.0));
    piece[0] = K * xsq * x;
  } else {
    piece[0] = 2.0 * (2.0 * xsq - ysq) * R;
    if (y > 0.0 && x > 0.0) piece[1] = -3.0 * y * xsq * std::log1p(2.0 * y * (y + R) / xsq);
  }
  return accurate_sum(piece) / 12.0;
}

inline double newell_g(double x, double y, double z) {
  double sign = 1.0;
  if (x < 0.0) sign = -sign;
  if (y < 0.0) sign = -sign;
  x = std::abs(x);
  y = std::abs(y);
  z = std::abs(z);
  const double xsq = x * x, ysq = y * y, zsq = z * z;
  const double Rsq = xsq + ysq + zsq;
  if (Rsq <= 0.0) return 0.0;
  const double R = std::sqrt(Rsq);
  std::array<double, 7> piece{};
  piece[0] = -2.0 * x * y * R;
  if (z > 0.0) {
    piece[1] = -z * zsq * std::atan2(x * y, z * R);
    piece[2] = -3.0 * z * ysq * std::atan2(x * z, y * R);
    piece[3] = -3.0 * z * xsq * std::atan2(y * z, x * R);
    if (xsq + ysq > 0.0) piece[4] = 3.0 * x * y * z * std::log1p(2.0 * z * (z + R) / (xsq + ysq));
    if (ysq + zsq > 0.0) piece[5] = 0.5 * y * (3.0 * zsq - ysq) * std::log1p(2.0 * x * (x + R) / (ysq + zsq));
    if (xsq + zsq > 0.0) piece[6] = 0.5 * x * (3.0 * zsq - xsq) * std::log1p(2.0 * y * (y + R) / (xsq + zsq));
  } else {
    if (y > 0.0) piece[1] = -0.5 * y * ysq * std::log1p(2.0 * x * (x + R) / ysq);
    if (x > 0.0) piece[2] = -0.5 * x * xsq * std::log1p(2.0 * y * (y + R) / xsq);
  }
  return sign * accurate_sum(piece) / 6.0;
}

// 27-point second difference with weights 8·(-1/2)^(number of shifted axes).
template <typename F>
double stencil(F&& fn, double x, double y, double z, double d) {
  std::array<double, 27> terms{};
  std::size_t n = 0;
  for (int a = -1; a <= 1; ++a)
    for (int b = -1; b <= 1; ++b)
      for (int c = -1; c <= 1; ++c) {
        const int shifted = (a != 0) + (b != 0) + (c != 0);
        const double w = shifted == 0 ? 8.0 : shifted == 1 ? -4.0 : shifted == 2 ? 2.0 : -1.0;
        terms[n++] = w * fn(x + a * d, y + b * d, z + c * d);
      }
  return accurate_sum(terms);
}

}  // namespace detail

/// Symmetric 3x3 demag tensor stored as (xx, yy, zz, xy, xz, yz).
struct DemagTensor {
  double xx = 0, yy = 0, zz = 0, xy = 0, xz = 0, yz = 0;

  Vec3 apply(const Vec3& m) const {
    return {xx * m.x() + xy * m.y() + xz * m.z(), xy * m.x() + yy * m.y() + yz * m.z(),
            xz * m.x() + yz * m.y() + zz * m.z()};
  }
  double trace() const { return xx + yy + zz; }
};

/// Tensor between two cubic cells of edge d whose centres are offset by
/// (x, y, z). Dimensionless; the self term of a cube is diag(1/3).
inline DemagTensor newell_tensor(double x, double y, double z, double d) {
  const double scale = 1.0 / (4.0 * constants::pi * d * d * d);
  using detail::newell_f;
  using detail::newell_g;
  DemagTensor t;
  t.xx = scale * detail::stencil([](double a, double b, double c) { return newell_f(a, b, c); }, x, y, z, d);
  t.yy = scale * detail::stencil([](double a, double b, double c) { return newell_f(b, c, a); }, x, y, z, d);
  t.zz = scale * detail::stencil([](double a, double b, double c) { return newell_f(c, a, b); }, x, y, z, d);
  if (x != 0.0 && y != 0.0)
    t.xy = scale * detail::stencil([](double a, double b, double c) { return newell_g(a, b, c); }, x, y, z, d);
  if (x != 0.0 && z != 0.0)
    t.xz = scale * detail::stencil([](double a, double b, double c) { return newell_g(a, c, b); }, x, y, z, d);
  if (y != 0.0 && z != 0.0)
    t.yz = scale * detail::stencil([](double a, double b, double c) { return newell_g(b, c, a); }, x, y, z, d);
  return t;
}

/// Tensor table indexed by the integer offset between cells, so storage is
/// (2nx-1)(2ny-1)(2nz-1) rather than N^2.
class DemagKernel {
 public:
  DemagKernel() = default;

  explicit DemagKernel(const Grid& grid) : grid_(grid) {
    sx_ = 2 * grid.nx - 1;
    sy_ = 2 * grid.ny - 1;
    sz_ = 2 * grid.nz - 1;
    table_.resize(static_cast<std::size_t>(sx_) * sy_ * sz_);
    for (int k = -(grid.nz - 1); k < grid.nz; ++k)
      for (int j = -(grid.ny - 1); j < grid.ny; ++j)
        for (int i = -(grid.nx - 1); i < grid.nx; ++i)
          table_[slot(i, j, k)] = newell_tensor(i * grid.dx, j * grid.dx, k * grid.dx, grid.dx);
    coords_.reserve(grid.cell_count());
    for (std::size_t c = 0; c < grid.cell_count(); ++c) coords_.push_back(grid.coords(c));
    const std::size_t n = grid.cell_count();
    if (n <= dense_limit) {
      const auto N = static_cast<Eigen::Index>(3 * n);
      dense_.resize(N, N);
      for (std::size_t t = 0; t < n; ++t)
        for (std::size_t s = 0; s < n; ++s) {
          const auto& d = between(t, s);
          dense_.block<3, 3>(static_cast<Eigen::Index>(3 * t), static_cast<Eigen::Index>(3 * s))
              << d.xx, d.xy, d.xz, d.xy, d.yy, d.yz, d.xz, d.yz, d.zz;
        }
    }
  }

  /// Grids up to this many cells keep the full 3N×3N matrix.
  static constexpr std::size_t dense_limit = 512;

  const DemagTensor& between(std::size_t target, std::size_t source) const {
    const auto d = coords_[target] - coords_[source];
    return table_[slot(d.x(), d.y(), d.z())];
  }

  const DemagTensor& at_offset(int i, int j, int k) const { return table_[slot(i, j, k)]; }

  /// H_demag for every cell, A/m.
  void field(const std::vector<Vec3>& m, double Ms, std::vector<Vec3>& out) const {
    const std::size_t n = m.size();
    out.assign(n, Vec3::Zero());
    if (dense_.size() > 0) {
      const auto N = static_cast<Eigen::Index>(3 * n);
      Eigen::Map<const Eigen::VectorXd> mv(m.data()->data(), N);
      Eigen::Map<Eigen::VectorXd> hv(out.data()->data(), N);
      hv.noalias() = -Ms * (dense_ * mv);
      return;
    }
    for (std::size_t t = 0; t < n; ++t) {
      Vec3 acc = Vec3::Zero();
      const auto& ct = coords_[t];
      for (std::size_t s = 0; s < n; ++s) {
        const auto& cs = coords_[s];
        acc += table_[slot(ct.x() - cs.x(), ct.y() - cs.y(), ct.z() - cs.z())].apply(m[s]);
      }
      out[t] = -Ms * acc;
    }
  }

  const Grid& grid() const { return grid_; }

 private:
  std::size_t slot(int i, int j, int k) const {
    return static_cast<std::size_t>((i + grid_.nx - 1) + sx_ * ((j + grid_.ny - 1) + sy_ * (k + grid_.nz - 1)));
  }

  Grid grid_{};
  int sx_ = 0, sy_ = 0, sz_ = 0;
  std::vector<DemagTensor> table_;
  std::vector<Eigen::Vector3i> coords_;
  Eigen::MatrixXd dense_;
};

}  // namespace nvpiezo::micromag
