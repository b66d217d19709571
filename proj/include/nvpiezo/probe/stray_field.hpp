#pragma once

// Stray field of the film at the NV site: one point dipole of moment
// Ms·dx³·m_k per cell centre, plus the applied bias field.

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nvpiezo/core/constants.hpp"
#include "nvpiezo/core/error.hpp"
#include "nvpiezo/core/model.hpp"
#include "nvpiezo/micromag/fields.hpp"

namespace nvpiezo::probe {

/// Orthonormal NV frame: z' along the NV axis, x' the lab x̂ (or ŷ when the
/// axis is along x̂) projected orthogonal to it.
class NVFrame {
 public:
  explicit NVFrame(const Vec3& axis = Vec3::UnitZ()) {
    const Vec3 z = axis.normalized();
    Vec3 ref = std::abs(z.x()) > 0.9 ? Vec3::UnitY() : Vec3::UnitX();
    const Vec3 x = (ref - ref.dot(z) * z).normalized();
    const Vec3 y = z.cross(x);
    rot_.row(0) = x;
    rot_.row(1) = y;
    rot_.row(2) = z;
  }

  Vec3 to_nv(const Vec3& lab) const { return rot_ * lab; }
  Vec3 to_lab(const Vec3& nv) const { return rot_.transpose() * nv; }
  const Eigen::Matrix3d& rotation() const { return rot_; }

 private:
  Eigen::Matrix3d rot_;
};

/// Field of a point dipole `moment` (A·m²) located at `source`, seen at `point`, T.
inline Vec3 dipole_field(const Vec3& moment, const Vec3& source, const Vec3& point) {
  const Vec3 r = point - source;
  const double d = r.norm();
  const Vec3 u = r / d;
  return (constants::mu0 / (4.0 * constants::pi)) * (3.0 * moment.dot(u) * u - moment) / (d * d * d);
}

/// Film stray field only (no bias), lab frame, T.
inline Vec3 film_field_at(const std::vector<Vec3>& m, const MaterialParams& p, const Grid& g, const Vec3& point) {
  const double moment = p.Ms * g.cell_volume();
  Vec3 B = Vec3::Zero();
  for (std::size_t k = 0; k < m.size(); ++k) {
    const Vec3 c = g.cell_center(k);
    if ((point - c).norm() <= 0.5 * g.dx)
      throw DomainError("probe point lies within half a cell of cell " + std::to_string(k) +
                        "; the dipole approximation is invalid there");
    B += dipole_field(moment * m[k], c, point);
  }
  return B;
}

/// Total field at `point` in the NV frame: film dipoles plus B_applied (T).
inline Vec3 stray_field_at(const std::vector<Vec3>& m, const MaterialParams& p, const Grid& g, const Vec3& point,
                           const Vec3& B_applied, const NVFrame& frame = NVFrame()) {
  return frame.to_nv(film_field_at(m, p, g, point) + B_applied);
}

/// Precomputed linear map m -> B at one point, for repeated sampling of a
/// running simulation. B = sum_k G_k m_k with G_k the 3x3 dipole kernel.
class FieldProbe {
 public:
  FieldProbe(const MaterialParams& p, const Grid& g, const Vec3& point, const Vec3& B_applied,
             const NVFrame& frame = NVFrame())
      : point_(point), B_applied_(B_applied), frame_(frame) {
    const double moment = p.Ms * g.cell_volume();
    kernel_.reserve(g.cell_count());
    for (std::size_t k = 0; k < g.cell_count(); ++k) {
      const Vec3 c = g.cell_center(k);
      if ((point - c).norm() <= 0.5 * g.dx)
        throw DomainError("probe point lies within half a cell of cell " + std::to_string(k) +
                          "; the dipole approximation is invalid there");
      Eigen::Matrix3d G;
      for (int a = 0; a < 3; ++a) G.col(a) = dipole_field(moment * Vec3::Unit(a), c, point);
      kernel_.push_back(frame.rotation() * G);
    }
    bias_nv_ = frame.to_nv(B_applied);
  }

  /// NV-frame field, T.
  Vec3 operator()(const std::vector<Vec3>& m) const {
    Vec3 B = bias_nv_;
    for (std::size_t k = 0; k < m.size(); ++k) B += kernel_[k] * m[k];
    return B;
  }

  const Vec3& point() const { return point_; }
  const Vec3& bias_lab() const { return B_applied_; }
  const NVFrame& frame() const { return frame_; }

 private:
  Vec3 point_;
  Vec3 B_applied_;
  NVFrame frame_;
  Vec3 bias_nv_;
  std::vector<Eigen::Matrix3d> kernel_;
};

}  // namespace nvpiezo::probe
