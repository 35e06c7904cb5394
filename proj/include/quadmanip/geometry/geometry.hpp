#pragma once

/**
 * @brief 3D geometry primitives shared by every module.
 *
 * Conventions: z-up world frame, base frame x-forward / y-left / z-up.
 * Euler angles are extrinsic X-Y-Z (roll about world x, then pitch about
 * world y, then yaw about world z), i.e. R = Rz(yaw) * Ry(pitch) * Rx(roll).
 * Normalized angles live in (-pi, pi].
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "quadmanip/core/errors.hpp"

namespace quadmanip {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;

inline constexpr double kPi = std::numbers::pi;

inline bool is_finite(const Vec3& v) { return v.allFinite(); }

/// Maps any finite angle into (-pi, pi]; an input of -pi maps to +pi.
inline double wrap_angle(double a) {
  double r = std::remainder(a, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

class RotationMatrix;

/// Unit quaternion (w, x, y, z). Construction always renormalizes.
class UnitQuaternion {
 public:
  UnitQuaternion() : q_(Eigen::Quaterniond::Identity()) {}

  explicit UnitQuaternion(const Eigen::Quaterniond& q) : q_(q) { normalize(); }

  static UnitQuaternion from_wxyz(double w, double x, double y, double z) {
    return UnitQuaternion(Eigen::Quaterniond(w, x, y, z));
  }

  static UnitQuaternion identity() { return UnitQuaternion(); }

  static UnitQuaternion from_axis_angle(const Vec3& axis, double angle) {
    const double n = axis.norm();
    if (!(n > 0.0) || !std::isfinite(angle)) throw UsageError("axis-angle needs a nonzero axis");
    return UnitQuaternion(Eigen::Quaterniond(Eigen::AngleAxisd(angle, axis / n)));
  }

  static UnitQuaternion from_yaw(double yaw) { return from_axis_angle(Vec3::UnitZ(), yaw); }

  double w() const { return q_.w(); }
  double x() const { return q_.x(); }
  double y() const { return q_.y(); }
  double z() const { return q_.z(); }
  const Eigen::Quaterniond& eigen() const { return q_; }

  double dot(const UnitQuaternion& o) const {
    return w() * o.w() + x() * o.x() + y() * o.y() + z() * o.z();
  }

  UnitQuaternion operator*(const UnitQuaternion& o) const { return UnitQuaternion(q_ * o.q_); }
  UnitQuaternion operator-() const {
    return UnitQuaternion(Eigen::Quaterniond(-w(), -x(), -y(), -z()));
  }
  UnitQuaternion conjugate() const { return UnitQuaternion(q_.conjugate()); }

  Vec3 rotate(const Vec3& v) const { return q_ * v; }

  inline RotationMatrix to_matrix() const;

 private:
  void normalize() {
    const double n = q_.norm();
    if (!(n > 1e-12) || !std::isfinite(n)) throw UsageError("quaternion has zero or non-finite norm");
    q_.coeffs() /= n;
  }

  Eigen::Quaterniond q_;
};

/// Proper rotation; orthonormal with det +1 within 1e-9, checked at construction.
class RotationMatrix {
 public:
  static constexpr double kTolerance = 1e-9;

  RotationMatrix() : m_(Eigen::Matrix3d::Identity()) {}

  static RotationMatrix from_matrix(const Eigen::Matrix3d& m) {
    if (!m.allFinite()) throw UsageError("rotation matrix has non-finite entries");
    const double ortho = (m.transpose() * m - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
    if (ortho > kTolerance || std::abs(m.determinant() - 1.0) > kTolerance)
      throw UsageError("matrix is not a proper rotation");
    RotationMatrix r;
    r.m_ = m;
    return r;
  }

  static RotationMatrix from_columns(const Vec3& x, const Vec3& y, const Vec3& z) {
    Eigen::Matrix3d m;
    m.col(0) = x;
    m.col(1) = y;
    m.col(2) = z;
    return from_matrix(m);
  }

  Vec3 col_x() const { return m_.col(0); }
  Vec3 col_y() const { return m_.col(1); }
  Vec3 col_z() const { return m_.col(2); }
  const Eigen::Matrix3d& matrix() const { return m_; }

  std::array<double, 9> row_major() const {
    return {m_(0, 0), m_(0, 1), m_(0, 2), m_(1, 0), m_(1, 1), m_(1, 2), m_(2, 0), m_(2, 1), m_(2, 2)};
  }

  Vec3 operator*(const Vec3& v) const { return m_ * v; }

  UnitQuaternion to_quaternion() const { return UnitQuaternion(Eigen::Quaterniond(m_)); }

 private:
  Eigen::Matrix3d m_;
};

inline RotationMatrix UnitQuaternion::to_matrix() const {
  return RotationMatrix::from_matrix(q_.toRotationMatrix());
}

struct EulerAngles {
  double roll = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;
};

/// Rigid transform: maps points from the local frame into the parent frame.
struct Pose {
  Vec3 position = Vec3::Zero();
  UnitQuaternion orientation;

  static Pose identity() { return {}; }
  static Pose from_xyz_yaw(const Vec3& p, double yaw) { return {p, UnitQuaternion::from_yaw(yaw)}; }

  Vec3 apply(const Vec3& local) const { return orientation.rotate(local) + position; }

  Pose inverse() const {
    const UnitQuaternion inv = orientation.conjugate();
    return {-inv.rotate(position), inv};
  }

  Pose operator*(const Pose& child) const {
    return {apply(child.position), orientation * child.orientation};
  }

  /// Heading of the local x axis projected onto the world xy plane.
  double yaw() const {
    const Vec3 fwd = orientation.rotate(Vec3::UnitX());
    return std::atan2(fwd.y(), fwd.x());
  }
};

/// Spherical coordinates around an origin: pitch is elevation above the
/// xy plane, yaw the azimuth from +x toward +y.
struct SphericalTarget {
  double radius = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;
};

/// Axis-aligned box.
struct Aabb {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  static Aabb around(const Vec3& center, const Vec3& half_extents) {
    return {center - half_extents, center + half_extents};
  }

  Vec3 center() const { return 0.5 * (min + max); }
  Vec3 extents() const { return max - min; }

  bool contains(const Vec3& p, double tol = 0.0) const {
    return (p.array() >= min.array() - tol).all() && (p.array() <= max.array() + tol).all();
  }
  bool contains(const Aabb& o, double tol = 0.0) const {
    return contains(o.min, tol) && contains(o.max, tol);
  }

  Aabb inflated(double d) const { return {min - Vec3::Constant(d), max + Vec3::Constant(d)}; }

  void expand(const Vec3& p) {
    min = min.cwiseMin(p);
    max = max.cwiseMax(p);
  }

  /// Planar distance from (x, y) to the box footprint; 0 inside.
  double planar_distance(const Vec2& p) const {
    const double dx = std::max({min.x() - p.x(), 0.0, p.x() - max.x()});
    const double dy = std::max({min.y() - p.y(), 0.0, p.y() - max.y()});
    return std::hypot(dx, dy);
  }
};

// ---------------------------------------------------------------------------
// Operations

/// Rotation angle between two orientations, 2 * acos(|a . b|), in [0, pi].
///
/// Evaluated as 2 * atan2(|vec(a^-1 b)|, |w(a^-1 b)|), which equals the
/// arccos form exactly in real arithmetic and stays accurate near 0 and pi.
inline double quat_geodesic_distance(const UnitQuaternion& a, const UnitQuaternion& b) {
  const double w = std::abs(a.dot(b));
  const Eigen::Quaterniond rel = a.eigen().conjugate() * b.eigen();
  const double s = rel.vec().norm();
  return 2.0 * std::atan2(s, w);
}

inline UnitQuaternion quat_from_euler(const EulerAngles& e) {
  const double cr = std::cos(0.5 * e.roll), sr = std::sin(0.5 * e.roll);
  const double cp = std::cos(0.5 * e.pitch), sp = std::sin(0.5 * e.pitch);
  const double cy = std::cos(0.5 * e.yaw), sy = std::sin(0.5 * e.yaw);
  return UnitQuaternion::from_wxyz(cr * cp * cy + sr * sp * sy, sr * cp * cy - cr * sp * sy,
                                   cr * sp * cy + sr * cp * sy, cr * cp * sy - sr * sp * cy);
}

inline EulerAngles euler_from_quat(const UnitQuaternion& q) {
  const double w = q.w(), x = q.x(), y = q.y(), z = q.z();
  EulerAngles e;
  e.roll = wrap_angle(std::atan2(2.0 * (w * x + y * z), 1.0 - 2.0 * (x * x + y * y)));
  e.pitch = std::asin(std::clamp(2.0 * (w * y - z * x), -1.0, 1.0));
  e.yaw = wrap_angle(std::atan2(2.0 * (w * z + x * y), 1.0 - 2.0 * (y * y + z * z)));
  return e;
}

inline Vec3 spherical_to_cartesian(const SphericalTarget& s) {
  const double horiz = s.radius * std::cos(s.pitch);
  return {horiz * std::cos(s.yaw), horiz * std::sin(s.yaw), s.radius * std::sin(s.pitch)};
}

/// Inverse of spherical_to_cartesian; angles are 0 for the zero vector.
inline SphericalTarget cartesian_to_spherical(const Vec3& v) {
  SphericalTarget s;
  s.radius = v.norm();
  if (s.radius == 0.0) return s;
  s.pitch = std::asin(std::clamp(v.z() / s.radius, -1.0, 1.0));
  s.yaw = std::atan2(v.y(), v.x());
  return s;
}

/// Re-expresses a point given in `from_frame` coordinates in `to_frame`
/// coordinates; both frames are poses in a common parent (world) frame.
inline Vec3 transform_point(const Vec3& p, const Pose& from_frame, const Pose& to_frame) {
  return to_frame.inverse().apply(from_frame.apply(p));
}

}  // namespace quadmanip
