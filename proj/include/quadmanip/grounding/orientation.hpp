#pragma once

#include <cmath>
#include <optional>

#include "quadmanip/core/errors.hpp"
#include "quadmanip/geometry/geometry.hpp"

namespace quadmanip {

inline constexpr double kParallelTolerance = 1e-6;

namespace detail {

/// Component of v orthogonal to unit u, with a second pass to mop up rounding.
inline Vec3 reject(const Vec3& v, const Vec3& u) {
  Vec3 r = v - v.dot(u) * u;
  r -= r.dot(u) * u;
  return r;
}

inline Vec3 unit_input(const Vec3& v, const char* name) {
  const double n = v.norm();
  if (!std::isfinite(n) || std::abs(n - 1.0) > 1e-6) throw UsageError(std::string(name) + " must be unit length");
  return v / n;
}

/// First of `candidates` with a usable component orthogonal to u, normalized.
inline Vec3 orthogonal_from(const Vec3& u, std::initializer_list<Vec3> candidates) {
  for (const Vec3& c : candidates) {
    const Vec3 r = reject(c, u);
    const double n = r.norm();
    if (n > 1e-6) {
      Vec3 out = r / n;
      return reject(out, u).normalized();
    }
  }
  throw UsageError("no orthogonal direction available");
}

/// +1 unless `v` points into the negative half-space of the first reference it
/// is not orthogonal to.
inline double half_space_sign(const Vec3& v, std::initializer_list<Vec3> refs) {
  for (const Vec3& r : refs) {
    const double d = v.dot(r);
    if (std::abs(d) > 1e-12) return d > 0 ? 1.0 : -1.0;
  }
  return 1.0;
}

}  // namespace detail

/// End-effector orientation from an optional dominant axis `a` (x and z
/// columns orthogonal to it) and an optional surface normal `n` (z column
/// aligned with it as closely as `a` allows). z takes the sign that keeps it
/// in the half-space of `default_approach`; x the sign toward world +x
/// (fallback +y, +z).
inline RotationMatrix solve_orientation(const std::optional<Vec3>& a_in, const std::optional<Vec3>& n_in,
                                        const Vec3& default_approach) {
  const Vec3 d = detail::unit_input(default_approach, "default approach");
  std::optional<Vec3> a, n;
  if (a_in) a = detail::unit_input(*a_in, "dominant axis");
  if (n_in) n = detail::unit_input(*n_in, "surface normal");
  if (a_in && n_in && std::abs(a_in->dot(*n_in)) >= 1.0 - kParallelTolerance)
    throw DegenerateConstraints("surface normal is parallel to the dominant axis");

  Vec3 z;
  if (a && n) {
    z = detail::orthogonal_from(*a, {*n});
  } else if (n) {
    z = *n;
  } else if (a) {
    z = detail::orthogonal_from(*a, {d, Vec3::UnitX(), Vec3::UnitY()});
  } else {
    z = d;
  }
  z *= detail::half_space_sign(z, {d});

  Vec3 x;
  if (a) {
    x = a->cross(z);
    x = detail::reject(x / x.norm(), *a).normalized();
    x = detail::reject(x, z).normalized();
  } else {
    x = detail::orthogonal_from(z, {Vec3::UnitX(), Vec3::UnitY()});
  }
  x *= detail::half_space_sign(x, {Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()});
  const Vec3 y = z.cross(x);
  return RotationMatrix::from_columns(x, y, z);
}

}  // namespace quadmanip
