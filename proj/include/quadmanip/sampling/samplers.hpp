#pragma once

#include <concepts>
#include <functional>

#include "quadmanip/control/rewards.hpp"
#include "quadmanip/core/rng.hpp"
#include "quadmanip/sampling/ranges.hpp"

namespace quadmanip {

template <class R>
concept UniformSource = requires(R& r, double lo, double hi) {
  { r.uniform(lo, hi) } -> std::convertible_to<double>;
};

template <UniformSource Rng>
double draw(Rng& rng, const Range& r) {
  return rng.uniform(r.lo, r.hi);
}

/// Where the EE target is anchored and how the terrain looks under the robot.
struct SamplingContext {
  Pose base;                                     // world frame
  Vec3 arm_base_offset = Vec3(0.2, 0.0, 0.1);    // arm base in the base frame
  double nominal_base_height = 0.30;             // base height above terrain when standing
  std::function<double(double, double)> terrain_height_at = [](double, double) { return 0.0; };
  bool fix_world_z = true;
};

/// Draw order: l, p, y, roll, pitch, yaw.
template <UniformSource Rng>
EETarget sample_ee_target(Rng& rng, const CommandRanges& ranges, const SamplingContext& ctx) {
  const SphericalTarget s{draw(rng, ranges.l_ee), draw(rng, ranges.p_ee), draw(rng, ranges.y_ee)};
  EETarget out;
  out.orientation = {draw(rng, ranges.alpha), draw(rng, ranges.beta), draw(rng, ranges.gamma)};

  const Vec3 local = spherical_to_cartesian(s);
  const Vec3 arm_base = ctx.base.apply(ctx.arm_base_offset);
  const UnitQuaternion yaw_only = UnitQuaternion::from_yaw(ctx.base.yaw());
  Vec3 world = arm_base + yaw_only.rotate(local);
  if (ctx.fix_world_z) {
    const double ground = ctx.terrain_height_at(ctx.base.position.x(), ctx.base.position.y());
    world.z() = ground + ctx.nominal_base_height + ctx.arm_base_offset.z() + local.z();
  }
  out.position = ctx.base.inverse().apply(world);
  return out;
}

/// Draw order: x, y, w.
template <UniformSource Rng>
LocomotionCommand sample_locomotion_command(Rng& rng, const CommandRanges& ranges) {
  LocomotionCommand c;
  c.vx = draw(rng, ranges.x);
  c.vy = draw(rng, ranges.y);
  c.wz = draw(rng, ranges.w);
  return c;
}

/// Clamps a command into the preset box.
inline LocomotionCommand clamp_command(const LocomotionCommand& c, const CommandRanges& r) {
  return {std::clamp(c.vx, r.x.lo, r.x.hi), std::clamp(c.vy, r.y.lo, r.y.hi), std::clamp(c.wz, r.w.lo, r.w.hi)};
}

}  // namespace quadmanip
