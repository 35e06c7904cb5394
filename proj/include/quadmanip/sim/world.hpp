#pragma once

/**
 * @brief Kinematic 2.5D world: terrain-following base, exponentially
 * converging end effector, rigid attachments and supports.
 *
 * Frames: world is z-up; the base frame has x forward. The EE pose is kept
 * in the base frame (noise-free `ee_nominal` plus a per-tick noisy sample)
 * and mapped to the world after the base moves. Objects resting on another
 * object (`support`) keep a fixed pose relative to it.
 */

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "quadmanip/control/rewards.hpp"
#include "quadmanip/core/rng.hpp"
#include "quadmanip/grounding/camera.hpp"
#include "quadmanip/grounding/orientation.hpp"
#include "quadmanip/nav/occupancy_grid.hpp"
#include "quadmanip/sim/params.hpp"
#include "quadmanip/sim/scenario.hpp"

namespace quadmanip {

inline const Vec3 kArmBaseOffset(0.2, 0.0, 0.1);

/// Camera fixed on the body in the observe posture: 0.35 m ahead, 0.5 m up,
/// pitched 55 degrees down.
inline CameraModel default_camera() {
  CameraModel cam;
  const double th = 55.0 * kPi / 180.0, c = std::cos(th), s = std::sin(th);
  cam.extrinsic = {Vec3(0.35, 0.0, 0.5),
                   RotationMatrix::from_columns(Vec3(0, -1, 0), Vec3(-s, 0, -c), Vec3(c, 0, -s)).to_quaternion()};
  return cam;
}

/// Stowed EE pose in the base frame, gripper pointing forward and down.
inline Pose home_ee_pose() {
  return {Vec3(0.45, 0.0, 0.25), solve_orientation(std::nullopt, std::nullopt, Vec3(1, 0, -1).normalized()).to_quaternion()};
}

/// EE target with its position pulled back inside the arm's reach sphere.
inline Pose clamp_to_reach(const Pose& target, double reach) {
  const Vec3 rel = target.position - kArmBaseOffset;
  if (rel.norm() <= reach) return target;
  return {kArmBaseOffset + rel.normalized() * reach, target.orientation};
}

inline UnitQuaternion slerp(const UnitQuaternion& a, const UnitQuaternion& b, double alpha) {
  return UnitQuaternion(a.eigen().slerp(alpha, b.eigen()));
}

struct ObjectState {
  ObjectSpec spec;
  Pose pose;  // box center
  Pose rest;  // pose at joint value 0
  double joint = 0.0;
  std::optional<std::string> support;
  Pose rel_to_support;

  Vec3 half() const { return spec.size / 2; }

  /// World AABB of the oriented box.
  Aabb bounds() const {
    const Vec3 h = half();
    Aabb b{pose.position, pose.position};
    for (int i = 0; i < 8; ++i)
      b.expand(pose.apply(Vec3(i & 1 ? h.x() : -h.x(), i & 2 ? h.y() : -h.y(), i & 4 ? h.z() : -h.z())));
    return b;
  }

  bool footprint_contains(double x, double y) const {
    const Vec3 l = pose.inverse().apply(Vec3(x, y, pose.position.z()));
    return std::abs(l.x()) <= half().x() && std::abs(l.y()) <= half().y();
  }
};

struct Attachment {
  std::string object;
  Pose rel;           // object pose in the EE frame, fixed while held
  Vec3 ee_anchor;     // EE position at grasp (articulations)
  double joint_anchor = 0.0;
};

struct SimWorld {
  double t = 0.0;
  Pose base;
  LocomotionCommand cmd;  // last command, base frame
  LocomotionCommand vel;  // actual velocity, base frame
  Pose ee_nominal;        // base frame, noise free
  Pose ee_base;           // base frame, sampled with noise
  Pose ee_world;
  bool gripper_closed = false;
  std::optional<Attachment> held;
  std::map<std::string, ObjectState> objects;
  bool blocked = false;  // base motion was halted on the last tick

  /// Held object plus everything resting on it, transitively.
  std::set<std::string> carried() const {
    std::set<std::string> out;
    if (held) out.insert(held->object);
    bool grew = true;
    while (grew) {
      grew = false;
      for (const auto& [id, o] : objects)
        if (o.support && out.count(*o.support) && out.insert(id).second) grew = true;
    }
    return out;
  }

  /// Ground-truth view for the subtask monitors.
  WorldState snapshot() const {
    WorldState w;
    w.robot = base;
    for (const auto& [id, o] : objects) {
      w.objects[id] = o.pose;
      if (o.spec.joint) w.joints[id] = o.joint;
    }
    if (held) w.attached.insert(held->object);
    return w;
  }
};

/// Static part of the scene.
struct SimEnvironment {
  Heightmap terrain;
  std::vector<Aabb> obstacles;
  OccupancyGrid collision{0.05, Vec3::Zero(), 1, 1};  // ground truth, base footprint checks

  bool footprint_free(const Vec2& p, double radius) const { return !disk_hits_occupied(collision, p, radius); }
};

inline SimEnvironment make_environment(const Scenario& s, const SimParams& p) {
  SimEnvironment env;
  env.terrain = Heightmap(s.terrain);
  env.obstacles = s.obstacles;

  Aabb area{Vec3(s.robot_start.x(), s.robot_start.y(), 0), Vec3(s.robot_start.x(), s.robot_start.y(), 0)};
  for (const Aabb& b : s.obstacles) {
    area.expand(b.min);
    area.expand(b.max);
  }
  for (const auto& t : s.terrain.patches) {
    area.expand(Vec3(t.min.x(), t.min.y(), 0));
    area.expand(Vec3(t.max.x(), t.max.y(), 0));
  }
  for (const auto& o : s.objects) area.expand(o.position);
  area = area.inflated(3.0);
  const double r = p.collision_resolution;
  const int w = static_cast<int>(std::ceil(area.extents().x() / r)), h = static_cast<int>(std::ceil(area.extents().y() / r));
  OccupancyGrid g(r, Vec3(area.min.x(), area.min.y(), 0.0), w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const Vec2 c = g.cell_center({x, y});
      g.set({x, y}, std::abs(env.terrain.height_at(c.x(), c.y())) > p.max_step ? CellState::Occupied : CellState::Free);
    }
  for (const Aabb& b : s.obstacles) mark_box_occupied(g, b);
  env.collision = std::move(g);
  return env;
}

/// Base pose resting on the terrain: height above the local ground, roll and
/// pitch from central differences across the body.
inline Pose terrain_pose(const Heightmap& terrain, double x, double y, double yaw, double base_height) {
  constexpr double kSpan = 0.15;
  const double c = std::cos(yaw), s = std::sin(yaw);
  const auto h = [&](double fx, double fy) { return terrain.height_at(x + fx * c - fy * s, y + fx * s + fy * c); };
  const double pitch = -std::atan2(h(kSpan, 0) - h(-kSpan, 0), 2 * kSpan);
  const double roll = std::atan2(h(0, kSpan) - h(0, -kSpan), 2 * kSpan);
  return {Vec3(x, y, terrain.height_at(x, y) + base_height), quat_from_euler({roll, pitch, yaw})};
}

inline Pose articulated_pose(const ObjectState& o) {
  if (!o.spec.joint || o.spec.joint->type != JointType::Prismatic) return o.rest;
  return {o.rest.apply(o.spec.joint->axis.normalized() * o.joint), o.rest.orientation};
}

/// Re-derives poses of supported objects from their supports, parents first.
inline void update_supported(SimWorld& w) {
  std::set<std::string> done;
  std::function<void(const std::string&)> resolve = [&](const std::string& id) {
    if (!done.insert(id).second) return;
    ObjectState& o = w.objects.at(id);
    if (!o.support) return;
    resolve(*o.support);
    o.pose = w.objects.at(*o.support).pose * o.rel_to_support;
  };
  for (const auto& [id, o] : w.objects)
    if (!w.held || id != w.held->object) resolve(id);
}

inline SimWorld make_world(const Scenario& s, const SimEnvironment& env, const SimParams& p) {
  SimWorld w;
  w.base = terrain_pose(env.terrain, s.robot_start.x(), s.robot_start.y(), s.robot_yaw, p.base_height);
  if (!env.footprint_free(s.robot_start, p.footprint_radius))
    throw ValidationError("robot_start overlaps an obstacle", 0);
  w.ee_nominal = w.ee_base = home_ee_pose();
  w.ee_world = w.base * w.ee_base;
  for (const ObjectSpec& spec : s.objects) {
    ObjectState o;
    o.spec = spec;
    o.rest = Pose::from_xyz_yaw(spec.position, spec.yaw);
    o.joint = spec.joint ? spec.joint->value : 0.0;
    o.pose = articulated_pose(o);
    o.support = spec.attach_to;
    w.objects.emplace(spec.id, std::move(o));
  }
  for (auto& [id, o] : w.objects)
    if (o.support) o.rel_to_support = w.objects.at(*o.support).pose.inverse() * o.pose;
  update_supported(w);
  return w;
}

/// Advances the world by one tick.
inline void step(SimWorld& w, const SimEnvironment& env, const LocomotionCommand& cmd, const std::optional<Pose>& ee_cmd,
                 const SimParams& p, SeededRng& rng) {
  const double dt = p.dt;
  const TrackingModel& tm = p.tracking;
  w.t += dt;
  w.cmd = cmd;

  // Base: first-order lag, then unicycle integration in the heading frame.
  const double a = tm.tau_base > 0 ? 1.0 - std::exp(-dt / tm.tau_base) : 1.0;
  w.vel.vx += (cmd.vx - w.vel.vx) * a;
  w.vel.vy += (cmd.vy - w.vel.vy) * a;
  w.vel.wz += (cmd.wz - w.vel.wz) * a;
  const double yaw = w.base.yaw(), c = std::cos(yaw), s = std::sin(yaw);
  const double nx = w.base.position.x() + (w.vel.vx * c - w.vel.vy * s) * dt;
  const double ny = w.base.position.y() + (w.vel.vx * s + w.vel.vy * c) * dt;
  const double nyaw = wrap_angle(yaw + w.vel.wz * dt);
  w.blocked = !env.footprint_free(Vec2(nx, ny), p.footprint_radius);
  if (w.blocked) {
    // Slide along the contact if one world axis is free; the footprint is a
    // disk, so turning in place is always allowed.
    const double x0 = w.base.position.x(), y0 = w.base.position.y();
    Vec2 to(x0, y0);
    if (env.footprint_free(Vec2(nx, y0), p.footprint_radius)) to.x() = nx;
    else if (env.footprint_free(Vec2(x0, ny), p.footprint_radius)) to.y() = ny;
    w.vel.vx = w.vel.vy = 0.0;
    w.base = terrain_pose(env.terrain, to.x(), to.y(), nyaw, p.base_height);
  } else if (w.vel.vx != 0.0 || w.vel.vy != 0.0 || w.vel.wz != 0.0) {
    w.base = terrain_pose(env.terrain, nx, ny, nyaw, p.base_height);
  }

  // End effector: exponential convergence toward the reach-clamped target.
  if (ee_cmd) {
    const Vec3 target = clamp_to_reach(*ee_cmd, p.reach).position;
    const double b = 1.0 - std::exp(-tm.ee_rate * dt);
    w.ee_nominal = {w.ee_nominal.position + (target - w.ee_nominal.position) * b,
                    slerp(w.ee_nominal.orientation, ee_cmd->orientation, b)};
  }
  w.ee_base = w.ee_nominal;
  if (tm.sigma_pos > 0)
    w.ee_base.position += Vec3(rng.normal(), rng.normal(), rng.normal()) * tm.sigma_pos;
  if (tm.sigma_ori > 0) {
    const Vec3 rv = Vec3(rng.normal(), rng.normal(), rng.normal()) * tm.sigma_ori;
    if (rv.norm() > 0)
      w.ee_base.orientation = UnitQuaternion(Eigen::Quaterniond(Eigen::AngleAxisd(rv.norm(), rv.normalized()))) *
                              w.ee_base.orientation;
  }
  w.ee_world = w.base * w.ee_base;

  if (w.held) {
    ObjectState& o = w.objects.at(w.held->object);
    if (o.spec.joint) {
      const JointSpec& j = *o.spec.joint;
      const Vec3 axis_w = o.rest.orientation.rotate(j.axis.normalized());
      double travel = (w.ee_world.position - w.held->ee_anchor).dot(axis_w);
      if (j.type == JointType::Revolute) {
        const double lever = std::max((w.held->ee_anchor - o.rest.position).norm(), 0.05);
        travel /= lever;
      }
      o.joint = std::clamp(w.held->joint_anchor + travel, j.lower, j.upper);
      o.pose = articulated_pose(o);
    } else {
      o.pose = w.ee_world * w.held->rel;
    }
  }
  update_supported(w);
}

/// Closes the gripper on `id` and fixes its pose relative to the EE.
inline void attach(SimWorld& w, const std::string& id) {
  if (w.held) throw UsageError("gripper already holds '" + w.held->object + "'");
  ObjectState& o = w.objects.at(id);
  w.gripper_closed = true;
  w.held = Attachment{id, w.ee_world.inverse() * o.pose, w.ee_world.position, o.joint};
  if (!o.spec.joint) o.support.reset();
}

/// Opens the gripper. Free bodies drop straight down onto the highest
/// surface below them (another object's top or the terrain); returns the
/// supporting object, if any.
inline std::optional<std::string> release(SimWorld& w, const SimEnvironment& env) {
  w.gripper_closed = false;
  if (!w.held) return std::nullopt;
  const std::string id = w.held->object;
  w.held.reset();
  ObjectState& o = w.objects.at(id);
  if (o.spec.joint) return std::nullopt;

  std::set<std::string> above{id};
  for (bool grew = true; grew;) {
    grew = false;
    for (const auto& [oid, other] : w.objects)
      if (other.support && above.count(*other.support) && above.insert(oid).second) grew = true;
  }
  const double x = o.pose.position.x(), y = o.pose.position.y();
  const double bottom = o.pose.position.z() - o.half().z();
  double top = env.terrain.height_at(x, y);
  std::optional<std::string> support;
  for (const auto& [oid, other] : w.objects) {
    if (above.count(oid) || !other.footprint_contains(x, y)) continue;
    const double t = other.pose.position.z() + other.half().z();
    if (t <= bottom + 0.05 && t > top) {
      top = t;
      support = oid;
    }
  }
  o.pose = Pose::from_xyz_yaw(Vec3(x, y, top + o.half().z()), o.pose.yaw());
  o.support = support;
  if (support) o.rel_to_support = w.objects.at(*support).pose.inverse() * o.pose;
  update_supported(w);
  return support;
}

}  // namespace quadmanip
