#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <set>

#include "quadmanip/nav/mapping.hpp"
#include "quadmanip/sim/world.hpp"

namespace quadmanip {

/// Entry parameter of the ray o + t d into [lo, hi], t > 0. Rays starting
/// inside the box report no hit.
inline std::optional<double> ray_aabb(const Vec3& o, const Vec3& d, const Vec3& lo, const Vec3& hi) {
  double t0 = 0.0, t1 = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 3; ++k) {
    if (std::abs(d[k]) < 1e-15) {
      if (o[k] < lo[k] || o[k] > hi[k]) return std::nullopt;
      continue;
    }
    double a = (lo[k] - o[k]) / d[k], b = (hi[k] - o[k]) / d[k];
    if (a > b) std::swap(a, b);
    t0 = std::max(t0, a);
    t1 = std::min(t1, b);
    if (t0 > t1) return std::nullopt;
  }
  if (!(t0 > 1e-9)) return std::nullopt;
  return t0;
}

inline std::optional<double> ray_box(const Vec3& o, const Vec3& d, const Pose& box, const Vec3& half) {
  const UnitQuaternion inv = box.orientation.conjugate();
  return ray_aabb(inv.rotate(o - box.position), inv.rotate(d), -half, half);
}

/// Terrain as a ground plane at z = 0 with raised patches as solid boxes and
/// sunken patches as lowered floors.
inline std::optional<double> ray_terrain(const Vec3& o, const Vec3& d, const Scenario& s, const Heightmap& hm) {
  std::optional<double> best;
  const auto take = [&](std::optional<double> t) {
    if (t && (!best || *t < *best)) best = t;
  };
  for (const TerrainPatch& p : s.terrain.patches)
    if (p.height > 0) take(ray_aabb(o, d, Vec3(p.min.x(), p.min.y(), 0.0), Vec3(p.max.x(), p.max.y(), p.height)));
  if (d.z() < 0 && o.z() > 0) {
    const double t = -o.z() / d.z();
    const Vec3 hit = o + t * d;
    const double h = hm.height_at(hit.x(), hit.y());
    take(h < 0 ? (h - o.z()) / d.z() : t);
  }
  return best;
}

/// Optical-axis depth image from the body camera. The gripper payload is not
/// rendered.
inline DepthImage render_depth(const SimWorld& w, const SimEnvironment& env, const Scenario& s, const CameraModel& cam) {
  DepthImage img(cam.width, cam.height);
  const Pose cw = w.base * cam.extrinsic;
  const std::set<std::string> skip = w.carried();
  for (int v = 0; v < cam.height; ++v) {
    for (int u = 0; u < cam.width; ++u) {
      const Vec3 d = cw.orientation.rotate(Vec3((u - cam.cx) / cam.fx, (v - cam.cy) / cam.fy, 1.0));
      std::optional<double> best = ray_terrain(cw.position, d, s, env.terrain);
      const auto take = [&](std::optional<double> t) {
        if (t && (!best || *t < *best)) best = t;
      };
      for (const Aabb& b : env.obstacles) take(ray_aabb(cw.position, d, b.min, b.max));
      for (const auto& [id, o] : w.objects)
        if (!skip.count(id)) take(ray_box(cw.position, d, o.pose, o.half()));
      if (best) img.set(u, v, static_cast<float>(*best));
    }
  }
  return img;
}

/// Planar LiDAR sweep from a level-stabilised mount above the base. Sees
/// static obstacles and raised terrain only; objects are mapped separately.
inline Scan lidar_scan(const SimWorld& w, const SimEnvironment& env, const Scenario& s, const SimParams& p) {
  Scan scan;
  const Vec3 origin = w.base.position + Vec3(0.0, 0.0, p.lidar_height);
  scan.sensor_pose = Pose::from_xyz_yaw(origin, w.base.yaw());
  scan.timestamp = w.t;
  scan.ground_z = env.terrain.height_at(origin.x(), origin.y());
  const Pose inv = scan.sensor_pose.inverse();
  for (int i = 0; i < p.lidar_beams; ++i) {
    const double a = 2.0 * kPi * i / p.lidar_beams;
    const Vec3 d = scan.sensor_pose.orientation.rotate(Vec3(std::cos(a), std::sin(a), 0.0));
    std::optional<double> best;
    const auto take = [&](std::optional<double> t) {
      if (t && (!best || *t < *best)) best = t;
    };
    for (const Aabb& b : env.obstacles) take(ray_aabb(origin, d, b.min, b.max));
    for (const TerrainPatch& tp : s.terrain.patches)
      if (tp.height > 0) take(ray_aabb(origin, d, Vec3(tp.min.x(), tp.min.y(), 0.0), Vec3(tp.max.x(), tp.max.y(), tp.height)));
    if (best && *best <= p.lidar_range) scan.points.push_back(inv.apply(origin + *best * d));
  }
  return scan;
}

}  // namespace quadmanip
