#pragma once

#include <cmath>
#include <span>

#include "quadmanip/nav/occupancy_grid.hpp"

namespace quadmanip {

struct GoalSearchConfig {
  double search_radius = 2.0;     // meters
  double ring_step = 0.05;        // meters
  double angular_step = kPi / 18;  // radians
  double robot_inflation = 0.35;  // footprint disk radius, meters
  double bbox_inflation = 0.15;   // meters added to every obstacle box
  bool operator==(const GoalSearchConfig&) const = default;

  void validate() const {
    if (!(search_radius > 0 && ring_step > 0 && angular_step > 0 && robot_inflation > 0 && bbox_inflation > 0))
      throw UsageError("goal search parameters must be positive");
  }
};

/// Footprint disk free of Occupied cells and of every inflated obstacle box.
inline bool goal_candidate_valid(const OccupancyGrid& grid, const Vec2& p, std::span<const Aabb> obstacles,
                                 const GoalSearchConfig& cfg) {
  for (const Aabb& box : obstacles)
    if (box.inflated(cfg.bbox_inflation).planar_distance(p) < cfg.robot_inflation) return false;
  return !disk_hits_occupied(grid, p, cfg.robot_inflation);
}

/// Searches rings of radius k * ring_step (k = 0, 1, ...) around the waypoint,
/// each ring at angles j * angular_step from +x, and returns the first valid
/// candidate with its heading turned toward `face_toward`.
inline Pose find_goal_pose(const OccupancyGrid& grid, const Vec3& waypoint, std::span<const Aabb> obstacles,
                           const GoalSearchConfig& cfg, const Vec3& face_toward) {
  cfg.validate();
  const int rings = static_cast<int>(std::floor(cfg.search_radius / cfg.ring_step + 1e-9));
  for (int k = 0; k <= rings; ++k) {
    const double r = k * cfg.ring_step;
    const int spokes = k == 0 ? 1 : static_cast<int>(std::ceil(2.0 * kPi / cfg.angular_step - 1e-9));
    for (int j = 0; j < spokes; ++j) {
      const double a = j * cfg.angular_step;
      const Vec2 p(waypoint.x() + r * std::cos(a), waypoint.y() + r * std::sin(a));
      if (!goal_candidate_valid(grid, p, obstacles, cfg)) continue;
      const Vec2 d(face_toward.x() - p.x(), face_toward.y() - p.y());
      const double yaw = d.norm() > 1e-12 ? std::atan2(d.y(), d.x()) : 0.0;
      return Pose::from_xyz_yaw(Vec3(p.x(), p.y(), waypoint.z()), yaw);
    }
  }
  throw NoFeasibleGoal("no collision-free goal pose within the search radius");
}

}  // namespace quadmanip
