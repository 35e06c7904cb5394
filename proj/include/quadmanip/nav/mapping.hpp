#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "quadmanip/nav/occupancy_grid.hpp"

namespace quadmanip {

/// One LiDAR sweep; points are in the sensor frame.
struct Scan {
  Pose sensor_pose;
  std::vector<Vec3> points;
  double timestamp = 0.0;
  double ground_z = 0.0;  // world height of the local ground under the sensor
};

/// Heights above local ground projected into the 2D map.
struct ZBand {
  double min = 0.05;
  double max = 0.60;
};

/// Cells crossed by the segment between two continuous cell coordinates,
/// in traversal order, endpoint cell included last.
inline std::vector<CellIndex> traverse_cells(const Vec2& from, const Vec2& to) {
  CellIndex c{static_cast<int>(std::floor(from.x())), static_cast<int>(std::floor(from.y()))};
  const CellIndex end{static_cast<int>(std::floor(to.x())), static_cast<int>(std::floor(to.y()))};
  std::vector<CellIndex> out{c};
  const Vec2 d = to - from;
  const int step_x = d.x() > 0 ? 1 : (d.x() < 0 ? -1 : 0);
  const int step_y = d.y() > 0 ? 1 : (d.y() < 0 ? -1 : 0);
  constexpr double inf = std::numeric_limits<double>::infinity();
  const double t_dx = step_x ? 1.0 / std::abs(d.x()) : inf;
  const double t_dy = step_y ? 1.0 / std::abs(d.y()) : inf;
  double t_x = step_x > 0 ? (c.x + 1 - from.x()) * t_dx : (step_x < 0 ? (from.x() - c.x) * t_dx : inf);
  double t_y = step_y > 0 ? (c.y + 1 - from.y()) * t_dy : (step_y < 0 ? (from.y() - c.y) * t_dy : inf);
  const int limit = std::abs(end.x - c.x) + std::abs(end.y - c.y);
  for (int i = 0; i < limit && c != end; ++i) {
    if (t_x < t_y) {
      c.x += step_x;
      t_x += t_dx;
    } else {
      c.y += step_y;
      t_y += t_dy;
    }
    out.push_back(c);
  }
  if (out.back() != end) out.push_back(end);
  return out;
}

/// Occupied-wins integration: in-band returns mark their cell Occupied, the
/// cells their 2D rays cross (endpoint excluded) become Free unless Occupied.
/// The grid grows to fit. Idempotent for a fixed scan.
inline void integrate_scan(OccupancyGrid& grid, const Scan& scan, const ZBand& band = {}) {
  const Vec3 origin = scan.sensor_pose.position;
  for (const Vec3& local : scan.points) {
    const Vec3 w = scan.sensor_pose.apply(local);
    const double h = w.z() - scan.ground_z;
    if (!(h >= band.min && h <= band.max)) continue;

    grid.ensure_contains(grid.cell_of(origin.x(), origin.y()));
    grid.ensure_contains(grid.cell_of(w.x(), w.y()));
    const CellIndex end = grid.cell_of(w.x(), w.y());

    const auto path = traverse_cells(grid.to_cell_coords(origin.x(), origin.y()), grid.to_cell_coords(w.x(), w.y()));
    for (const CellIndex& c : path) {
      if (c == end) break;
      if (grid.at(c) != CellState::Occupied) grid.set(c, CellState::Free);
    }
    grid.set(end, CellState::Occupied);
  }
}

/// Cell holding the target's (x, y); grows the grid when needed.
inline CellIndex project_waypoint(OccupancyGrid& grid, const Vec3& target) {
  if (!is_finite(target)) throw UsageError("waypoint is not finite");
  return grid.ensure_contains(grid.cell_of(target.x(), target.y()));
}

}  // namespace quadmanip
