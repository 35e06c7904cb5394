#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <vector>

#include "quadmanip/nav/occupancy_grid.hpp"

namespace quadmanip {

inline constexpr double kSqrt2 = 1.41421356237309504880;

/// Path cost kept as (axis moves, diagonal moves) so equal costs compare equal exactly.
struct StepCount {
  std::int64_t straight = 0;
  std::int64_t diagonal = 0;
  double value() const { return static_cast<double>(straight) + static_cast<double>(diagonal) * kSqrt2; }
};

/// Cells whose footprint disk (radius `inflation`, centred on the cell) touches
/// an Occupied cell. Occupied cells are always blocked.
inline std::vector<std::uint8_t> inflated_obstacle_mask(const OccupancyGrid& g, double inflation) {
  const int w = g.width(), h = g.height();
  std::vector<std::uint8_t> blocked(static_cast<std::size_t>(w) * h, 0);
  const double res = g.resolution();
  const int reach = static_cast<int>(std::ceil(inflation / res)) + 1;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (g.at({x, y}) != CellState::Occupied) continue;
      for (int dy = -reach; dy <= reach; ++dy) {
        for (int dx = -reach; dx <= reach; ++dx) {
          const CellIndex c{x + dx, y + dy};
          if (!g.in_bounds(c)) continue;
          const double ex = std::max(std::abs(dx) - 0.5, 0.0) * res;
          const double ey = std::max(std::abs(dy) - 0.5, 0.0) * res;
          if ((dx == 0 && dy == 0) || std::hypot(ex, ey) < inflation) blocked[g.linear(c)] = 1;
        }
      }
    }
  }
  return blocked;
}

inline StepCount path_steps(const std::vector<CellIndex>& path) {
  StepCount s;
  for (std::size_t i = 1; i < path.size(); ++i) {
    const bool diag = path[i].x != path[i - 1].x && path[i].y != path[i - 1].y;
    (diag ? s.diagonal : s.straight) += 1;
  }
  return s;
}

inline double path_cost(const std::vector<CellIndex>& path) { return path_steps(path).value(); }

/// 8-connected A* over Free and Unknown cells whose inflated footprint avoids
/// Occupied cells. Cost 1 per axis move, sqrt(2) per diagonal; the octile
/// heuristic is consistent so the result is cost-optimal. Ties in the open
/// list break by (f, h, linear cell index).
inline std::vector<CellIndex> plan_path(const OccupancyGrid& grid, CellIndex start, CellIndex goal, double inflation) {
  if (!grid.in_bounds(start) || !grid.in_bounds(goal)) throw UsageError("path endpoints must be inside the grid");
  const auto blocked = inflated_obstacle_mask(grid, inflation);
  if (blocked[grid.linear(start)]) throw NoPath("start cell is blocked");
  if (blocked[grid.linear(goal)]) throw NoPath("goal cell is blocked");

  const auto heuristic = [&](CellIndex c) {
    const std::int64_t dx = std::abs(c.x - goal.x), dy = std::abs(c.y - goal.y);
    return StepCount{std::max(dx, dy) - std::min(dx, dy), std::min(dx, dy)};
  };

  struct Entry {
    double f, h;
    std::size_t index;
    bool operator>(const Entry& o) const {
      if (f != o.f) return f > o.f;
      if (h != o.h) return h > o.h;
      return index > o.index;
    }
  };

  const std::size_t n = static_cast<std::size_t>(grid.width()) * grid.height();
  std::vector<StepCount> g(n, StepCount{std::numeric_limits<std::int64_t>::max() / 4, 0});
  std::vector<std::int64_t> parent(n, -1);
  std::vector<std::uint8_t> closed(n, 0);
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;

  const auto push = [&](CellIndex c) {
    const std::size_t i = grid.linear(c);
    const StepCount hs = heuristic(c);
    const StepCount fs{g[i].straight + hs.straight, g[i].diagonal + hs.diagonal};
    open.push({fs.value(), hs.value(), i});
  };

  g[grid.linear(start)] = {};
  push(start);
  const std::size_t goal_i = grid.linear(goal);
  while (!open.empty()) {
    const Entry e = open.top();
    open.pop();
    if (closed[e.index]) continue;
    closed[e.index] = 1;
    if (e.index == goal_i) break;
    const CellIndex c{static_cast<int>(e.index % grid.width()), static_cast<int>(e.index / grid.width())};
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        const CellIndex nb{c.x + dx, c.y + dy};
        if (!grid.in_bounds(nb)) continue;
        const std::size_t ni = grid.linear(nb);
        if (blocked[ni] || closed[ni]) continue;
        StepCount cand = g[e.index];
        (dx != 0 && dy != 0 ? cand.diagonal : cand.straight) += 1;
        if (cand.value() < g[ni].value()) {
          g[ni] = cand;
          parent[ni] = static_cast<std::int64_t>(e.index);
          push(nb);
        }
      }
    }
  }
  if (!closed[goal_i]) throw NoPath("goal unreachable");

  std::vector<CellIndex> path;
  for (std::int64_t i = static_cast<std::int64_t>(goal_i); i >= 0; i = parent[static_cast<std::size_t>(i)])
    path.push_back({static_cast<int>(i % grid.width()), static_cast<int>(i / grid.width())});
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace quadmanip
