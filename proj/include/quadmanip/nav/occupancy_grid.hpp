#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <span>
#include <vector>

#include "quadmanip/core/errors.hpp"
#include "quadmanip/geometry/geometry.hpp"

namespace quadmanip {

enum class CellState : std::uint8_t { Unknown = 0, Free = 1, Occupied = 2 };

struct CellIndex {
  int x = 0;
  int y = 0;
  auto operator<=>(const CellIndex&) const = default;
};

/// 2D occupancy raster. Cell (i, j) covers [origin + i*res, origin + (i+1)*res)
/// along each axis. Growth keeps the original anchor and counts whole-cell
/// shifts, so cell lookups stay exact after any number of resizes.
class OccupancyGrid {
 public:
  OccupancyGrid(double resolution, const Vec3& origin, int width, int height)
      : res_(resolution), anchor_(origin), width_(width), height_(height) {
    if (!(resolution > 0.0)) throw UsageError("grid resolution must be positive");
    if (width < 1 || height < 1) throw UsageError("grid needs at least one cell");
    cells_.assign(static_cast<std::size_t>(width) * height, CellState::Unknown);
  }

  double resolution() const { return res_; }
  int width() const { return width_; }
  int height() const { return height_; }
  /// Cumulative cells prepended on -x / -y by growth.
  int shift_x() const { return shift_x_; }
  int shift_y() const { return shift_y_; }

  /// World position of the lower corner of cell (0, 0).
  Vec3 origin() const { return anchor_ - Vec3(shift_x_ * res_, shift_y_ * res_, 0.0); }

  std::span<const CellState> cells() const { return cells_; }

  bool in_bounds(CellIndex c) const { return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_; }

  CellState at(CellIndex c) const {
    if (!in_bounds(c)) return CellState::Unknown;
    return cells_[linear(c)];
  }

  void set(CellIndex c, CellState s) {
    if (!in_bounds(c)) throw UsageError("cell out of bounds");
    cells_[linear(c)] = s;
  }

  std::size_t linear(CellIndex c) const { return static_cast<std::size_t>(c.y) * width_ + c.x; }

  /// Continuous cell coordinate of a world position; integers fall on cell edges.
  Vec2 to_cell_coords(double x, double y) const {
    return {snap((x - anchor_.x()) / res_) + shift_x_, snap((y - anchor_.y()) / res_) + shift_y_};
  }

  /// Cell containing (x, y) with the floor convention; may be out of bounds.
  CellIndex cell_of(double x, double y) const {
    const Vec2 q = to_cell_coords(x, y);
    return {static_cast<int>(std::floor(q.x())), static_cast<int>(std::floor(q.y()))};
  }

  Vec2 cell_center(CellIndex c) const {
    const Vec3 o = origin();
    return {o.x() + (c.x + 0.5) * res_, o.y() + (c.y + 0.5) * res_};
  }

  /// Grows (doubling the affected dimension each time) until `c` is inside.
  /// Returns `c` re-expressed in the grown grid.
  CellIndex ensure_contains(CellIndex c) {
    while (c.x < 0) {
      grow_x(true);
      c.x += width_ / 2;
    }
    while (c.x >= width_) grow_x(false);
    while (c.y < 0) {
      grow_y(true);
      c.y += height_ / 2;
    }
    while (c.y >= height_) grow_y(false);
    return c;
  }

  std::size_t count(CellState s) const { return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), s)); }

 private:
  static double snap(double q) {
    const double r = std::round(q);
    return std::abs(q - r) < 1e-9 ? r : q;
  }

  void grow_x(bool prepend) {
    const int w = width_;
    std::vector<CellState> next(static_cast<std::size_t>(2 * w) * height_, CellState::Unknown);
    for (int y = 0; y < height_; ++y)
      for (int x = 0; x < w; ++x)
        next[static_cast<std::size_t>(y) * 2 * w + x + (prepend ? w : 0)] = cells_[static_cast<std::size_t>(y) * w + x];
    cells_ = std::move(next);
    width_ = 2 * w;
    if (prepend) shift_x_ += w;
  }

  void grow_y(bool prepend) {
    const int h = height_;
    std::vector<CellState> next(static_cast<std::size_t>(width_) * 2 * h, CellState::Unknown);
    std::copy(cells_.begin(), cells_.end(), next.begin() + (prepend ? static_cast<std::ptrdiff_t>(width_) * h : 0));
    cells_ = std::move(next);
    height_ = 2 * h;
    if (prepend) shift_y_ += h;
  }

  double res_;
  Vec3 anchor_;  // world corner of the cell that was (0, 0) at construction
  int width_, height_;
  int shift_x_ = 0, shift_y_ = 0;
  std::vector<CellState> cells_;
};

/// Planar distance from a world point to the square of cell `c`.
inline double distance_to_cell(const OccupancyGrid& g, const Vec2& p, CellIndex c) {
  const Vec2 ctr = g.cell_center(c);
  const double h = 0.5 * g.resolution();
  const double dx = std::max(std::abs(p.x() - ctr.x()) - h, 0.0);
  const double dy = std::max(std::abs(p.y() - ctr.y()) - h, 0.0);
  return std::hypot(dx, dy);
}

/// True when a disk of `radius` at `p` touches an Occupied cell (strictly closer than radius,
/// or the cell containing `p` itself is Occupied).
inline bool disk_hits_occupied(const OccupancyGrid& g, const Vec2& p, double radius) {
  if (g.at(g.cell_of(p.x(), p.y())) == CellState::Occupied) return true;
  const CellIndex lo = g.cell_of(p.x() - radius, p.y() - radius);
  const CellIndex hi = g.cell_of(p.x() + radius, p.y() + radius);
  for (int y = std::max(lo.y, 0); y <= std::min(hi.y, g.height() - 1); ++y)
    for (int x = std::max(lo.x, 0); x <= std::min(hi.x, g.width() - 1); ++x)
      if (g.at({x, y}) == CellState::Occupied && distance_to_cell(g, p, {x, y}) < radius) return true;
  return false;
}

/// Marks every in-bounds cell whose square overlaps the box footprint as Occupied.
inline void mark_box_occupied(OccupancyGrid& g, const Aabb& box) {
  const CellIndex lo = g.cell_of(box.min.x(), box.min.y());
  const CellIndex hi = g.cell_of(box.max.x(), box.max.y());
  for (int y = std::max(lo.y, 0); y <= std::min(hi.y, g.height() - 1); ++y)
    for (int x = std::max(lo.x, 0); x <= std::min(hi.x, g.width() - 1); ++x) g.set({x, y}, CellState::Occupied);
}

}  // namespace quadmanip
