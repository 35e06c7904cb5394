#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "quadmanip/geometry/geometry.hpp"

namespace quadmanip {

/// Squared distance with a fixed evaluation order. Every radius test in the
/// library goes through this so accelerated and brute-force answers agree bit for bit.
inline double squared_distance(const Vec3& a, const Vec3& b) {
  const double dx = a.x() - b.x();
  const double dy = a.y() - b.y();
  const double dz = a.z() - b.z();
  return dx * dx + dy * dy + dz * dz;
}

/// Static 3D k-d tree over a point set (copied in). Leaves hold up to kLeafSize points.
class KdTree {
 public:
  static constexpr std::size_t kLeafSize = 8;

  KdTree() = default;

  explicit KdTree(std::span<const Vec3> points) : points_(points.begin(), points.end()) {
    index_.resize(points_.size());
    std::iota(index_.begin(), index_.end(), std::uint32_t{0});
    if (!points_.empty()) {
      nodes_.reserve(2 * points_.size() / kLeafSize + 2);
      build(0, index_.size());
    }
  }

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }

  /// True when some stored point q has squared_distance(p, q) < radius^2.
  bool any_within(const Vec3& p, double radius) const {
    if (nodes_.empty()) return false;
    return any_within(0, p, radius * radius);
  }

  /// Index (into the original span) of the nearest point; ties go to the lower index.
  std::size_t nearest(const Vec3& p) const {
    if (nodes_.empty()) throw UsageError("nearest() on an empty k-d tree");
    std::size_t best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    nearest(0, p, best, best_d2);
    return best;
  }

 private:
  struct Node {
    std::uint32_t begin = 0, end = 0;  // leaf range into index_
    std::int32_t left = -1, right = -1;
    int axis = -1;  // -1 for leaves
    double split = 0.0;
  };

  std::int32_t build(std::size_t begin, std::size_t end) {
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back({static_cast<std::uint32_t>(begin), static_cast<std::uint32_t>(end)});
    if (end - begin <= kLeafSize) return id;

    Aabb box{points_[index_[begin]], points_[index_[begin]]};
    for (std::size_t i = begin; i < end; ++i) box.expand(points_[index_[i]]);
    int axis = 0;
    box.extents().maxCoeff(&axis);
    if (box.extents()[axis] == 0.0) return id;  // all coincident: keep as leaf

    const std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(index_.begin() + begin, index_.begin() + mid, index_.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) { return points_[a][axis] < points_[b][axis]; });
    const double split = points_[index_[mid]][axis];
    // Invariant: left holds coordinates <= split, right holds >= split.
    const std::int32_t l = build(begin, mid);
    const std::int32_t r = build(mid, end);
    nodes_[id].axis = axis;
    nodes_[id].split = split;
    nodes_[id].left = l;
    nodes_[id].right = r;
    return id;
  }

  bool any_within(std::int32_t id, const Vec3& p, double r2) const {
    const Node& n = nodes_[id];
    if (n.axis < 0) {
      for (std::uint32_t i = n.begin; i < n.end; ++i)
        if (squared_distance(p, points_[index_[i]]) < r2) return true;
      return false;
    }
    const double d = p[n.axis] - n.split;
    const std::int32_t near = d <= 0.0 ? n.left : n.right;
    const std::int32_t far = d <= 0.0 ? n.right : n.left;
    if (any_within(near, p, r2)) return true;
    return d * d < r2 && any_within(far, p, r2);
  }

  void nearest(std::int32_t id, const Vec3& p, std::size_t& best, double& best_d2) const {
    const Node& n = nodes_[id];
    if (n.axis < 0) {
      for (std::uint32_t i = n.begin; i < n.end; ++i) {
        const double d2 = squared_distance(p, points_[index_[i]]);
        if (d2 < best_d2 || (d2 == best_d2 && index_[i] < best)) {
          best_d2 = d2;
          best = index_[i];
        }
      }
      return;
    }
    const double d = p[n.axis] - n.split;
    const std::int32_t near = d <= 0.0 ? n.left : n.right;
    const std::int32_t far = d <= 0.0 ? n.right : n.left;
    nearest(near, p, best, best_d2);
    if (d * d <= best_d2) nearest(far, p, best, best_d2);
  }

  std::vector<Vec3> points_;
  std::vector<std::uint32_t> index_;
  std::vector<Node> nodes_;
};

}  // namespace quadmanip
