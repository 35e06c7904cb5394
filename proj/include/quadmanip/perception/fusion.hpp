#pragma once

/**
 * @brief Instance-level semantic graph built by fusing per-frame detections.
 *
 * Two observations are the same object when their descriptors' cosine
 * similarity exceeds tau_sem AND more than tau_geo of the incoming points
 * have a neighbour in the existing node within epsilon. Both comparisons
 * are strict.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "quadmanip/core/errors.hpp"
#include "quadmanip/core/rng.hpp"
#include "quadmanip/geometry/geometry.hpp"
#include "quadmanip/geometry/kdtree.hpp"

namespace quadmanip {

using Descriptor = std::vector<double>;

struct Detection {
  std::string label;
  Descriptor descriptor;
  std::vector<Vec3> points;  // world frame
  double timestamp = 0.0;
};

struct InstanceNode {
  int id = 0;
  std::string label;
  Descriptor descriptor;  // unit norm
  std::vector<Vec3> points;
  Aabb bbox;
  int observation_count = 1;
};

struct FusionConfig {
  double tau_sem = 0.8;
  double tau_geo = 0.8;
  double epsilon = 0.05;           // meters
  double downsample_voxel = 0.02;  // meters; <= 0 disables downsampling

  void validate() const {
    if (!(tau_sem > 0.0 && tau_sem <= 1.0) || !(tau_geo > 0.0 && tau_geo <= 1.0))
      throw UsageError("fusion thresholds must lie in (0, 1]");
    if (!(epsilon > 0.0)) throw UsageError("fusion epsilon must be positive");
  }
};

inline double descriptor_norm(std::span<const double> f) {
  double s = 0.0;
  for (const double v : f) s += v * v;
  return std::sqrt(s);
}

/// Cosine similarity in [-1, 1].
inline double semantic_similarity(std::span<const double> fi, std::span<const double> fj) {
  if (fi.size() != fj.size()) throw UsageError("descriptor dimensions differ");
  const double ni = descriptor_norm(fi), nj = descriptor_norm(fj);
  if (!(ni > 0.0) || !(nj > 0.0)) throw UsageError("descriptor has zero norm");
  double dot = 0.0;
  for (std::size_t k = 0; k < fi.size(); ++k) dot += fi[k] * fj[k];
  return std::clamp(dot / (ni * nj), -1.0, 1.0);
}

/// Fraction of `pi` whose nearest neighbour in the tree lies strictly within epsilon.
inline double geometric_similarity(std::span<const Vec3> pi, const KdTree& pj, double epsilon) {
  if (pi.empty() || pj.empty()) throw UsageError("geometric similarity needs non-empty point sets");
  std::size_t hits = 0;
  for (const Vec3& p : pi)
    if (pj.any_within(p, epsilon)) ++hits;
  return static_cast<double>(hits) / static_cast<double>(pi.size());
}

/// Not symmetric: measures how much of `pi` is covered by `pj`.
inline double geometric_similarity(std::span<const Vec3> pi, std::span<const Vec3> pj, double epsilon) {
  if (pi.empty() || pj.empty()) throw UsageError("geometric similarity needs non-empty point sets");
  return geometric_similarity(pi, KdTree(pj), epsilon);
}

/// `a` is the incoming observation (detection or node), `b` the existing node.
template <class Candidate>
bool should_merge(const Candidate& a, const InstanceNode& b, const FusionConfig& cfg) {
  if (!(semantic_similarity(a.descriptor, b.descriptor) > cfg.tau_sem)) return false;
  return geometric_similarity(a.points, b.points, cfg.epsilon) > cfg.tau_geo;
}

/// Centroid per occupied voxel, ordered by voxel key.
inline std::vector<Vec3> voxel_downsample(std::span<const Vec3> points, double voxel) {
  if (!(voxel > 0.0)) return {points.begin(), points.end()};
  using Key = std::array<std::int64_t, 3>;
  std::map<Key, std::pair<Vec3, int>> cells;
  for (const Vec3& p : points) {
    const Key k{static_cast<std::int64_t>(std::floor(p.x() / voxel)),
                static_cast<std::int64_t>(std::floor(p.y() / voxel)),
                static_cast<std::int64_t>(std::floor(p.z() / voxel))};
    auto& [sum, n] = cells.try_emplace(k, Vec3::Zero(), 0).first->second;
    sum += p;
    ++n;
  }
  std::vector<Vec3> out;
  out.reserve(cells.size());
  for (const auto& [k, acc] : cells) out.push_back(acc.first / acc.second);
  return out;
}

inline Aabb bounding_box(std::span<const Vec3> points) {
  if (points.empty()) throw UsageError("bounding box of an empty point set");
  Aabb b{points.front(), points.front()};
  for (const Vec3& p : points) b.expand(p);
  return b;
}

struct IngestResult {
  int node_id = -1;
  bool created = false;
};

struct GraphSummaryEntry {
  int id = 0;
  std::string label;
  Vec3 center = Vec3::Zero();
  Vec3 extents = Vec3::Zero();
  std::size_t point_count = 0;
  int observation_count = 0;
};

class InstanceGraph {
 public:
  explicit InstanceGraph(std::size_t descriptor_dim, FusionConfig cfg = {})
      : dim_(descriptor_dim), cfg_(cfg) {
    if (dim_ == 0) throw UsageError("descriptor dimension must be positive");
    cfg_.validate();
  }

  std::size_t dimension() const { return dim_; }
  const FusionConfig& config() const { return cfg_; }
  const std::vector<InstanceNode>& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }

  const InstanceNode* find(int id) const {
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), id,
                               [](const InstanceNode& n, int v) { return n.id < v; });
    return it != nodes_.end() && it->id == id ? &*it : nullptr;
  }

  /// Fuses the detection into the best matching node or starts a new one.
  IngestResult ingest(const Detection& det) {
    validate(det);
    Detection unit = det;
    normalize(unit.descriptor);

    // Among merge candidates pick the highest semantic similarity; ties keep the lowest id.
    std::optional<std::size_t> best;
    double best_sem = -2.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const InstanceNode& node = nodes_[i];
      const double sem = semantic_similarity(unit.descriptor, node.descriptor);
      if (!(sem > cfg_.tau_sem)) continue;
      if (!(geometric_similarity(unit.points, trees_[i], cfg_.epsilon) > cfg_.tau_geo)) continue;
      if (sem > best_sem) {
        best_sem = sem;
        best = i;
      }
    }

    if (!best) {
      InstanceNode node;
      node.id = next_id_++;
      node.label = unit.label;
      node.descriptor = std::move(unit.descriptor);
      node.bbox = bounding_box(unit.points);
      node.points = voxel_downsample(unit.points, cfg_.downsample_voxel);
      node.observation_count = 1;
      nodes_.push_back(std::move(node));
      trees_.emplace_back(nodes_.back().points);
      return {nodes_.back().id, true};
    }

    InstanceNode& node = nodes_[*best];
    const double n = node.observation_count;
    for (std::size_t k = 0; k < dim_; ++k)
      node.descriptor[k] = (n * node.descriptor[k] + unit.descriptor[k]) / (n + 1.0);
    normalize(node.descriptor);
    ++node.observation_count;

    for (const Vec3& p : unit.points) node.bbox.expand(p);
    std::vector<Vec3> merged = std::move(node.points);
    merged.insert(merged.end(), unit.points.begin(), unit.points.end());
    node.points = voxel_downsample(merged, cfg_.downsample_voxel);
    trees_[*best] = KdTree(node.points);
    return {node.id, false};
  }

  /// One entry per node, ordered by id.
  std::vector<GraphSummaryEntry> summary() const {
    std::vector<GraphSummaryEntry> out;
    out.reserve(nodes_.size());
    for (const InstanceNode& n : nodes_)
      out.push_back({n.id, n.label, n.bbox.center(), n.bbox.extents(), n.points.size(), n.observation_count});
    return out;
  }

 private:
  void validate(const Detection& det) const {
    if (det.descriptor.size() != dim_) throw UsageError("detection descriptor dimension mismatch");
    if (!(descriptor_norm(det.descriptor) > 0.0)) throw UsageError("detection descriptor has zero norm");
    if (det.points.empty()) throw UsageError("detection has no points");
    for (const Vec3& p : det.points)
      if (!is_finite(p)) throw UsageError("detection point is not finite");
  }

  static void normalize(Descriptor& f) {
    const double n = descriptor_norm(f);
    for (double& v : f) v /= n;
  }

  std::size_t dim_;
  FusionConfig cfg_;
  std::vector<InstanceNode> nodes_;  // ascending id
  std::vector<KdTree> trees_;        // parallel to nodes_
  int next_id_ = 0;
};

inline IngestResult ingest_detection(InstanceGraph& g, const Detection& det) { return g.ingest(det); }

inline std::vector<GraphSummaryEntry> graph_summary(const InstanceGraph& g) { return g.summary(); }

/// Deterministic pseudo-descriptor for a label, for scripted perception
/// where no feature extractor runs. Distinct labels are near-orthogonal.
inline Descriptor label_descriptor(const std::string& label, std::size_t dim) {
  SeededRng rng(fnv1a(label));
  Descriptor f(dim);
  for (double& v : f) v = rng.normal();
  const double n = descriptor_norm(f);
  for (double& v : f) v /= n;
  return f;
}

}  // namespace quadmanip
