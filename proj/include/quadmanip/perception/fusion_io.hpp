#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "quadmanip/core/yaml_util.hpp"
#include "quadmanip/perception/fusion.hpp"

namespace quadmanip {

/// Detection stream document:
///
///   detections:
///     - label: cup
///       timestamp: 0.0
///       descriptor: [0.1, ...]
///       points: [[x, y, z], ...]
inline std::vector<Detection> parse_detection_stream(const YAML::Node& root) {
  std::vector<Detection> out;
  const YAML::Node list = yaml::require(root, "detections");
  if (!list.IsSequence()) throw ParseError(yaml::where(list, "detections") + " must be a list", yaml::line_of(list));
  for (const auto& rec : list) {
    Detection d;
    d.label = yaml::as_string(yaml::require(rec, "label"), "label");
    d.descriptor = yaml::as_doubles(yaml::require(rec, "descriptor"), "descriptor");
    if (auto ts = yaml::optional(rec, "timestamp")) d.timestamp = yaml::as_double(*ts, "timestamp");
    const YAML::Node pts = yaml::require(rec, "points");
    if (!pts.IsSequence() || pts.size() == 0)
      throw ParseError(yaml::where(pts, "points") + " must be a non-empty list", yaml::line_of(pts));
    for (const auto& p : pts) d.points.push_back(yaml::as_vec3(p, "points"));
    out.push_back(std::move(d));
  }
  return out;
}

inline std::vector<Detection> load_detection_stream(const std::filesystem::path& path) {
  return parse_detection_stream(yaml::load_file(path));
}

inline std::string format_detection_stream(const std::vector<Detection>& dets) {
  std::string s = "detections:\n";
  for (const Detection& d : dets) {
    s += "  - label: " + yaml::quoted(d.label) + "\n";
    s += "    timestamp: " + yaml::num(d.timestamp) + "\n";
    s += "    descriptor: [";
    for (std::size_t k = 0; k < d.descriptor.size(); ++k) s += (k ? ", " : "") + yaml::num(d.descriptor[k]);
    s += "]\n    points:\n";
    for (const Vec3& p : d.points) s += "      - " + yaml::vec(p) + "\n";
  }
  return s;
}

/// Graph snapshot: the summary schema plus point and observation counts.
inline nlohmann::json graph_snapshot(const InstanceGraph& g) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const GraphSummaryEntry& e : g.summary()) {
    nodes.push_back({{"id", e.id},
                     {"label", e.label},
                     {"center", {e.center.x(), e.center.y(), e.center.z()}},
                     {"extents", {e.extents.x(), e.extents.y(), e.extents.z()}},
                     {"point_count", e.point_count},
                     {"observation_count", e.observation_count}});
  }
  return {{"descriptor_dim", g.dimension()},
          {"tau_sem", g.config().tau_sem},
          {"tau_geo", g.config().tau_geo},
          {"epsilon", g.config().epsilon},
          {"nodes", nodes}};
}

}  // namespace quadmanip
