#pragma once

#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>

#include <fmt/format.h>

#include "quadmanip/core/yaml_util.hpp"
#include "quadmanip/grounding/camera.hpp"
#include "quadmanip/grounding/orientation.hpp"

namespace quadmanip {

/// Contact pixel plus optional constraints, directions in the robot base frame.
struct GroundingResult {
  Vec2 pixel = Vec2::Zero();
  std::optional<Vec3> dominant_axis;
  std::optional<Vec3> surface_normal;
};

struct GroundingQuery {
  std::string scenario_id;
  int action_index = 0;
  std::string description;
  const CameraModel* camera = nullptr;
  const DepthImage* depth = nullptr;
  Pose base_in_world;
};

/// Stand-in for a pixel-grounding model. nullopt means the model produced nothing.
class GroundingOracle {
 public:
  virtual ~GroundingOracle() = default;
  virtual std::optional<GroundingResult> ground(const GroundingQuery& query) const = 0;
};

/// Default approach: forward and down, 45 degrees.
inline Vec3 default_approach_direction() { return Vec3(1.0, 0.0, -1.0).normalized(); }

/// End-effector target in the base frame for one action.
inline Pose ground_action(const GroundingOracle& oracle, const GroundingQuery& query,
                          const Vec3& default_approach = default_approach_direction()) {
  if (query.camera == nullptr || query.depth == nullptr) throw UsageError("grounding query needs camera and depth");
  const auto result = oracle.ground(query);
  if (!result) throw OracleFailure(fmt::format("no grounding for action {}", query.action_index));
  if (!query.camera->in_bounds(result->pixel))
    throw OracleFailure(fmt::format("grounded pixel ({}, {}) is outside the image", result->pixel.x(), result->pixel.y()));
  const auto unit = [](const std::optional<Vec3>& v) {
    return !v || (is_finite(*v) && std::abs(v->norm() - 1.0) <= 1e-6);
  };
  if (!unit(result->dominant_axis) || !unit(result->surface_normal))
    throw OracleFailure("grounded directions must be unit vectors");
  const Vec3 p = pixel_to_point(*query.camera, *query.depth, result->pixel);
  const RotationMatrix r = solve_orientation(result->dominant_axis, result->surface_normal, default_approach);
  return {p, r.to_quaternion()};
}

/// One scripted answer. Either a fixed pixel or a world point that is
/// projected through the query camera; directions are given in the world frame.
struct GroundingRecord {
  std::optional<Vec2> pixel;
  std::optional<Vec3> world_point;
  Vec3 offset = Vec3::Zero();
  std::optional<Vec3> axis_world;
  std::optional<Vec3> normal_world;
  bool fail = false;
};

/// Deterministic oracle backed by records keyed by (scenario id, action index).
class ScriptedGroundingOracle final : public GroundingOracle {
 public:
  using Key = std::pair<std::string, int>;

  void add(const std::string& scenario, int action, GroundingRecord rec) { records_[{scenario, action}] = std::move(rec); }
  const std::map<Key, GroundingRecord>& records() const { return records_; }

  /// Shifts every world-point record; used to build perturbed fixtures.
  void set_global_offset(const Vec3& off) { global_offset_ = off; }
  const Vec3& global_offset() const { return global_offset_; }

  std::optional<GroundingResult> ground(const GroundingQuery& q) const override {
    const auto it = records_.find({q.scenario_id, q.action_index});
    if (it == records_.end() || it->second.fail) return std::nullopt;
    const GroundingRecord& rec = it->second;
    const UnitQuaternion to_base = q.base_in_world.orientation.conjugate();
    GroundingResult out;
    if (rec.pixel) {
      out.pixel = *rec.pixel;
    } else {
      if (q.camera == nullptr) return std::nullopt;
      const Vec3 w = *rec.world_point + rec.offset + global_offset_;
      const Vec3 uvd = project_point(*q.camera, q.base_in_world.inverse().apply(w));
      if (!(uvd.z() > 0.0)) return std::nullopt;
      out.pixel = Vec2(uvd.x(), uvd.y());
    }
    if (rec.axis_world) out.dominant_axis = to_base.rotate(rec.axis_world->normalized());
    if (rec.normal_world) out.surface_normal = to_base.rotate(rec.normal_world->normalized());
    return out;
  }

 private:
  std::map<Key, GroundingRecord> records_;
  Vec3 global_offset_ = Vec3::Zero();
};

/// Fixture format:
///   offset: [dx, dy, dz]            # optional, applied to all world points
///   records:
///     - {scenario: id, action: 1, world_point: [x, y, z], axis: [..], normal: [..]}
///     - {scenario: id, action: 2, pixel: [u, v]}
inline ScriptedGroundingOracle parse_grounding_fixture(const YAML::Node& root) {
  ScriptedGroundingOracle oracle;
  if (auto off = yaml::optional(root, "offset")) oracle.set_global_offset(yaml::as_vec3(*off, "offset"));
  const YAML::Node recs = yaml::require(root, "records");
  if (!recs.IsSequence()) throw ParseError(yaml::where(recs, "records") + " must be a list", yaml::line_of(recs));
  for (const YAML::Node& r : recs) {
    GroundingRecord rec;
    const std::string scenario = yaml::as_string(yaml::require(r, "scenario"), "scenario");
    const int action = static_cast<int>(yaml::as_int(yaml::require(r, "action"), "action"));
    if (auto p = yaml::optional(r, "pixel")) rec.pixel = yaml::as_vec2(*p, "pixel");
    if (auto w = yaml::optional(r, "world_point")) rec.world_point = yaml::as_vec3(*w, "world_point");
    if (auto o = yaml::optional(r, "offset")) rec.offset = yaml::as_vec3(*o, "offset");
    if (auto a = yaml::optional(r, "axis")) rec.axis_world = yaml::as_vec3(*a, "axis");
    if (auto n = yaml::optional(r, "normal")) rec.normal_world = yaml::as_vec3(*n, "normal");
    if (auto f = yaml::optional(r, "fail")) rec.fail = yaml::as_bool(*f, "fail");
    if (!rec.fail && rec.pixel.has_value() == rec.world_point.has_value())
      throw ValidationError(yaml::where(r, "records") + " needs exactly one of pixel or world_point", yaml::line_of(r));
    for (const auto* v : {&rec.axis_world, &rec.normal_world})
      if (*v && !((*v)->norm() > 1e-9))
        throw ValidationError(yaml::where(r, "axis/normal") + " must be nonzero", yaml::line_of(r));
    oracle.add(scenario, action, rec);
  }
  return oracle;
}

inline ScriptedGroundingOracle load_grounding_fixture(const std::filesystem::path& path) {
  return parse_grounding_fixture(yaml::load_file(path));
}

}  // namespace quadmanip
