#pragma once

/**
 * @brief Scenario bundles: scene layout, monitors, and the scripted fixtures
 * that stand in for the planning and grounding models.
 *
 * A bundle is one directory holding scenario.yaml, plan.yaml, grounding.yaml
 * and optionally detections.yaml. The scenario schema is documented in the
 * README; every cross-reference is checked at load time and reported with
 * the offending line.
 */

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "quadmanip/core/yaml_util.hpp"
#include "quadmanip/grounding/grounding.hpp"
#include "quadmanip/perception/fusion_io.hpp"
#include "quadmanip/planning/monitors.hpp"

namespace quadmanip {

enum class ObjectType { Rigid, Container, Articulated, Draggable };

inline std::string_view to_string(ObjectType t) {
  switch (t) {
    case ObjectType::Rigid: return "rigid";
    case ObjectType::Container: return "container";
    case ObjectType::Articulated: return "articulated";
    case ObjectType::Draggable: return "draggable";
  }
  return "rigid";
}

inline std::optional<ObjectType> object_type_from(std::string_view s) {
  for (ObjectType t : {ObjectType::Rigid, ObjectType::Container, ObjectType::Articulated, ObjectType::Draggable})
    if (to_string(t) == s) return t;
  return std::nullopt;
}

enum class JointType { Prismatic, Revolute };

/// 1-DoF articulation. A prismatic joint slides the whole object body along
/// `axis` (object frame); a revolute joint only changes the reported value.
struct JointSpec {
  JointType type = JointType::Prismatic;
  Vec3 axis = Vec3::UnitX();
  double lower = 0.0;
  double upper = 0.0;
  double value = 0.0;
};

struct ObjectSpec {
  std::string id;
  std::string label;
  ObjectType type = ObjectType::Rigid;
  Vec3 position = Vec3::Zero();  // box center, world frame
  double yaw = 0.0;
  Vec3 size = Vec3::Ones();
  std::vector<Vec3> attach_points;  // object frame
  std::optional<Vec3> dominant_axis;   // object frame, not necessarily unit
  std::optional<Vec3> surface_normal;  // object frame, not necessarily unit
  std::optional<std::string> attach_to;  // rests on / inside another object and moves with it
  std::optional<JointSpec> joint;
};

struct TerrainPatch {
  Vec2 min = Vec2::Zero();
  Vec2 max = Vec2::Zero();
  double height = 0.0;
};

/// Piecewise-constant heightmap: zero everywhere except axis-aligned patches.
/// Later patches overwrite earlier ones where they overlap.
struct TerrainSpec {
  double resolution = 0.05;
  std::vector<TerrainPatch> patches;
};

class Heightmap {
 public:
  Heightmap() = default;
  explicit Heightmap(const TerrainSpec& spec) : res_(spec.resolution) {
    if (spec.patches.empty()) return;
    Vec2 lo = spec.patches.front().min, hi = spec.patches.front().max;
    for (const auto& p : spec.patches) {
      lo = lo.cwiseMin(p.min);
      hi = hi.cwiseMax(p.max);
    }
    origin_ = lo;
    w_ = std::max(1, static_cast<int>(std::ceil((hi.x() - lo.x()) / res_ - 1e-9)));
    h_ = std::max(1, static_cast<int>(std::ceil((hi.y() - lo.y()) / res_ - 1e-9)));
    z_.assign(static_cast<std::size_t>(w_) * h_, 0.0);
    for (const auto& p : spec.patches) {
      for (int y = 0; y < h_; ++y) {
        for (int x = 0; x < w_; ++x) {
          const double cx = origin_.x() + (x + 0.5) * res_, cy = origin_.y() + (y + 0.5) * res_;
          if (cx >= p.min.x() && cx < p.max.x() && cy >= p.min.y() && cy < p.max.y())
            z_[static_cast<std::size_t>(y) * w_ + x] = p.height;
        }
      }
    }
  }

  double height_at(double x, double y) const {
    if (z_.empty()) return 0.0;
    const int cx = static_cast<int>(std::floor((x - origin_.x()) / res_));
    const int cy = static_cast<int>(std::floor((y - origin_.y()) / res_));
    if (cx < 0 || cy < 0 || cx >= w_ || cy >= h_) return 0.0;
    return z_[static_cast<std::size_t>(cy) * w_ + cx];
  }

  bool flat() const {
    return std::all_of(z_.begin(), z_.end(), [](double v) { return v == 0.0; });
  }
  double resolution() const { return res_; }
  const Vec2& origin() const { return origin_; }
  int width() const { return w_; }
  int height() const { return h_; }

 private:
  double res_ = 0.05;
  Vec2 origin_ = Vec2::Zero();
  int w_ = 0, h_ = 0;
  std::vector<double> z_;
};

struct Scenario {
  std::string id;
  std::string instruction;
  double horizon = 60.0;
  std::uint64_t seed = 0;
  TerrainSpec terrain;
  std::vector<Aabb> obstacles;
  Vec2 robot_start = Vec2::Zero();
  double robot_yaw = 0.0;
  std::vector<ObjectSpec> objects;
  std::vector<SubtaskMonitor> monitors;

  const ObjectSpec* find_object(const std::string& oid) const {
    const auto it = std::find_if(objects.begin(), objects.end(), [&](const ObjectSpec& o) { return o.id == oid; });
    return it == objects.end() ? nullptr : &*it;
  }
};

// ---------------------------------------------------------------------------

namespace detail {

inline Vec3 positive_size(const YAML::Node& n) {
  const Vec3 s = yaml::as_vec3(n, "size");
  if (!(s.minCoeff() > 0.0)) throw ValidationError(yaml::where(n, "size") + " must be positive", yaml::line_of(n));
  return s;
}

inline Vec3 nonzero_direction(const YAML::Node& n, const std::string& field) {
  const Vec3 v = yaml::as_vec3(n, field);
  if (!(v.norm() > 1e-9)) throw ValidationError(yaml::where(n, field) + " must be nonzero", yaml::line_of(n));
  return v;
}

inline ObjectSpec parse_object(const YAML::Node& n) {
  yaml::check_keys(n, {"id", "label", "type", "position", "yaw", "size", "attach_points", "dominant_axis",
                       "surface_normal", "attach_to", "joint"},
                   "objects");
  ObjectSpec o;
  o.id = yaml::as_string(yaml::require(n, "id"), "id");
  if (o.id.empty()) throw ValidationError(yaml::where(n, "id") + " must not be empty", yaml::line_of(n));
  o.label = o.id;
  if (auto l = yaml::optional(n, "label")) o.label = yaml::as_string(*l, "label");
  if (auto t = yaml::optional(n, "type")) {
    const auto k = object_type_from(yaml::as_string(*t, "type"));
    if (!k) throw ValidationError(yaml::where(*t, "type") + ": unknown object type '" + t->Scalar() + "'", yaml::line_of(*t));
    o.type = *k;
  }
  o.position = yaml::as_vec3(yaml::require(n, "position"), "position");
  if (auto y = yaml::optional(n, "yaw")) o.yaw = yaml::as_double(*y, "yaw");
  o.size = positive_size(yaml::require(n, "size"));
  if (auto ap = yaml::optional(n, "attach_points")) {
    if (!ap->IsSequence()) throw ParseError(yaml::where(*ap, "attach_points") + " must be a list", yaml::line_of(*ap));
    for (const auto& p : *ap) o.attach_points.push_back(yaml::as_vec3(p, "attach_points"));
  } else {
    o.attach_points.push_back(Vec3(0.0, 0.0, o.size.z() / 2));
  }
  if (auto a = yaml::optional(n, "dominant_axis")) o.dominant_axis = nonzero_direction(*a, "dominant_axis");
  if (auto s = yaml::optional(n, "surface_normal")) o.surface_normal = nonzero_direction(*s, "surface_normal");
  if (auto a = yaml::optional(n, "attach_to")) o.attach_to = yaml::as_string(*a, "attach_to");
  if (auto j = yaml::optional(n, "joint")) {
    yaml::check_keys(*j, {"type", "axis", "limits", "value"}, "joint");
    JointSpec js;
    if (auto t = yaml::optional(*j, "type")) {
      const std::string s = yaml::as_string(*t, "type");
      if (s == "prismatic") js.type = JointType::Prismatic;
      else if (s == "revolute") js.type = JointType::Revolute;
      else throw ValidationError(yaml::where(*t, "joint.type") + ": expected prismatic or revolute", yaml::line_of(*t));
    }
    if (auto a = yaml::optional(*j, "axis")) js.axis = nonzero_direction(*a, "joint.axis");
    const YAML::Node lim = yaml::require(*j, "limits");
    const auto v = yaml::as_doubles(lim, "joint.limits");
    if (v.size() != 2 || !(v[0] < v[1]))
      throw ValidationError(yaml::where(lim, "joint.limits") + " must be [lower, upper] with lower < upper", yaml::line_of(lim));
    js.lower = v[0];
    js.upper = v[1];
    js.value = js.lower;
    if (auto val = yaml::optional(*j, "value")) {
      js.value = yaml::as_double(*val, "joint.value");
      if (js.value < js.lower || js.value > js.upper)
        throw ValidationError(yaml::where(*val, "joint.value") + " is outside the joint limits", yaml::line_of(*val));
    }
    o.joint = js;
  }
  if ((o.type == ObjectType::Articulated) != o.joint.has_value())
    throw ValidationError(yaml::where(n, "joint") + ": articulated objects need a joint and only they may have one",
                          yaml::line_of(n));
  return o;
}

}  // namespace detail

/// Parses and cross-checks a scenario document.
inline Scenario parse_scenario(const YAML::Node& root) {
  yaml::check_keys(root, {"id", "instruction", "horizon", "seed", "terrain", "obstacles", "robot_start", "objects", "monitors"},
                   "scenario");
  Scenario s;
  s.id = yaml::as_string(yaml::require(root, "id"), "id");
  s.instruction = trimmed(yaml::as_string(yaml::require(root, "instruction"), "instruction"));
  const YAML::Node hz = yaml::require(root, "horizon");
  s.horizon = yaml::as_double(hz, "horizon");
  if (!(s.horizon > 0.0)) throw ValidationError(yaml::where(hz, "horizon") + " must be positive", yaml::line_of(hz));
  if (auto sd = yaml::optional(root, "seed")) {
    const long long v = yaml::as_int(*sd, "seed");
    if (v < 0) throw ValidationError(yaml::where(*sd, "seed") + " must be non-negative", yaml::line_of(*sd));
    s.seed = static_cast<std::uint64_t>(v);
  }

  if (auto t = yaml::optional(root, "terrain")) {
    yaml::check_keys(*t, {"resolution", "patches"}, "terrain");
    if (auto r = yaml::optional(*t, "resolution")) {
      s.terrain.resolution = yaml::as_double(*r, "terrain.resolution");
      if (!(s.terrain.resolution > 0.0))
        throw ValidationError(yaml::where(*r, "terrain.resolution") + " must be positive", yaml::line_of(*r));
    }
    if (auto ps = yaml::optional(*t, "patches")) {
      for (const auto& p : *ps) {
        TerrainPatch tp{yaml::as_vec2(yaml::require(p, "min"), "min"), yaml::as_vec2(yaml::require(p, "max"), "max"),
                        yaml::as_double(yaml::require(p, "height"), "height")};
        if (!(tp.min.array() < tp.max.array()).all())
          throw ValidationError(yaml::where(p, "patches") + ": min must be below max", yaml::line_of(p));
        s.terrain.patches.push_back(tp);
      }
    }
  }

  if (auto obs = yaml::optional(root, "obstacles")) {
    for (const auto& o : *obs) {
      const Aabb b{yaml::as_vec3(yaml::require(o, "min"), "min"), yaml::as_vec3(yaml::require(o, "max"), "max")};
      if (!(b.min.array() < b.max.array()).all())
        throw ValidationError(yaml::where(o, "obstacles") + ": min must be below max", yaml::line_of(o));
      s.obstacles.push_back(b);
    }
  }

  const YAML::Node rs = yaml::require(root, "robot_start");
  yaml::check_keys(rs, {"position", "yaw"}, "robot_start");
  s.robot_start = yaml::as_vec2(yaml::require(rs, "position"), "robot_start.position");
  if (auto y = yaml::optional(rs, "yaw")) s.robot_yaw = yaml::as_double(*y, "robot_start.yaw");

  std::map<std::string, const YAML::Node> object_nodes;
  if (auto objs = yaml::optional(root, "objects")) {
    if (!objs->IsSequence()) throw ParseError(yaml::where(*objs, "objects") + " must be a list", yaml::line_of(*objs));
    for (const auto& n : *objs) {
      ObjectSpec o = detail::parse_object(n);
      if (!object_nodes.emplace(o.id, n).second)
        throw ValidationError(yaml::where(n, "id") + ": duplicate object id '" + o.id + "'", yaml::line_of(n));
      s.objects.push_back(std::move(o));
    }
  }
  for (const ObjectSpec& o : s.objects) {
    if (!o.attach_to) continue;
    const YAML::Node n = object_nodes.at(o.id)["attach_to"];
    const ObjectSpec* target = s.find_object(*o.attach_to);
    if (target == nullptr || target->id == o.id)
      throw ValidationError(yaml::where(n, "attach_to") + ": unknown attach target '" + *o.attach_to + "'", yaml::line_of(n));
    for (const ObjectSpec* p = target; p != nullptr && p->attach_to; p = s.find_object(*p->attach_to))
      if (*p->attach_to == o.id)
        throw ValidationError(yaml::where(n, "attach_to") + ": attachment cycle through '" + o.id + "'", yaml::line_of(n));
  }

  if (auto ms = yaml::optional(root, "monitors")) {
    s.monitors = parse_monitors(*ms);
    std::set<std::string> names;
    for (std::size_t i = 0; i < s.monitors.size(); ++i) {
      const YAML::Node n = (*ms)[i];
      const SubtaskMonitor& m = s.monitors[i];
      if (!names.insert(m.name).second)
        throw ValidationError(yaml::where(n, "name") + ": duplicate monitor '" + m.name + "'", yaml::line_of(n));
      for (const auto& [field, oid] : referenced_objects(m.condition)) {
        const ObjectSpec* o = s.find_object(oid);
        const bool needs_joint = field == "articulation";
        if (o == nullptr || (needs_joint && !o->joint))
          throw ValidationError(yaml::where(n, "condition." + field) + ": unknown " +
                                    (needs_joint ? "articulation" : "object") + " '" + oid + "'",
                                yaml::line_of(n));
      }
    }
  }
  return s;
}

inline Scenario load_scenario(const std::filesystem::path& path) { return parse_scenario(yaml::load_file(path)); }

inline std::string emit_scenario(const Scenario& s) {
  using yaml::num, yaml::quoted, yaml::vec;
  const auto vec2 = [](const Vec2& v) { return fmt::format("[{}, {}]", num(v.x()), num(v.y())); };
  std::string out;
  out += "id: " + quoted(s.id) + "\n";
  out += "instruction: " + quoted(s.instruction) + "\n";
  out += "horizon: " + num(s.horizon) + "\n";
  out += fmt::format("seed: {}\n", s.seed);
  out += "terrain:\n  resolution: " + num(s.terrain.resolution) + "\n  patches:";
  if (s.terrain.patches.empty()) out += " []";
  out += "\n";
  for (const auto& p : s.terrain.patches)
    out += "    - {min: " + vec2(p.min) + ", max: " + vec2(p.max) + ", height: " + num(p.height) + "}\n";
  out += "obstacles:";
  if (s.obstacles.empty()) out += " []";
  out += "\n";
  for (const auto& b : s.obstacles) out += "  - {min: " + vec(b.min) + ", max: " + vec(b.max) + "}\n";
  out += "robot_start: {position: " + vec2(s.robot_start) + ", yaw: " + num(s.robot_yaw) + "}\n";
  out += "objects:";
  if (s.objects.empty()) out += " []";
  out += "\n";
  for (const ObjectSpec& o : s.objects) {
    out += "  - id: " + quoted(o.id) + "\n";
    out += "    label: " + quoted(o.label) + "\n";
    out += "    type: " + std::string(to_string(o.type)) + "\n";
    out += "    position: " + vec(o.position) + "\n";
    out += "    yaw: " + num(o.yaw) + "\n";
    out += "    size: " + vec(o.size) + "\n";
    out += "    attach_points: [";
    for (std::size_t i = 0; i < o.attach_points.size(); ++i) out += (i ? ", " : "") + vec(o.attach_points[i]);
    out += "]\n";
    if (o.dominant_axis) out += "    dominant_axis: " + vec(*o.dominant_axis) + "\n";
    if (o.surface_normal) out += "    surface_normal: " + vec(*o.surface_normal) + "\n";
    if (o.attach_to) out += "    attach_to: " + quoted(*o.attach_to) + "\n";
    if (o.joint) {
      const JointSpec& j = *o.joint;
      out += fmt::format("    joint: {{type: {}, axis: {}, limits: [{}, {}], value: {}}}\n",
                         j.type == JointType::Prismatic ? "prismatic" : "revolute", vec(j.axis), num(j.lower),
                         num(j.upper), num(j.value));
    }
  }
  out += "monitors:";
  if (s.monitors.empty()) out += " []";
  out += "\n";
  for (const SubtaskMonitor& m : s.monitors) {
    out += "  - name: " + quoted(m.name) + "\n";
    out += "    action: " + std::string(to_string(m.kind)) + "\n";
    out += "    condition: " + emit_condition(m.condition) + "\n";
  }
  return out;
}

inline void save_scenario(const Scenario& s, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  f << emit_scenario(s);
  if (!f) throw IoError("write failed: " + path.string());
}

// ---------------------------------------------------------------------------

struct ScenarioBundle {
  std::filesystem::path dir;
  Scenario scenario;
  ScriptedPlanner planner;
  ScriptedGroundingOracle grounding;
  std::vector<Detection> detections;  // empty: synthesized from ground truth
};

namespace detail {

/// Plan steps may only name labels that exist in the scene.
inline void check_plan_labels(const YAML::Node& root, const Scenario& s) {
  std::set<std::string> labels;
  for (const ObjectSpec& o : s.objects) labels.insert(o.label);
  for (const auto& p : root["plans"]) {
    for (const auto& a : p["actions"]) {
      for (const char* key : {"target", "waypoint_at"}) {
        const YAML::Node n = a[key];
        if (n && !labels.count(n.Scalar()))
          throw ValidationError(yaml::where(n, key) + ": unknown object label '" + n.Scalar() + "'", yaml::line_of(n));
      }
    }
  }
}

}  // namespace detail

/// Loads and cross-checks a bundle directory. `grounding_file` selects an
/// alternative grounding fixture inside the directory.
inline ScenarioBundle load_bundle(const std::filesystem::path& dir, const std::string& grounding_file = "grounding.yaml") {
  if (!std::filesystem::is_directory(dir)) throw IoError("scenario bundle not found: " + dir.string());
  const auto with_file = [&](const std::filesystem::path& p, auto&& fn) {
    try {
      return fn();
    } catch (const ParseError& e) {
      throw ParseError(p.filename().string() + ": " + e.what(), e.line());
    } catch (const ValidationError& e) {
      throw ValidationError(p.filename().string() + ": " + e.what(), e.line());
    }
  };
  ScenarioBundle b;
  b.dir = dir;
  b.scenario = with_file(dir / "scenario.yaml", [&] { return load_scenario(dir / "scenario.yaml"); });
  const YAML::Node plan_root = with_file(dir / "plan.yaml", [&] { return yaml::load_file(dir / "plan.yaml"); });
  b.planner = with_file(dir / "plan.yaml", [&] {
    detail::check_plan_labels(plan_root, b.scenario);
    return parse_plan_fixture(plan_root);
  });
  const auto& plans = b.planner.plans();
  if (std::none_of(plans.begin(), plans.end(), [&](const ScriptedPlan& p) { return p.instruction == b.scenario.instruction; }))
    throw ValidationError("plan.yaml: 'instruction': no plan for the scenario instruction", 0);
  b.grounding = with_file(dir / grounding_file, [&] { return load_grounding_fixture(dir / grounding_file); });
  if (std::filesystem::exists(dir / "detections.yaml"))
    b.detections = with_file(dir / "detections.yaml", [&] { return load_detection_stream(dir / "detections.yaml"); });
  return b;
}

}  // namespace quadmanip
