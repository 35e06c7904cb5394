#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "quadmanip/planning/actions.hpp"

namespace quadmanip {

/// Ground-truth snapshot the monitors read each tick.
struct WorldState {
  Pose robot;
  std::map<std::string, Pose> objects;
  std::set<std::string> attached;  // objects currently held by the gripper
  std::map<std::string, double> joints;

  const Pose& object(const std::string& name) const {
    const auto it = objects.find(name);
    if (it == objects.end()) throw UnknownObject("unknown object '" + name + "'");
    return it->second;
  }
  double joint(const std::string& name) const {
    const auto it = joints.find(name);
    if (it == joints.end()) throw UnknownObject("unknown articulation '" + name + "'");
    return it->second;
  }
};

namespace cond {
struct RobotNear { Vec3 point; double radius; };
struct ObjectNear { std::string object; Vec3 point; double radius; };
struct RelativePose { std::string a, b; double max_distance; };
struct Attached { std::string object; };
struct Detached { std::string object; };
struct JointOpen { std::string articulation; double threshold; };
struct JointClosed { std::string articulation; double threshold; };
}  // namespace cond

using GoalCondition = std::variant<cond::RobotNear, cond::ObjectNear, cond::RelativePose, cond::Attached,
                                   cond::Detached, cond::JointOpen, cond::JointClosed>;

inline double planar_distance(const Vec3& a, const Vec3& b) { return std::hypot(a.x() - b.x(), a.y() - b.y()); }

/// "Near" conditions compare planar distance; RelativePose uses full 3D distance.
inline bool holds(const GoalCondition& c, const WorldState& w) {
  return std::visit(
      [&](const auto& k) -> bool {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, cond::RobotNear>) {
          return planar_distance(w.robot.position, k.point) <= k.radius;
        } else if constexpr (std::is_same_v<T, cond::ObjectNear>) {
          return planar_distance(w.object(k.object).position, k.point) <= k.radius;
        } else if constexpr (std::is_same_v<T, cond::RelativePose>) {
          return (w.object(k.a).position - w.object(k.b).position).norm() <= k.max_distance;
        } else if constexpr (std::is_same_v<T, cond::Attached>) {
          w.object(k.object);
          return w.attached.count(k.object) > 0;
        } else if constexpr (std::is_same_v<T, cond::Detached>) {
          w.object(k.object);
          return w.attached.count(k.object) == 0;
        } else if constexpr (std::is_same_v<T, cond::JointOpen>) {
          return w.joint(k.articulation) >= k.threshold;
        } else {
          return w.joint(k.articulation) <= k.threshold;
        }
      },
      c);
}

inline void validate_condition(const GoalCondition& c) {
  const double v = std::visit(
      [](const auto& k) -> double {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, cond::RobotNear> || std::is_same_v<T, cond::ObjectNear>) return k.radius;
        else if constexpr (std::is_same_v<T, cond::RelativePose>) return k.max_distance;
        else if constexpr (std::is_same_v<T, cond::JointOpen> || std::is_same_v<T, cond::JointClosed>) return k.threshold;
        else return 1.0;
      },
      c);
  if (!(v > 0.0)) throw UsageError("goal condition radius/threshold must be positive");
}

struct SubtaskMonitor {
  std::string name;
  ActionKind kind = ActionKind::Navigate;
  GoalCondition condition = cond::RobotNear{Vec3::Zero(), 1.0};
  bool completed = false;
  std::optional<double> completion_time;
};

/// Kind implied by a monitor name such as nav_to_object or pick_object.
inline std::optional<ActionKind> kind_from_monitor_name(std::string_view name) {
  const auto starts = [&](std::string_view p) { return name.substr(0, p.size()) == p; };
  if (starts("nav")) return ActionKind::Navigate;
  if (starts("pick")) return ActionKind::Pick;
  if (starts("place")) return ActionKind::Place;
  if (starts("push") || starts("pull") || starts("open") || starts("close")) return ActionKind::PushPull;
  if (starts("drag")) return ActionKind::Drag;
  return std::nullopt;
}

/// Latches every unmet monitor whose condition holds at time t.
inline void monitor_step(std::vector<SubtaskMonitor>& monitors, const WorldState& world, double t) {
  for (SubtaskMonitor& m : monitors) {
    if (m.completed) continue;
    if (holds(m.condition, world)) {
      m.completed = true;
      m.completion_time = t;
    }
  }
}

struct ActionRate {
  int completed = 0;
  int total = 0;
  double rate() const { return total > 0 ? static_cast<double>(completed) / total : 0.0; }
};

struct MonitorReport {
  std::map<ActionKind, ActionRate> per_action;  // kinds that have at least one monitor
  std::map<ActionKind, int> planned;            // action count per kind in the plan
  bool overall = false;
  std::vector<SubtaskMonitor> monitors;
};

inline MonitorReport report(const std::vector<SubtaskMonitor>& monitors, const TaskPlan& plan) {
  MonitorReport r;
  r.overall = true;
  for (const SubtaskMonitor& m : monitors) {
    auto& e = r.per_action[m.kind];
    ++e.total;
    if (m.completed) ++e.completed;
    r.overall = r.overall && m.completed;
  }
  for (const AtomicAction& a : plan.actions) ++r.planned[a.kind];
  r.monitors = monitors;
  return r;
}

inline nlohmann::json to_json(const MonitorReport& r) {
  nlohmann::json j;
  j["overall"] = r.overall;
  j["actions"] = nlohmann::json::object();
  for (const auto& [k, e] : r.per_action)
    j["actions"][std::string(to_string(k))] = {{"completed", e.completed}, {"total", e.total}, {"rate", e.rate()}};
  j["planned"] = nlohmann::json::object();
  for (const auto& [k, n] : r.planned) j["planned"][std::string(to_string(k))] = n;
  j["monitors"] = nlohmann::json::array();
  for (const auto& m : r.monitors)
    j["monitors"].push_back({{"name", m.name},
                             {"action", std::string(to_string(m.kind))},
                             {"completed", m.completed},
                             {"completion_time", m.completion_time ? nlohmann::json(*m.completion_time) : nlohmann::json()}});
  return j;
}

/// monitors:
///   - name: nav_to_cart
///     action: navigate            # optional, inferred from the name
///     condition: {type: robot_near, point: [x, y, z], radius: 0.5}
inline GoalCondition parse_condition(const YAML::Node& n) {
  const YAML::Node type = yaml::require(n, "type");
  const std::string t = yaml::as_string(type, "type");
  const auto num = [&](const char* k) { return yaml::as_double(yaml::require(n, k), k); };
  const auto str = [&](const char* k) { return yaml::as_string(yaml::require(n, k), k); };
  const auto pt = [&](const char* k) { return yaml::as_vec3(yaml::require(n, k), k); };
  GoalCondition c;
  if (t == "robot_near") c = cond::RobotNear{pt("point"), num("radius")};
  else if (t == "object_near") c = cond::ObjectNear{str("object"), pt("point"), num("radius")};
  else if (t == "relative_pose") c = cond::RelativePose{str("a"), str("b"), num("max_distance")};
  else if (t == "attached") c = cond::Attached{str("object")};
  else if (t == "detached") c = cond::Detached{str("object")};
  else if (t == "joint_open") c = cond::JointOpen{str("articulation"), num("threshold")};
  else if (t == "joint_closed") c = cond::JointClosed{str("articulation"), num("threshold")};
  else throw ValidationError(yaml::where(type, "type") + ": unknown condition '" + t + "'", yaml::line_of(type));
  try {
    validate_condition(c);
  } catch (const UsageError& e) {
    throw ValidationError(yaml::where(n, "condition") + ": " + e.what(), yaml::line_of(n));
  }
  return c;
}

inline std::vector<SubtaskMonitor> parse_monitors(const YAML::Node& list) {
  if (!list.IsSequence()) throw ParseError(yaml::where(list, "monitors") + " must be a list", yaml::line_of(list));
  std::vector<SubtaskMonitor> out;
  for (const YAML::Node& n : list) {
    SubtaskMonitor m;
    m.name = yaml::as_string(yaml::require(n, "name"), "name");
    std::optional<ActionKind> k;
    if (auto a = yaml::optional(n, "action")) {
      k = action_kind_from(yaml::as_string(*a, "action"));
      if (!k) throw ValidationError(yaml::where(*a, "action") + ": unknown action kind", yaml::line_of(*a));
    } else {
      k = kind_from_monitor_name(m.name);
      if (!k) throw ValidationError(yaml::where(n, "action") + ": cannot infer action kind from '" + m.name + "'", yaml::line_of(n));
    }
    m.kind = *k;
    m.condition = parse_condition(yaml::require(n, "condition"));
    out.push_back(std::move(m));
  }
  return out;
}

/// Inverse of parse_condition, as a YAML flow mapping.
inline std::string emit_condition(const GoalCondition& c) {
  return std::visit(
      [](const auto& k) -> std::string {
        using T = std::decay_t<decltype(k)>;
        using yaml::num, yaml::quoted, yaml::vec;
        if constexpr (std::is_same_v<T, cond::RobotNear>)
          return "{type: robot_near, point: " + vec(k.point) + ", radius: " + num(k.radius) + "}";
        else if constexpr (std::is_same_v<T, cond::ObjectNear>)
          return "{type: object_near, object: " + quoted(k.object) + ", point: " + vec(k.point) + ", radius: " + num(k.radius) + "}";
        else if constexpr (std::is_same_v<T, cond::RelativePose>)
          return "{type: relative_pose, a: " + quoted(k.a) + ", b: " + quoted(k.b) + ", max_distance: " + num(k.max_distance) + "}";
        else if constexpr (std::is_same_v<T, cond::Attached>)
          return "{type: attached, object: " + quoted(k.object) + "}";
        else if constexpr (std::is_same_v<T, cond::Detached>)
          return "{type: detached, object: " + quoted(k.object) + "}";
        else if constexpr (std::is_same_v<T, cond::JointOpen>)
          return "{type: joint_open, articulation: " + quoted(k.articulation) + ", threshold: " + num(k.threshold) + "}";
        else
          return "{type: joint_closed, articulation: " + quoted(k.articulation) + ", threshold: " + num(k.threshold) + "}";
      },
      c);
}

/// Object ids a condition refers to, paired with the field naming them.
inline std::vector<std::pair<std::string, std::string>> referenced_objects(const GoalCondition& c) {
  return std::visit(
      [](const auto& k) -> std::vector<std::pair<std::string, std::string>> {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, cond::RobotNear>) return {};
        else if constexpr (std::is_same_v<T, cond::RelativePose>) return {{"a", k.a}, {"b", k.b}};
        else if constexpr (std::is_same_v<T, cond::JointOpen> || std::is_same_v<T, cond::JointClosed>)
          return {{"articulation", k.articulation}};
        else return {{"object", k.object}};
      },
      c);
}

}  // namespace quadmanip
