#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "quadmanip/core/yaml_util.hpp"
#include "quadmanip/perception/fusion.hpp"

namespace quadmanip {

enum class ActionKind { Navigate, Pick, Place, PushPull, Drag };

inline constexpr std::array<ActionKind, 5> kAllActionKinds = {ActionKind::Navigate, ActionKind::Pick, ActionKind::Place,
                                                              ActionKind::PushPull, ActionKind::Drag};

inline std::string_view to_string(ActionKind k) {
  switch (k) {
    case ActionKind::Navigate: return "navigate";
    case ActionKind::Pick: return "pick";
    case ActionKind::Place: return "place";
    case ActionKind::PushPull: return "push_pull";
    case ActionKind::Drag: return "drag";
  }
  return "?";
}

inline std::optional<ActionKind> action_kind_from(std::string_view s) {
  for (ActionKind k : kAllActionKinds)
    if (to_string(k) == s) return k;
  if (s == "pushpull" || s == "push" || s == "pull") return ActionKind::PushPull;
  return std::nullopt;
}

struct AtomicAction {
  ActionKind kind = ActionKind::Navigate;
  std::optional<int> target_instance;
  std::optional<Vec3> waypoint;  // world frame
  std::string description;
};

struct TaskPlan {
  std::string instruction;
  std::vector<AtomicAction> actions;
};

enum class PlanIssue { EmptyPlan, MissingWaypoint, MissingTarget, UnknownInstance, EmptyDescription };

inline std::string_view to_string(PlanIssue i) {
  switch (i) {
    case PlanIssue::EmptyPlan: return "empty plan";
    case PlanIssue::MissingWaypoint: return "missing waypoint";
    case PlanIssue::MissingTarget: return "missing target instance";
    case PlanIssue::UnknownInstance: return "unknown instance";
    case PlanIssue::EmptyDescription: return "empty description";
  }
  return "?";
}

struct PlanViolation {
  std::size_t action_index = 0;
  PlanIssue issue = PlanIssue::EmptyPlan;
  std::string message() const { return fmt::format("action {}: {}", action_index, to_string(issue)); }
};

inline bool needs_waypoint(ActionKind k) { return k == ActionKind::Navigate || k == ActionKind::Drag; }
inline bool needs_target(ActionKind k) { return !needs_waypoint(k); }

/// First violation in plan order, or nullopt when the plan is valid.
inline std::optional<PlanViolation> validate_plan(const TaskPlan& plan, const InstanceGraph& graph) {
  if (plan.actions.empty()) return PlanViolation{0, PlanIssue::EmptyPlan};
  for (std::size_t i = 0; i < plan.actions.size(); ++i) {
    const AtomicAction& a = plan.actions[i];
    if (needs_waypoint(a.kind) && (!a.waypoint || !is_finite(*a.waypoint))) return PlanViolation{i, PlanIssue::MissingWaypoint};
    if (needs_target(a.kind) && !a.target_instance) return PlanViolation{i, PlanIssue::MissingTarget};
    if (a.target_instance && graph.find(*a.target_instance) == nullptr) return PlanViolation{i, PlanIssue::UnknownInstance};
    if (a.description.empty()) return PlanViolation{i, PlanIssue::EmptyDescription};
  }
  return std::nullopt;
}

/// Stand-in for a language planner.
class PlannerOracle {
 public:
  virtual ~PlannerOracle() = default;
  virtual TaskPlan plan(const std::string& instruction, const std::vector<GraphSummaryEntry>& graph) const = 0;
};

inline TaskPlan decompose(const PlannerOracle& oracle, const std::string& instruction, const InstanceGraph& graph) {
  if (std::all_of(instruction.begin(), instruction.end(), [](unsigned char c) { return std::isspace(c); }))
    throw OracleFailure("empty instruction");
  TaskPlan plan = oracle.plan(instruction, graph.summary());
  if (const auto v = validate_plan(plan, graph)) throw InvalidPlan(v->action_index, v->message());
  return plan;
}

/// Fixture step before resolution against the graph.
struct ScriptedStep {
  ActionKind kind = ActionKind::Navigate;
  std::optional<std::string> target_label;
  std::optional<int> target_id;
  std::optional<Vec3> waypoint;
  std::optional<std::string> waypoint_label;
  std::string description;
};

struct ScriptedPlan {
  std::string instruction;
  std::vector<ScriptedStep> steps;
};

inline std::string trimmed(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  return std::string(s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1));
}

/// Replays fixture plans keyed by instruction. Labels resolve to the
/// lowest-id graph node carrying that label; waypoints given by label use the
/// node's bounding-box center.
class ScriptedPlanner final : public PlannerOracle {
 public:
  ScriptedPlanner() = default;
  explicit ScriptedPlanner(std::vector<ScriptedPlan> plans) : plans_(std::move(plans)) {}

  const std::vector<ScriptedPlan>& plans() const { return plans_; }

  TaskPlan plan(const std::string& instruction, const std::vector<GraphSummaryEntry>& graph) const override {
    const std::string key = trimmed(instruction);
    const auto it = std::find_if(plans_.begin(), plans_.end(), [&](const ScriptedPlan& p) { return p.instruction == key; });
    if (it == plans_.end()) throw OracleFailure("no scripted plan for instruction '" + key + "'");
    const auto lookup = [&](const std::string& label) -> const GraphSummaryEntry& {
      const GraphSummaryEntry* best = nullptr;
      for (const auto& e : graph)
        if (e.label == label && (best == nullptr || e.id < best->id)) best = &e;
      if (best == nullptr) throw OracleFailure("planner could not ground '" + label + "' in the scene");
      return *best;
    };
    TaskPlan out{key, {}};
    for (const ScriptedStep& s : it->steps) {
      AtomicAction a{s.kind, s.target_id, s.waypoint, s.description};
      if (s.target_label) a.target_instance = lookup(*s.target_label).id;
      if (s.waypoint_label) a.waypoint = lookup(*s.waypoint_label).center;
      out.actions.push_back(std::move(a));
    }
    return out;
  }

 private:
  std::vector<ScriptedPlan> plans_;
};

/// plans:
///   - instruction: "..."
///     actions:
///       - {kind: navigate, waypoint_at: cup, description: "..."}
///       - {kind: pick, target: cup, description: "..."}
inline ScriptedPlanner parse_plan_fixture(const YAML::Node& root) {
  const YAML::Node plans = yaml::require(root, "plans");
  if (!plans.IsSequence()) throw ParseError(yaml::where(plans, "plans") + " must be a list", yaml::line_of(plans));
  std::vector<ScriptedPlan> out;
  for (const YAML::Node& p : plans) {
    ScriptedPlan sp;
    sp.instruction = trimmed(yaml::as_string(yaml::require(p, "instruction"), "instruction"));
    const YAML::Node actions = yaml::require(p, "actions");
    if (!actions.IsSequence()) throw ParseError(yaml::where(actions, "actions") + " must be a list", yaml::line_of(actions));
    for (const YAML::Node& a : actions) {
      ScriptedStep s;
      const YAML::Node kind = yaml::require(a, "kind");
      const auto k = action_kind_from(yaml::as_string(kind, "kind"));
      if (!k) throw ValidationError(yaml::where(kind, "kind") + ": unknown action '" + kind.Scalar() + "'", yaml::line_of(kind));
      s.kind = *k;
      if (auto t = yaml::optional(a, "target")) s.target_label = yaml::as_string(*t, "target");
      if (auto t = yaml::optional(a, "target_id")) s.target_id = static_cast<int>(yaml::as_int(*t, "target_id"));
      if (auto w = yaml::optional(a, "waypoint")) s.waypoint = yaml::as_vec3(*w, "waypoint");
      if (auto w = yaml::optional(a, "waypoint_at")) s.waypoint_label = yaml::as_string(*w, "waypoint_at");
      if (auto d = yaml::optional(a, "description")) s.description = yaml::as_string(*d, "description");
      sp.steps.push_back(std::move(s));
    }
    out.push_back(std::move(sp));
  }
  return ScriptedPlanner(std::move(out));
}

inline ScriptedPlanner load_plan_fixture(const std::filesystem::path& path) {
  return parse_plan_fixture(yaml::load_file(path));
}

}  // namespace quadmanip
