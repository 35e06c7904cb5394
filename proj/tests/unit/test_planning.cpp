#include <gtest/gtest.h>

#include "quadmanip/planning/monitors.hpp"

namespace qm = quadmanip;
using qm::ActionKind;
using qm::Vec3;

namespace {

qm::Detection blob(const std::string& label, const Vec3& c) {
  qm::Detection d;
  d.label = label;
  d.descriptor = qm::label_descriptor(label, 8);
  for (int i = -1; i <= 1; ++i)
    for (int j = -1; j <= 1; ++j) d.points.push_back(c + Vec3(0.05 * i, 0.05 * j, 0.0));
  return d;
}

qm::InstanceGraph two_node_graph() {
  qm::InstanceGraph g(8);
  g.ingest(blob("cup", Vec3(2.0, 1.0, 0.8)));
  g.ingest(blob("table", Vec3(-1.0, 3.0, 0.7)));
  return g;
}

constexpr const char* kFixture = R"(
plans:
  - instruction: bring the cup to the table
    actions:
      - {kind: navigate, waypoint_at: cup, description: go to the cup}
      - {kind: pick, target: cup, description: pick up the cup}
      - {kind: navigate, waypoint_at: table, description: go to the table}
      - {kind: place, target: table, description: put the cup on the table}
  - instruction: grab the ghost
    actions:
      - {kind: pick, target_id: 99, description: pick the ghost}
  - instruction: find the sofa
    actions:
      - {kind: navigate, waypoint_at: sofa, description: go to the sofa}
)";

qm::SubtaskMonitor monitor(const std::string& name, qm::GoalCondition c) {
  qm::SubtaskMonitor m;
  m.name = name;
  m.kind = *qm::kind_from_monitor_name(name);
  m.condition = std::move(c);
  return m;
}

}  // namespace

TEST(Decompose, ScriptedFixtureResolvesAgainstGraph) {
  const auto g = two_node_graph();
  const auto planner = qm::parse_plan_fixture(qm::yaml::parse(kFixture));
  const auto plan = qm::decompose(planner, "  bring the cup to the table\n", g);
  ASSERT_EQ(plan.actions.size(), 4u);
  const ActionKind kinds[] = {ActionKind::Navigate, ActionKind::Pick, ActionKind::Navigate, ActionKind::Place};
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(plan.actions[i].kind, kinds[i]);
  EXPECT_EQ(plan.actions[1].target_instance, 0);
  EXPECT_EQ(plan.actions[3].target_instance, 1);
  EXPECT_NEAR((*plan.actions[0].waypoint - Vec3(2.0, 1.0, 0.8)).norm(), 0.0, 1e-12);
  EXPECT_NEAR((*plan.actions[2].waypoint - Vec3(-1.0, 3.0, 0.7)).norm(), 0.0, 1e-12);
  for (const auto& a : plan.actions) EXPECT_FALSE(a.description.empty());
}

TEST(Decompose, Failures) {
  const auto g = two_node_graph();
  const auto planner = qm::parse_plan_fixture(qm::yaml::parse(kFixture));
  EXPECT_THROW(qm::decompose(planner, "   ", g), qm::OracleFailure);
  EXPECT_THROW(qm::decompose(planner, "dance", g), qm::OracleFailure);
  EXPECT_THROW(qm::decompose(planner, "find the sofa", g), qm::OracleFailure);
  try {
    qm::decompose(planner, "grab the ghost", g);
    FAIL();
  } catch (const qm::InvalidPlan& e) {
    EXPECT_EQ(e.action_index(), 0u);
  }
}

TEST(ValidatePlan, ReportsFirstViolation) {
  const auto g = two_node_graph();
  qm::TaskPlan plan{"x", {{ActionKind::Navigate, std::nullopt, Vec3(1, 1, 0), "go"},
                          {ActionKind::Pick, 0, std::nullopt, "pick"},
                          {ActionKind::Navigate, std::nullopt, Vec3(0, 0, 0), "go"},
                          {ActionKind::Place, 1, std::nullopt, "place"}}};
  EXPECT_FALSE(qm::validate_plan(plan, g).has_value());

  auto bad = plan;
  bad.actions[0].waypoint.reset();
  auto v = qm::validate_plan(bad, g);
  ASSERT_TRUE(v);
  EXPECT_EQ(v->action_index, 0u);
  EXPECT_EQ(v->issue, qm::PlanIssue::MissingWaypoint);

  bad = plan;
  bad.actions[1].target_instance = 99;
  v = qm::validate_plan(bad, g);
  ASSERT_TRUE(v);
  EXPECT_EQ(v->action_index, 1u);
  EXPECT_EQ(v->issue, qm::PlanIssue::UnknownInstance);

  bad = plan;
  bad.actions[3].target_instance.reset();
  EXPECT_EQ(qm::validate_plan(bad, g)->issue, qm::PlanIssue::MissingTarget);
  bad = plan;
  bad.actions[2].description.clear();
  EXPECT_EQ(qm::validate_plan(bad, g)->issue, qm::PlanIssue::EmptyDescription);
  EXPECT_EQ(qm::validate_plan(qm::TaskPlan{}, g)->issue, qm::PlanIssue::EmptyPlan);
  bad = plan;
  bad.actions.push_back({ActionKind::Drag, std::nullopt, std::nullopt, "drag"});
  EXPECT_EQ(qm::validate_plan(bad, g)->action_index, 4u);
}

TEST(Monitors, RobotNearLatches) {
  std::vector<qm::SubtaskMonitor> ms{monitor("nav_to_cup", qm::cond::RobotNear{Vec3(0, 0, 0), 0.5})};
  qm::WorldState w;
  w.robot.position = Vec3(0.6, 0, 0);
  qm::monitor_step(ms, w, 1.0);
  EXPECT_FALSE(ms[0].completed);
  w.robot.position = Vec3(0.4, 0, 0.3);
  qm::monitor_step(ms, w, 3.0);
  EXPECT_TRUE(ms[0].completed);
  EXPECT_EQ(ms[0].completion_time, 3.0);
  w.robot.position = Vec3(5, 0, 0);
  qm::monitor_step(ms, w, 5.0);
  EXPECT_TRUE(ms[0].completed);
  EXPECT_EQ(ms[0].completion_time, 3.0);
}

TEST(Monitors, AllConditionKinds) {
  qm::WorldState w;
  w.objects["box"] = {Vec3(1, 1, 0.5), {}};
  w.objects["cart"] = {Vec3(1.1, 1.0, 0.3), {}};
  w.joints["drawer"] = 0.25;
  EXPECT_TRUE(qm::holds(qm::cond::ObjectNear{"box", Vec3(1, 1.2, 0), 0.25}, w));
  EXPECT_FALSE(qm::holds(qm::cond::ObjectNear{"box", Vec3(1, 1.3, 0), 0.25}, w));
  EXPECT_TRUE(qm::holds(qm::cond::RelativePose{"box", "cart", 0.3}, w));
  EXPECT_FALSE(qm::holds(qm::cond::RelativePose{"box", "cart", 0.2}, w));
  EXPECT_FALSE(qm::holds(qm::cond::Attached{"box"}, w));
  EXPECT_TRUE(qm::holds(qm::cond::Detached{"box"}, w));
  w.attached.insert("box");
  EXPECT_TRUE(qm::holds(qm::cond::Attached{"box"}, w));
  EXPECT_TRUE(qm::holds(qm::cond::JointOpen{"drawer", 0.2}, w));
  EXPECT_FALSE(qm::holds(qm::cond::JointClosed{"drawer", 0.2}, w));
  EXPECT_THROW(qm::holds(qm::cond::Attached{"ghost"}, w), qm::UnknownObject);
  EXPECT_THROW(qm::holds(qm::cond::JointOpen{"door", 0.1}, w), qm::UnknownObject);
}

TEST(Report, RatesAndOverall) {
  std::vector<qm::SubtaskMonitor> ms{monitor("nav_a", qm::cond::RobotNear{Vec3(0, 0, 0), 1}),
                                     monitor("nav_b", qm::cond::RobotNear{Vec3(0, 0, 0), 1}),
                                     monitor("nav_c", qm::cond::RobotNear{Vec3(9, 9, 0), 1}),
                                     monitor("pick_box", qm::cond::Attached{"box"})};
  qm::TaskPlan plan{"p", {{ActionKind::Navigate, {}, Vec3::Zero(), "n"}, {ActionKind::Pick, 0, {}, "p"}}};
  auto none = qm::report(ms, plan);
  EXPECT_FALSE(none.overall);
  EXPECT_EQ(none.per_action.at(ActionKind::Navigate).rate(), 0.0);

  qm::WorldState w;
  w.objects["box"] = {};
  qm::monitor_step(ms, w, 2.0);
  auto r = qm::report(ms, plan);
  EXPECT_FALSE(r.overall);
  EXPECT_NEAR(r.per_action.at(ActionKind::Navigate).rate(), 0.6667, 1e-4);
  EXPECT_EQ(r.per_action.at(ActionKind::Pick).rate(), 0.0);
  EXPECT_EQ(r.planned.at(ActionKind::Pick), 1);

  w.robot.position = Vec3(9, 9, 0);
  w.attached.insert("box");
  qm::monitor_step(ms, w, 4.0);
  r = qm::report(ms, plan);
  EXPECT_TRUE(r.overall);
  for (const auto& [k, e] : r.per_action) EXPECT_EQ(e.rate(), 1.0);
  const auto j = qm::to_json(r);
  EXPECT_EQ(j["actions"]["navigate"]["completed"], 3);
  EXPECT_EQ(j["monitors"][2]["completion_time"], 4.0);
}

TEST(Report, EmptyMonitorSetIsVacuouslyComplete) {
  EXPECT_TRUE(qm::report({}, qm::TaskPlan{}).overall);
}

TEST(MonitorParsing, ParsesAndInfersKinds) {
  const auto ms = qm::parse_monitors(qm::yaml::parse(R"(
- name: nav_to_cart
  condition: {type: robot_near, point: [1, 2, 0], radius: 0.5}
- name: pick_box
  condition: {type: attached, object: box}
- name: box_on_cart
  action: place
  condition: {type: relative_pose, a: box, b: cart, max_distance: 0.3}
- name: open_drawer
  condition: {type: joint_open, articulation: drawer, threshold: 0.2}
)"));
  ASSERT_EQ(ms.size(), 4u);
  EXPECT_EQ(ms[0].kind, ActionKind::Navigate);
  EXPECT_EQ(ms[1].kind, ActionKind::Pick);
  EXPECT_EQ(ms[2].kind, ActionKind::Place);
  EXPECT_EQ(ms[3].kind, ActionKind::PushPull);
  EXPECT_TRUE(std::holds_alternative<qm::cond::RelativePose>(ms[2].condition));

  try {
    qm::parse_monitors(qm::yaml::parse("- name: nav_x\n  condition: {type: robot_near, point: [0, 0, 0], radius: -1}\n"));
    FAIL();
  } catch (const qm::ValidationError& e) {
    EXPECT_EQ(e.line(), 2);
  }
  EXPECT_THROW(qm::parse_monitors(qm::yaml::parse("- name: mystery\n  condition: {type: attached, object: a}\n")),
               qm::ValidationError);
  EXPECT_THROW(qm::parse_monitors(qm::yaml::parse("- name: nav_x\n  condition: {type: teleport}\n")),
               qm::ValidationError);
}
