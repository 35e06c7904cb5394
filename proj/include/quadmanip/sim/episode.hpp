#pragma once

/**
 * @brief One episode: perceive, decompose, then execute atomic actions with
 * primitive controllers while monitors are stepped every tick.
 *
 * Manipulation follows four phases: observe (depth render + grounding),
 * pre-align at a pre-contact pose backed off along the approach axis,
 * advance and close the gripper, then complete (lift / place / drive the
 * joint / drag). Every failure is recorded as the action's outcome and the
 * episode moves on to the next action; only the horizon stops it early.
 */

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "quadmanip/config/config.hpp"
#include "quadmanip/nav/goal_search.hpp"
#include "quadmanip/nav/mapping.hpp"
#include "quadmanip/nav/path_planner.hpp"
#include "quadmanip/perception/fusion.hpp"
#include "quadmanip/sampling/samplers.hpp"
#include "quadmanip/sim/metrics.hpp"
#include "quadmanip/sim/render.hpp"

namespace quadmanip {

struct ActionOutcome {
  std::size_t index = 0;
  ActionKind kind = ActionKind::Navigate;
  bool success = false;
  std::string message;
  double start = 0.0;
  double end = 0.0;
};

struct TraceRow {
  double t = 0.0;
  int action = -1;
  std::string phase;
  Pose base;
  LocomotionCommand cmd;
  LocomotionCommand vel;
  Pose ee_world;
  bool gripper_closed = false;
  std::string held;
  RewardTerms terms;
  double total_stage1 = 0.0;
  double total_stage2 = 0.0;
  int monitors_latched = 0;
};

struct EpisodeResult {
  std::string scenario_id;
  int episode = 0;
  std::uint64_t seed = 0;
  std::optional<std::string> plan_error;
  TaskPlan plan;
  std::vector<ActionOutcome> outcomes;
  MonitorReport monitors;
  MetricsReport metrics;
  std::vector<TraceRow> trace;
  OccupancyGrid map{0.1, Vec3::Zero(), 1, 1};
};

struct EpisodeOptions {
  SimParams params;
  ControlConfig control;
  RangePresets ranges;
  std::uint64_t seed = 0;
  int episode = 0;
  /// Called after every tick; used by tests to audit invariants.
  std::function<void(const SimWorld&, const SimEnvironment&)> observer;
};

inline constexpr double kGaitPeriod = 0.5;
inline constexpr std::array<double, 4> kTrotPhase = {0.0, 0.5, 0.5, 0.0};  // FL, FR, RL, RR
inline constexpr std::size_t kDescriptorDim = 16;

inline std::string error_kind(const Error& e) {
  if (dynamic_cast<const NoFeasibleGoal*>(&e)) return "NoFeasibleGoal";
  if (dynamic_cast<const NoPath*>(&e)) return "NoPath";
  if (dynamic_cast<const OracleFailure*>(&e)) return "OracleFailure";
  if (dynamic_cast<const InvalidDepth*>(&e)) return "InvalidDepth";
  if (dynamic_cast<const DegenerateConstraints*>(&e)) return "DegenerateConstraints";
  if (dynamic_cast<const InvalidPlan*>(&e)) return "InvalidPlan";
  if (dynamic_cast<const UnknownObject*>(&e)) return "UnknownObject";
  if (dynamic_cast<const UsageError*>(&e)) return "UsageError";
  return "Error";
}

/// Dense surface samples of every object, as one detection each.
inline std::vector<Detection> synthesize_detections(const SimWorld& w) {
  constexpr double kSpacing = 0.03;
  std::vector<Detection> out;
  for (const auto& [id, o] : w.objects) {
    Detection d{o.spec.label, label_descriptor(o.spec.label, kDescriptorDim), {}, 0.0};
    const Vec3 h = o.half();
    for (int axis = 0; axis < 3; ++axis) {
      const int u = (axis + 1) % 3, v = (axis + 2) % 3;
      const int nu = std::max(2, static_cast<int>(std::ceil(2 * h[u] / kSpacing)) + 1);
      const int nv = std::max(2, static_cast<int>(std::ceil(2 * h[v] / kSpacing)) + 1);
      for (const double side : {-1.0, 1.0})
        for (int i = 0; i < nu; ++i)
          for (int j = 0; j < nv; ++j) {
            Vec3 l;
            l[axis] = side * h[axis];
            l[u] = -h[u] + 2 * h[u] * i / (nu - 1);
            l[v] = -h[v] + 2 * h[v] * j / (nv - 1);
            d.points.push_back(o.pose.apply(l));
          }
    }
    out.push_back(std::move(d));
  }
  return out;
}

/// Wraps the grounding fixture: when a record carries no dominant axis or
/// surface normal, the target object's ground-truth directions are used.
class SceneGroundingOracle final : public GroundingOracle {
 public:
  SceneGroundingOracle(const GroundingOracle& inner, const ObjectState* target) : inner_(inner), target_(target) {}

  std::optional<GroundingResult> ground(const GroundingQuery& q) const override {
    auto r = inner_.ground(q);
    if (!r || target_ == nullptr) return r;
    const UnitQuaternion to_base = q.base_in_world.orientation.conjugate() * target_->pose.orientation;
    if (!r->dominant_axis && target_->spec.dominant_axis)
      r->dominant_axis = to_base.rotate(target_->spec.dominant_axis->normalized());
    if (!r->surface_normal && target_->spec.surface_normal)
      r->surface_normal = to_base.rotate(target_->spec.surface_normal->normalized());
    return r;
  }

 private:
  const GroundingOracle& inner_;
  const ObjectState* target_;
};

class EpisodeRunner {
 public:
  EpisodeRunner(const Scenario& s, const PlannerOracle& planner, const GroundingOracle& grounding,
                const std::vector<Detection>& detections, EpisodeOptions opt)
      : s_(s),
        planner_(planner),
        grounding_(grounding),
        detections_(detections),
        opt_(std::move(opt)),
        p_(opt_.params),
        clamp_(opt_.ranges.get(p_.preset)),
        env_(make_environment(s, p_)),
        world_(make_world(s, env_, p_)),
        rng_(SeededRng(opt_.seed).split(static_cast<std::uint64_t>(opt_.episode))),
        map_(p_.map_resolution, Vec3::Zero(), 1, 1),
        timeline_({true, true, true, true}),
        monitors_(s.monitors),
        camera_(default_camera()) {
    p_.validate();
    opt_.control.validate();
  }

  EpisodeResult run() {
    EpisodeResult r;
    r.scenario_id = s_.id;
    r.episode = opt_.episode;
    r.seed = opt_.seed;
    scan();
    try {
      const InstanceGraph graph = build_graph();
      r.plan = decompose(planner_, s_.instruction, graph);
    } catch (const Error& e) {
      r.plan_error = error_kind(e) + ": " + e.what();
    }
    for (std::size_t i = 0; i < r.plan.actions.size() && !horizon_hit_; ++i)
      r.outcomes.push_back(execute(i, r.plan.actions[i]));
    r.monitors = report(monitors_, r.plan);
    r.metrics = episode_metrics(acc_, r.monitors);
    r.trace = std::move(trace_);
    r.map = map_;
    return r;
  }

 private:
  struct HorizonReached {};

  // -- ticking ---------------------------------------------------------------

  void tick(const LocomotionCommand& raw, const std::optional<Pose>& ee_cmd, const char* phase, bool base_active) {
    if (world_.t + p_.dt > s_.horizon + 1e-9) throw HorizonReached{};
    const LocomotionCommand cmd = clamp_command(raw, clamp_);
    step(world_, env_, cmd, ee_cmd, p_, rng_);
    if (world_.t - last_scan_ >= p_.lidar_period - 1e-9) scan();

    const bool moving = cmd.vx != 0.0 || cmd.vy != 0.0 || cmd.wz != 0.0;
    std::array<bool, 4> contact{true, true, true, true};
    if (moving)
      for (std::size_t l = 0; l < 4; ++l) contact[l] = periodic_contact(world_.t, kGaitPeriod, kTrotPhase[l]);
    timeline_.update(contact, world_.t, p_.dt);

    RewardInputs in;
    in.command = cmd;
    in.actual = world_.vel;
    const Pose ee_target = ee_cmd ? *ee_cmd : world_.ee_nominal;
    in.ee_target = {ee_target.position, euler_from_quat(ee_target.orientation)};
    in.ee_actual = {world_.ee_base.position, euler_from_quat(world_.ee_base.orientation)};
    in.timeline = &timeline_;
    const RewardTerms terms = compute_terms(in, opt_.control.params);

    monitor_step(monitors_, world_.snapshot(), world_.t);
    if (base_active) acc_.add_base(cmd, world_.vel);
    if (ee_cmd) acc_.add_ee(*ee_cmd, world_.ee_base);

    TraceRow row;
    row.t = world_.t;
    row.action = current_action_;
    row.phase = phase;
    row.base = world_.base;
    row.cmd = cmd;
    row.vel = world_.vel;
    row.ee_world = world_.ee_world;
    row.gripper_closed = world_.gripper_closed;
    row.held = world_.held ? world_.held->object : "";
    row.terms = terms;
    row.total_stage1 = total_reward(1, terms, opt_.control.weights);
    row.total_stage2 = total_reward(2, terms, opt_.control.weights);
    row.monitors_latched = static_cast<int>(
        std::count_if(monitors_.begin(), monitors_.end(), [](const SubtaskMonitor& m) { return m.completed; }));
    trace_.push_back(std::move(row));
    if (opt_.observer) opt_.observer(world_, env_);
  }

  void scan() {
    integrate_scan(map_, lidar_scan(world_, env_, s_, p_));
    last_scan_ = world_.t;
    ++scans_;
  }

  // -- perception --------------------------------------------------------------

  InstanceGraph build_graph() {
    const std::vector<Detection> dets = detections_.empty() ? synthesize_detections(world_) : detections_;
    InstanceGraph g(dets.empty() ? kDescriptorDim : dets.front().descriptor.size());
    for (const Detection& d : dets) g.ingest(d);
    // Each node stands for the same-label object nearest to its box center.
    for (const GraphSummaryEntry& e : g.summary()) {
      const std::string* best = nullptr;
      double best_d = 0.0;
      for (const auto& [id, o] : world_.objects) {
        if (o.spec.label != e.label) continue;
        const double d = (o.pose.position - e.center).norm();
        if (best == nullptr || d < best_d) {
          best = &id;
          best_d = d;
        }
      }
      if (best != nullptr) node_object_[e.id] = *best;
    }
    return g;
  }

  const std::string& object_for(const AtomicAction& a) const {
    if (!a.target_instance) throw UsageError("action has no target instance");
    const auto it = node_object_.find(*a.target_instance);
    if (it == node_object_.end())
      throw UnknownObject(fmt::format("instance {} does not correspond to a scene object", *a.target_instance));
    return it->second;
  }

  // -- actions -----------------------------------------------------------------

  ActionOutcome execute(std::size_t i, const AtomicAction& a) {
    current_action_ = static_cast<int>(i);
    ActionOutcome out{i, a.kind, false, "", world_.t, 0.0};
    try {
      try {
        switch (a.kind) {
          case ActionKind::Navigate: out.success = navigate_to(*a.waypoint, world_.t + p_.navigate_timeout, "navigate", out.message); break;
          case ActionKind::Pick: out.success = pick(i, a, out.message); break;
          case ActionKind::Place: out.success = place(i, a, out.message); break;
          case ActionKind::PushPull: out.success = push_pull(i, a, out.message); break;
          case ActionKind::Drag: out.success = drag(i, a, out.message); break;
        }
      } catch (const Error& e) {
        out.success = false;
        out.message = error_kind(e) + ": " + e.what();
      }
      if (!out.success && a.kind != ActionKind::Navigate) recover();
    } catch (const HorizonReached&) {
      out.success = false;
      out.message = "horizon reached";
      horizon_hit_ = true;
    }
    out.end = world_.t;
    return out;
  }

  /// Drops anything held and stows the arm.
  void recover() {
    if (world_.held) release(world_, env_);
    move_ee(home_ee_pose(), world_.t + 5.0, "retract");
  }

  OccupancyGrid planning_grid() const {
    OccupancyGrid g = map_;
    const auto carried = world_.carried();
    for (const auto& [id, o] : world_.objects) {
      if (carried.count(id)) continue;
      const Aabb b = o.bounds();
      g.ensure_contains(g.cell_of(b.min.x(), b.min.y()));
      g.ensure_contains(g.cell_of(b.max.x(), b.max.y()));
      mark_box_occupied(g, b);
    }
    return g;
  }

  std::vector<Aabb> obstacle_boxes() const {
    std::vector<Aabb> out;
    const auto carried = world_.carried();
    for (const auto& [id, o] : world_.objects)
      if (!carried.count(id)) out.push_back(o.bounds());
    return out;
  }

  /// Start cell for planning. After manipulation the base may stand inside
  /// the inflated margin of the object it just handled; plan from the nearest
  /// unblocked cell within half a meter instead.
  CellIndex escape_cell(const OccupancyGrid& g, const Vec2& p) const {
    const CellIndex c = g.cell_of(p.x(), p.y());
    const auto blocked = inflated_obstacle_mask(g, p_.path_inflation);
    if (!blocked[g.linear(c)]) return c;
    const int reach = static_cast<int>(std::ceil(0.5 / g.resolution()));
    std::optional<CellIndex> best;
    double best_d = 0.0;
    for (int dy = -reach; dy <= reach; ++dy)
      for (int dx = -reach; dx <= reach; ++dx) {
        const CellIndex n{c.x + dx, c.y + dy};
        if (!g.in_bounds(n) || blocked[g.linear(n)]) continue;
        const double d = (g.cell_center(n) - p).norm();
        if (d <= 0.5 && (!best || d < best_d)) {
          best = n;
          best_d = d;
        }
      }
    if (!best) throw NoPath("start cell is blocked");
    return *best;
  }

  struct Route {
    std::vector<Vec2> pts;
    double goal_yaw = 0.0;
  };

  Route plan_route(const Vec3& waypoint) const {
    OccupancyGrid g = planning_grid();
    project_waypoint(g, waypoint);
    const Vec2 start_xy = world_.base.position.head<2>();
    // Unknown space is traversable; leave room to route around things.
    const auto pad = [&](const Vec2& c) {
      constexpr double kMargin = 1.5;
      g.ensure_contains(g.cell_of(c.x() - kMargin, c.y() - kMargin));
      g.ensure_contains(g.cell_of(c.x() + kMargin, c.y() + kMargin));
    };
    pad(start_xy);
    pad(waypoint.head<2>());
    const std::vector<Aabb> boxes = obstacle_boxes();
    const Pose goal = find_goal_pose(g, waypoint, boxes, p_.goal_search, waypoint);
    pad(goal.position.head<2>());
    const auto cells = plan_path(g, escape_cell(g, start_xy), g.cell_of(goal.position.x(), goal.position.y()),
                                 p_.path_inflation);
    Route r;
    for (std::size_t k = 1; k < cells.size(); ++k) r.pts.push_back(g.cell_center(cells[k]));
    if (!r.pts.empty()) r.pts.pop_back();
    r.pts.push_back(goal.position.head<2>());
    r.goal_yaw = goal.yaw();
    return r;
  }

  /// Goal search, A* and pure pursuit. The route is replanned after every
  /// LiDAR scan; a failed replan keeps the previous route.
  bool navigate_to(const Vec3& waypoint, double deadline, const char* phase, std::string& msg) {
    Route route = plan_route(waypoint);
    int planned_at = scans_;
    std::size_t idx = 0;
    for (;;) {
      if (world_.t >= deadline) {
        msg = "timeout";
        return false;
      }
      if (scans_ != planned_at) {
        planned_at = scans_;
        try {
          route = plan_route(waypoint);
          idx = 0;
        } catch (const Error&) {
        }
      }
      const Vec2 p = world_.base.position.head<2>();
      const double yaw = world_.base.yaw();
      const double dg = (route.pts.back() - p).norm();
      LocomotionCommand c;
      if (dg <= p_.goal_tolerance) {
        const double err = wrap_angle(route.goal_yaw - yaw);
        if (std::abs(err) <= p_.yaw_tolerance) break;
        c.wz = std::clamp(2.0 * err, -p_.max_yaw_rate, p_.max_yaw_rate);
      } else {
        while (idx + 1 < route.pts.size() && (route.pts[idx] - p).norm() < p_.lookahead) ++idx;
        const Vec2 d = route.pts[idx] - p;
        const double err = wrap_angle(std::atan2(d.y(), d.x()) - yaw);
        c.wz = std::clamp(2.0 * err, -p_.max_yaw_rate, p_.max_yaw_rate);
        if (std::abs(err) < 0.6) c.vx = p_.max_speed * std::cos(err) * std::min(1.0, dg / 0.5);
      }
      tick(c, std::nullopt, phase, true);
    }
    for (int k = 0; k < 10; ++k) tick({}, std::nullopt, phase, true);
    return true;
  }

  /// Drives the EE toward `target` (base frame) until the noise-free pose
  /// reaches its reach-clamped version.
  bool move_ee(const Pose& target, double deadline, const char* phase) {
    const Pose goal = clamp_to_reach(target, p_.reach);
    for (;;) {
      if ((world_.ee_nominal.position - goal.position).norm() <= 1e-3 &&
          quat_geodesic_distance(world_.ee_nominal.orientation, goal.orientation) <= 5e-3)
        return true;
      if (world_.t >= deadline) return false;
      tick({}, target, phase, false);
    }
  }

  /// Observe, pre-align, advance, close. On success the object is attached.
  bool grasp(std::size_t i, const AtomicAction& a, const std::string& oid, double deadline, std::string& msg) {
    if (world_.held) {
      msg = "gripper already holds '" + world_.held->object + "'";
      return false;
    }
    const DepthImage depth = render_depth(world_, env_, s_, camera_);
    const GroundingQuery q{s_.id, static_cast<int>(i), a.description, &camera_, &depth, world_.base};
    const SceneGroundingOracle oracle(grounding_, &world_.objects.at(oid));
    const Pose target = ground_action(oracle, q);
    const Vec3 approach = target.orientation.rotate(Vec3::UnitZ());
    const Pose pre{target.position - p_.pre_contact_offset * approach, target.orientation};
    if (!move_ee(pre, deadline, "pre_align")) {
      msg = "timeout during pre-alignment";
      return false;
    }
    if (!move_ee(target, deadline, "grasp")) {
      msg = "timeout while advancing";
      return false;
    }
    const ObjectState& o = world_.objects.at(oid);
    double dist = std::numeric_limits<double>::infinity();
    for (const Vec3& ap : o.spec.attach_points) dist = std::min(dist, (o.pose.apply(ap) - world_.ee_world.position).norm());
    const double ang = quat_geodesic_distance(world_.ee_base.orientation, target.orientation);
    if (dist > p_.attach_tolerance || ang > p_.attach_orientation_tolerance) {
      msg = fmt::format("grasp rejected: {:.3f} m from attach point, {:.3f} rad from target orientation", dist, ang);
      return false;
    }
    attach(world_, oid);
    tick({}, target, "grasp", false);
    return true;
  }

  bool pick(std::size_t i, const AtomicAction& a, std::string& msg) {
    const double deadline = world_.t + p_.manipulation_timeout;
    if (!grasp(i, a, object_for(a), deadline, msg)) return false;
    Pose lift = world_.ee_nominal;
    lift.position.z() += 0.10;
    move_ee(lift, deadline, "complete");
    return true;
  }

  bool place(std::size_t i, const AtomicAction& a, std::string& msg) {
    const double deadline = world_.t + p_.manipulation_timeout;
    const std::string& dest = object_for(a);
    if (!world_.held) {
      msg = "nothing held";
      return false;
    }
    const DepthImage depth = render_depth(world_, env_, s_, camera_);
    const GroundingQuery q{s_.id, static_cast<int>(i), a.description, &camera_, &depth, world_.base};
    const SceneGroundingOracle oracle(grounding_, &world_.objects.at(dest));
    const Vec3 spot = world_.base.apply(ground_action(oracle, q).position);

    const ObjectState& o = world_.objects.at(world_.held->object);
    const Vec3 bottom = o.pose.position - Vec3(0, 0, o.half().z());
    const Vec3 ee_goal = spot + Vec3(0, 0, p_.place_clearance) + (world_.ee_world.position - bottom);
    const Pose target{world_.base.inverse().apply(ee_goal), world_.ee_nominal.orientation};
    if (!move_ee(target, deadline, "place")) {
      msg = "timeout moving above the target";
      return false;
    }
    const auto support = release(world_, env_);
    move_ee(home_ee_pose(), world_.t + 5.0, "retract");
    if (support != dest) {
      msg = "object did not land on '" + dest + "'";
      return false;
    }
    return true;
  }

  bool push_pull(std::size_t i, const AtomicAction& a, std::string& msg) {
    const double deadline = world_.t + p_.manipulation_timeout;
    const std::string& oid = object_for(a);
    const ObjectState& o = world_.objects.at(oid);
    if (!o.spec.joint) {
      msg = "'" + oid + "' is not articulated";
      return false;
    }
    if (!grasp(i, a, oid, deadline, msg)) return false;
    const JointSpec& j = *o.spec.joint;
    const double goal = (o.joint - j.lower < j.upper - o.joint) ? j.upper : j.lower;
    const Vec3 axis_w = o.rest.orientation.rotate(j.axis.normalized());
    const double scale = j.type == JointType::Revolute ? std::max((world_.held->ee_anchor - o.rest.position).norm(), 0.05) : 1.0;
    const Vec3 ee_goal = world_.ee_world.position + axis_w * ((goal - o.joint) * scale);
    const Pose target{world_.base.inverse().apply(ee_goal), world_.ee_nominal.orientation};
    while (std::abs(world_.objects.at(oid).joint - goal) > 5e-3) {
      if (world_.t >= deadline) {
        msg = "timeout driving the joint";
        return false;
      }
      tick({}, target, "push_pull", false);
    }
    release(world_, env_);
    move_ee(home_ee_pose(), world_.t + 5.0, "retract");
    return true;
  }

  bool drag(std::size_t i, const AtomicAction& a, std::string& msg) {
    if (!a.target_instance) {
      msg = "drag needs a target object";
      return false;
    }
    if (!grasp(i, a, object_for(a), world_.t + p_.manipulation_timeout, msg)) return false;
    if (!navigate_to(*a.waypoint, world_.t + p_.navigate_timeout, "drag", msg)) return false;
    release(world_, env_);
    move_ee(home_ee_pose(), world_.t + 5.0, "retract");
    return true;
  }

  const Scenario& s_;
  const PlannerOracle& planner_;
  const GroundingOracle& grounding_;
  const std::vector<Detection>& detections_;
  EpisodeOptions opt_;
  SimParams p_;
  CommandRanges clamp_;
  SimEnvironment env_;
  SimWorld world_;
  SeededRng rng_;
  OccupancyGrid map_;
  ContactTimeline timeline_;
  std::vector<SubtaskMonitor> monitors_;
  CameraModel camera_;
  TrackingAccumulator acc_;
  std::vector<TraceRow> trace_;
  std::map<int, std::string> node_object_;
  double last_scan_ = 0.0;
  int scans_ = 0;
  int current_action_ = -1;
  bool horizon_hit_ = false;
};

inline EpisodeResult run_episode(const Scenario& s, const PlannerOracle& planner, const GroundingOracle& grounding,
                                 const std::vector<Detection>& detections, EpisodeOptions opt) {
  return EpisodeRunner(s, planner, grounding, detections, std::move(opt)).run();
}

inline EpisodeResult run_episode(const ScenarioBundle& b, EpisodeOptions opt) {
  return run_episode(b.scenario, b.planner, b.grounding, b.detections, std::move(opt));
}

// ---------------------------------------------------------------------------
// Export

inline std::string trace_csv(const std::vector<TraceRow>& rows) {
  std::string out =
      "t,action,phase,base_x,base_y,base_z,base_yaw,cmd_vx,cmd_vy,cmd_wz,vel_vx,vel_vy,vel_wz,"
      "ee_x,ee_y,ee_z,ee_qw,ee_qx,ee_qy,ee_qz,gripper_closed,held";
  for (const TermField& f : kRewardTermFields) out += fmt::format(",r_{}", f.name);
  out += ",total_stage1,total_stage2,monitors_latched\n";
  for (const TraceRow& r : rows) {
    const UnitQuaternion& q = r.ee_world.orientation;
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}", r.t, r.action, r.phase,
                       r.base.position.x(), r.base.position.y(), r.base.position.z(), r.base.yaw(), r.cmd.vx, r.cmd.vy,
                       r.cmd.wz, r.vel.vx, r.vel.vy, r.vel.wz, r.ee_world.position.x(), r.ee_world.position.y(),
                       r.ee_world.position.z(), q.w(), q.x(), q.y(), q.z(), r.gripper_closed ? 1 : 0, r.held);
    for (const TermField& f : kRewardTermFields) out += fmt::format(",{}", r.terms.*(f.value));
    out += fmt::format(",{},{},{}\n", r.total_stage1, r.total_stage2, r.monitors_latched);
  }
  return out;
}

inline nlohmann::json to_json(const EpisodeResult& r) {
  nlohmann::json j;
  j["scenario"] = r.scenario_id;
  j["episode"] = r.episode;
  j["seed"] = r.seed;
  j["plan_error"] = r.plan_error ? nlohmann::json(*r.plan_error) : nlohmann::json();
  j["plan"] = nlohmann::json::array();
  for (const AtomicAction& a : r.plan.actions) {
    nlohmann::json s{{"kind", std::string(to_string(a.kind))}, {"description", a.description}};
    if (a.target_instance) s["target_instance"] = *a.target_instance;
    if (a.waypoint) s["waypoint"] = {a.waypoint->x(), a.waypoint->y(), a.waypoint->z()};
    j["plan"].push_back(s);
  }
  j["outcomes"] = nlohmann::json::array();
  for (const ActionOutcome& o : r.outcomes)
    j["outcomes"].push_back({{"index", o.index},
                             {"action", std::string(to_string(o.kind))},
                             {"success", o.success},
                             {"message", o.message},
                             {"start", o.start},
                             {"end", o.end}});
  j["monitors"] = to_json(r.monitors);
  j["metrics"] = to_json(r.metrics);
  j["ticks"] = r.trace.size();
  return j;
}

}  // namespace quadmanip
