#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "quadmanip/sim/episode.hpp"

namespace qm = quadmanip;
namespace fs = std::filesystem;
using qm::Vec3;

namespace {

const fs::path kScenarios = fs::path(QUADMANIP_DATA_DIR) / "scenarios";

qm::ScenarioBundle bundle(const std::string& name, const std::string& grounding = "grounding.yaml") {
  return qm::load_bundle(kScenarios / name, grounding);
}

// Scratch directory removed on scope exit.
struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) : path(fs::temp_directory_path() / ("quadmanip_sim_" + tag)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  void write(const std::string& name, const std::string& text) const { std::ofstream(path / name) << text; }
};

void copy_bundle(const std::string& name, const TempDir& dst) {
  for (const auto& e : fs::directory_iterator(kScenarios / name)) fs::copy(e.path(), dst.path / e.path().filename());
}

qm::Scenario open_field() {
  auto s = bundle("minimal").scenario;
  return s;
}

const qm::SubtaskMonitor& monitor(const qm::EpisodeResult& r, const std::string& name) {
  for (const auto& m : r.monitors.monitors)
    if (m.name == name) return m;
  throw std::runtime_error("no monitor " + name);
}

}  // namespace

// -- scenario files ----------------------------------------------------------

TEST(Scenario, MinimalBundleLoads) {
  const auto b = bundle("minimal");
  EXPECT_EQ(b.scenario.id, "minimal");
  ASSERT_EQ(b.scenario.objects.size(), 1u);
  EXPECT_EQ(b.scenario.objects[0].label, "cup");
  ASSERT_EQ(b.scenario.monitors.size(), 2u);
  EXPECT_EQ(b.scenario.monitors[0].kind, qm::ActionKind::Navigate);
  EXPECT_EQ(b.scenario.monitors[1].kind, qm::ActionKind::Pick);
}

TEST(Scenario, UnknownAttachTargetNamesLine) {
  const std::string text =
      "id: bad\n"
      "instruction: x\n"
      "horizon: 5\n"
      "robot_start: {position: [0, 0], yaw: 0}\n"
      "objects:\n"
      "  - id: cup\n"
      "    label: cup\n"
      "    position: [1, 0, 0.05]\n"
      "    size: [0.1, 0.1, 0.1]\n"
      "    attach_to: shelf\n";
  try {
    qm::parse_scenario(YAML::Load(text));
    FAIL() << "expected ValidationError";
  } catch (const qm::ValidationError& e) {
    EXPECT_EQ(e.line(), 10);
    EXPECT_NE(std::string(e.what()).find("attach_to"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("shelf"), std::string::npos);
  }
}

TEST(Scenario, AttachmentCycleRejected) {
  const std::string text =
      "id: bad\ninstruction: x\nhorizon: 5\nrobot_start: {position: [0, 0]}\nobjects:\n"
      "  - {id: a, label: a, position: [1, 0, 0.05], size: [0.1, 0.1, 0.1], attach_to: b}\n"
      "  - {id: b, label: b, position: [2, 0, 0.05], size: [0.1, 0.1, 0.1], attach_to: a}\n";
  EXPECT_THROW(qm::parse_scenario(YAML::Load(text)), qm::ValidationError);
}

TEST(Scenario, MonitorOnMissingObjectRejected) {
  const std::string text =
      "id: bad\ninstruction: x\nhorizon: 5\nrobot_start: {position: [0, 0]}\n"
      "monitors:\n  - {name: pick_cup, condition: {type: attached, object: cup}}\n";
  EXPECT_THROW(qm::parse_scenario(YAML::Load(text)), qm::ValidationError);
}

TEST(Scenario, UnknownTopLevelKeyRejected) {
  EXPECT_THROW(qm::parse_scenario(YAML::Load("id: a\ninstruction: x\nhorizon: 5\ncolour: red\n")), qm::ValidationError);
}

TEST(Scenario, EmitParseEmitIsIdentical) {
  for (const char* name : {"minimal", "cart_delivery", "drawer"}) {
    const auto s = bundle(name).scenario;
    const std::string once = qm::emit_scenario(s);
    const std::string twice = qm::emit_scenario(qm::parse_scenario(YAML::Load(once)));
    EXPECT_EQ(once, twice) << name;
  }
}

TEST(Scenario, BundleErrorsCarryFileName) {
  EXPECT_THROW(qm::load_bundle(kScenarios / "does_not_exist"), qm::IoError);

  TempDir dir("labels");
  copy_bundle("minimal", dir);
  dir.write("plan.yaml",
            "plans:\n  - instruction: pick up the cup\n    actions:\n"
            "      - {kind: pick, target: mug, description: grasp}\n");
  try {
    qm::load_bundle(dir.path);
    FAIL() << "expected ValidationError";
  } catch (const qm::ValidationError& e) {
    EXPECT_EQ(e.line(), 4);
    EXPECT_EQ(std::string(e.what()).rfind("plan.yaml", 0), 0u) << e.what();
  }
}

TEST(Scenario, SimSectionRoundTrips) {
  qm::SimParams p;
  p.dt = 0.01;
  p.tracking.tau_base = 0.25;
  p.goal_search.ring_step = 0.1;
  p.preset = "train";
  qm::SimParams q;
  qm::parse_sim_into(YAML::Load(qm::emit_sim(p)), q);
  EXPECT_EQ(p, q);
  EXPECT_THROW(qm::parse_sim_into(YAML::Load("sim:\n  dtt: 0.1\n"), q), qm::ValidationError);
  EXPECT_THROW(qm::parse_sim_into(YAML::Load("sim:\n  dt: -1\n"), q), qm::ValidationError);
}

// -- world stepping ------------------------------------------------------------

TEST(World, ZeroCommandChangesOnlyTime) {
  const auto s = bundle("cart_delivery").scenario;
  const qm::SimParams p;
  const auto env = qm::make_environment(s, p);
  qm::SimWorld w = qm::make_world(s, env, p);
  const qm::SimWorld before = w;
  qm::SeededRng rng(1);
  qm::step(w, env, {}, std::nullopt, p, rng);
  EXPECT_DOUBLE_EQ(w.t, p.dt);
  EXPECT_EQ(w.base.position, before.base.position);
  EXPECT_EQ(w.base.orientation.eigen().coeffs(), before.base.orientation.eigen().coeffs());
  EXPECT_EQ(w.ee_world.position, before.ee_world.position);
  for (const auto& [id, o] : before.objects) {
    EXPECT_EQ(w.objects.at(id).pose.position, o.pose.position) << id;
    EXPECT_EQ(w.objects.at(id).pose.orientation.eigen().coeffs(), o.pose.orientation.eigen().coeffs()) << id;
  }
}

TEST(World, UnitCommandWithoutLagTravelsDistance) {
  const auto s = open_field();
  qm::SimParams p;
  p.tracking.tau_base = 0.0;
  const auto env = qm::make_environment(s, p);
  qm::SimWorld w = qm::make_world(s, env, p);
  qm::SeededRng rng(1);
  for (int k = 0; k < 100; ++k) qm::step(w, env, {1.0, 0.0, 0.0}, std::nullopt, p, rng);
  EXPECT_NEAR(w.t, 2.0, 1e-9);
  EXPECT_NEAR(w.base.position.x(), 2.0, 1e-9);
  EXPECT_NEAR(w.base.position.y(), 0.0, 1e-12);
}

TEST(World, VelocityLagMatchesFirstOrderResponse) {
  const auto s = open_field();
  qm::SimParams p;
  p.tracking.tau_base = 0.2;
  const auto env = qm::make_environment(s, p);
  qm::SimWorld w = qm::make_world(s, env, p);
  qm::SeededRng rng(1);
  qm::step(w, env, {1.0, 0.0, 0.0}, std::nullopt, p, rng);
  EXPECT_NEAR(w.vel.vx, 1.0 - std::exp(-0.1), 1e-12);
  for (int k = 1; k < 50; ++k) qm::step(w, env, {1.0, 0.0, 0.0}, std::nullopt, p, rng);
  EXPECT_NEAR(w.vel.vx, 1.0 - std::exp(-5.0), 1e-12);
}

TEST(World, ObstacleHaltsBase) {
  auto s = open_field();
  s.obstacles.push_back({Vec3(1.0, -1.0, 0.0), Vec3(1.2, 1.0, 1.0)});
  qm::SimParams p;
  p.tracking.tau_base = 0.0;
  const auto env = qm::make_environment(s, p);
  qm::SimWorld w = qm::make_world(s, env, p);
  qm::SeededRng rng(1);
  for (int k = 0; k < 200; ++k) qm::step(w, env, {1.0, 0.0, 0.0}, std::nullopt, p, rng);
  EXPECT_TRUE(w.blocked);
  EXPECT_LE(w.base.position.x(), 1.0 - p.footprint_radius + 1e-9);
  EXPECT_GT(w.base.position.x(), 0.7);
}

TEST(World, ReleaseSettlesOnSupport) {
  const auto s = bundle("cart_delivery").scenario;
  const qm::SimParams p;
  const auto env = qm::make_environment(s, p);
  qm::SimWorld w = qm::make_world(s, env, p);
  // Teleport the box above the cart while held, then let go.
  w.objects.at("box").pose.position = Vec3(2.5, -1.5, 0.5);
  w.ee_world = qm::Pose{Vec3(2.5, -1.5, 0.6), w.ee_world.orientation};
  qm::attach(w, "box");
  const auto support = qm::release(w, env);
  ASSERT_TRUE(support.has_value());
  EXPECT_EQ(*support, "cart");
  EXPECT_NEAR(w.objects.at("box").pose.position.z(), 0.3 + 0.075, 1e-12);
  EXPECT_FALSE(w.gripper_closed);
}

TEST(Render, DepthSeesCupFromStandoff) {
  const auto s = bundle("minimal").scenario;
  const qm::SimParams p;
  const auto env = qm::make_environment(s, p);
  qm::SimWorld w = qm::make_world(s, env, p);
  w.base = qm::terrain_pose(env.terrain, 2.05, 0.5, qm::kPi, p.base_height);
  const auto cam = qm::default_camera();
  const auto img = qm::render_depth(w, env, s, cam);
  const Vec3 top(1.5, 0.5, 0.1);
  const Vec3 uvd = qm::project_point(cam, w.base.inverse().apply(top));
  const int u = static_cast<int>(std::lround(uvd.x())), v = static_cast<int>(std::lround(uvd.y()));
  ASSERT_TRUE(img.valid(u, v));
  const Vec3 back = w.base.apply(qm::pixel_to_point(cam, img, qm::Vec2(u, v)));
  EXPECT_LT((back - top).norm(), 0.01);
}

// -- episodes ------------------------------------------------------------------

TEST(Episode, PerfectPickAttaches) {
  const auto r = qm::run_episode(bundle("minimal"), {});
  ASSERT_FALSE(r.plan_error) << *r.plan_error;
  ASSERT_EQ(r.outcomes.size(), 2u);
  EXPECT_TRUE(r.outcomes[0].success) << r.outcomes[0].message;
  EXPECT_TRUE(r.outcomes[1].success) << r.outcomes[1].message;
  EXPECT_TRUE(monitor(r, "pick_cup").completed);
  EXPECT_EQ(r.trace.back().held, "cup");
  EXPECT_TRUE(r.monitors.overall);
}

TEST(Episode, PerturbedGroundingFailsPickButContinues) {
  const auto r = qm::run_episode(bundle("cart_delivery", "grounding_perturbed.yaml"), {});
  ASSERT_EQ(r.outcomes.size(), 6u);
  EXPECT_FALSE(r.outcomes[1].success);
  EXPECT_EQ(r.metrics.per_action.at(qm::ActionKind::Pick).rate(), 0.0);
  EXPECT_EQ(r.metrics.per_action.at(qm::ActionKind::Navigate).rate(), 1.0);
  EXPECT_TRUE(r.outcomes[5].success);
  EXPECT_FALSE(r.monitors.overall);
}

TEST(Episode, CartDeliveryEndToEnd) {
  const auto r = qm::run_episode(bundle("cart_delivery"), {});
  for (const auto& o : r.outcomes) EXPECT_TRUE(o.success) << o.index << ": " << o.message;
  EXPECT_EQ(r.metrics.overall(), 1.0);
  for (const auto& [k, a] : r.metrics.per_action) EXPECT_EQ(a.rate(), 1.0) << qm::to_string(k);
  EXPECT_EQ(r.trace.back().held, "");
}

TEST(Episode, DrawerOpensByPulling) {
  const auto r = qm::run_episode(bundle("drawer"), {});
  for (const auto& o : r.outcomes) EXPECT_TRUE(o.success) << o.index << ": " << o.message;
  EXPECT_TRUE(monitor(r, "open_drawer").completed);
  EXPECT_TRUE(r.monitors.overall);
}

TEST(Episode, UnreachableGoalIsRecorded) {
  auto b = bundle("minimal");
  // Grow the cup until no ring position clears its inflated box.
  b.scenario.objects[0].size = Vec3(4.2, 4.2, 0.1);
  const auto r = qm::run_episode(b, {});
  ASSERT_EQ(r.outcomes.size(), 2u);
  EXPECT_FALSE(r.outcomes[0].success);
  EXPECT_EQ(r.outcomes[0].message.rfind("NoFeasibleGoal", 0), 0u) << r.outcomes[0].message;
}

TEST(Episode, ShortHorizonLatchesNothing) {
  auto b = bundle("cart_delivery");
  b.scenario.horizon = 0.1;
  const auto r = qm::run_episode(b, {});
  EXPECT_EQ(r.trace.size(), 5u);
  for (const auto& m : r.monitors.monitors) EXPECT_FALSE(m.completed) << m.name;
  EXPECT_EQ(r.metrics.overall(), 0.0);
  ASSERT_FALSE(r.outcomes.empty());
  EXPECT_EQ(r.outcomes.back().message, "horizon reached");
}

TEST(Episode, SameSeedSameBytes) {
  qm::EpisodeOptions opt;
  opt.params.tracking.sigma_pos = 0.003;
  opt.params.tracking.sigma_ori = 0.01;
  opt.seed = 42;
  const auto b = bundle("cart_delivery");
  const auto a = qm::run_episode(b, opt);
  const auto c = qm::run_episode(b, opt);
  EXPECT_EQ(qm::trace_csv(a.trace), qm::trace_csv(c.trace));
  EXPECT_EQ(qm::to_json(a).dump(), qm::to_json(c).dump());
  opt.episode = 1;
  const auto d = qm::run_episode(b, opt);
  EXPECT_NE(qm::trace_csv(a.trace), qm::trace_csv(d.trace));
}

TEST(Episode, InvariantsHoldEveryTick) {
  qm::EpisodeOptions opt;
  long ticks = 0, held_ticks = 0;
  double worst_attach = 0.0;
  bool collided = false;
  opt.observer = [&](const qm::SimWorld& w, const qm::SimEnvironment& env) {
    ++ticks;
    if (!env.footprint_free(w.base.position.head<2>(), qm::SimParams{}.footprint_radius)) collided = true;
    if (w.held && !w.objects.at(w.held->object).spec.joint) {
      ++held_ticks;
      const qm::Pose expect = w.ee_world * w.held->rel;
      worst_attach = std::max(worst_attach, (w.objects.at(w.held->object).pose.position - expect.position).norm());
    }
  };
  const auto r = qm::run_episode(bundle("cart_delivery"), opt);
  EXPECT_EQ(ticks, static_cast<long>(r.trace.size()));
  EXPECT_GT(held_ticks, 0);
  EXPECT_LT(worst_attach, 1e-12);
  EXPECT_FALSE(collided);
}

TEST(Episode, TraceColumnsLineUp) {
  auto b = bundle("minimal");
  b.scenario.horizon = 1.0;
  const std::string csv = qm::trace_csv(qm::run_episode(b, {}).trace);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  const auto columns = std::count(line.begin(), line.end(), ',');
  int rows = 0;
  while (std::getline(in, line)) {
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), columns);
    ++rows;
  }
  EXPECT_EQ(rows, 50);
}

// -- metrics -------------------------------------------------------------------

TEST(Metrics, AggregateCountsEpisodes) {
  std::vector<qm::MetricsReport> reports(5);
  for (int i = 0; i < 5; ++i) {
    reports[i].episodes = 1;
    reports[i].successful_episodes = i < 2 ? 1 : 0;
    reports[i].e_x = i;
    reports[i].per_action[qm::ActionKind::Pick] = {i < 3 ? 1 : 0, 1};
  }
  const auto agg = qm::aggregate(reports);
  EXPECT_EQ(agg.episodes, 5);
  EXPECT_DOUBLE_EQ(agg.overall(), 0.4);
  EXPECT_DOUBLE_EQ(agg.e_x, 2.0);
  EXPECT_DOUBLE_EQ(agg.per_action.at(qm::ActionKind::Pick).rate(), 0.6);
  EXPECT_THROW(qm::aggregate({}), qm::UsageError);
}

TEST(Metrics, JsonCarriesScaledVelocityErrors) {
  qm::MetricsReport r;
  r.episodes = 1;
  r.e_x = 0.0123;
  const auto j = qm::to_json(r);
  EXPECT_DOUBLE_EQ(j["tracking"]["e_x_x100"].get<double>(), 1.23);
}
