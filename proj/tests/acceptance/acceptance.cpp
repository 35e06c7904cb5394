// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "quadmanip/cli/commands.hpp"
#include "quadmanip/grounding/orientation.hpp"
#include "quadmanip/nav/goal_search.hpp"
#include "quadmanip/nav/path_planner.hpp"
#include "quadmanip/perception/fusion.hpp"

namespace qm = quadmanip;
namespace cli = quadmanip::cli;
namespace fs = std::filesystem;
using qm::CellIndex;
using qm::CellState;
using qm::kPi;
using qm::Vec2;
using qm::Vec3;

namespace {

const fs::path kData(QUADMANIP_DATA_DIR);

struct Verdict {
  bool ok = true;
  std::string detail;
  int failures = 0;

  // Records the first failing check; later ones only bump the count.
  void check(bool cond, const std::string& what) {
    if (cond) return;
    if (ok) detail = what;
    ok = false;
    ++failures;
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return Vec3(n(rng), n(rng), n(rng)).normalized();
}

qm::UnitQuaternion random_quat(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return qm::UnitQuaternion::from_wxyz(n(rng), n(rng), n(rng), n(rng));
}

// ---------------------------------------------------------------------------

Verdict geometry() {
  Verdict v;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> angle(0.0, kPi);
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto q = random_quat(rng);
    const double theta = angle(rng);
    const double d = qm::quat_geodesic_distance(q, q * qm::UnitQuaternion::from_axis_angle(random_unit(rng), theta));
    worst = std::max(worst, std::abs(d - theta));
  }
  const double elapsed = seconds_since(t0);
  v.check(worst <= 1e-9, fmt::format("max |d - theta| = {:.3g}", worst));
  v.check(elapsed < 1.0, fmt::format("runtime {:.3f} s", elapsed));
  if (v.ok) v.detail = fmt::format("1000 samples, max error {:.2g}, {:.4f} s", worst, elapsed);
  return v;
}

Verdict orientation_solver() {
  Verdict v;
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> mode(0, 5);
  std::uniform_real_distribution<double> tilt(0.0, 3e-3);
  int degenerate = 0;
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const int m = mode(rng);
    std::optional<Vec3> a, n;
    if (m != 1 && m != 3) a = random_unit(rng);
    if (m == 1 || m == 2) n = random_unit(rng);
    if (m == 4) n = a->cross(random_unit(rng)).normalized();
    if (m == 5) {
      // Normal within a few milliradians of +-a, straddling the parallel threshold.
      const Vec3 perp = a->cross(random_unit(rng)).normalized();
      const double th = tilt(rng);
      n = ((i % 2 ? 1.0 : -1.0) * std::cos(th) * *a + std::sin(th) * perp).normalized();
    }
    const Vec3 d = random_unit(rng);
    const bool parallel = a && n && std::abs(a->dot(*n)) >= 1.0 - qm::kParallelTolerance;
    try {
      const auto r = qm::solve_orientation(a, n, d);
      v.check(!parallel, fmt::format("sample {}: no throw at |n.a| = {:.12f}", i, std::abs(a->dot(*n))));
      const Eigen::Matrix3d mat = r.matrix();
      const double ortho = (mat.transpose() * mat - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
      v.check(ortho < 1e-9 && std::abs(mat.determinant() - 1.0) < 1e-9, fmt::format("sample {}: improper output", i));
      if (a) {
        const double res = std::max(std::abs(r.col_x().dot(*a)), std::abs(r.col_z().dot(*a)));
        worst = std::max(worst, res);
        v.check(res < 1e-9, fmt::format("sample {}: axis residual {:.3g}", i, res));
      }
      if (n && (!a || m == 4)) v.check(r.col_z().cross(*n).norm() < 1e-9, fmt::format("sample {}: normal misaligned", i));
    } catch (const qm::DegenerateConstraints&) {
      ++degenerate;
      v.check(parallel, fmt::format("sample {}: spurious DegenerateConstraints", i));
    }
  }
  v.check(degenerate > 100, fmt::format("only {} degenerate samples exercised", degenerate));
  if (v.ok) v.detail = fmt::format("10000 samples, {} degenerate, max residual {:.2g}", degenerate, worst);
  return v;
}

double brute_geometric(const std::vector<Vec3>& pi, const std::vector<Vec3>& pj, double eps) {
  std::size_t hits = 0;
  for (const Vec3& p : pi) {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec3& q : pj) best = std::min(best, (p - q).squaredNorm());
    if (best < eps * eps) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(pi.size());
}

Verdict fusion() {
  Verdict v;
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> count(1, 1000);
  std::uniform_real_distribution<double> u(0.0, 1.0), eps_d(0.005, 0.2);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<Vec3> a(count(rng)), b(count(rng));
    for (auto& p : a) p = Vec3(u(rng), u(rng), u(rng));
    for (auto& p : b) p = Vec3(u(rng), u(rng), u(rng));
    const double eps = eps_d(rng);
    v.check(qm::geometric_similarity(a, b, eps) == brute_geometric(a, b, eps), fmt::format("pair {} differs", trial));
  }

  const qm::FusionConfig cfg;
  qm::Detection det;
  det.label = "box";
  det.descriptor = {1.0, 0.0};
  for (int i = 0; i < 10; ++i) det.points.emplace_back(0.5 * i, 0.0, 0.0);
  qm::InstanceNode node;
  node.label = "box";
  node.descriptor = {4.0, 3.0};  // cosine exactly 0.8
  node.points = det.points;
  v.check(qm::semantic_similarity(det.descriptor, node.descriptor) == 0.8, "semantic boundary case not exact");
  v.check(!qm::should_merge(det, node, cfg), "merged at semantic = 0.8");
  node.descriptor = {5.0, 3.0};
  v.check(qm::should_merge(det, node, cfg), "no merge just above semantic threshold");
  node.descriptor = det.descriptor;
  node.points.resize(8);  // 8 of 10 covered
  v.check(qm::geometric_similarity(det.points, node.points, cfg.epsilon) == 0.8, "geometric boundary case not exact");
  v.check(!qm::should_merge(det, node, cfg), "merged at geometric = 0.8");
  node.points = det.points;
  node.points.resize(9);
  v.check(qm::should_merge(det, node, cfg), "no merge just above geometric threshold");
  if (v.ok) v.detail = "500 random pairs equal to brute force; both thresholds strict";
  return v;
}

qm::LegContact leg_state(double air, double cont) {
  qm::LegContact s;
  s.air_time = air;
  s.contact_time = cont;
  s.in_contact = cont > 0;
  return s;
}

qm::ContactTimeline trot(double period, int ticks) {
  constexpr double dt = 1.0 / 256.0;
  const std::array<double, 4> phase = {0.0, 0.5, 0.5, 0.0};
  auto contacts = [&](double t) {
    std::array<bool, 4> c{};
    for (std::size_t i = 0; i < 4; ++i) c[i] = qm::periodic_contact(t, period, phase[i]);
    return c;
  };
  qm::ContactTimeline tl(contacts(0.0));
  for (int k = 1; k <= ticks; ++k) tl.update(contacts(k * dt), k * dt, dt);
  return tl;
}

Verdict rewards() {
  Verdict v;
  const qm::ControlConfig cfg;
  const auto rows = qm::load_timeline(kData / "timelines" / "ideal_trot.csv");
  const auto trace = qm::evaluate_timeline(rows, cfg.weights, cfg.params);
  v.check(trace.size() == 201, "ideal trot fixture has wrong length");
  for (const auto& r : trace) v.check(r.terms.gait == 1.0, fmt::format("r_gait = {} at t = {}", r.terms.gait, r.t));

  const double rs = qm::sync_term(leg_state(0.3, 0.0), leg_state(0.0, 0.25));
  v.check(std::abs(rs - std::exp(-0.08)) <= 1e-12, fmt::format("saturated r_s = {:.15f}", rs));

  auto tl = trot(0.5, 1024);
  v.check(qm::r_freq(tl, 2.0) == 1.0, "ideal trot frequency reward is not 1");
  tl.leg(qm::Leg::FL).prev_onset = 0.0;
  tl.leg(qm::Leg::FL).last_onset = 1.0 / 3.0;
  const double rf = qm::r_freq(tl, 2.0);
  v.check(std::abs(rf - std::exp(-0.5)) <= 1e-12, fmt::format("off-by-1-Hz r_freq = {:.15f}", rf));

  qm::RewardTerms unit;
  unit.track_xy = unit.track_yaw = unit.gait = unit.freq = 1.0;
  const double total = qm::total_reward(1, unit, cfg.weights);
  v.check(std::abs(total - 17.5) <= 1e-12, fmt::format("stage-1 unit total = {}", total));

  auto flat = trot(0.5, 512);
  qm::RewardInputs in;
  in.timeline = &flat;
  const double base = qm::total_reward(1, qm::compute_terms(in, cfg.params), cfg.weights);
  for (std::size_t j = 12; j < qm::kJoints; ++j) in.joints.tau[j] = 40.0 + static_cast<double>(j);
  v.check(qm::total_reward(1, qm::compute_terms(in, cfg.params), cfg.weights) == base, "stage-1 total moved with arm torque");
  v.check(qm::total_reward(2, qm::compute_terms(in, cfg.params), cfg.weights) != base, "stage-2 total ignores arm torque");
  if (v.ok) v.detail = fmt::format("r_gait 1 on 201 rows; r_s, r_freq, 17.5 exact; arm torque invariant");
  return v;
}

Verdict sampling() {
  Verdict v;
  const qm::RangePresets presets;
  const auto fields = qm::CommandRanges::fields();
  for (const char* name : {"roboduet", "train", "eval"}) {
    const auto& ranges = presets.get(name);
    qm::SeededRng rng(5);
    qm::SamplingContext ctx;
    ctx.fix_world_z = false;
    ctx.arm_base_offset = Vec3::Zero();  // position is then the spherical draw itself
    std::array<double, 9> lo, hi;
    lo.fill(std::numeric_limits<double>::infinity());
    hi.fill(-std::numeric_limits<double>::infinity());
    for (int i = 0; i < 100000; ++i) {
      const auto c = qm::sample_locomotion_command(rng, ranges);
      const auto e = qm::sample_ee_target(rng, ranges, ctx);
      const auto sph = qm::cartesian_to_spherical(e.position);
      const std::array<double, 9> x = {c.vx, c.vy, c.wz, sph.radius, sph.pitch, sph.yaw,
                                       e.orientation.roll, e.orientation.pitch, e.orientation.yaw};
      for (std::size_t k = 0; k < 9; ++k) {
        lo[k] = std::min(lo[k], x[k]);
        hi[k] = std::max(hi[k], x[k]);
      }
    }
    for (std::size_t k = 0; k < 9; ++k) {
      const auto& r = ranges.*fields[k].member;
      const std::string tag = fmt::format("{}.{}", name, fields[k].name);
      constexpr double kSlack = 1e-12;  // spherical recovery round-off
      v.check(lo[k] >= r.lo - kSlack && hi[k] <= r.hi + kSlack, tag + fmt::format(" out of range [{}, {}]", lo[k], hi[k]));
      v.check(lo[k] - r.lo <= 0.01 * r.width() + kSlack && r.hi - hi[k] <= 0.01 * r.width() + kSlack,
              tag + " extrema not within 1% of bounds");
    }
  }

  double spread = 0.0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    std::optional<double> ref;
    for (double pitch : {-0.5, 0.0, 0.5}) {
      qm::SamplingContext ctx;
      ctx.base = qm::Pose{Vec3(1.0, -2.0, 0.45), qm::quat_from_euler({0.0, pitch, 0.7})};
      ctx.terrain_height_at = [](double, double) { return 0.15; };
      qm::SeededRng rng(seed);
      const double wz = ctx.base.apply(qm::sample_ee_target(rng, presets.train, ctx).position).z();
      if (!ref) ref = wz;
      spread = std::max(spread, std::abs(wz - *ref));
    }
  }
  v.check(spread <= 1e-9, fmt::format("world-z spread across pitch {:.3g}", spread));
  if (v.ok) v.detail = fmt::format("3 presets x 1e5 samples in range; pitch spread {:.2g}", spread);
  return v;
}

// Dijkstra over a brute-force inflation mask; costs kept as (axis, diagonal) counts.
std::optional<double> dijkstra(const qm::OccupancyGrid& g, CellIndex s, CellIndex t, double inflation) {
  const int w = g.width(), h = g.height();
  auto idx = [&](CellIndex c) { return static_cast<std::size_t>(c.y * w + c.x); };
  std::vector<char> blocked(static_cast<std::size_t>(w * h), 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int oy = 0; oy < h; ++oy)
        for (int ox = 0; ox < w; ++ox)
          if (g.at({ox, oy}) == CellState::Occupied &&
              ((ox == x && oy == y) || qm::distance_to_cell(g, g.cell_center({x, y}), {ox, oy}) < inflation))
            blocked[idx({x, y})] = 1;
  if (blocked[idx(s)] || blocked[idx(t)]) return std::nullopt;
  using Cost = std::pair<long, long>;
  auto val = [](const Cost& c) { return static_cast<double>(c.first) + static_cast<double>(c.second) * qm::kSqrt2; };
  std::vector<Cost> dist(blocked.size(), {1L << 40, 0});
  std::vector<char> done(blocked.size(), 0);
  dist[idx(s)] = {0, 0};
  for (;;) {
    std::size_t best = dist.size();
    for (std::size_t i = 0; i < dist.size(); ++i)
      if (!done[i] && !blocked[i] && (best == dist.size() || val(dist[i]) < val(dist[best]))) best = i;
    if (best == dist.size() || val(dist[best]) > 1e11) break;
    done[best] = 1;
    const int bx = static_cast<int>(best) % w, by = static_cast<int>(best) / w;
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const CellIndex n{bx + dx, by + dy};
        if ((dx == 0 && dy == 0) || !g.in_bounds(n) || blocked[idx(n)]) continue;
        Cost c = dist[best];
        ++(dx && dy ? c.second : c.first);
        if (val(c) < val(dist[idx(n)])) dist[idx(n)] = c;
      }
  }
  if (!done[idx(t)]) return std::nullopt;
  return val(dist[idx(t)]);
}

bool clear_of_occupied(const qm::OccupancyGrid& g, const Vec2& p, std::optional<CellIndex> self, double inflation) {
  for (int y = 0; y < g.height(); ++y)
    for (int x = 0; x < g.width(); ++x) {
      if (g.at({x, y}) != CellState::Occupied) continue;
      if ((self && *self == CellIndex{x, y}) || qm::distance_to_cell(g, p, {x, y}) < inflation) return false;
    }
  return true;
}

Verdict path_planning() {
  Verdict v;
  std::mt19937_64 rng(6);
  std::bernoulli_distribution occ(0.15);
  std::uniform_int_distribution<int> cell(0, 19);
  const double inflations[] = {0.01, 0.06, 0.12};
  int reachable = 0;
  for (int trial = 0; trial < 200; ++trial) {
    qm::OccupancyGrid g(0.1, Vec3::Zero(), 20, 20);
    for (int y = 0; y < 20; ++y)
      for (int x = 0; x < 20; ++x)
        if (occ(rng)) g.set({x, y}, CellState::Occupied);
        else if (occ(rng)) g.set({x, y}, CellState::Free);
    const CellIndex s{cell(rng), cell(rng)}, t{cell(rng), cell(rng)};
    const double infl = inflations[trial % 3];
    const auto oracle = dijkstra(g, s, t, infl);
    try {
      const auto path = qm::plan_path(g, s, t, infl);
      v.check(oracle.has_value(), fmt::format("grid {}: path where oracle finds none", trial));
      if (!oracle) continue;
      ++reachable;
      v.check(qm::path_cost(path) == *oracle, fmt::format("grid {}: cost {} vs oracle {}", trial, qm::path_cost(path), *oracle));
      for (const CellIndex& c : path)
        v.check(clear_of_occupied(g, g.cell_center(c), c, infl), fmt::format("grid {}: path cell in collision", trial));
    } catch (const qm::NoPath&) {
      v.check(!oracle, fmt::format("grid {}: NoPath but oracle cost {}", trial, oracle.value_or(0)));
    }
  }

  const qm::GoalSearchConfig gcfg;
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  int goals = 0;
  for (int trial = 0; trial < 100; ++trial) {
    qm::OccupancyGrid g(0.1, Vec3(-3.0, -3.0, 0.0), 60, 60);
    for (int i = 0; i < 25; ++i) g.set(g.cell_of(u(rng), u(rng)), CellState::Occupied);
    std::vector<qm::Aabb> boxes;
    for (int i = 0; i < 3; ++i) boxes.push_back(qm::Aabb::around(Vec3(u(rng), u(rng), 0.3), Vec3(0.2, 0.15, 0.3)));
    const Vec3 wp(u(rng), u(rng), 0.0);
    try {
      const qm::Pose p = qm::find_goal_pose(g, wp, boxes, gcfg, wp);
      ++goals;
      const Vec2 xy(p.position.x(), p.position.y());
      v.check(clear_of_occupied(g, xy, std::nullopt, gcfg.robot_inflation), fmt::format("scene {}: goal near occupied cell", trial));
      for (const auto& b : boxes)
        v.check(b.inflated(gcfg.bbox_inflation).planar_distance(xy) >= gcfg.robot_inflation,
                fmt::format("scene {}: goal inside inflated box", trial));
    } catch (const qm::NoFeasibleGoal&) {
    }
  }
  v.check(reachable >= 50 && goals >= 50, fmt::format("too few feasible cases ({} paths, {} goals)", reachable, goals));
  if (v.ok) v.detail = fmt::format("200 grids ({} reachable) match Dijkstra; {} goal poses clear", reachable, goals);
  return v;
}

const qm::SubtaskMonitor* find_monitor(const qm::EpisodeResult& r, const std::string& name) {
  for (const auto& m : r.monitors.monitors)
    if (m.name == name) return &m;
  return nullptr;
}

Verdict end_to_end() {
  Verdict v;
  const fs::path dir = kData / "scenarios" / "cart_delivery";
  double slowest = 0.0;

  auto t0 = Clock::now();
  const auto perfect = qm::run_episode(qm::load_bundle(dir), {});
  slowest = std::max(slowest, seconds_since(t0));
  v.check(perfect.outcomes.size() == 6, "plan does not have six actions");
  v.check(perfect.monitors.monitors.size() == 6, "scenario does not have six monitors");
  v.check(perfect.metrics.overall() == 1.0, fmt::format("perfect overall = {}", perfect.metrics.overall()));
  for (const auto& [kind, a] : perfect.metrics.per_action)
    v.check(a.rate() == 1.0, fmt::format("perfect {} rate = {}", qm::to_string(kind), a.rate()));

  t0 = Clock::now();
  const auto perturbed = qm::run_episode(qm::load_bundle(dir, "grounding_perturbed.yaml"), {});
  slowest = std::max(slowest, seconds_since(t0));
  v.check(perturbed.metrics.per_action.at(qm::ActionKind::Pick).rate() == 0.0, "perturbed pick rate is not 0");
  for (const char* name : {"nav_to_box", "nav_to_cart", "nav_to_dock"}) {
    const auto* m = find_monitor(perturbed, name);
    v.check(m && m->completed, fmt::format("perturbed monitor {} did not latch", name));
  }
  v.check(slowest < 10.0, fmt::format("episode took {:.2f} s", slowest));
  if (v.ok) v.detail = fmt::format("perfect 1.0 on every action; offset pick 0.0 with navigation latched; slowest {:.3f} s", slowest);
  return v;
}

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = cli::read_text(e.path());
  return files;
}

Verdict determinism() {
  Verdict v;
  const fs::path scratch = fs::temp_directory_path() / "quadmanip_acceptance";
  fs::remove_all(scratch);
  cli::RunConfig cfg;
  cfg.run.scenarios = {(kData / "scenarios").string()};
  cfg.run.seed = 2024;
  cfg.run.episodes = 3;
  cfg.run.jobs = 4;
  cfg.sim.tracking.sigma_pos = 0.002;
  cfg.sim.tracking.sigma_ori = 0.01;
  std::ostringstream log;
  cfg.run.out = (scratch / "a").string();
  cli::cmd_run(cfg, log);
  cfg.run.out = (scratch / "b").string();
  cli::cmd_run(cfg, log);
  const auto a = tree(scratch / "a"), b = tree(scratch / "b");
  fs::remove_all(scratch);
  v.check(a.size() > 3, "suite produced no episode traces");
  v.check(a == b, "output trees differ");
  if (v.ok) v.detail = fmt::format("{} files byte-identical across two suite runs", a.size());
  return v;
}

Verdict config_fidelity() {
  Verdict v;
  const cli::RunConfig defaults;
  const std::string text = cli::emit_config(defaults);
  v.check(cli::parse_config(qm::yaml::parse(text)) == defaults, "default config does not round-trip");
  v.check(cli::read_text(kData / "config" / "default.yaml") == text, "shipped default.yaml drifted from defaults");

  // Command sampling ranges: roboduet, train, eval; per field lo/hi, angles in units of pi.
  struct RangeRow {
    const char* field;
    double rd_lo, rd_hi, tr_lo, tr_hi, ev_lo, ev_hi;
    bool angular;
  };
  const RangeRow range_table[] = {
      {"x", -1.00, 1.00, -1.00, 1.00, -1.50, 1.50, false},
      {"y", 0.00, 0.00, -1.00, 1.00, 0.00, 0.00, false},
      {"w", -0.60, 0.60, -1.00, 1.00, -1.50, 1.50, false},
      {"l_ee", 0.30, 0.70, 0.30, 0.65, 0.20, 0.80, false},
      {"p_ee", -0.45, 0.45, -0.17, 0.33, -0.50, 0.50, true},
      {"y_ee", -0.50, 0.50, -0.33, 0.33, -0.50, 0.50, true},
      {"alpha", -0.45, 0.45, -0.50, 0.50, -0.50, 0.50, true},
      {"beta", -0.33, 0.33, -0.17, 0.50, -0.50, 0.50, true},
      {"gamma", -0.42, 0.42, -0.50, 0.50, -0.50, 0.50, true},
  };
  const auto& ranges = defaults.sampling.ranges;
  int checked = 0;
  for (const RangeRow& row : range_table) {
    const double s = row.angular ? kPi : 1.0;
    for (const auto& f : qm::CommandRanges::fields()) {
      if (f.name != row.field) continue;
      const std::pair<const qm::CommandRanges*, std::array<double, 2>> cols[] = {
          {&ranges.roboduet, {row.rd_lo * s, row.rd_hi * s}},
          {&ranges.train, {row.tr_lo * s, row.tr_hi * s}},
          {&ranges.eval, {row.ev_lo * s, row.ev_hi * s}}};
      for (const auto& [preset, want] : cols) {
        const qm::Range& got = preset->*f.member;
        v.check(got.lo == want[0] && got.hi == want[1], fmt::format("range {} = [{}, {}]", row.field, got.lo, got.hi));
        ++checked;
      }
    }
  }

  // Reward weights per stage.
  const std::map<std::string, std::array<double, 2>> weight_table = {
      {"track_xy", {2.75, 2.75}},       {"track_yaw", {1.50, 1.50}},     {"ee_pos", {0.00, -1.20}},
      {"ee_ori", {0.00, -1.50}},        {"gait", {0.75, 0.75}},          {"freq", {1.25e1, 1.25e1}},
      {"torque_base", {-2.0e-4, -2.0e-4}}, {"acc_base", {-2.5e-7, -2.0e-7}}, {"power_base", {-2.0e-5, -2.0e-5}},
      {"torque_arm", {0.00, -4.0e-4}},  {"acc_arm", {0.00, -2.5e-6}},    {"power_arm", {0.00, -2.0e-4}},
      {"smooth", {-0.02, -0.02}},
  };
  for (const qm::TermField& f : qm::kRewardTermFields) {
    const auto it = weight_table.find(std::string(f.name));
    v.check(it != weight_table.end(), fmt::format("weight {} missing from table", f.name));
    if (it == weight_table.end()) continue;
    const double s1 = defaults.control.weights.stage1.*(f.weight), s2 = defaults.control.weights.stage2.*(f.weight);
    v.check(s1 == it->second[0] && s2 == it->second[1], fmt::format("weight {} = ({}, {})", f.name, s1, s2));
    checked += 2;
  }

  // Domain randomization.
  using M = qm::RandMethod;
  const qm::RandomizationConfig& r = defaults.sampling.randomization;
  const std::pair<const char*, std::pair<const qm::RandEntry*, qm::RandEntry>> rand_table[] = {
      {"friction", {&r.friction, {{0.4, 2.0}, M::Set}}},
      {"base_mass", {&r.base_mass, {{-5.0, 5.0}, M::Add}}},
      {"push_vx", {&r.push_vx, {{-0.5, 0.5}, M::Interval}}},
      {"push_vy", {&r.push_vy, {{-0.5, 0.5}, M::Interval}}},
      {"actuator_gains", {&r.actuator_gains, {{0.8, 1.2}, M::Scale}}},
      {"ee_link_mass", {&r.ee_link_mass, {{0.0, 0.2}, M::Add}}},
      {"joint_reset", {&r.joint_reset, {{0.5, 1.5}, M::Scale}}},
      {"reset_x", {&r.reset_x, {{-0.5, 0.5}, M::Add}}},
      {"reset_y", {&r.reset_y, {{-0.5, 0.5}, M::Add}}},
      {"reset_heading", {&r.reset_heading, {{-kPi, kPi}, M::Add}}},
      {"reset_vx", {&r.reset_vx, {{-0.5, 0.5}, M::Add}}},
      {"reset_vy", {&r.reset_vy, {{-0.5, 0.5}, M::Add}}},
      {"reset_vz", {&r.reset_vz, {{-0.5, 0.5}, M::Add}}},
      {"reset_roll", {&r.reset_roll, {{-0.5, 0.5}, M::Add}}},
      {"reset_pitch", {&r.reset_pitch, {{-0.5, 0.5}, M::Add}}},
      {"reset_yaw", {&r.reset_yaw, {{-0.5, 0.5}, M::Add}}},
  };
  for (const auto& [name, pair] : rand_table) {
    v.check(*pair.first == pair.second, fmt::format("randomization {} differs", name));
    ++checked;
  }
  if (v.ok) v.detail = fmt::format("round-trip exact; {} table fields match", checked);
  return v;
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Verdict()>> criteria[] = {
      {"geometry geodesic distance", geometry},
      {"orientation solver constraints", orientation_solver},
      {"fusion similarity and merge thresholds", fusion},
      {"gait, frequency and stage rewards", rewards},
      {"command sampling ranges and terrain invariance", sampling},
      {"A* against Dijkstra, collision-free goals", path_planning},
      {"cart delivery end-to-end decomposition", end_to_end},
      {"suite determinism", determinism},
      {"default config fidelity", config_fidelity},
  };
  int failed = 0, n = 0;
  for (const auto& [name, fn] : criteria) {
    ++n;
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v.ok = false;
      v.detail = std::string("exception: ") + e.what();
    }
    if (!v.ok) ++failed;
    std::string extra = v.failures > 1 ? fmt::format(" (+{} more)", v.failures - 1) : "";
    std::cout << fmt::format("{} [{}] {}: {}{}\n", v.ok ? "PASS" : "FAIL", n, name, v.detail, extra);
  }
  std::cout << fmt::format("{}/{} criteria passed\n", n - failed, n);
  return failed == 0 ? 0 : 1;
}
