#pragma once

/**
 * @brief Subcommand implementations behind the `quadmanip` executable.
 *
 * Configuration precedence: built-in defaults, then the `--config` file, then
 * command-line flags. Every flag has a config-file key:
 *
 *   --seed, --episodes, --jobs, --out, --grounding -> run.{seed, episodes, jobs, out, grounding}
 *   --dt, --preset                                 -> sim.{dt, preset}
 *   --tau-base, --ee-rate, --sigma-pos, --sigma-ori -> sim.tracking.*
 *   positional scenario paths                      -> run.scenarios
 */

#include <atomic>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include "quadmanip/control/timeline_io.hpp"
#include "quadmanip/nav/grid_io.hpp"
#include "quadmanip/sim/episode.hpp"

namespace quadmanip::cli {

namespace fs = std::filesystem;

enum ExitCode : int { kOk = 0, kUsage = 2, kConfig = 3, kIo = 4 };

struct RunSettings {
  std::uint64_t seed = 0;
  int episodes = 1;
  int jobs = 1;
  std::string out = "runs/latest";
  std::string grounding = "grounding.yaml";
  std::vector<std::string> scenarios;
  bool operator==(const RunSettings&) const = default;

  void validate() const {
    if (episodes < 1) throw UsageError("episodes must be at least 1");
    if (jobs < 1) throw UsageError("jobs must be at least 1");
    if (grounding.empty()) throw UsageError("grounding file name is empty");
  }
};

struct RunConfig {
  ControlConfig control;
  SamplingConfig sampling;
  SimParams sim;
  RunSettings run;
  bool operator==(const RunConfig&) const = default;
};

/// Flag values; unset fields leave the configuration alone.
struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> episodes, jobs;
  std::optional<double> dt, tau_base, ee_rate, sigma_pos, sigma_ori;
  std::optional<std::string> preset, out, grounding;
  std::vector<std::string> scenarios;
};

inline void apply(RunConfig& c, const RunOverrides& o) {
  if (o.seed) c.run.seed = *o.seed;
  if (o.episodes) c.run.episodes = *o.episodes;
  if (o.jobs) c.run.jobs = *o.jobs;
  if (o.out) c.run.out = *o.out;
  if (o.grounding) c.run.grounding = *o.grounding;
  if (!o.scenarios.empty()) c.run.scenarios = o.scenarios;
  if (o.dt) c.sim.dt = *o.dt;
  if (o.preset) c.sim.preset = *o.preset;
  if (o.tau_base) c.sim.tracking.tau_base = *o.tau_base;
  if (o.ee_rate) c.sim.tracking.ee_rate = *o.ee_rate;
  if (o.sigma_pos) c.sim.tracking.sigma_pos = *o.sigma_pos;
  if (o.sigma_ori) c.sim.tracking.sigma_ori = *o.sigma_ori;
  c.run.validate();
  c.sim.validate();
}

// -- config file ---------------------------------------------------------------

/// `with_io` adds run.out and run.jobs, which never change results.
inline std::string emit_run(const RunSettings& r, bool with_io = true) {
  std::string s = fmt::format("run:\n  seed: {}\n  episodes: {}\n", r.seed, r.episodes);
  if (with_io) s += fmt::format("  jobs: {}\n  out: {}\n", r.jobs, yaml::quoted(r.out));
  s += fmt::format("  grounding: {}\n", yaml::quoted(r.grounding));
  s += "  scenarios: [";
  for (std::size_t i = 0; i < r.scenarios.size(); ++i) s += (i ? ", " : "") + yaml::quoted(r.scenarios[i]);
  s += "]\n";
  return s;
}

inline std::string emit_config(const RunConfig& c, bool with_io = true) {
  return emit_control(c.control) + emit_sampling(c.sampling) + emit_sim(c.sim) + emit_run(c.run, with_io);
}

/// Hash of everything that can change episode outcomes.
inline std::uint64_t config_hash(const RunConfig& c) { return fnv1a(emit_config(c, false)); }

inline void parse_run_into(const YAML::Node& root, RunSettings& r) {
  const auto run = yaml::optional(root, "run");
  if (!run) return;
  check_keys(*run, {"seed", "episodes", "jobs", "out", "grounding", "scenarios"}, "run");
  if (auto n = yaml::optional(*run, "seed")) {
    const auto v = yaml::as_int(*n, "seed");
    if (v < 0) throw ValidationError(yaml::where(*n, "run.seed") + ": must be non-negative", yaml::line_of(*n));
    r.seed = static_cast<std::uint64_t>(v);
  }
  if (auto n = yaml::optional(*run, "episodes")) r.episodes = static_cast<int>(yaml::as_int(*n, "episodes"));
  if (auto n = yaml::optional(*run, "jobs")) r.jobs = static_cast<int>(yaml::as_int(*n, "jobs"));
  if (auto n = yaml::optional(*run, "out")) r.out = yaml::as_string(*n, "out");
  if (auto n = yaml::optional(*run, "grounding")) r.grounding = yaml::as_string(*n, "grounding");
  if (auto n = yaml::optional(*run, "scenarios")) {
    if (!n->IsSequence()) throw ParseError(yaml::where(*n, "run.scenarios") + " must be a list", yaml::line_of(*n));
    r.scenarios.clear();
    for (const auto& s : *n) r.scenarios.push_back(yaml::as_string(s, "scenarios"));
  }
  try {
    r.validate();
  } catch (const UsageError& e) {
    throw ValidationError(std::string("run config: ") + e.what(), yaml::line_of(*run));
  }
}

inline RunConfig parse_config(const YAML::Node& root) {
  RunConfig c;
  if (!root || root.IsNull()) return c;
  check_keys(root, {"rewards", "pd", "heightmap", "command_ranges", "randomization", "sim", "run"}, "config");
  parse_control_into(root, c.control);
  parse_sampling_into(root, c.sampling);
  parse_sim_into(root, c.sim);
  parse_run_into(root, c.run);
  return c;
}

inline RunConfig load_config(const fs::path& path) {
  try {
    return parse_config(yaml::load_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.filename().string() + ": " + e.what(), e.line());
  } catch (const ValidationError& e) {
    throw ValidationError(path.filename().string() + ": " + e.what(), e.line());
  }
}

// -- inputs --------------------------------------------------------------------

/// Bundle directories named by `paths`: a bundle itself, its scenario.yaml, or
/// a suite directory whose immediate subdirectories are bundles (sorted).
inline std::vector<fs::path> resolve_bundles(const std::vector<std::string>& paths) {
  if (paths.empty()) throw UsageError("no scenario paths given");
  std::vector<fs::path> out;
  for (const std::string& s : paths) {
    const fs::path p(s);
    if (!fs::exists(p)) throw IoError("scenario path not found: " + s);
    if (fs::is_regular_file(p)) {
      out.push_back(p.parent_path().empty() ? fs::path(".") : p.parent_path());
    } else if (fs::exists(p / "scenario.yaml")) {
      out.push_back(p);
    } else {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(p))
        if (e.is_directory() && fs::exists(e.path() / "scenario.yaml")) found.push_back(e.path());
      if (found.empty()) throw IoError("no scenario bundles under " + s);
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    }
  }
  return out;
}

inline std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out || !(out << text) || !out.flush()) throw IoError("cannot write " + p.string());
}

inline std::string hex64(std::uint64_t v) { return fmt::format("{:016x}", v); }

/// Episode seed: the master seed split by scenario id and the scenario's own seed.
inline std::uint64_t episode_seed(std::uint64_t master, const Scenario& s) {
  return SeededRng(master).split(fnv1a(s.id) ^ s.seed).seed();
}

// -- run -----------------------------------------------------------------------

struct RunSummary {
  nlohmann::json report;
  nlohmann::json manifest;
  fs::path out;
};

/// Runs every episode of every bundle and writes, under run.out:
///   manifest.json, config.yaml, report.json,
///   episodes/<scenario>/ep<k>.csv (trace) and ep<k>.json (outcomes, monitors, metrics).
inline RunSummary cmd_run(const RunConfig& cfg, std::ostream& log) {
  cfg.run.validate();
  cfg.sim.validate();
  const auto dirs = resolve_bundles(cfg.run.scenarios);
  std::vector<ScenarioBundle> bundles;
  for (const fs::path& d : dirs) bundles.push_back(load_bundle(d, cfg.run.grounding));
  for (std::size_t i = 0; i < bundles.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (bundles[i].scenario.id == bundles[j].scenario.id)
        throw ValidationError("duplicate scenario id '" + bundles[i].scenario.id + "'", 0);

  const fs::path out(cfg.run.out);
  std::error_code ec;
  fs::create_directories(out / "episodes", ec);
  if (ec) throw IoError("cannot create output directory " + out.string() + ": " + ec.message());
  for (const auto& b : bundles) {
    fs::create_directories(out / "episodes" / b.scenario.id, ec);
    if (ec) throw IoError("cannot create output directory: " + ec.message());
  }

  struct Job {
    std::size_t bundle;
    int episode;
  };
  std::vector<Job> jobs;
  for (std::size_t b = 0; b < bundles.size(); ++b)
    for (int k = 0; k < cfg.run.episodes; ++k) jobs.push_back({b, k});

  struct Artifact {
    std::size_t job;
    std::string csv, json;
  };
  std::vector<MetricsReport> metrics(jobs.size());
  std::vector<nlohmann::json> briefs(jobs.size());
  std::mutex mu;
  std::condition_variable cv;
  std::deque<Artifact> ready;
  std::atomic<std::size_t> next{0};
  std::size_t finished_workers = 0;
  std::exception_ptr failure;

  const auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) break;
      try {
        const ScenarioBundle& b = bundles[jobs[i].bundle];
        EpisodeOptions opt;
        opt.params = cfg.sim;
        opt.control = cfg.control;
        opt.ranges = cfg.sampling.ranges;
        opt.seed = episode_seed(cfg.run.seed, b.scenario);
        opt.episode = jobs[i].episode;
        EpisodeResult r = run_episode(b, opt);
        nlohmann::json brief = {{"episode", r.episode},
                                {"success", r.monitors.overall},
                                {"ticks", r.trace.size()},
                                {"duration", r.trace.empty() ? 0.0 : r.trace.back().t}};
        Artifact a{i, trace_csv(r.trace), to_json(r).dump(2) + "\n"};
        std::lock_guard lock(mu);
        metrics[i] = r.metrics;
        briefs[i] = std::move(brief);
        ready.push_back(std::move(a));
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        next = jobs.size();
      }
      cv.notify_one();
    }
    std::lock_guard lock(mu);
    ++finished_workers;
    cv.notify_one();
  };

  const int n_workers = std::max(1, std::min<int>(cfg.run.jobs, static_cast<int>(jobs.size())));
  std::vector<std::jthread> pool;
  for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);

  // Single collector: the only place that writes episode files.
  std::exception_ptr write_failure;
  for (;;) {
    std::unique_lock lock(mu);
    cv.wait(lock, [&] { return !ready.empty() || finished_workers == static_cast<std::size_t>(n_workers); });
    if (ready.empty()) break;
    Artifact a = std::move(ready.front());
    ready.pop_front();
    lock.unlock();
    const Job& j = jobs[a.job];
    const fs::path base = out / "episodes" / bundles[j.bundle].scenario.id / fmt::format("ep{}", j.episode);
    try {
      if (!write_failure) {
        write_text(base.string() + ".csv", a.csv);
        write_text(base.string() + ".json", a.json);
      }
    } catch (...) {
      write_failure = std::current_exception();
    }
  }
  pool.clear();
  if (failure) std::rethrow_exception(failure);
  if (write_failure) std::rethrow_exception(write_failure);

  RunSummary s;
  s.out = out;
  const std::string hash = hex64(config_hash(cfg));
  s.report["config_hash"] = hash;
  s.report["seed"] = cfg.run.seed;
  s.report["episodes_per_scenario"] = cfg.run.episodes;
  s.report["scenarios"] = nlohmann::json::object();
  for (std::size_t b = 0; b < bundles.size(); ++b) {
    std::vector<MetricsReport> mine;
    nlohmann::json eps = nlohmann::json::array();
    for (std::size_t i = 0; i < jobs.size(); ++i)
      if (jobs[i].bundle == b) {
        mine.push_back(metrics[i]);
        eps.push_back(briefs[i]);
      }
    nlohmann::json entry = to_json(aggregate(mine));
    entry["episode_results"] = std::move(eps);
    s.report["scenarios"][bundles[b].scenario.id] = std::move(entry);
  }
  s.report["aggregate"] = to_json(aggregate(metrics));

  s.manifest["command"] = "run";
  s.manifest["seed"] = cfg.run.seed;
  s.manifest["episodes"] = cfg.run.episodes;
  s.manifest["grounding"] = cfg.run.grounding;
  s.manifest["config_hash"] = hash;
  s.manifest["inputs"] = nlohmann::json::array();
  for (std::size_t b = 0; b < bundles.size(); ++b) {
    nlohmann::json files = nlohmann::json::object();
    std::vector<fs::path> names;
    for (const auto& e : fs::directory_iterator(dirs[b]))
      if (e.is_regular_file()) names.push_back(e.path());
    std::sort(names.begin(), names.end());
    for (const fs::path& f : names) files[f.filename().string()] = hex64(fnv1a(read_text(f)));
    s.manifest["inputs"].push_back({{"scenario", bundles[b].scenario.id}, {"path", dirs[b].string()}, {"fnv1a", files}});
  }
  s.manifest["outputs"] = {"config.yaml", "report.json", "episodes/"};

  write_text(out / "config.yaml", emit_config(cfg, false));
  write_text(out / "report.json", s.report.dump(2) + "\n");
  write_text(out / "manifest.json", s.manifest.dump(2) + "\n");

  const MetricsReport total = aggregate(metrics);
  log << fmt::format("{} episode(s) over {} scenario(s): {}/{} successful, overall {}\n", total.episodes, bundles.size(),
                     total.successful_episodes, total.episodes, total.overall());
  for (const auto& [k, a] : total.per_action)
    log << fmt::format("  {:<9} {}/{}\n", to_string(k), a.completed, a.total);
  log << "wrote " << out.string() << "\n";
  return s;
}

// -- rewards -------------------------------------------------------------------

inline std::string cmd_rewards(const fs::path& timeline, const ControlConfig& control) {
  const auto rows = load_timeline(timeline);
  return reward_trace_csv(evaluate_timeline(rows, control.weights, control.params));
}

// -- validate ------------------------------------------------------------------

/// Loads a bundle (or a lone scenario file) and returns a one-line summary.
inline std::string cmd_validate(const fs::path& path, const std::string& grounding) {
  if (!fs::exists(path)) throw IoError("path not found: " + path.string());
  if (fs::is_regular_file(path)) {
    Scenario s;
    try {
      s = load_scenario(path);
    } catch (const ParseError& e) {
      throw ParseError(path.filename().string() + ": " + e.what(), e.line());
    } catch (const ValidationError& e) {
      throw ValidationError(path.filename().string() + ": " + e.what(), e.line());
    }
    return fmt::format("ok: scenario '{}' ({} objects, {} monitors)", s.id, s.objects.size(), s.monitors.size());
  }
  const ScenarioBundle b = load_bundle(path, grounding);
  const auto& plans = b.planner.plans();
  const auto it = std::find_if(plans.begin(), plans.end(), [&](const ScriptedPlan& p) { return p.instruction == b.scenario.instruction; });
  return fmt::format("ok: bundle '{}' ({} objects, {} monitors, {} plan steps)", b.scenario.id, b.scenario.objects.size(),
                     b.scenario.monitors.size(), it->steps.size());
}

// -- export-grid -----------------------------------------------------------------

/// Occupancy map from one LiDAR sweep at the robot's start pose, sized to
/// cover the scenario (start, obstacles, terrain, objects) plus one meter.
inline OccupancyGrid initial_map(const Scenario& s, const SimParams& p) {
  const auto env = make_environment(s, p);
  const SimWorld w = make_world(s, env, p);
  OccupancyGrid g(p.map_resolution, Vec3::Zero(), 1, 1);
  const auto cover = [&](double x, double y) { g.ensure_contains(g.cell_of(x, y)); };
  constexpr double kMargin = 1.0;
  const auto cover_box = [&](const Vec2& lo, const Vec2& hi) {
    cover(lo.x() - kMargin, lo.y() - kMargin);
    cover(hi.x() + kMargin, hi.y() + kMargin);
  };
  cover_box(s.robot_start, s.robot_start);
  for (const Aabb& b : s.obstacles) cover_box(b.min.head<2>(), b.max.head<2>());
  for (const auto& t : s.terrain.patches) cover_box(t.min, t.max);
  for (const auto& o : s.objects) cover_box(o.position.head<2>(), o.position.head<2>());
  integrate_scan(g, lidar_scan(w, env, s, p));
  return g;
}

inline OccupancyGrid cmd_export_grid(const fs::path& path, const fs::path& stem, const SimParams& p) {
  if (!fs::exists(path)) throw IoError("path not found: " + path.string());
  const fs::path file = fs::is_directory(path) ? path / "scenario.yaml" : path;
  const Scenario s = load_scenario(file);
  OccupancyGrid g = initial_map(s, p);
  if (!stem.parent_path().empty()) {
    std::error_code ec;
    fs::create_directories(stem.parent_path(), ec);
    if (ec) throw IoError("cannot create " + stem.parent_path().string());
  }
  export_grid(g, stem);
  return g;
}

/// Maps an exception to the documented exit code and prints it.
inline int report_error(std::ostream& err) {
  try {
    throw;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kConfig;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kConfig;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace quadmanip::cli
