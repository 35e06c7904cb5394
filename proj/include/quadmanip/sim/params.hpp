#pragma once

#include <string>

#include <fmt/format.h>

#include "quadmanip/core/yaml_util.hpp"
#include "quadmanip/nav/goal_search.hpp"

namespace quadmanip {

/// Kinematic stand-in for the trained policy's tracking behaviour.
struct TrackingModel {
  double tau_base = 0.1;   // s, first-order lag of base velocity
  double ee_rate = 4.0;    // 1/s, exponential EE convergence
  double sigma_pos = 0.0;  // m, per-tick EE position noise
  double sigma_ori = 0.0;  // rad, per-tick EE orientation noise
  bool operator==(const TrackingModel&) const = default;

  void validate() const {
    if (!(tau_base >= 0 && ee_rate > 0 && sigma_pos >= 0 && sigma_ori >= 0))
      throw UsageError("tracking model parameters must be non-negative (ee_rate positive)");
  }
};

struct SimParams {
  double dt = 0.02;
  TrackingModel tracking;

  double base_height = 0.30;       // nominal body height above terrain
  double footprint_radius = 0.22;  // collision disk
  double max_step = 0.15;          // terrain steps above this block the base
  double collision_resolution = 0.05;

  double map_resolution = 0.1;
  double lidar_period = 1.0;
  int lidar_beams = 720;
  double lidar_range = 8.0;
  double lidar_height = 0.1;  // above the base

  GoalSearchConfig goal_search;
  double path_inflation = 0.28;
  double lookahead = 0.3;
  double goal_tolerance = 0.1;
  double yaw_tolerance = 0.1;
  double max_speed = 0.6;
  double max_yaw_rate = 1.0;

  double attach_tolerance = 0.05;
  double attach_orientation_tolerance = 0.35;
  double pre_contact_offset = 0.10;
  double reach = 0.85;
  double place_clearance = 0.10;

  double navigate_timeout = 60.0;
  double manipulation_timeout = 20.0;

  std::string preset = "eval";  // command ranges used to clamp controller output

  bool operator==(const SimParams&) const = default;

  void validate() const {
    if (!(dt > 0)) throw UsageError("dt must be positive");
    tracking.validate();
    goal_search.validate();
    for (double v : {base_height, footprint_radius, collision_resolution, map_resolution, lidar_period, lidar_range,
                     path_inflation, lookahead, goal_tolerance, yaw_tolerance, max_speed, max_yaw_rate,
                     attach_tolerance, attach_orientation_tolerance, reach, navigate_timeout, manipulation_timeout})
      if (!(v > 0)) throw UsageError("sim parameters must be positive");
    if (!(max_step >= 0 && pre_contact_offset >= 0 && place_clearance >= 0))
      throw UsageError("sim offsets must be non-negative");
    if (lidar_beams < 1) throw UsageError("lidar needs at least one beam");
    if (preset != "train" && preset != "eval" && preset != "roboduet") throw UsageError("unknown preset '" + preset + "'");
  }
};

/// (name, member) pairs for the flat numeric keys of the `sim:` section.
struct SimField {
  const char* name;
  double SimParams::*member;
};

inline constexpr SimField kSimFields[] = {
    {"dt", &SimParams::dt},
    {"base_height", &SimParams::base_height},
    {"footprint_radius", &SimParams::footprint_radius},
    {"max_step", &SimParams::max_step},
    {"collision_resolution", &SimParams::collision_resolution},
    {"map_resolution", &SimParams::map_resolution},
    {"lidar_period", &SimParams::lidar_period},
    {"lidar_range", &SimParams::lidar_range},
    {"lidar_height", &SimParams::lidar_height},
    {"path_inflation", &SimParams::path_inflation},
    {"lookahead", &SimParams::lookahead},
    {"goal_tolerance", &SimParams::goal_tolerance},
    {"yaw_tolerance", &SimParams::yaw_tolerance},
    {"max_speed", &SimParams::max_speed},
    {"max_yaw_rate", &SimParams::max_yaw_rate},
    {"attach_tolerance", &SimParams::attach_tolerance},
    {"attach_orientation_tolerance", &SimParams::attach_orientation_tolerance},
    {"pre_contact_offset", &SimParams::pre_contact_offset},
    {"reach", &SimParams::reach},
    {"place_clearance", &SimParams::place_clearance},
    {"navigate_timeout", &SimParams::navigate_timeout},
    {"manipulation_timeout", &SimParams::manipulation_timeout},
};

inline std::string emit_sim(const SimParams& p) {
  using yaml::num;
  std::string s = "sim:\n";
  for (const SimField& f : kSimFields) s += fmt::format("  {}: {}\n", f.name, num(p.*(f.member)));
  s += fmt::format("  lidar_beams: {}\n  preset: {}\n", p.lidar_beams, p.preset);
  s += fmt::format("  tracking: {{tau_base: {}, ee_rate: {}, sigma_pos: {}, sigma_ori: {}}}\n", num(p.tracking.tau_base),
                   num(p.tracking.ee_rate), num(p.tracking.sigma_pos), num(p.tracking.sigma_ori));
  const GoalSearchConfig& g = p.goal_search;
  s += fmt::format(
      "  goal_search: {{search_radius: {}, ring_step: {}, angular_step: {}, robot_inflation: {}, bbox_inflation: {}}}\n",
      num(g.search_radius), num(g.ring_step), num(g.angular_step), num(g.robot_inflation), num(g.bbox_inflation));
  return s;
}

inline void parse_sim_into(const YAML::Node& root, SimParams& p) {
  const auto sim = yaml::optional(root, "sim");
  if (!sim) return;
  if (!sim->IsMap()) throw ParseError(yaml::where(*sim, "sim") + " must be a mapping", yaml::line_of(*sim));
  for (const auto& kv : *sim) {
    const std::string k = kv.first.Scalar();
    const YAML::Node& v = kv.second;
    if (k == "lidar_beams") {
      p.lidar_beams = static_cast<int>(yaml::as_int(v, k));
    } else if (k == "preset") {
      p.preset = yaml::as_string(v, k);
    } else if (k == "tracking") {
      yaml::check_keys(v, {"tau_base", "ee_rate", "sigma_pos", "sigma_ori"}, "sim.tracking");
      for (const auto& [name, member] : {std::pair{"tau_base", &TrackingModel::tau_base}, std::pair{"ee_rate", &TrackingModel::ee_rate},
                                         std::pair{"sigma_pos", &TrackingModel::sigma_pos}, std::pair{"sigma_ori", &TrackingModel::sigma_ori}})
        if (auto n = yaml::optional(v, name)) p.tracking.*member = yaml::as_double(*n, name);
    } else if (k == "goal_search") {
      yaml::check_keys(v, {"search_radius", "ring_step", "angular_step", "robot_inflation", "bbox_inflation"}, "sim.goal_search");
      GoalSearchConfig& g = p.goal_search;
      for (const auto& [name, member] :
           {std::pair{"search_radius", &GoalSearchConfig::search_radius}, std::pair{"ring_step", &GoalSearchConfig::ring_step},
            std::pair{"angular_step", &GoalSearchConfig::angular_step}, std::pair{"robot_inflation", &GoalSearchConfig::robot_inflation},
            std::pair{"bbox_inflation", &GoalSearchConfig::bbox_inflation}})
        if (auto n = yaml::optional(v, name)) g.*member = yaml::as_double(*n, name);
    } else {
      const auto* f = std::find_if(std::begin(kSimFields), std::end(kSimFields), [&](const SimField& s) { return k == s.name; });
      if (f == std::end(kSimFields))
        throw ValidationError(yaml::where(kv.first, "sim." + k) + ": unknown key", yaml::line_of(kv.first));
      p.*(f->member) = yaml::as_double(v, k);
    }
  }
  try {
    p.validate();
  } catch (const UsageError& e) {
    throw ValidationError(std::string("sim config: ") + e.what(), yaml::line_of(*sim));
  }
}

}  // namespace quadmanip
