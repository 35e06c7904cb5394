#pragma once

#include <map>
#include <span>

#include <json.hpp>

#include "quadmanip/planning/monitors.hpp"

namespace quadmanip {

/// Tracking errors are SI (m/s, rad/s, m, rad). The JSON export adds the
/// velocity errors scaled by 100, the convention used for published tables.
struct MetricsReport {
  int episodes = 0;
  int successful_episodes = 0;
  double e_x = 0.0, e_y = 0.0, e_w = 0.0;
  double d_pos = 0.0, d_ori = 0.0;
  std::map<ActionKind, ActionRate> per_action;

  double overall() const { return episodes > 0 ? static_cast<double>(successful_episodes) / episodes : 0.0; }
};

/// Running means for one episode.
struct TrackingAccumulator {
  double sx = 0, sy = 0, sw = 0, sp = 0, so = 0;
  long long base_ticks = 0, ee_ticks = 0;

  void add_base(const LocomotionCommand& cmd, const LocomotionCommand& actual) {
    sx += std::abs(cmd.vx - actual.vx);
    sy += std::abs(cmd.vy - actual.vy);
    sw += std::abs(cmd.wz - actual.wz);
    ++base_ticks;
  }
  void add_ee(const Pose& target, const Pose& actual) {
    sp += (target.position - actual.position).norm();
    so += quat_geodesic_distance(target.orientation, actual.orientation);
    ++ee_ticks;
  }
};

inline MetricsReport episode_metrics(const TrackingAccumulator& acc, const MonitorReport& monitors) {
  MetricsReport r;
  r.episodes = 1;
  r.successful_episodes = monitors.overall ? 1 : 0;
  if (acc.base_ticks > 0) {
    const double n = static_cast<double>(acc.base_ticks);
    r.e_x = acc.sx / n;
    r.e_y = acc.sy / n;
    r.e_w = acc.sw / n;
  }
  if (acc.ee_ticks > 0) {
    r.d_pos = acc.sp / static_cast<double>(acc.ee_ticks);
    r.d_ori = acc.so / static_cast<double>(acc.ee_ticks);
  }
  r.per_action = monitors.per_action;
  return r;
}

/// Episode-weighted means of the error metrics; success counts are summed.
inline MetricsReport aggregate(std::span<const MetricsReport> reports) {
  if (reports.empty()) throw UsageError("aggregate needs at least one report");
  MetricsReport out;
  double ex = 0, ey = 0, ew = 0, dp = 0, dor = 0;
  for (const MetricsReport& r : reports) {
    const double n = r.episodes;
    out.episodes += r.episodes;
    out.successful_episodes += r.successful_episodes;
    ex += n * r.e_x;
    ey += n * r.e_y;
    ew += n * r.e_w;
    dp += n * r.d_pos;
    dor += n * r.d_ori;
    for (const auto& [k, a] : r.per_action) {
      out.per_action[k].completed += a.completed;
      out.per_action[k].total += a.total;
    }
  }
  if (out.episodes > 0) {
    const double n = out.episodes;
    out.e_x = ex / n;
    out.e_y = ey / n;
    out.e_w = ew / n;
    out.d_pos = dp / n;
    out.d_ori = dor / n;
  }
  return out;
}

inline nlohmann::json to_json(const MetricsReport& r) {
  nlohmann::json j;
  j["episodes"] = r.episodes;
  j["successful_episodes"] = r.successful_episodes;
  j["overall_success_rate"] = r.overall();
  j["tracking"] = {{"e_x", r.e_x},          {"e_y", r.e_y},          {"e_w", r.e_w},
                   {"e_x_x100", 100 * r.e_x}, {"e_y_x100", 100 * r.e_y}, {"e_w_x100", 100 * r.e_w},
                   {"d_pos", r.d_pos},      {"d_ori", r.d_ori}};
  j["actions"] = nlohmann::json::object();
  for (const auto& [k, a] : r.per_action)
    j["actions"][std::string(to_string(k))] = {{"completed", a.completed}, {"total", a.total}, {"rate", a.rate()}};
  return j;
}

}  // namespace quadmanip
