#pragma once

/**
 * @brief Recorded timelines (CSV) and offline reward evaluation.
 *
 * A timeline has one row per tick. Required columns: `t` and
 * `contact_fl, contact_fr, contact_rl, contact_rr` (0/1). Optional columns,
 * zero when absent:
 *   cmd_vx cmd_vy cmd_wz, vel_vx vel_vy vel_wz,
 *   ee_target_{x,y,z,roll,pitch,yaw}, ee_{x,y,z,roll,pitch,yaw},
 *   q_<i> qdot_<i> tau_<i> qddot_<i> action_<i> for joint i in [0, 18).
 * Blank lines and lines starting with '#' are skipped. The previous action
 * of the first row is zero.
 */

#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "quadmanip/control/rewards.hpp"

namespace quadmanip {

struct TimelineRow {
  double t = 0.0;
  std::array<bool, 4> contact{};
  LocomotionCommand command;
  LocomotionCommand actual;
  EETarget ee_target;
  EETarget ee_actual;
  JointState joints;
  JointVector qddot{};
  JointVector action{};
};

struct RewardTraceRow {
  double t = 0.0;
  RewardTerms terms;
  double total_stage1 = 0.0;
  double total_stage2 = 0.0;
};

namespace detail {

inline std::string trim_copy(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(trim_copy(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) return out;
    start = comma + 1;
  }
}

using RowSetter = void (*)(TimelineRow&, std::size_t, double);

/// Column name -> (setter, joint index).
inline const std::map<std::string, std::pair<RowSetter, std::size_t>>& timeline_columns() {
  static const auto table = [] {
    std::map<std::string, std::pair<RowSetter, std::size_t>> m;
    m["t"] = {[](TimelineRow& r, std::size_t, double v) { r.t = v; }, 0};
    const char* legs[] = {"fl", "fr", "rl", "rr"};
    for (std::size_t l = 0; l < 4; ++l)
      m[std::string("contact_") + legs[l]] = {[](TimelineRow& r, std::size_t i, double v) { r.contact[i] = v != 0.0; }, l};
    m["cmd_vx"] = {[](TimelineRow& r, std::size_t, double v) { r.command.vx = v; }, 0};
    m["cmd_vy"] = {[](TimelineRow& r, std::size_t, double v) { r.command.vy = v; }, 0};
    m["cmd_wz"] = {[](TimelineRow& r, std::size_t, double v) { r.command.wz = v; }, 0};
    m["vel_vx"] = {[](TimelineRow& r, std::size_t, double v) { r.actual.vx = v; }, 0};
    m["vel_vy"] = {[](TimelineRow& r, std::size_t, double v) { r.actual.vy = v; }, 0};
    m["vel_wz"] = {[](TimelineRow& r, std::size_t, double v) { r.actual.wz = v; }, 0};
    for (std::size_t k = 0; k < 3; ++k) {
      const char* axis[] = {"x", "y", "z"};
      m[std::string("ee_target_") + axis[k]] = {[](TimelineRow& r, std::size_t i, double v) { r.ee_target.position[i] = v; }, k};
      m[std::string("ee_") + axis[k]] = {[](TimelineRow& r, std::size_t i, double v) { r.ee_actual.position[i] = v; }, k};
    }
    m["ee_target_roll"] = {[](TimelineRow& r, std::size_t, double v) { r.ee_target.orientation.roll = v; }, 0};
    m["ee_target_pitch"] = {[](TimelineRow& r, std::size_t, double v) { r.ee_target.orientation.pitch = v; }, 0};
    m["ee_target_yaw"] = {[](TimelineRow& r, std::size_t, double v) { r.ee_target.orientation.yaw = v; }, 0};
    m["ee_roll"] = {[](TimelineRow& r, std::size_t, double v) { r.ee_actual.orientation.roll = v; }, 0};
    m["ee_pitch"] = {[](TimelineRow& r, std::size_t, double v) { r.ee_actual.orientation.pitch = v; }, 0};
    m["ee_yaw"] = {[](TimelineRow& r, std::size_t, double v) { r.ee_actual.orientation.yaw = v; }, 0};
    for (std::size_t j = 0; j < kJoints; ++j) {
      m[fmt::format("q_{}", j)] = {[](TimelineRow& r, std::size_t i, double v) { r.joints.q[i] = v; }, j};
      m[fmt::format("qdot_{}", j)] = {[](TimelineRow& r, std::size_t i, double v) { r.joints.qdot[i] = v; }, j};
      m[fmt::format("tau_{}", j)] = {[](TimelineRow& r, std::size_t i, double v) { r.joints.tau[i] = v; }, j};
      m[fmt::format("qddot_{}", j)] = {[](TimelineRow& r, std::size_t i, double v) { r.qddot[i] = v; }, j};
      m[fmt::format("action_{}", j)] = {[](TimelineRow& r, std::size_t i, double v) { r.action[i] = v; }, j};
    }
    return m;
  }();
  return table;
}

}  // namespace detail

inline std::vector<TimelineRow> parse_timeline(std::istream& in) {
  const auto& columns = detail::timeline_columns();
  std::vector<std::pair<detail::RowSetter, std::size_t>> setters;
  std::vector<TimelineRow> rows;
  std::string line;
  int line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string s = detail::trim_copy(line);
    if (s.empty() || s.front() == '#') continue;
    const auto cells = detail::split_csv(s);
    if (!have_header) {
      std::set<std::string> seen;
      for (const std::string& c : cells) {
        const auto it = columns.find(c);
        if (it == columns.end()) throw ParseError(fmt::format("line {}: unknown column '{}'", line_no, c), line_no);
        if (!seen.insert(c).second) throw ParseError(fmt::format("line {}: duplicate column '{}'", line_no, c), line_no);
        setters.push_back(it->second);
      }
      for (const char* req : {"t", "contact_fl", "contact_fr", "contact_rl", "contact_rr"})
        if (!seen.count(req)) throw ParseError(fmt::format("line {}: missing column '{}'", line_no, req), line_no);
      have_header = true;
      continue;
    }
    if (cells.size() != setters.size())
      throw ParseError(fmt::format("line {}: expected {} fields, got {}", line_no, setters.size(), cells.size()), line_no);
    TimelineRow row;
    for (std::size_t k = 0; k < cells.size(); ++k) {
      double v = 0.0;
      const char* b = cells[k].data();
      const char* e = b + cells[k].size();
      const auto [ptr, ec] = std::from_chars(b, e, v);
      if (ec != std::errc() || ptr != e || cells[k].empty())
        throw ParseError(fmt::format("line {}: field {} is not a number: '{}'", line_no, k + 1, cells[k]), line_no);
      setters[k].first(row, setters[k].second, v);
    }
    if (!rows.empty() && !(row.t > rows.back().t))
      throw ParseError(fmt::format("line {}: time must be strictly increasing", line_no), line_no);
    rows.push_back(row);
  }
  return rows;
}

inline std::vector<TimelineRow> load_timeline(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read timeline: " + path.string());
  return parse_timeline(in);
}

/// Replays the contact flags through a ContactTimeline and evaluates every
/// term plus both stage totals per row.
inline std::vector<RewardTraceRow> evaluate_timeline(std::span<const TimelineRow> rows, const RewardWeights& w,
                                                     const RewardParams& p) {
  std::vector<RewardTraceRow> out;
  if (rows.empty()) return out;
  ContactTimeline tl(rows.front().contact);
  JointVector prev_action{};
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const TimelineRow& r = rows[k];
    if (k > 0) tl.update(r.contact, r.t, r.t - rows[k - 1].t);
    RewardInputs in{r.command, r.actual, r.ee_target, r.ee_actual, &tl, r.joints, r.qddot, r.action, prev_action};
    RewardTraceRow o;
    o.t = r.t;
    o.terms = compute_terms(in, p);
    o.total_stage1 = total_reward(1, o.terms, w);
    o.total_stage2 = total_reward(2, o.terms, w);
    out.push_back(o);
    prev_action = r.action;
  }
  return out;
}

inline std::string reward_trace_csv(std::span<const RewardTraceRow> rows) {
  std::string out = "t";
  for (const TermField& f : kRewardTermFields) out += fmt::format(",r_{}", f.name);
  out += ",total_stage1,total_stage2\n";
  for (const RewardTraceRow& r : rows) {
    out += fmt::format("{}", r.t);
    for (const TermField& f : kRewardTermFields) out += fmt::format(",{}", r.terms.*(f.value));
    out += fmt::format(",{},{}\n", r.total_stage1, r.total_stage2);
  }
  return out;
}

}  // namespace quadmanip
