#pragma once

#include <filesystem>
#include <string>

#include <fmt/format.h>

#include "quadmanip/control/policy_io.hpp"
#include "quadmanip/core/yaml_util.hpp"
#include "quadmanip/sampling/randomization.hpp"

namespace quadmanip {

struct ControlConfig {
  RewardWeights weights;
  RewardParams params;
  PdGains gains;
  HeightmapSpec heightmap;
  int stage = 2;
  bool operator==(const ControlConfig&) const = default;

  void validate() const {
    weights.stage(stage);
    if (!(params.gamma_xy > 0 && params.gamma_yaw > 0)) throw UsageError("tracking gammas must be positive");
    if (!(params.f_target > 0)) throw UsageError("f_target must be positive");
    gains.validate();
    heightmap.validate();
    for (const TermField& f : kRewardTermFields) {
      if (weights.stage1.*(f.weight) != 0.0 &&
          (f.name == "ee_pos" || f.name == "ee_ori" || f.name.ends_with("_arm")))
        throw UsageError("stage-1 weight '" + std::string(f.name) + "' must be zero");
    }
  }
};

struct SamplingConfig {
  RangePresets ranges;
  RandomizationConfig randomization;
  bool operator==(const SamplingConfig&) const = default;
  void validate() const {
    ranges.train.validate();
    ranges.eval.validate();
    ranges.roboduet.validate();
    randomization.validate();
  }
};

// ---------------------------------------------------------------------------
// YAML text. Doubles use the shortest round-trip form, so emit -> parse is exact.

inline std::string emit_control(const ControlConfig& c) {
  std::string s = "rewards:\n";
  s += fmt::format("  stage: {}\n  gamma_xy: {}\n  gamma_yaw: {}\n  f_target: {}\n", c.stage, yaml::num(c.params.gamma_xy),
                   yaml::num(c.params.gamma_yaw), yaml::num(c.params.f_target));
  s += "  weights:  # [stage 1, stage 2]\n";
  for (const TermField& f : kRewardTermFields)
    s += fmt::format("    {}: [{}, {}]\n", f.name, yaml::num(c.weights.stage1.*(f.weight)),
                     yaml::num(c.weights.stage2.*(f.weight)));
  s += fmt::format("pd:\n  kp_leg: {}\n  kp_arm: {}\n  kd: {}\n", yaml::num(c.gains.kp_leg), yaml::num(c.gains.kp_arm),
                   yaml::num(c.gains.kd));
  s += fmt::format("heightmap:\n  rows: {}\n  cols: {}\n  spacing: {}\n", c.heightmap.rows, c.heightmap.cols,
                   yaml::num(c.heightmap.spacing));
  return s;
}

inline std::string emit_ranges(const CommandRanges& r, const std::string& indent) {
  std::string s;
  for (const auto& f : CommandRanges::fields())
    s += fmt::format("{}{}: [{}, {}]\n", indent, f.name, yaml::num((r.*f.member).lo), yaml::num((r.*f.member).hi));
  return s;
}

inline std::string emit_sampling(const SamplingConfig& c) {
  std::string s = "command_ranges:\n";
  s += "  train:\n" + emit_ranges(c.ranges.train, "    ");
  s += "  eval:\n" + emit_ranges(c.ranges.eval, "    ");
  s += "  roboduet:\n" + emit_ranges(c.ranges.roboduet, "    ");
  s += "randomization:\n";
  for (const auto& f : RandomizationConfig::fields()) {
    const RandEntry& e = c.randomization.*f.member;
    s += fmt::format("  {}: {{range: [{}, {}], method: {}}}\n", f.name, yaml::num(e.range.lo), yaml::num(e.range.hi),
                     to_string(e.method));
  }
  s += fmt::format("  push_interval: {}\n  push_jitter: {}\n  push_duration: {}\n",
                   yaml::num(c.randomization.push_interval), yaml::num(c.randomization.push_jitter),
                   yaml::num(c.randomization.push_duration));
  return s;
}

using yaml::check_keys;

inline void read_double(const YAML::Node& parent, const char* key, double& out) {
  if (auto n = yaml::optional(parent, key)) out = yaml::as_double(*n, key);
}

inline Range read_range(const YAML::Node& n, const std::string& field) {
  const auto v = yaml::as_doubles(n, field);
  if (v.size() != 2) throw ParseError(yaml::where(n, field) + " must be [lo, hi]", yaml::line_of(n));
  if (!(v[0] <= v[1])) throw ValidationError(yaml::where(n, field) + " has lo > hi", yaml::line_of(n));
  return {v[0], v[1]};
}

inline void parse_control_into(const YAML::Node& root, ControlConfig& c) {
  if (auto r = yaml::optional(root, "rewards")) {
    check_keys(*r, {"stage", "gamma_xy", "gamma_yaw", "f_target", "weights"}, "rewards");
    if (auto st = yaml::optional(*r, "stage")) c.stage = static_cast<int>(yaml::as_int(*st, "stage"));
    read_double(*r, "gamma_xy", c.params.gamma_xy);
    read_double(*r, "gamma_yaw", c.params.gamma_yaw);
    read_double(*r, "f_target", c.params.f_target);
    if (auto w = yaml::optional(*r, "weights")) {
      if (!w->IsMap()) throw ParseError(yaml::where(*w, "weights") + " must be a mapping", yaml::line_of(*w));
      for (const auto& kv : *w) {
        const std::string name = kv.first.Scalar();
        const auto it = std::find_if(kRewardTermFields.begin(), kRewardTermFields.end(),
                                     [&](const TermField& f) { return f.name == name; });
        if (it == kRewardTermFields.end())
          throw ValidationError(yaml::where(kv.first, "weights." + name) + ": unknown reward term", yaml::line_of(kv.first));
        const auto v = yaml::as_doubles(kv.second, name);
        if (v.size() != 2) throw ParseError(yaml::where(kv.second, name) + " must be [stage1, stage2]", yaml::line_of(kv.second));
        c.weights.stage1.*(it->weight) = v[0];
        c.weights.stage2.*(it->weight) = v[1];
      }
    }
  }
  if (auto p = yaml::optional(root, "pd")) {
    check_keys(*p, {"kp_leg", "kp_arm", "kd"}, "pd");
    read_double(*p, "kp_leg", c.gains.kp_leg);
    read_double(*p, "kp_arm", c.gains.kp_arm);
    read_double(*p, "kd", c.gains.kd);
  }
  if (auto h = yaml::optional(root, "heightmap")) {
    check_keys(*h, {"rows", "cols", "spacing"}, "heightmap");
    if (auto n = yaml::optional(*h, "rows")) c.heightmap.rows = static_cast<int>(yaml::as_int(*n, "rows"));
    if (auto n = yaml::optional(*h, "cols")) c.heightmap.cols = static_cast<int>(yaml::as_int(*n, "cols"));
    read_double(*h, "spacing", c.heightmap.spacing);
  }
  try {
    c.validate();
  } catch (const UsageError& e) {
    throw ValidationError(std::string("control config: ") + e.what(), yaml::line_of(root));
  }
}

inline void parse_ranges_into(const YAML::Node& n, CommandRanges& r, const std::string& preset) {
  if (!n.IsMap()) throw ParseError(yaml::where(n, preset) + " must be a mapping", yaml::line_of(n));
  for (const auto& kv : n) {
    const std::string name = kv.first.Scalar();
    const auto fs = CommandRanges::fields();
    const auto it = std::find_if(fs.begin(), fs.end(), [&](const auto& f) { return f.name == name; });
    if (it == fs.end()) throw ValidationError(yaml::where(kv.first, preset + "." + name) + ": unknown range", yaml::line_of(kv.first));
    r.*(it->member) = read_range(kv.second, preset + "." + name);
  }
}

inline void parse_sampling_into(const YAML::Node& root, SamplingConfig& c) {
  if (auto cr = yaml::optional(root, "command_ranges")) {
    check_keys(*cr, {"train", "eval", "roboduet"}, "command_ranges");
    if (auto n = yaml::optional(*cr, "train")) parse_ranges_into(*n, c.ranges.train, "train");
    if (auto n = yaml::optional(*cr, "eval")) parse_ranges_into(*n, c.ranges.eval, "eval");
    if (auto n = yaml::optional(*cr, "roboduet")) parse_ranges_into(*n, c.ranges.roboduet, "roboduet");
  }
  if (auto rz = yaml::optional(root, "randomization")) {
    if (!rz->IsMap()) throw ParseError(yaml::where(*rz, "randomization") + " must be a mapping", yaml::line_of(*rz));
    RandomizationConfig& r = c.randomization;
    for (const auto& kv : *rz) {
      const std::string name = kv.first.Scalar();
      if (name == "push_interval") r.push_interval = yaml::as_double(kv.second, name);
      else if (name == "push_jitter") r.push_jitter = yaml::as_double(kv.second, name);
      else if (name == "push_duration") r.push_duration = yaml::as_double(kv.second, name);
      else {
        const auto fs = RandomizationConfig::fields();
        const auto it = std::find_if(fs.begin(), fs.end(), [&](const auto& f) { return f.name == name; });
        if (it == fs.end())
          throw ValidationError(yaml::where(kv.first, "randomization." + name) + ": unknown parameter", yaml::line_of(kv.first));
        RandEntry& e = r.*(it->member);
        e.range = read_range(yaml::require(kv.second, "range"), name + ".range");
        if (auto m = yaml::optional(kv.second, "method")) {
          try {
            e.method = rand_method_from(yaml::as_string(*m, "method"));
          } catch (const UsageError& err) {
            throw ValidationError(yaml::where(*m, name + ".method") + ": " + err.what(), yaml::line_of(*m));
          }
        }
      }
    }
  }
  try {
    c.validate();
  } catch (const UsageError& e) {
    throw ValidationError(std::string("sampling config: ") + e.what(), yaml::line_of(root));
  }
}

}  // namespace quadmanip
