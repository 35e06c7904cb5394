#pragma once

#include <array>
#include <string>
#include <string_view>

#include "quadmanip/core/errors.hpp"
#include "quadmanip/geometry/geometry.hpp"

namespace quadmanip {

struct Range {
  double lo = 0.0;
  double hi = 0.0;
  bool operator==(const Range&) const = default;
  bool contains(double v) const { return v >= lo && v <= hi; }
  double width() const { return hi - lo; }
};

/// Sampling ranges for locomotion commands and end-effector targets. EE
/// position is spherical around the arm base (radius, pitch, yaw); EE
/// orientation is Euler roll/pitch/yaw.
struct CommandRanges {
  Range x, y, w;
  Range l_ee, p_ee, y_ee;
  Range alpha, beta, gamma;
  bool operator==(const CommandRanges&) const = default;

  void validate() const {
    for (const auto& f : fields())
      if (!(std::isfinite((this->*f.member).lo) && std::isfinite((this->*f.member).hi) &&
            (this->*f.member).lo <= (this->*f.member).hi))
        throw UsageError("range '" + std::string(f.name) + "' is not well ordered");
    if (!(l_ee.lo >= 0.0)) throw UsageError("EE radius range must be non-negative");
  }

  struct Field {
    std::string_view name;
    Range CommandRanges::*member;
  };
  static constexpr std::array<Field, 9> fields() {
    return {{{"x", &CommandRanges::x},
             {"y", &CommandRanges::y},
             {"w", &CommandRanges::w},
             {"l_ee", &CommandRanges::l_ee},
             {"p_ee", &CommandRanges::p_ee},
             {"y_ee", &CommandRanges::y_ee},
             {"alpha", &CommandRanges::alpha},
             {"beta", &CommandRanges::beta},
             {"gamma", &CommandRanges::gamma}}};
  }
};

inline CommandRanges train_ranges() {
  return {{-1.00, 1.00},          {-1.00, 1.00},         {-1.00, 1.00},
          {0.30, 0.65},           {-0.17 * kPi, 0.33 * kPi}, {-0.33 * kPi, 0.33 * kPi},
          {-0.50 * kPi, 0.50 * kPi}, {-0.17 * kPi, 0.50 * kPi}, {-0.50 * kPi, 0.50 * kPi}};
}

inline CommandRanges eval_ranges() {
  return {{-1.50, 1.50},          {0.00, 0.00},          {-1.50, 1.50},
          {0.20, 0.80},           {-0.50 * kPi, 0.50 * kPi}, {-0.50 * kPi, 0.50 * kPi},
          {-0.50 * kPi, 0.50 * kPi}, {-0.50 * kPi, 0.50 * kPi}, {-0.50 * kPi, 0.50 * kPi}};
}

/// Training ranges of the prior whole-body baseline, kept for comparison runs.
inline CommandRanges roboduet_ranges() {
  return {{-1.00, 1.00},          {0.00, 0.00},          {-0.60, 0.60},
          {0.30, 0.70},           {-0.45 * kPi, 0.45 * kPi}, {-0.50 * kPi, 0.50 * kPi},
          {-0.45 * kPi, 0.45 * kPi}, {-0.33 * kPi, 0.33 * kPi}, {-0.42 * kPi, 0.42 * kPi}};
}

struct RangePresets {
  CommandRanges train = train_ranges();
  CommandRanges eval = eval_ranges();
  CommandRanges roboduet = roboduet_ranges();
  bool operator==(const RangePresets&) const = default;

  const CommandRanges& get(std::string_view name) const {
    if (name == "train") return train;
    if (name == "eval") return eval;
    if (name == "roboduet") return roboduet;
    throw UsageError("unknown range preset '" + std::string(name) + "' (train, eval, roboduet)");
  }
};

}  // namespace quadmanip
