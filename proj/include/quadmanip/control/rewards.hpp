#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <optional>
#include <string_view>
#include <utility>

#include "quadmanip/control/timeline.hpp"
#include "quadmanip/geometry/geometry.hpp"

namespace quadmanip {

inline constexpr std::size_t kLegJoints = 12;
inline constexpr std::size_t kArmJoints = 6;
inline constexpr std::size_t kJoints = kLegJoints + kArmJoints;
using JointVector = std::array<double, kJoints>;

/// Joint layout: 12 leg joints, then 6 arm joints.
struct JointState {
  JointVector q{};
  JointVector qdot{};
  JointVector tau{};
};

enum class BodyPart { Base, Arm };

inline std::span<const double> part_of(const JointVector& v, BodyPart p) {
  return p == BodyPart::Base ? std::span<const double>(v.data(), kLegJoints)
                             : std::span<const double>(v.data() + kLegJoints, kArmJoints);
}

struct LocomotionCommand {
  double vx = 0.0, vy = 0.0, wz = 0.0;
};

struct EETarget {
  Vec3 position = Vec3::Zero();  // base frame
  EulerAngles orientation;
};

inline constexpr double kGaitClip = 0.04;

inline double r_track_xy(const Vec2& cmd, const Vec2& actual, double gamma_xy) {
  if (!(gamma_xy > 0)) throw UsageError("gamma_xy must be positive");
  return std::exp(-(cmd - actual).squaredNorm() / gamma_xy);
}

inline double r_track_yaw(double cmd, double actual, double gamma_w) {
  if (!(gamma_w > 0)) throw UsageError("gamma_w must be positive");
  const double e = cmd - actual;
  return std::exp(-(e * e) / gamma_w);
}

inline double r_ee_pos(const Vec3& target, const Vec3& actual) { return (target - actual).norm(); }

/// Euclidean norm of the per-axis wrapped Euler differences.
inline double r_ee_ori(const EulerAngles& target, const EulerAngles& actual) {
  const double r = wrap_angle(target.roll - actual.roll);
  const double p = wrap_angle(target.pitch - actual.pitch);
  const double y = wrap_angle(target.yaw - actual.yaw);
  return std::sqrt(r * r + p * p + y * y);
}

inline double clip_sq(double d) { return std::clamp(d * d, 0.0, kGaitClip); }

inline double sync_term(const LegContact& a, const LegContact& b) {
  return std::exp(-(clip_sq(a.air_time - b.air_time) + clip_sq(a.contact_time - b.contact_time)));
}

inline double async_term(const LegContact& a, const LegContact& b) {
  return std::exp(-(clip_sq(a.air_time - b.contact_time) + clip_sq(a.contact_time - b.air_time)));
}

inline constexpr std::array<std::pair<Leg, Leg>, 2> kSyncPairs = {{{Leg::FL, Leg::RR}, {Leg::FR, Leg::RL}}};
inline constexpr std::array<std::pair<Leg, Leg>, 4> kAsyncPairs = {
    {{Leg::FL, Leg::FR}, {Leg::FL, Leg::RL}, {Leg::FR, Leg::RR}, {Leg::RL, Leg::RR}}};

inline double r_gait(const ContactTimeline& tl) {
  double r = 1.0;
  for (const auto& [a, b] : kSyncPairs) r *= sync_term(tl.leg(a), tl.leg(b));
  for (const auto& [a, b] : kAsyncPairs) r *= async_term(tl.leg(a), tl.leg(b));
  return r;
}

/// Inverse of the latest inter-onset interval; nullopt with fewer than two onsets.
inline std::optional<double> leg_frequency(const LegContact& s) {
  if (!s.prev_onset || !s.last_onset) return std::nullopt;
  return 1.0 / (*s.last_onset - *s.prev_onset);
}

inline double r_freq(const ContactTimeline& tl, double f_target) {
  double r = 1.0;
  for (Leg l : kLegs) {
    const auto f = leg_frequency(tl.leg(l));
    if (!f) continue;
    const double e = *f - f_target;
    r *= std::exp(-0.5 * (e * e));
  }
  return r;
}

inline double squared_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

inline double r_torque(const JointState& s, BodyPart p) { return squared_norm(part_of(s.tau, p)); }
inline double r_acc(const JointVector& qddot, BodyPart p) { return squared_norm(part_of(qddot, p)); }

inline double r_power(const JointState& s, BodyPart p) {
  const auto tau = part_of(s.tau, p), qd = part_of(s.qdot, p);
  double sum = 0.0;
  for (std::size_t i = 0; i < tau.size(); ++i) sum += std::abs(tau[i]) * std::abs(qd[i]);
  return sum;
}

inline double r_smooth(const JointVector& a, const JointVector& a_prev) {
  double s = 0.0;
  for (std::size_t i = 0; i < kJoints; ++i) s += (a[i] - a_prev[i]) * (a[i] - a_prev[i]);
  return std::sqrt(s);
}

/// Values of every reward term, in weight-table order.
struct RewardTerms {
  double track_xy = 0, track_yaw = 0, ee_pos = 0, ee_ori = 0, gait = 0, freq = 0;
  double torque_base = 0, acc_base = 0, power_base = 0;
  double torque_arm = 0, acc_arm = 0, power_arm = 0;
  double smooth = 0;
};

/// Per-term weights for one curriculum stage.
struct StageWeights {
  double track_xy = 0, track_yaw = 0, ee_pos = 0, ee_ori = 0, gait = 0, freq = 0;
  double torque_base = 0, acc_base = 0, power_base = 0;
  double torque_arm = 0, acc_arm = 0, power_arm = 0;
  double smooth = 0;
  bool operator==(const StageWeights&) const = default;
};

struct TermField {
  std::string_view name;
  double RewardTerms::*value;
  double StageWeights::*weight;
};

inline constexpr std::array<TermField, 13> kRewardTermFields = {{
    {"track_xy", &RewardTerms::track_xy, &StageWeights::track_xy},
    {"track_yaw", &RewardTerms::track_yaw, &StageWeights::track_yaw},
    {"ee_pos", &RewardTerms::ee_pos, &StageWeights::ee_pos},
    {"ee_ori", &RewardTerms::ee_ori, &StageWeights::ee_ori},
    {"gait", &RewardTerms::gait, &StageWeights::gait},
    {"freq", &RewardTerms::freq, &StageWeights::freq},
    {"torque_base", &RewardTerms::torque_base, &StageWeights::torque_base},
    {"acc_base", &RewardTerms::acc_base, &StageWeights::acc_base},
    {"power_base", &RewardTerms::power_base, &StageWeights::power_base},
    {"torque_arm", &RewardTerms::torque_arm, &StageWeights::torque_arm},
    {"acc_arm", &RewardTerms::acc_arm, &StageWeights::acc_arm},
    {"power_arm", &RewardTerms::power_arm, &StageWeights::power_arm},
    {"smooth", &RewardTerms::smooth, &StageWeights::smooth},
}};

struct RewardWeights {
  StageWeights stage1{2.75, 1.50, 0.0, 0.0, 0.75, 12.5, -2.0e-4, -2.5e-7, -2.0e-5, 0.0, 0.0, 0.0, -0.02};
  StageWeights stage2{2.75, 1.50, -1.20, -1.50, 0.75, 12.5, -2.0e-4, -2.0e-7, -2.0e-5, -4.0e-4, -2.5e-6, -2.0e-4, -0.02};

  const StageWeights& stage(int s) const {
    if (s == 1) return stage1;
    if (s == 2) return stage2;
    throw UsageError("stage must be 1 or 2");
  }
  StageWeights& stage(int s) { return const_cast<StageWeights&>(std::as_const(*this).stage(s)); }
  bool operator==(const RewardWeights&) const = default;
};

/// Everything the reward library reads on one tick.
struct RewardInputs {
  LocomotionCommand command;
  LocomotionCommand actual;  // measured base velocity in the base frame
  EETarget ee_target;
  EETarget ee_actual;
  const ContactTimeline* timeline = nullptr;
  JointState joints;
  JointVector qddot{};
  JointVector action{};
  JointVector prev_action{};
};

struct RewardParams {
  double gamma_xy = 0.25;
  double gamma_yaw = 0.25;
  double f_target = 2.0;
  bool operator==(const RewardParams&) const = default;
};

inline RewardTerms compute_terms(const RewardInputs& in, const RewardParams& p) {
  if (in.timeline == nullptr) throw UsageError("reward inputs need a contact timeline");
  RewardTerms t;
  t.track_xy = r_track_xy({in.command.vx, in.command.vy}, {in.actual.vx, in.actual.vy}, p.gamma_xy);
  t.track_yaw = r_track_yaw(in.command.wz, in.actual.wz, p.gamma_yaw);
  t.ee_pos = r_ee_pos(in.ee_target.position, in.ee_actual.position);
  t.ee_ori = r_ee_ori(in.ee_target.orientation, in.ee_actual.orientation);
  t.gait = r_gait(*in.timeline);
  t.freq = r_freq(*in.timeline, p.f_target);
  t.torque_base = r_torque(in.joints, BodyPart::Base);
  t.acc_base = r_acc(in.qddot, BodyPart::Base);
  t.power_base = r_power(in.joints, BodyPart::Base);
  t.torque_arm = r_torque(in.joints, BodyPart::Arm);
  t.acc_arm = r_acc(in.qddot, BodyPart::Arm);
  t.power_arm = r_power(in.joints, BodyPart::Arm);
  t.smooth = r_smooth(in.action, in.prev_action);
  return t;
}

/// Weighted sum in table order. Zero-weight terms are skipped so a stage-1
/// total never depends on arm or EE inputs, even non-finite ones.
inline double total_reward(int stage, const RewardTerms& terms, const RewardWeights& w) {
  const StageWeights& sw = w.stage(stage);
  double sum = 0.0;
  for (const TermField& f : kRewardTermFields) {
    const double weight = sw.*(f.weight);
    if (weight != 0.0) sum += weight * (terms.*(f.value));
  }
  return sum;
}

}  // namespace quadmanip
