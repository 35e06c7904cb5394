#pragma once

#include <span>
#include <vector>

#include "quadmanip/control/rewards.hpp"

namespace quadmanip {

struct PdGains {
  double kp_leg = 20.0;  // N*m/rad
  double kp_arm = 25.0;
  double kd = 0.5;
  bool operator==(const PdGains&) const = default;

  void validate() const {
    if (!(kp_leg > 0 && kp_arm > 0 && kd > 0)) throw UsageError("PD gains must be positive");
  }
  JointVector kp_vector() const {
    JointVector kp{};
    for (std::size_t i = 0; i < kJoints; ++i) kp[i] = i < kLegJoints ? kp_leg : kp_arm;
    return kp;
  }
  JointVector kd_vector() const {
    JointVector kd_v{};
    kd_v.fill(kd);
    return kd_v;
  }
};

inline void require_joint_length(std::span<const double> v, const char* what) {
  if (v.size() != kJoints) throw UsageError(std::string(what) + " must have 18 entries");
}

/// tau = Kp * (q_target - q) - Kd * qdot, elementwise.
inline JointVector pd_torque(std::span<const double> q_target, std::span<const double> q, std::span<const double> qdot,
                             std::span<const double> kp, std::span<const double> kd) {
  require_joint_length(q_target, "q_target");
  require_joint_length(q, "q");
  require_joint_length(qdot, "qdot");
  require_joint_length(kp, "kp");
  require_joint_length(kd, "kd");
  JointVector tau{};
  for (std::size_t i = 0; i < kJoints; ++i) {
    if (!(kp[i] > 0 && kd[i] > 0)) throw UsageError("PD gains must be positive");
    tau[i] = kp[i] * (q_target[i] - q[i]) - kd[i] * qdot[i];
  }
  return tau;
}

inline JointVector pd_torque(const JointVector& q_target, const JointState& s, const PdGains& g) {
  return pd_torque(q_target, s.q, s.qdot, g.kp_vector(), g.kd_vector());
}

/// Actions are offsets from the default joint configuration.
inline JointVector apply_action(std::span<const double> a, std::span<const double> q_default) {
  require_joint_length(a, "action");
  require_joint_length(q_default, "default joint configuration");
  JointVector q{};
  for (std::size_t i = 0; i < kJoints; ++i) q[i] = q_default[i] + a[i];
  return q;
}

struct HeightmapSpec {
  int rows = 11;
  int cols = 11;
  double spacing = 0.1;  // meters, grid centered on the base
  bool operator==(const HeightmapSpec&) const = default;
  std::size_t size() const { return static_cast<std::size_t>(rows) * cols; }
  void validate() const {
    if (rows < 1 || cols < 1 || !(spacing > 0)) throw UsageError("heightmap geometry must be positive");
  }
};

/// Sample point (base-yaw frame offsets) for heightmap cell (r, c), row-major.
inline Vec2 heightmap_offset(const HeightmapSpec& spec, int r, int c) {
  return {(c - (spec.cols - 1) / 2.0) * spec.spacing, (r - (spec.rows - 1) / 2.0) * spec.spacing};
}

inline std::size_t observation_size(const HeightmapSpec& spec) { return 66 + spec.size(); }

/// Layout: command (3) | EE target xyz + roll pitch yaw (6) | q (18) | qdot (18)
/// | projected gravity (3) | heightmap rows x cols, row-major | previous action (18).
inline std::vector<double> assemble_observation(const LocomotionCommand& c, const EETarget& e, const JointState& s,
                                                const Vec3& gravity, std::span<const double> heightmap,
                                                const HeightmapSpec& spec, std::span<const double> a_prev) {
  if (heightmap.size() != spec.size()) throw UsageError("heightmap size does not match its spec");
  require_joint_length(a_prev, "previous action");
  std::vector<double> o;
  o.reserve(observation_size(spec));
  o.insert(o.end(), {c.vx, c.vy, c.wz});
  o.insert(o.end(), {e.position.x(), e.position.y(), e.position.z(), e.orientation.roll, e.orientation.pitch,
                     e.orientation.yaw});
  o.insert(o.end(), s.q.begin(), s.q.end());
  o.insert(o.end(), s.qdot.begin(), s.qdot.end());
  o.insert(o.end(), {gravity.x(), gravity.y(), gravity.z()});
  o.insert(o.end(), heightmap.begin(), heightmap.end());
  o.insert(o.end(), a_prev.begin(), a_prev.end());
  return o;
}

}  // namespace quadmanip
