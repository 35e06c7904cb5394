#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "quadmanip/sampling/samplers.hpp"

namespace quadmanip {

/// set: value drawn directly; add: nominal + delta; scale: nominal * factor;
/// interval: recurring events (base pushes).
enum class RandMethod { Set, Add, Scale, Interval };

inline std::string_view to_string(RandMethod m) {
  switch (m) {
    case RandMethod::Set: return "set";
    case RandMethod::Add: return "add";
    case RandMethod::Scale: return "scale";
    case RandMethod::Interval: return "interval";
  }
  return "?";
}

inline RandMethod rand_method_from(std::string_view s) {
  for (RandMethod m : {RandMethod::Set, RandMethod::Add, RandMethod::Scale, RandMethod::Interval})
    if (to_string(m) == s) return m;
  throw UsageError("unknown randomization method '" + std::string(s) + "'");
}

struct RandEntry {
  Range range;
  RandMethod method = RandMethod::Add;
  bool operator==(const RandEntry&) const = default;
};

struct RandomizationConfig {
  RandEntry friction{{0.4, 2.0}, RandMethod::Set};
  RandEntry base_mass{{-5.0, 5.0}, RandMethod::Add};  // kg
  RandEntry push_vx{{-0.5, 0.5}, RandMethod::Interval};  // m/s
  RandEntry push_vy{{-0.5, 0.5}, RandMethod::Interval};
  RandEntry actuator_gains{{0.8, 1.2}, RandMethod::Scale};
  RandEntry ee_link_mass{{0.0, 0.2}, RandMethod::Add};  // kg
  RandEntry joint_reset{{0.5, 1.5}, RandMethod::Scale};
  RandEntry reset_x{{-0.5, 0.5}, RandMethod::Add};
  RandEntry reset_y{{-0.5, 0.5}, RandMethod::Add};
  RandEntry reset_heading{{-kPi, kPi}, RandMethod::Add};
  RandEntry reset_vx{{-0.5, 0.5}, RandMethod::Add};
  RandEntry reset_vy{{-0.5, 0.5}, RandMethod::Add};
  RandEntry reset_vz{{-0.5, 0.5}, RandMethod::Add};
  RandEntry reset_roll{{-0.5, 0.5}, RandMethod::Add};
  RandEntry reset_pitch{{-0.5, 0.5}, RandMethod::Add};
  RandEntry reset_yaw{{-0.5, 0.5}, RandMethod::Add};
  double push_interval = 5.0;  // seconds between pushes
  double push_jitter = 1.0;    // +- seconds
  double push_duration = 0.5;  // seconds
  bool operator==(const RandomizationConfig&) const = default;

  struct Field {
    std::string_view name;
    RandEntry RandomizationConfig::*member;
  };
  static constexpr std::array<Field, 16> fields() {
    return {{{"friction", &RandomizationConfig::friction},
             {"base_mass", &RandomizationConfig::base_mass},
             {"push_vx", &RandomizationConfig::push_vx},
             {"push_vy", &RandomizationConfig::push_vy},
             {"actuator_gains", &RandomizationConfig::actuator_gains},
             {"ee_link_mass", &RandomizationConfig::ee_link_mass},
             {"joint_reset", &RandomizationConfig::joint_reset},
             {"reset_x", &RandomizationConfig::reset_x},
             {"reset_y", &RandomizationConfig::reset_y},
             {"reset_heading", &RandomizationConfig::reset_heading},
             {"reset_vx", &RandomizationConfig::reset_vx},
             {"reset_vy", &RandomizationConfig::reset_vy},
             {"reset_vz", &RandomizationConfig::reset_vz},
             {"reset_roll", &RandomizationConfig::reset_roll},
             {"reset_pitch", &RandomizationConfig::reset_pitch},
             {"reset_yaw", &RandomizationConfig::reset_yaw}}};
  }

  void validate() const {
    for (const auto& f : fields()) {
      const Range& r = (this->*f.member).range;
      if (!(std::isfinite(r.lo) && std::isfinite(r.hi) && r.lo <= r.hi))
        throw UsageError("randomization range '" + std::string(f.name) + "' is not well ordered");
    }
    if (!(push_interval > 0 && push_jitter >= 0 && push_jitter < push_interval && push_duration > 0))
      throw UsageError("push schedule parameters are invalid");
  }
};

/// Physical quantities before randomization.
struct NominalPhysics {
  double friction = 1.0;
  double base_mass = 12.0;    // kg
  double ee_link_mass = 0.5;  // kg
  double actuator_gain = 1.0;
};

struct PushEvent {
  double time = 0.0;
  double duration = 0.0;
  double vx = 0.0, vy = 0.0;
};

struct BaseReset {
  double x = 0, y = 0, heading = 0;
  double vx = 0, vy = 0, vz = 0;
  double roll = 0, pitch = 0, yaw = 0;
};

struct EpisodeRandomization {
  double friction = 1.0;
  double base_mass = 0.0;
  double ee_link_mass = 0.0;
  double actuator_gain = 1.0;
  double base_mass_delta = 0.0;
  double ee_link_mass_delta = 0.0;
  double actuator_gain_scale = 1.0;
  double joint_reset_scale = 1.0;
  BaseReset reset;
  std::vector<PushEvent> pushes;
};

namespace detail {
inline double apply_method(RandMethod m, double nominal, double drawn) {
  switch (m) {
    case RandMethod::Set: return drawn;
    case RandMethod::Add: return nominal + drawn;
    case RandMethod::Scale: return nominal * drawn;
    case RandMethod::Interval: break;
  }
  return drawn;
}
}  // namespace detail

/// Draws, in order: friction, base mass, actuator gains, EE link mass, joint
/// reset, the nine base-reset values, then push events until `horizon`.
template <UniformSource Rng>
EpisodeRandomization sample_episode_randomization(Rng& rng, const RandomizationConfig& cfg, double horizon,
                                                  const NominalPhysics& nominal = {}) {
  cfg.validate();
  EpisodeRandomization out;
  const double fr = draw(rng, cfg.friction.range);
  out.friction = detail::apply_method(cfg.friction.method, nominal.friction, fr);
  out.base_mass_delta = draw(rng, cfg.base_mass.range);
  out.base_mass = detail::apply_method(cfg.base_mass.method, nominal.base_mass, out.base_mass_delta);
  out.actuator_gain_scale = draw(rng, cfg.actuator_gains.range);
  out.actuator_gain = detail::apply_method(cfg.actuator_gains.method, nominal.actuator_gain, out.actuator_gain_scale);
  out.ee_link_mass_delta = draw(rng, cfg.ee_link_mass.range);
  out.ee_link_mass = detail::apply_method(cfg.ee_link_mass.method, nominal.ee_link_mass, out.ee_link_mass_delta);
  out.joint_reset_scale = draw(rng, cfg.joint_reset.range);
  BaseReset& r = out.reset;
  r.x = draw(rng, cfg.reset_x.range);
  r.y = draw(rng, cfg.reset_y.range);
  r.heading = draw(rng, cfg.reset_heading.range);
  r.vx = draw(rng, cfg.reset_vx.range);
  r.vy = draw(rng, cfg.reset_vy.range);
  r.vz = draw(rng, cfg.reset_vz.range);
  r.roll = draw(rng, cfg.reset_roll.range);
  r.pitch = draw(rng, cfg.reset_pitch.range);
  r.yaw = draw(rng, cfg.reset_yaw.range);
  for (int k = 1;; ++k) {
    const double t = k * cfg.push_interval + rng.uniform(-cfg.push_jitter, cfg.push_jitter);
    if (t >= horizon) break;
    out.pushes.push_back({t, cfg.push_duration, draw(rng, cfg.push_vx.range), draw(rng, cfg.push_vy.range)});
  }
  return out;
}

}  // namespace quadmanip
