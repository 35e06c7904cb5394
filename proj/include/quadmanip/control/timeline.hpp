#pragma once

#include <array>
#include <cmath>
#include <optional>

#include "quadmanip/core/errors.hpp"

namespace quadmanip {

enum class Leg { FL = 0, FR = 1, RL = 2, RR = 3 };
inline constexpr std::array<Leg, 4> kLegs = {Leg::FL, Leg::FR, Leg::RL, Leg::RR};

struct LegContact {
  bool in_contact = false;
  double air_time = 0.0;
  double contact_time = 0.0;
  std::optional<double> prev_onset;  // t_{k-1}
  std::optional<double> last_onset;  // t_k
};

/// Per-leg air/contact bookkeeping. On a state change both timers reset;
/// afterwards only the active timer accumulates dt. Each air-to-contact
/// transition records a contact onset at the tick time.
class ContactTimeline {
 public:
  ContactTimeline() = default;
  explicit ContactTimeline(const std::array<bool, 4>& initial) {
    for (Leg l : kLegs) legs_[idx(l)].in_contact = initial[idx(l)];
  }

  const LegContact& leg(Leg l) const { return legs_[idx(l)]; }
  LegContact& leg(Leg l) { return legs_[idx(l)]; }

  void update(const std::array<bool, 4>& contact, double t, double dt) {
    if (!(dt > 0.0)) throw UsageError("timeline step must be positive");
    for (Leg l : kLegs) {
      LegContact& s = legs_[idx(l)];
      const bool c = contact[idx(l)];
      if (c != s.in_contact) {
        s.air_time = 0.0;
        s.contact_time = 0.0;
        if (c) {
          if (s.last_onset && !(t > *s.last_onset)) throw UsageError("contact onsets must be strictly increasing");
          s.prev_onset = s.last_onset;
          s.last_onset = t;
        }
        s.in_contact = c;
      }
      (c ? s.contact_time : s.air_time) += dt;
    }
  }

  static constexpr std::size_t idx(Leg l) { return static_cast<std::size_t>(l); }

 private:
  std::array<LegContact, 4> legs_{};
};

/// Periodic 50% duty-cycle contact schedule: leg is in contact during the
/// first half of each period, shifted by `phase` (fraction of a period).
inline bool periodic_contact(double t, double period, double phase) {
  const double x = t / period + phase;
  const double frac = x - std::floor(x);
  return frac < 0.5;
}

}  // namespace quadmanip
