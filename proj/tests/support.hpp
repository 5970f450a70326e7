#pragma once

#include "streamdp/model.hpp"
#include "streamdp/policy.hpp"

namespace streamdp::testing {

// The repository's hand-checkable reference instance. Small enough that its
// stationary chains solve by hand; most golden values below derive from it.
inline ClientModel canonical_model() {
    ClientModel m;
    m.buffer_playtime = 4;
    m.play_duration = 2;
    m.quality_penalties = {0.1, 0.5};
    m.power_levels = {0.0, 1.0, 2.0};
    m.success_prob = {0.0, 0.5, 0.8,   // quality 0
                      0.0, 0.7, 0.9};  // quality 1
    m.outage_period_penalty = 2.0;
    return m;
}

inline constexpr double canonical_price = 0.1;

// Transmit (quality 0, power level 1) everywhere it fits, idle above the cap.
inline Policy canonical_baseline_policy() {
    Policy p;
    p.action_of.assign(5, Action{0, 1});
    p.action_of[4] = canonical_model().idle_action();
    p.origin = Policy::Origin::explicit_choice;
    return p;
}

} // namespace streamdp::testing
