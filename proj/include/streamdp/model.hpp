#pragma once

#include <optional>
#include <string>
#include <vector>

namespace streamdp {

/// Remaining play-time in a client's buffer, in slots. Valid range is
/// {0, 1, ..., B} where B is ClientModel::buffer_playtime.
using ClientState = int;

/// A control choice: which video quality to request and at which power
/// level to transmit. Both are zero-based indices into the model's menus.
/// The pair (quality = Q-1, power = 0) is the canonical idle action; any
/// other action with power 0 is rejected at policy construction.
struct Action {
    int quality = 0;
    int power = 0;

    friend bool operator==(const Action& a, const Action& b) {
        return a.quality == b.quality && a.power == b.power;
    }
    friend bool operator!=(const Action& a, const Action& b) { return !(a == b); }
};

/// One client's streaming problem data.
///
/// The buffer is measured directly in play-time slots (a buffer of n packets
/// playing T slots each is stored as buffer_playtime = n * T). Quality
/// penalties are strictly increasing: a higher quality index means a coarser
/// stream, which costs more penalty per delivered packet but succeeds more
/// often. The first power level is always 0 and never delivers.
struct ClientModel {
    int buffer_playtime = 0;                ///< B >= 1, in play-time slots
    int play_duration = 0;                  ///< T >= 1, slots gained per delivery
    std::vector<double> quality_penalties;  ///< per-delivery penalty, strictly increasing
    std::vector<double> power_levels;       ///< energy per attempt, strictly increasing, first = 0
    std::vector<double> success_prob;       ///< Q x K row-major, nondecreasing in both indices
    double outage_period_penalty = 0.0;     ///< charged when a new outage period begins

    int num_qualities() const { return static_cast<int>(quality_penalties.size()); }
    int num_power_levels() const { return static_cast<int>(power_levels.size()); }

    double success(int quality, int power) const {
        return success_prob[static_cast<std::size_t>(quality) * power_levels.size() +
                            static_cast<std::size_t>(power)];
    }
    double success(Action u) const { return success(u.quality, u.power); }
    double energy(Action u) const { return power_levels[static_cast<std::size_t>(u.power)]; }
    double quality_penalty(Action u) const {
        return quality_penalties[static_cast<std::size_t>(u.quality)];
    }

    /// Highest state from which a delivered packet still fits in the buffer
    /// (B - T + 1). States above it drain deterministically and are forced idle.
    int transmit_cap() const { return buffer_playtime - play_duration + 1; }

    Action idle_action() const { return Action{num_qualities() - 1, 0}; }
    bool is_idle(Action u) const { return u == idle_action(); }
};

/// What one slot produced, as accounted by the simulator and the exact
/// evaluator. new_outage_period is set on the first slot of an outage run.
struct StepCost {
    bool outage = false;
    bool new_outage_period = false;
    std::optional<int> delivered_quality;
    double energy_spent = 0.0;
};

/// Next state after a successful delivery: (x-1)^+ + T, clamped by the
/// deterministic drain branch above the transmit cap.
int success_transition(ClientState x, const ClientModel& model);

/// Next state after a failed (or absent) delivery: (x-1)^+.
int failure_transition(ClientState x);

/// One-step transmission cost of an action: price * energy + P * quality penalty.
double one_step_cost(Action u, const ClientModel& model, double price);

/// Expected immediate cost of playing action u in state x: outage indicator,
/// transmission cost, and the expected new-outage-period charge. The period
/// charge lands on the slot where a transmission from x = 1 fails.
double expected_slot_cost(ClientState x, Action u, const ClientModel& model, double price);

/// Checks every structural invariant of the model and returns one message per
/// violation, each prefixed with the offending field. Empty means valid.
std::vector<std::string> validate(const ClientModel& model);

/// Admissible actions at state x in the solver's canonical order: idle first,
/// then ascending power, ascending quality. Above the transmit cap only idle
/// is admissible. The order doubles as the argmin tie-break (cheaper first).
std::vector<Action> admissible_actions(ClientState x, const ClientModel& model);

/// The transmit-state menu (idle + every positive-power action) in canonical
/// order; equals admissible_actions(x) for any x <= transmit_cap().
std::vector<Action> transmit_menu(const ClientModel& model);

} // namespace streamdp
