#pragma once

#include <string>
#include <vector>

#include "streamdp/model.hpp"

namespace streamdp {

/// A stationary deterministic policy: one action per play-time state 0..B.
struct Policy {
    enum class Origin { dp, enumerated, explicit_choice };

    std::vector<Action> action_of; ///< indexed by state, size B+1
    Origin origin = Origin::explicit_choice;

    Action at(ClientState x) const { return action_of[static_cast<std::size_t>(x)]; }
    int num_states() const { return static_cast<int>(action_of.size()); }

    friend bool operator==(const Policy& a, const Policy& b) {
        return a.action_of == b.action_of;
    }
};

/// Structural checks on a policy against its model: size B+1, indices in
/// range, idle forced above the transmit cap, and only the canonical idle
/// representative used. Empty result means valid.
std::vector<std::string> policy_violations(const Policy& p, const ClientModel& model);

/// The policy that idles in every state.
Policy all_idle_policy(const ClientModel& model);

} // namespace streamdp
