#include "streamdp/policy.hpp"

namespace streamdp {

std::vector<std::string> policy_violations(const Policy& p, const ClientModel& model) {
    std::vector<std::string> out;
    const int b = model.buffer_playtime;
    if (p.num_states() != b + 1) {
        out.push_back("policy: must assign an action to every state 0..B");
        return out;
    }
    for (int x = 0; x <= b; ++x) {
        Action u = p.at(x);
        if (u.quality < 0 || u.quality >= model.num_qualities() || u.power < 0 ||
            u.power >= model.num_power_levels()) {
            out.push_back("policy[" + std::to_string(x) + "]: action index out of range");
            continue;
        }
        if (u.power == 0 && !model.is_idle(u))
            out.push_back("policy[" + std::to_string(x) +
                          "]: zero-power action must be the canonical idle");
        if (x > model.transmit_cap() && !model.is_idle(u))
            out.push_back("policy[" + std::to_string(x) +
                          "]: states above the transmit cap must idle");
    }
    return out;
}

Policy all_idle_policy(const ClientModel& model) {
    Policy p;
    p.action_of.assign(static_cast<std::size_t>(model.buffer_playtime) + 1, model.idle_action());
    p.origin = Policy::Origin::explicit_choice;
    return p;
}

} // namespace streamdp
