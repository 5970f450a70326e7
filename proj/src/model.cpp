#include "streamdp/model.hpp"

#include <cassert>
#include <sstream>

namespace streamdp {

int success_transition(ClientState x, const ClientModel& model) {
    assert(x >= 0 && x <= model.buffer_playtime);
    if (x <= model.transmit_cap()) {
        int drained = x > 0 ? x - 1 : 0;
        return drained + model.play_duration;
    }
    return x - 1; // delivery would overflow; the buffer just drains
}

int failure_transition(ClientState x) {
    assert(x >= 0);
    return x > 0 ? x - 1 : 0;
}

double one_step_cost(Action u, const ClientModel& model, double price) {
    return price * model.energy(u) + model.success(u) * model.quality_penalty(u);
}

double expected_slot_cost(ClientState x, Action u, const ClientModel& model, double price) {
    double cost = one_step_cost(u, model, price);
    if (x == 0) cost += 1.0;
    if (x == 1) cost += (1.0 - model.success(u)) * model.outage_period_penalty;
    return cost;
}

namespace {

std::string fmt_index(const char* field, int i) {
    std::ostringstream os;
    os << field << "[" << i << "]";
    return os.str();
}

} // namespace

std::vector<std::string> validate(const ClientModel& m) {
    std::vector<std::string> violations;
    auto bad = [&](const std::string& msg) { violations.push_back(msg); };

    if (m.buffer_playtime < 1) bad("buffer_playtime: must be >= 1");
    if (m.play_duration < 1) bad("play_duration: must be >= 1");
    if (m.play_duration > m.buffer_playtime)
        bad("play_duration: must be <= buffer_playtime (a delivered packet must fit)");

    const int q_count = m.num_qualities();
    const int k_count = m.num_power_levels();
    if (q_count < 1) bad("quality_penalties: must be nonempty");
    if (k_count < 1) bad("power_levels: must be nonempty");

    for (int q = 0; q < q_count; ++q) {
        if (m.quality_penalties[q] < 0.0) bad(fmt_index("quality_penalties", q) + ": must be >= 0");
        if (q > 0 && !(m.quality_penalties[q] > m.quality_penalties[q - 1]))
            bad("quality_penalties: not strictly increasing at index " + std::to_string(q));
    }

    if (k_count >= 1 && m.power_levels[0] != 0.0)
        bad("power_levels[0]: must be exactly 0 (idle level)");
    for (int e = 0; e < k_count; ++e) {
        if (m.power_levels[e] < 0.0) bad(fmt_index("power_levels", e) + ": must be >= 0");
        if (e > 0 && !(m.power_levels[e] > m.power_levels[e - 1]))
            bad("power_levels: not strictly increasing at index " + std::to_string(e));
    }

    if (static_cast<int>(m.success_prob.size()) != q_count * k_count) {
        bad("success_prob: size must be num qualities x num power levels");
        return violations; // element checks below would index out of range
    }

    for (int q = 0; q < q_count; ++q) {
        for (int e = 0; e < k_count; ++e) {
            double p = m.success(q, e);
            if (!(p >= 0.0 && p <= 1.0))
                bad("success_prob[" + std::to_string(q) + "][" + std::to_string(e) +
                    "]: must be in [0,1]");
        }
        if (k_count >= 1 && m.success(q, 0) != 0.0)
            bad("success_prob[" + std::to_string(q) + "][0]: idle level must have probability 0");
    }
    for (int q = 0; q < q_count; ++q)
        for (int e = 1; e < k_count; ++e)
            if (m.success(q, e) < m.success(q, e - 1))
                bad("success_prob: not monotone in power at quality " + std::to_string(q) +
                    ", power " + std::to_string(e));
    for (int q = 1; q < q_count; ++q)
        for (int e = 0; e < k_count; ++e)
            if (m.success(q, e) < m.success(q - 1, e))
                bad("success_prob: not monotone in quality at quality " + std::to_string(q) +
                    ", power " + std::to_string(e));

    if (m.outage_period_penalty < 0.0) bad("outage_period_penalty: must be >= 0");

    return violations;
}

std::vector<Action> transmit_menu(const ClientModel& model) {
    std::vector<Action> menu;
    menu.reserve(1 + static_cast<std::size_t>(model.num_qualities()) *
                         (static_cast<std::size_t>(model.num_power_levels()) - 1));
    menu.push_back(model.idle_action());
    for (int e = 1; e < model.num_power_levels(); ++e)
        for (int q = 0; q < model.num_qualities(); ++q)
            menu.push_back(Action{q, e});
    return menu;
}

std::vector<Action> admissible_actions(ClientState x, const ClientModel& model) {
    if (x > model.transmit_cap()) return {model.idle_action()};
    return transmit_menu(model);
}

} // namespace streamdp
