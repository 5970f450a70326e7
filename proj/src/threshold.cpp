#include "streamdp/threshold.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

namespace streamdp {

namespace {

void require_valid_policy(const Policy& p, const ClientModel& model) {
    auto violations = policy_violations(p, model);
    if (!violations.empty()) throw std::invalid_argument("invalid policy: " + violations.front());
}

// Clause check for a pair of states y < x. The action at the lower state may
// never be strictly less aggressive in one coordinate while equal in the other.
inline bool violates_clauses(Action at_higher, Action at_lower) {
    if (at_lower.power == at_higher.power && at_lower.quality < at_higher.quality) return true;
    if (at_lower.quality == at_higher.quality && at_lower.power < at_higher.power) return true;
    return false;
}

} // namespace

double qoe_cost(const StationaryEvaluation& eval, const ClientModel& model) {
    double cost = eval.outage_rate + model.outage_period_penalty * eval.outage_period_rate;
    for (int q = 0; q < model.num_qualities(); ++q)
        cost += model.quality_penalties[q] * eval.delivery_rate[q];
    return cost;
}

ThresholdCheck is_threshold(const Policy& p, const ClientModel& model) {
    require_valid_policy(p, model);
    const int cap = model.transmit_cap();
    for (int x = 2; x <= cap; ++x)
        for (int y = 1; y < x; ++y)
            if (violates_clauses(p.at(x), p.at(y)))
                return ThresholdCheck{false, ThresholdWitness{x, y}};
    return ThresholdCheck{};
}

namespace {

// Depth-first enumeration over states cap, cap-1, ..., 1, pruning any
// assignment that breaks a clause against an already-assigned higher state,
// then a free choice at state 0. `visit` is null when only counting.
// Returns false if the visitor asked to stop or the count cap was exceeded.
struct ThresholdEnumerator {
    const ClientModel& model;
    std::vector<Action> menu;
    Policy buffer;
    long count = 0;
    long count_cap = -1; // negative: no cap
    const std::function<bool(const Policy&)>* visit = nullptr;

    explicit ThresholdEnumerator(const ClientModel& m) : model(m), menu(transmit_menu(m)) {
        buffer.action_of.assign(static_cast<std::size_t>(m.buffer_playtime) + 1, m.idle_action());
        buffer.origin = Policy::Origin::enumerated;
    }

    bool admissible_below(Action candidate, int state) const {
        for (int x = state + 1; x <= model.transmit_cap(); ++x)
            if (violates_clauses(buffer.at(x), candidate)) return false;
        return true;
    }

    bool emit() {
        ++count;
        if (count_cap >= 0 && count > count_cap) return false;
        if (visit && !(*visit)(buffer)) return false;
        return true;
    }

    bool descend(int state) {
        if (state == 0) {
            for (Action u : menu) {
                buffer.action_of[0] = u;
                if (!emit()) return false;
            }
            return true;
        }
        for (Action u : menu) {
            if (!admissible_below(u, state)) continue;
            buffer.action_of[static_cast<std::size_t>(state)] = u;
            if (!descend(state - 1)) return false;
        }
        return true;
    }

    bool run() { return descend(model.transmit_cap()); }
};

} // namespace

long count_threshold_policies(const ClientModel& model, long cap) {
    ThresholdEnumerator e(model);
    e.count_cap = cap;
    e.run();
    return std::min(e.count, cap + 1);
}

void for_each_threshold_policy(const ClientModel& model,
                               const std::function<bool(const Policy&)>& visit) {
    ThresholdEnumerator e(model);
    e.visit = &visit;
    e.run();
}

namespace {

struct ChainEdge {
    double prob;
    int to;
};

// Outgoing edges of the chain induced by a policy; zero-probability branches
// are dropped so reachability sees only real transitions.
std::vector<std::vector<ChainEdge>> induced_chain(const Policy& p, const ClientModel& m) {
    const int b = m.buffer_playtime;
    std::vector<std::vector<ChainEdge>> edges(static_cast<std::size_t>(b) + 1);
    for (int x = 0; x <= b; ++x) {
        if (x > m.transmit_cap()) {
            edges[x].push_back({1.0, x - 1});
            continue;
        }
        const double p_success = m.success(p.at(x));
        if (p_success > 0.0) edges[x].push_back({p_success, success_transition(x, m)});
        if (p_success < 1.0) edges[x].push_back({1.0 - p_success, failure_transition(x)});
    }
    return edges;
}

std::vector<bool> reachable_from(const std::vector<std::vector<ChainEdge>>& edges, int start) {
    std::vector<bool> seen(edges.size(), false);
    std::vector<int> stack{start};
    seen[start] = true;
    while (!stack.empty()) {
        int x = stack.back();
        stack.pop_back();
        for (const ChainEdge& e : edges[x])
            if (!seen[e.to]) {
                seen[e.to] = true;
                stack.push_back(e.to);
            }
    }
    return seen;
}

// Solves pi^T P = pi^T, sum pi = 1 on the given states by Gaussian
// elimination with partial pivoting.
std::vector<double> stationary_on_class(const std::vector<std::vector<ChainEdge>>& edges,
                                        const std::vector<int>& states) {
    const int r = static_cast<int>(states.size());
    std::vector<int> index_of(edges.size(), -1);
    for (int i = 0; i < r; ++i) index_of[states[i]] = i;

    // Rows 0..r-2: balance equations (P^T - I); last row: normalization.
    std::vector<std::vector<double>> a(r, std::vector<double>(r + 1, 0.0));
    for (int i = 0; i < r; ++i) {
        for (const ChainEdge& e : edges[states[i]]) {
            int j = index_of[e.to];
            assert(j >= 0); // the class is closed
            if (j < r - 1) a[j][i] += e.prob;
        }
        if (i < r - 1) a[i][i] -= 1.0;
        a[r - 1][i] = 1.0;
    }
    a[r - 1][r] = 1.0;

    for (int col = 0; col < r; ++col) {
        int pivot = col;
        for (int row = col + 1; row < r; ++row)
            if (std::abs(a[row][col]) > std::abs(a[pivot][col])) pivot = row;
        std::swap(a[col], a[pivot]);
        if (a[col][col] == 0.0) throw std::runtime_error("singular stationary system");
        for (int row = 0; row < r; ++row) {
            if (row == col) continue;
            const double f = a[row][col] / a[col][col];
            if (f == 0.0) continue;
            for (int c2 = col; c2 <= r; ++c2) a[row][c2] -= f * a[col][c2];
        }
    }

    std::vector<double> pi(r);
    for (int i = 0; i < r; ++i) {
        pi[i] = a[i][r] / a[i][i];
        if (pi[i] < 0.0) pi[i] = 0.0; // clip elimination noise
    }
    return pi;
}

} // namespace

StationaryEvaluation evaluate_exact(const Policy& p, const ClientModel& model, double price) {
    require_valid_policy(p, model);

    const int b = model.buffer_playtime;
    auto edges = induced_chain(p, model);
    auto reached = reachable_from(edges, b);

    // Recurrent class reachable from the full buffer: states that every one
    // of their descendants can reach back. Exactly one such class exists
    // when starting from B, because the chain only descends one level at a
    // time and a closed class seals its own lowest level.
    std::vector<std::vector<bool>> reach(edges.size());
    for (int x = 0; x <= b; ++x)
        if (reached[x]) reach[x] = reachable_from(edges, x);

    std::vector<int> recurrent;
    for (int x = 0; x <= b; ++x) {
        if (!reached[x]) continue;
        bool closed = true;
        for (int y = 0; y <= b && closed; ++y)
            if (reach[x][y] && !reach[y][x]) closed = false;
        if (closed) recurrent.push_back(x);
    }
    assert(!recurrent.empty());
#ifndef NDEBUG
    // One closed class from a full-buffer start: any descent below a class
    // must pass through its sealed lowest level.
    for (int y : recurrent) assert(reach[recurrent.front()][y]);
#endif

    auto pi_class = stationary_on_class(edges, recurrent);

    StationaryEvaluation eval;
    eval.distribution.assign(static_cast<std::size_t>(b) + 1, 0.0);
    eval.delivery_rate.assign(static_cast<std::size_t>(model.num_qualities()), 0.0);
    for (std::size_t i = 0; i < recurrent.size(); ++i)
        eval.distribution[recurrent[i]] = pi_class[i];

    for (int x : recurrent) {
        const double mass = eval.distribution[x];
        const Action u = p.at(x); // canonical idle above the cap, so P and E vanish there
        const double p_success = model.success(u);
        if (x == 0) eval.outage_rate += mass;
        if (x == 1) eval.outage_period_rate += mass * (1.0 - p_success);
        eval.average_power += mass * model.energy(u);
        eval.delivery_rate[u.quality] += mass * p_success;
        eval.average_cost += mass * expected_slot_cost(x, u, model, price);
    }
    return eval;
}

std::pair<Policy, StationaryEvaluation> best_threshold(const ClientModel& model, double price) {
    constexpr long guard = 10000000;
    long n = count_threshold_policies(model, guard);
    if (n > guard)
        throw InstanceTooLarge("threshold enumeration exceeds the policy-count guard",
                               static_cast<double>(n));

    Policy best;
    StationaryEvaluation best_eval;
    bool have = false;
    for_each_threshold_policy(model, [&](const Policy& p) {
        StationaryEvaluation eval = evaluate_exact(p, model, price);
        if (!have || eval.average_cost < best_eval.average_cost) {
            best = p;
            best_eval = eval;
            have = true;
        }
        return true;
    });
    assert(have); // the all-idle policy is always a threshold policy
    return {best, best_eval};
}

std::pair<Policy, StationaryEvaluation> brute_force_best(const ClientModel& model, double price) {
    const auto menu = transmit_menu(model);
    const int cap = model.transmit_cap();
    const double count = std::pow(static_cast<double>(menu.size()), cap + 1);
    if (count > 1e7)
        throw InstanceTooLarge("exhaustive policy search exceeds 1e7 policies", count);

    Policy p = all_idle_policy(model);
    p.origin = Policy::Origin::enumerated;
    std::vector<std::size_t> odometer(static_cast<std::size_t>(cap) + 1, 0);

    Policy best;
    StationaryEvaluation best_eval;
    bool have = false;
    for (;;) {
        for (int x = 0; x <= cap; ++x) p.action_of[x] = menu[odometer[x]];
        StationaryEvaluation eval = evaluate_exact(p, model, price);
        if (!have || eval.average_cost < best_eval.average_cost) {
            best = p;
            best_eval = eval;
            have = true;
        }
        int digit = 0;
        while (digit <= cap && ++odometer[digit] == menu.size()) odometer[digit++] = 0;
        if (digit > cap) break;
    }
    return {best, best_eval};
}

} // namespace streamdp
