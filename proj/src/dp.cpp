#include "streamdp/dp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "streamdp/threshold.hpp"

namespace streamdp {

namespace {

// Stage expression of the discounted recursion for one action, shared with
// the fading backup so the degenerate one-channel case reproduces it
// bit-for-bit: same terms, same order.
inline double action_value(double outage_ind, double new_period_charge, double price,
                           const ClientModel& m, Action u, double beta, double cont_success,
                           double cont_failure) {
    const double p = m.success(u);
    return outage_ind + price * m.energy(u) + p * (m.quality_penalty(u) + beta * cont_success) +
           (1.0 - p) * (new_period_charge + beta * cont_failure);
}

struct MenuEntry {
    Action action;
    double p;
    double energy;
    double quality_penalty;
};

std::vector<MenuEntry> prepared_menu(const ClientModel& m) {
    std::vector<MenuEntry> out;
    for (Action u : transmit_menu(m))
        out.push_back({u, m.success(u), m.energy(u), m.quality_penalty(u)});
    return out;
}

// One backup sweep. `beta` may be any value in (0, 1]; callers own validation.
// Greedy ties resolve to the first action in menu order.
void backup_sweep(const std::vector<double>& v, const ClientModel& m, double price, double beta,
                  const std::vector<MenuEntry>& menu, std::vector<double>& out_values,
                  std::vector<Action>* out_actions) {
    const int b = m.buffer_playtime;
    const int cap = m.transmit_cap();
    const double lambda_o = m.outage_period_penalty;

    for (int x = 0; x <= b; ++x) {
        if (x > cap) {
            out_values[x] = (x == 0 ? 1.0 : 0.0) + beta * v[x - 1];
            if (out_actions) (*out_actions)[x] = m.idle_action();
            continue;
        }
        const double outage_ind = x == 0 ? 1.0 : 0.0;
        const double period_charge = x == 1 ? lambda_o : 0.0;
        const double cont_s = v[success_transition(x, m)];
        const double cont_f = v[failure_transition(x)];

        double best = std::numeric_limits<double>::infinity();
        Action best_action = m.idle_action();
        for (const MenuEntry& e : menu) {
            const double cost = outage_ind + price * e.energy +
                                e.p * (e.quality_penalty + beta * cont_s) +
                                (1.0 - e.p) * (period_charge + beta * cont_f);
            if (cost < best) {
                best = cost;
                best_action = e.action;
            }
        }
        out_values[x] = best;
        if (out_actions) (*out_actions)[x] = best_action;
    }
}

void require_valid(const ClientModel& m) {
    auto violations = validate(m);
    if (!violations.empty())
        throw std::invalid_argument("invalid client model: " + violations.front());
}

constexpr int kResidualTrail = 12;

void push_trail(std::vector<double>& trail, double r) {
    if (trail.size() >= kResidualTrail) trail.erase(trail.begin());
    trail.push_back(r);
}

} // namespace

BellmanResult bellman_backup(const std::vector<double>& values, const ClientModel& model,
                             double price, double beta) {
    if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("beta must be in (0,1)");
    require_valid(model);
    if (static_cast<int>(values.size()) != model.buffer_playtime + 1)
        throw std::invalid_argument("value table must have one entry per state 0..B");

    BellmanResult result;
    result.values.resize(values.size());
    result.policy.action_of.resize(values.size());
    result.policy.origin = Policy::Origin::dp;
    auto menu = prepared_menu(model);
    backup_sweep(values, model, price, beta, menu, result.values, &result.policy.action_of);
    return result;
}

SolveReport solve_discounted(const ClientModel& model, double price, double beta, double tol,
                             long max_iter) {
    if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("beta must be in (0,1)");
    if (!(tol > 0.0)) throw std::invalid_argument("tol must be > 0");
    require_valid(model);

    const std::size_t n = static_cast<std::size_t>(model.buffer_playtime) + 1;
    const double stop = tol * (1.0 - beta) / (2.0 * beta);
    auto menu = prepared_menu(model);

    std::vector<double> v(n, 0.0), next(n, 0.0);
    std::vector<Action> actions(n, model.idle_action());

    SolveReport report;
    report.value.kind = ValueFunction::Kind::discounted;
    report.value.beta = beta;

    double residual = std::numeric_limits<double>::infinity();
    long k = 0;
    while (k < max_iter) {
        backup_sweep(v, model, price, beta, menu, next, &actions);
        residual = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            residual = std::max(residual, std::abs(next[i] - v[i]));
        v.swap(next);
        ++k;
        push_trail(report.residual_trail, residual);
        if (residual <= stop) break;
    }

    report.policy.action_of = actions;
    report.policy.origin = Policy::Origin::dp;
    report.value.values = v;
    report.iterations = k;
    report.residual = residual;
    report.converged = residual <= stop;
    report.threshold = is_threshold(report.policy, model).ok;
    return report;
}

std::vector<DeliveryGain> delivery_gains(const ClientModel& model, double price, double beta,
                                         int horizon) {
    if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("beta must be in (0,1)");
    if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
    require_valid(model);

    const int b = model.buffer_playtime;
    auto menu = prepared_menu(model);
    std::vector<double> v(static_cast<std::size_t>(b) + 1, 0.0);
    std::vector<double> next(v.size(), 0.0);

    std::vector<DeliveryGain> out;
    out.reserve(static_cast<std::size_t>(horizon));
    for (int s = 1; s <= horizon; ++s) {
        DeliveryGain g;
        g.stage = s;
        g.value.assign(v.size(), 0.0);
        for (int x = 1; x <= b; ++x) {
            const double charge = x == 1 ? model.outage_period_penalty : 0.0;
            g.value[x] = charge + beta * (v[failure_transition(x)] - v[success_transition(x, model)]);
        }
        out.push_back(std::move(g));
        backup_sweep(v, model, price, beta, menu, next, nullptr);
        v.swap(next);
    }
    return out;
}

SolveReport solve_average(const ClientModel& model, double price, double tol, long max_iter) {
    if (!(tol > 0.0)) throw std::invalid_argument("tol must be > 0");
    require_valid(model);

    // Damping weight of the real transition per step; 1-tau stays put.
    constexpr double tau = 0.9;

    const std::size_t n = static_cast<std::size_t>(model.buffer_playtime) + 1;
    auto menu = prepared_menu(model);

    std::vector<double> h(n, 0.0), w(n, 0.0);
    std::vector<Action> actions(n, model.idle_action());

    SolveReport report;
    report.value.kind = ValueFunction::Kind::relative;

    double span = std::numeric_limits<double>::infinity();
    double gain = 0.0;
    long k = 0;
    while (k < max_iter) {
        backup_sweep(h, model, price, tau, menu, w, &actions);
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            w[i] += (1.0 - tau) * h[i];
            const double diff = w[i] - h[i];
            lo = std::min(lo, diff);
            hi = std::max(hi, diff);
        }
        span = hi - lo;
        gain = 0.5 * (hi + lo);
        const double ref = w[0];
        for (std::size_t i = 0; i < n; ++i) h[i] = w[i] - ref;
        ++k;
        push_trail(report.residual_trail, span);
        if (span <= tol) break;
    }

    report.policy.action_of = actions;
    report.policy.origin = Policy::Origin::dp;
    report.value.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) report.value.values[i] = tau * h[i]; // undo damping scale
    report.value.gain = gain;
    report.gain = gain;
    report.iterations = k;
    report.residual = span;
    report.converged = span <= tol;
    report.threshold = is_threshold(report.policy, model).ok;
    return report;
}

} // namespace streamdp
