#include "streamdp/fading.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace streamdp {

std::vector<std::string> validate_channel(const ChannelModel& ch, const ClientModel& model) {
    std::vector<std::string> out;
    const int c_count = ch.num_states;
    if (c_count < 1) {
        out.push_back("num_states: must be >= 1");
        return out;
    }
    if (static_cast<int>(ch.transition.size()) != c_count * c_count) {
        out.push_back("transition: must be a num_states x num_states matrix");
        return out;
    }
    for (int i = 0; i < c_count; ++i) {
        double row = 0.0;
        for (int j = 0; j < c_count; ++j) {
            const double p = ch.step(i, j);
            if (p < 0.0)
                out.push_back("transition[" + std::to_string(i) + "][" + std::to_string(j) +
                              "]: must be >= 0");
            row += p;
        }
        if (std::abs(row - 1.0) > 1e-12)
            out.push_back("transition[" + std::to_string(i) + "]: row must sum to 1");
    }

    if (static_cast<int>(ch.success_prob_per_channel.size()) != c_count) {
        out.push_back("success_prob_per_channel: must hold one matrix per channel state");
        return out;
    }
    const int q_count = model.num_qualities();
    const int k_count = model.num_power_levels();
    for (int c = 0; c < c_count; ++c) {
        // Each per-channel matrix obeys the same rules as the base model's:
        // validate it through a copy of the model.
        ClientModel probe = model;
        probe.success_prob = ch.success_prob_per_channel[c];
        if (static_cast<int>(probe.success_prob.size()) != q_count * k_count) {
            out.push_back("success_prob_per_channel[" + std::to_string(c) + "]: wrong size");
            continue;
        }
        for (const std::string& v : validate(probe))
            if (v.rfind("success_prob", 0) == 0)
                out.push_back("success_prob_per_channel[" + std::to_string(c) + "]." + v);
    }
    return out;
}

ChannelModel fixed_channel(const ClientModel& model) {
    ChannelModel ch;
    ch.num_states = 1;
    ch.transition = {1.0};
    ch.success_prob_per_channel = {model.success_prob};
    return ch;
}

namespace {

std::vector<bool> channel_reachable(const ChannelModel& ch, int start, bool reversed) {
    std::vector<bool> seen(static_cast<std::size_t>(ch.num_states), false);
    std::vector<int> stack{start};
    seen[start] = true;
    while (!stack.empty()) {
        int c = stack.back();
        stack.pop_back();
        for (int d = 0; d < ch.num_states; ++d) {
            const double p = reversed ? ch.step(d, c) : ch.step(c, d);
            if (p > 0.0 && !seen[d]) {
                seen[d] = true;
                stack.push_back(d);
            }
        }
    }
    return seen;
}

void require_irreducible(const ChannelModel& ch) {
    auto forward = channel_reachable(ch, 0, false);
    for (int c = 0; c < ch.num_states; ++c)
        if (!forward[c])
            throw std::invalid_argument("channel matrix is reducible: channel " +
                                        std::to_string(c) + " is unreachable from channel 0");
    auto backward = channel_reachable(ch, 0, true);
    for (int c = 0; c < ch.num_states; ++c)
        if (!backward[c])
            throw std::invalid_argument("channel matrix is reducible: channel 0 is unreachable "
                                        "from channel " +
                                        std::to_string(c));
}

void require_valid(const ClientModel& model, const ChannelModel& ch) {
    auto mv = validate(model);
    if (!mv.empty()) throw std::invalid_argument("invalid client model: " + mv.front());
    auto cv = validate_channel(ch, model);
    if (!cv.empty()) throw std::invalid_argument("invalid channel model: " + cv.front());
}

} // namespace

std::vector<double> channel_stationary(const ChannelModel& ch) {
    require_irreducible(ch);
    const int n = ch.num_states;
    // Balance equations with the last row replaced by normalization.
    std::vector<std::vector<double>> a(n, std::vector<double>(n + 1, 0.0));
    for (int j = 0; j < n - 1; ++j) {
        for (int i = 0; i < n; ++i) a[j][i] = ch.step(i, j);
        a[j][j] -= 1.0;
    }
    for (int i = 0; i < n; ++i) a[n - 1][i] = 1.0;
    a[n - 1][n] = 1.0;

    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int row = col + 1; row < n; ++row)
            if (std::abs(a[row][col]) > std::abs(a[pivot][col])) pivot = row;
        std::swap(a[col], a[pivot]);
        for (int row = 0; row < n; ++row) {
            if (row == col || a[row][col] == 0.0) continue;
            const double f = a[row][col] / a[col][col];
            for (int c2 = col; c2 <= n; ++c2) a[row][c2] -= f * a[col][c2];
        }
    }
    std::vector<double> pi(n);
    for (int i = 0; i < n; ++i) pi[i] = std::max(0.0, a[i][n] / a[i][i]);
    return pi;
}

FadingPolicy lift_policy(const Policy& p) {
    FadingPolicy out;
    out.num_channels = 1;
    out.action_of = p.action_of;
    return out;
}

Policy channel_slice(const FadingPolicy& p, int channel) {
    Policy out;
    out.origin = Policy::Origin::dp;
    const int xs = p.num_playtime_states();
    out.action_of.reserve(static_cast<std::size_t>(xs));
    for (int x = 0; x < xs; ++x) out.action_of.push_back(p.at(x, channel));
    return out;
}

std::vector<std::string> fading_policy_violations(const FadingPolicy& p, const ClientModel& model,
                                                  const ChannelModel& ch) {
    std::vector<std::string> out;
    if (p.num_channels != ch.num_states)
        out.push_back("policy: channel count does not match the channel model");
    if (static_cast<int>(p.action_of.size()) != (model.buffer_playtime + 1) * ch.num_states) {
        out.push_back("policy: must assign an action to every (playtime, channel) pair");
        return out;
    }
    for (int c = 0; c < p.num_channels; ++c)
        for (const std::string& v : policy_violations(channel_slice(p, c), model))
            out.push_back("channel " + std::to_string(c) + ": " + v);
    return out;
}

namespace {

// Product-space sweep. Mirrors the fixed-channel sweep in dp.cpp term for
// term; with one channel the continuation sums collapse to the plain value
// reads and the outputs match bit for bit.
void fading_sweep(const std::vector<double>& v, const ClientModel& m, const ChannelModel& ch,
                  double price, double beta, const std::vector<Action>& menu,
                  std::vector<double>& out_values, std::vector<Action>* out_actions) {
    const int b = m.buffer_playtime;
    const int cap = m.transmit_cap();
    const int c_count = ch.num_states;
    const double lambda_o = m.outage_period_penalty;
    auto idx = [c_count](int x, int c) { return static_cast<std::size_t>(x) * c_count + c; };

    for (int x = 0; x <= b; ++x) {
        for (int c = 0; c < c_count; ++c) {
            double cont_s = 0.0, cont_f = 0.0;
            if (x > cap) {
                for (int d = 0; d < c_count; ++d) cont_f += ch.step(c, d) * v[idx(x - 1, d)];
                out_values[idx(x, c)] = (x == 0 ? 1.0 : 0.0) + beta * cont_f;
                if (out_actions) (*out_actions)[idx(x, c)] = m.idle_action();
                continue;
            }
            const int xs = success_transition(x, m);
            const int xf = failure_transition(x);
            for (int d = 0; d < c_count; ++d) {
                const double step = ch.step(c, d);
                cont_s += step * v[idx(xs, d)];
                cont_f += step * v[idx(xf, d)];
            }
            const double outage_ind = x == 0 ? 1.0 : 0.0;
            const double period_charge = x == 1 ? lambda_o : 0.0;

            double best = std::numeric_limits<double>::infinity();
            Action best_action = m.idle_action();
            for (Action u : menu) {
                const double p = ch.success(c, m, u);
                const double cost = outage_ind + price * m.energy(u) +
                                    p * (m.quality_penalty(u) + beta * cont_s) +
                                    (1.0 - p) * (period_charge + beta * cont_f);
                if (cost < best) {
                    best = cost;
                    best_action = u;
                }
            }
            out_values[idx(x, c)] = best;
            if (out_actions) (*out_actions)[idx(x, c)] = best_action;
        }
    }
}

} // namespace

FadingBackupResult fading_backup(const std::vector<double>& values, const ClientModel& model,
                                 const ChannelModel& channel, double price, double beta) {
    if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("beta must be in (0,1)");
    require_valid(model, channel);
    const std::size_t n =
        static_cast<std::size_t>(model.buffer_playtime + 1) * channel.num_states;
    if (values.size() != n)
        throw std::invalid_argument("value table must cover every (playtime, channel) pair");

    FadingBackupResult result;
    result.values.resize(n);
    result.policy.num_channels = channel.num_states;
    result.policy.action_of.resize(n);
    auto menu = transmit_menu(model);
    fading_sweep(values, model, channel, price, beta, menu, result.values,
                 &result.policy.action_of);
    return result;
}

namespace {

bool per_channel_threshold(const FadingPolicy& p, const ClientModel& m, const ChannelModel& ch) {
    for (int c = 0; c < ch.num_states; ++c)
        if (!is_threshold(channel_slice(p, c), m).ok) return false;
    return true;
}

} // namespace

FadingSolveReport solve_fading_average(const ClientModel& model, const ChannelModel& channel,
                                       double price, double tol, long max_iter) {
    if (!(tol > 0.0)) throw std::invalid_argument("tol must be > 0");
    require_valid(model, channel);
    require_irreducible(channel);

    constexpr double tau = 0.9; // same damping as the fixed-channel solver

    const std::size_t n =
        static_cast<std::size_t>(model.buffer_playtime + 1) * channel.num_states;
    auto menu = transmit_menu(model);
    std::vector<double> h(n, 0.0), w(n, 0.0);
    std::vector<Action> actions(n, model.idle_action());

    FadingSolveReport report;
    double span = std::numeric_limits<double>::infinity();
    double gain = 0.0;
    long k = 0;
    while (k < max_iter) {
        fading_sweep(h, model, channel, price, tau, menu, w, &actions);
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
        if (span <= tol) break;
    }

    report.policy.num_channels = channel.num_states;
    report.policy.action_of = actions;
    report.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) report.values[i] = tau * h[i];
    report.gain = gain;
    report.iterations = k;
    report.residual = span;
    report.converged = span <= tol;
    report.per_channel_threshold = per_channel_threshold(report.policy, model, channel);
    return report;
}

FadingSolveReport solve_fading_discounted(const ClientModel& model, const ChannelModel& channel,
                                          double price, double beta, double tol, long max_iter) {
    if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("beta must be in (0,1)");
    if (!(tol > 0.0)) throw std::invalid_argument("tol must be > 0");
    require_valid(model, channel);

    const std::size_t n =
        static_cast<std::size_t>(model.buffer_playtime + 1) * channel.num_states;
    const double stop = tol * (1.0 - beta) / (2.0 * beta);
    auto menu = transmit_menu(model);
    std::vector<double> v(n, 0.0), next(n, 0.0);
    std::vector<Action> actions(n, model.idle_action());

    FadingSolveReport report;
    double residual = std::numeric_limits<double>::infinity();
    long k = 0;
    while (k < max_iter) {
        fading_sweep(v, model, channel, price, beta, menu, next, &actions);
        residual = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            residual = std::max(residual, std::abs(next[i] - v[i]));
        v.swap(next);
        ++k;
        if (residual <= stop) break;
    }

    report.policy.num_channels = channel.num_states;
    report.policy.action_of = actions;
    report.values = v;
    report.gain = 0.0;
    report.iterations = k;
    report.residual = residual;
    report.converged = residual <= stop;
    report.per_channel_threshold = per_channel_threshold(report.policy, model, channel);
    return report;
}

} // namespace streamdp
