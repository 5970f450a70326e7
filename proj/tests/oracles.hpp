#pragma once

// Test-only oracles, kept independent of the library's solution paths: the
// two-client product chain is assembled explicitly and driven to stationarity
// by repeated squaring of its lazy transition matrix, and dual maximizers are
// located by plain grid scans.

#include <cassert>
#include <cmath>
#include <vector>

#include "streamdp/dual.hpp"
#include "streamdp/model.hpp"
#include "streamdp/policy.hpp"

namespace streamdp::testing {

// Per-slot QoE cost of one client in one state under a fixed policy, written
// from the objective directly: outage + delivery penalty + new-period charge.
inline double slot_qoe(const ClientModel& m, const Policy& p, int x) {
    const Action u = p.at(x);
    const double succ = m.success(u);
    double c = x == 0 ? 1.0 : 0.0;
    c += succ * m.quality_penalty(u);
    if (x == 1) c += (1.0 - succ) * m.outage_period_penalty;
    return c;
}

inline double slot_power(const ClientModel& m, const Policy& p, int x) {
    return m.energy(p.at(x));
}

// Row-stochastic single-client transition matrix under a fixed policy.
inline std::vector<std::vector<double>> client_matrix(const ClientModel& m, const Policy& p) {
    const int n = m.buffer_playtime + 1;
    std::vector<std::vector<double>> t(n, std::vector<double>(n, 0.0));
    for (int x = 0; x < n; ++x) {
        if (x > m.transmit_cap()) {
            t[x][x - 1] = 1.0;
            continue;
        }
        const double succ = m.success(p.at(x));
        t[x][success_transition(x, m)] += succ;
        t[x][failure_transition(x)] += 1.0 - succ;
    }
    return t;
}

// Limiting distribution from a start state via 2^60 steps of the lazy chain
// (I + P)/2, which shares the stationary distribution and is aperiodic. Rows
// are renormalized after every squaring; without that the row-sum rounding
// drift doubles per squaring and visibly leaks mass.
inline std::vector<double> limiting_distribution(std::vector<std::vector<double>> t, int start) {
    const std::size_t n = t.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) t[i][j] = 0.5 * t[i][j] + (i == j ? 0.5 : 0.0);

    std::vector<std::vector<double>> sq(n, std::vector<double>(n));
    for (int k = 0; k < 60; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            double row_sum = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                double acc = 0.0;
                for (std::size_t l = 0; l < n; ++l) acc += t[i][l] * t[l][j];
                sq[i][j] = acc;
                row_sum += acc;
            }
            for (std::size_t j = 0; j < n; ++j) sq[i][j] /= row_sum;
        }
        t.swap(sq);
    }
    return t[static_cast<std::size_t>(start)];
}

// Long-run Lagrangian of a two-client product policy, evaluated on the joint
// chain started from both buffers full.
inline double product_chain_lagrangian(const ClientModel& m1, const Policy& p1,
                                       const ClientModel& m2, const Policy& p2, double price,
                                       double budget) {
    const int n1 = m1.buffer_playtime + 1;
    const int n2 = m2.buffer_playtime + 1;
    auto t1 = client_matrix(m1, p1);
    auto t2 = client_matrix(m2, p2);

    std::vector<std::vector<double>> joint(static_cast<std::size_t>(n1) * n2,
                                           std::vector<double>(static_cast<std::size_t>(n1) * n2));
    auto idx = [n2](int x1, int x2) { return static_cast<std::size_t>(x1) * n2 + x2; };
    for (int x1 = 0; x1 < n1; ++x1)
        for (int x2 = 0; x2 < n2; ++x2)
            for (int y1 = 0; y1 < n1; ++y1)
                for (int y2 = 0; y2 < n2; ++y2)
                    joint[idx(x1, x2)][idx(y1, y2)] = t1[x1][y1] * t2[x2][y2];

    auto pi = limiting_distribution(std::move(joint), static_cast<int>(idx(n1 - 1, n2 - 1)));

    double value = 0.0;
    for (int x1 = 0; x1 < n1; ++x1)
        for (int x2 = 0; x2 < n2; ++x2) {
            const double mass = pi[idx(x1, x2)];
            value += mass * (slot_qoe(m1, p1, x1) + slot_qoe(m2, p2, x2) +
                             price * (slot_power(m1, p1, x1) + slot_power(m2, p2, x2)));
        }
    return value - price * budget;
}

struct GridMax {
    double price = 0.0;       // grid point with the largest dual value
    double plateau_low = 0.0; // grid points within 1e-9 of the maximum
    double plateau_high = 0.0;
    double value = 0.0;
};

inline GridMax grid_scan_dual(const SystemConfig& cfg, double lo, double hi, double step) {
    GridMax best;
    bool first = true;
    std::vector<std::pair<double, double>> table;
    for (double price = lo; price <= hi + 0.5 * step; price += step) {
        double d = dual_value(cfg, price).dual_value;
        table.emplace_back(price, d);
        if (first || d > best.value) {
            best.value = d;
            best.price = price;
            first = false;
        }
    }
    best.plateau_low = best.price;
    best.plateau_high = best.price;
    for (auto [price, d] : table)
        if (d >= best.value - 1e-9) {
            best.plateau_low = std::min(best.plateau_low, price);
            best.plateau_high = std::max(best.plateau_high, price);
        }
    return best;
}

} // namespace streamdp::testing
