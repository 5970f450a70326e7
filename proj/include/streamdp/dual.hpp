#pragma once

#include <string>
#include <vector>

#include "streamdp/dp.hpp"
#include "streamdp/model.hpp"
#include "streamdp/threshold.hpp"

namespace streamdp {

/// The multi-client problem: independent client models coupled only by a
/// system-wide average power budget.
struct SystemConfig {
    std::vector<ClientModel> clients;
    double power_budget = 0.0; ///< energy units per slot, strictly positive

    int num_clients() const { return static_cast<int>(clients.size()); }
};

/// Validates the system and every client; empty result means valid.
std::vector<std::string> validate(const SystemConfig& cfg);

/// One client's contribution to a dual evaluation. `gain` is the exact
/// stationary cost of the greedy policy at this price (the solver's value
/// estimate is kept alongside for diagnostics).
struct ClientSolve {
    double gain = 0.0;
    double solver_gain = 0.0;
    Policy policy;
    StationaryEvaluation eval;
    bool converged = false;
    long iterations = 0;
};

/// Dual function evaluation at one price.
struct DualState {
    double price = 0.0;
    std::vector<ClientSolve> clients;
    double dual_value = 0.0;  ///< sum of client gains - price * budget
    double total_power = 0.0;
    double subgradient = 0.0; ///< total_power - budget
    int iterate = 0;
};

struct SolverOptions {
    double tol = 1e-10;
    long max_iter = 1000000;
};

/// Evaluates the dual at a price: solves every client's average-cost problem
/// independently, evaluates each greedy policy exactly, and assembles
/// D = sum of per-client values minus price * budget with subgradient
/// total power - budget. A client solve that fails to converge throws with
/// the client index.
DualState dual_value(const SystemConfig& cfg, double price, const SolverOptions& opts = {});

/// Price beyond which every client prefers all-idle: the largest possible
/// per-slot saving divided by the smallest positive energy spend, plus one.
double price_cap(const SystemConfig& cfg);

struct AscentOptions {
    double alpha0 = 0.0;    ///< 0 selects 1 / (sum of max power levels)
    long max_iter = 500;
    double tol = 1e-9;      ///< stop once |subgradient| falls below this
    int trail_window = 50;  ///< iterates included in the oscillation band
    SolverOptions solver;
};

struct AscentPoint {
    int iterate = 0;
    double price = 0.0;
    double dual_value = 0.0;
    double subgradient = 0.0;
    double total_power = 0.0;
};

struct AscentResult {
    enum class Stop { subgradient_tol, slack_at_zero, max_iter };

    DualState best;  ///< iterate with the largest dual value
    DualState last;  ///< final iterate
    std::vector<AscentPoint> history;
    bool converged = false;
    Stop stop = Stop::max_iter;
    double band_low = 0.0;  ///< trailing price band
    double band_high = 0.0;
    double cap = 0.0;       ///< applied price cap
};

/// Projected dual ascent with diminishing steps alpha_0 / sqrt(k):
/// price <- clamp(price + alpha_k * subgradient, 0, price_cap). Stops when
/// the subgradient magnitude drops below tol, when the budget is slack at
/// price zero, or at max_iter (flagged, with the trailing oscillation band
/// of prices reported either way).
AscentResult subgradient_ascent(const SystemConfig& cfg, double price0,
                                const AscentOptions& opts = {});

/// Primal-dual certificate for a finished ascent.
struct Certificate {
    double price = 0.0;
    double dual_value = 0.0;
    double primal_qoe_cost = 0.0;   ///< product policy, power term excluded
    double primal_power = 0.0;
    bool feasible = false;          ///< primal_power <= budget
    double duality_gap_bound = 0.0; ///< primal_qoe_cost - dual_value, feasible case
    double complementary_slackness = 0.0; ///< price * (power - budget)
    std::vector<std::string> warnings;
};

Certificate verify_primal_dual(const SystemConfig& cfg, const DualState& final_state);

struct ProbePoint {
    double price = 0.0;
    double dual_value = 0.0;
    double total_power = 0.0;
    std::vector<double> client_gains;
    std::vector<double> client_powers;
};

struct ProbeResult {
    std::vector<ProbePoint> points;
    double max_midpoint_violation = 0.0; ///< chord test over adjacent triples
    bool concave = true;                 ///< violation within 1e-9
    bool monotone_after_peak = true;     ///< nonincreasing past the maximizer
    double slope_min = 0.0;              ///< finite-difference slope extremes
    double slope_max = 0.0;
};

/// Evaluates the dual across a sorted price grid and reports the concavity
/// and post-peak monotonicity diagnostics alongside the table.
ProbeResult concavity_probe(const SystemConfig& cfg, const std::vector<double>& grid,
                            const SolverOptions& opts = {});

} // namespace streamdp
