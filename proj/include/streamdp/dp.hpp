#pragma once

#include <vector>

#include "streamdp/model.hpp"
#include "streamdp/policy.hpp"

namespace streamdp {

/// Per-state cost-to-go table. For the relative (average-cost) kind the
/// entry at the reference state 0 is pinned to 0 and `gain` carries the
/// optimal average cost; for discounted kinds `beta` is set.
struct ValueFunction {
    enum class Kind { finite_discounted, discounted, relative };

    std::vector<double> values; ///< indexed by state 0..B
    Kind kind = Kind::discounted;
    double beta = 0.0;
    int horizon = 0;     ///< finite_discounted only
    double gain = 0.0;   ///< relative only

    double at(ClientState x) const { return values[static_cast<std::size_t>(x)]; }
};

/// Expected value gained by a successful delivery in state x at stage s:
/// the new-outage charge avoided plus the discounted value difference
/// between the failure and success successors. Decreasing in x on the
/// transmit range; this is what makes greedy policies threshold-shaped.
struct DeliveryGain {
    int stage = 0;                 ///< s >= 1
    std::vector<double> value;     ///< valid for x in 1..B; index 0 unused (0.0)

    double at(ClientState x) const { return value[static_cast<std::size_t>(x)]; }
};

/// Outcome of a single-client solve.
struct SolveReport {
    Policy policy;
    ValueFunction value;
    double gain = 0.0;       ///< average-cost solves only
    long iterations = 0;
    double residual = 0.0;   ///< final sup-norm (discounted) or span (average)
    bool converged = false;
    bool threshold = false;  ///< greedy policy passed the threshold-structure check
    std::vector<double> residual_trail; ///< residuals of the last few iterations
};

struct BellmanResult {
    std::vector<double> values;
    Policy policy;
};

/// One Bellman backup of the discounted recursion. Returns the improved
/// value table and the greedy policy, with ties broken toward the action
/// that appears first in the canonical menu order (lower power, then lower
/// quality penalty; idle wins exact ties). States above the transmit cap
/// take the forced idle drain.
///
/// Throws std::invalid_argument on beta outside (0,1), a value table of the
/// wrong size, or an invalid model.
BellmanResult bellman_backup(const std::vector<double>& values, const ClientModel& model,
                             double price, double beta);

/// Discounted value iteration from V = 0 until the sup-norm residual drops
/// below tol*(1-beta)/(2*beta), which makes the greedy policy tol-optimal.
SolveReport solve_discounted(const ClientModel& model, double price, double beta,
                             double tol = 1e-10, long max_iter = 1000000);

/// Delivery-gain tables for stages 1..horizon, computed from the
/// finite-horizon value functions started at V^0 = 0.
std::vector<DeliveryGain> delivery_gains(const ClientModel& model, double price, double beta,
                                         int horizon);

/// Average-cost solve by relative value iteration with reference state 0.
/// Runs on a damped backup (a self-loop of weight 1-tau per step) so that
/// periodic optimal chains still converge; the damping leaves the gain and
/// the greedy policy unchanged and only rescales the bias. Stops when the
/// span of successive differences is at most tol; hitting max_iter is
/// flagged on the report, not thrown.
SolveReport solve_average(const ClientModel& model, double price, double tol = 1e-10,
                          long max_iter = 1000000);

} // namespace streamdp
