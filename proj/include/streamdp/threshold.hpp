#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "streamdp/model.hpp"
#include "streamdp/policy.hpp"

namespace streamdp {

/// A pair of states violating the threshold structure: the action chosen at
/// lower_state is strictly less aggressive (same power with better quality,
/// or same quality with less power) than the one chosen at higher_state.
struct ThresholdWitness {
    int higher_state = 0;
    int lower_state = 0;
};

struct ThresholdCheck {
    bool ok = true;
    std::optional<ThresholdWitness> witness;
};

/// Thrown when an exhaustive search would exceed its policy-count guard.
struct InstanceTooLarge : std::runtime_error {
    InstanceTooLarge(const std::string& what, double count)
        : std::runtime_error(what), estimated_count(count) {}
    double estimated_count;
};

/// Exact long-run behaviour of the Markov chain a policy induces, computed
/// on the recurrent class reachable from the full buffer.
struct StationaryEvaluation {
    std::vector<double> distribution;  ///< size B+1; zero on transient states
    double average_cost = 0.0;         ///< includes the price * power term
    double outage_rate = 0.0;
    double outage_period_rate = 0.0;
    double average_power = 0.0;
    std::vector<double> delivery_rate; ///< per quality index
};

/// The quality-of-experience part of an evaluation: everything except the
/// priced power term.
double qoe_cost(const StationaryEvaluation& eval, const ClientModel& model);

/// Tests the two threshold clauses on states 1..B-T+1: once an action is
/// chosen at some state, no same-power lower-quality-index action and no
/// same-quality lower-power action may appear at any lower state. State 0 is
/// unconstrained. On failure the first violating pair in (higher, lower)
/// scan order is returned.
ThresholdCheck is_threshold(const Policy& p, const ClientModel& model);

/// Number of threshold policies the enumerator would yield. Counting aborts
/// once the running total exceeds cap and returns cap + 1.
long count_threshold_policies(const ClientModel& model, long cap = 10000000);

/// Streams every threshold policy: depth-first assignment from state B-T+1
/// down to 1 with both dominance clauses pruned during descent, then a free
/// choice at state 0. The visited Policy buffer is reused between calls;
/// copy it to keep it. Return false from the visitor to stop early.
void for_each_threshold_policy(const ClientModel& model,
                               const std::function<bool(const Policy&)>& visit);

/// Builds the chain induced by p (success mass to S(x), failure mass to
/// F(x), deterministic drain above the transmit cap), restricts it to the
/// recurrent class reachable from state B, and solves the stationary
/// equations there.
StationaryEvaluation evaluate_exact(const Policy& p, const ClientModel& model, double price);

/// Cheapest threshold policy by exact evaluation; ties keep the first policy
/// in enumeration order. Guarded by the threshold-policy count cap.
std::pair<Policy, StationaryEvaluation> best_threshold(const ClientModel& model, double price);

/// Cheapest policy over every stationary deterministic policy (test oracle).
/// Throws InstanceTooLarge when |A|^(B-T+2) exceeds 1e7.
std::pair<Policy, StationaryEvaluation> brute_force_best(const ClientModel& model, double price);

} // namespace streamdp
