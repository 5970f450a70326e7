#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "streamdp/dual.hpp"
#include "streamdp/fading.hpp"
#include "streamdp/model.hpp"

namespace streamdp {

/// One verification check with its measured quantity, for the CLI's verify
/// report.
struct CheckResult {
    std::string name;
    bool pass = false;
    double measured = 0.0;
    std::string detail;
};

struct SuiteReport {
    std::string suite;
    bool pass = false;
    std::vector<CheckResult> checks;
};

struct VerifyOptions {
    double price = 0.1;
    int random_configs = 25;
    std::uint64_t seed = 1;
    long sim_horizon = 200000;
    long sim_warmup = 1000;
};

/// Greedy policies from discounted (beta 0.9 and 0.99) and average-cost
/// solves must be threshold-structured, on the given clients and on seeded
/// random ones.
SuiteReport verify_threshold(const std::vector<ClientModel>& clients, const VerifyOptions& opts);

/// Per-state delivery gains nonincreasing on the transmit range for
/// beta in {0.5, 0.9, 0.99} and stages up to 200; violations at most 1e-12.
SuiteReport verify_gain_monotonicity(const ClientModel& model, const VerifyOptions& opts);

/// Dual concavity on a 101-point grid up to the price cap, slope bounds,
/// monotone per-client power, an ascent run, and its certificate.
SuiteReport verify_duality(const SystemConfig& cfg, const VerifyOptions& opts);

/// Monte Carlo rates of the average-cost greedy policy against exact
/// stationary evaluation, at three standard errors.
SuiteReport verify_sim_consistency(const ClientModel& model, const VerifyOptions& opts);

/// One-state-channel equivalence with the fixed-channel solver, and
/// per-channel threshold structure plus simulation agreement on a two-state
/// channel (the client's own, or a synthesized weak/strong pair).
SuiteReport verify_fading_reduction(const ClientModel& model,
                                    const std::optional<ChannelModel>& channel,
                                    const VerifyOptions& opts);

} // namespace streamdp
