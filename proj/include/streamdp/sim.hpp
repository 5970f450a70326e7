#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "streamdp/fading.hpp"
#include "streamdp/model.hpp"

namespace streamdp {

/// Counter-mode generator "counter-splitmix64-v1": every draw is a pure
/// function of (seed, client, slot, draw index), so client trajectories are
/// independent substreams and runs replay identically on any platform.
struct CounterRng {
    std::uint64_t seed = 0;

    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    double uniform(std::uint64_t client, std::uint64_t slot, std::uint64_t draw) const {
        std::uint64_t h = mix(seed ^ 0x6a09e667f3bcc909ULL);
        h = mix(h ^ client * 0x9e3779b97f4a7c15ULL);
        h = mix(h ^ slot * 0xc2b2ae3d27d4eb4fULL);
        h = mix(h ^ draw * 0x165667b19e3779f9ULL);
        return static_cast<double>(h >> 11) * 0x1.0p-53;
    }
};

struct SimConfig {
    long horizon = 0;        ///< total slots; averages cover slots [warmup, horizon)
    long warmup = 0;
    std::uint64_t seed = 0;
    int batches = 30;        ///< batch-means blocks for standard errors
    /// Starting playtime per client; default is a full buffer.
    std::optional<std::vector<int>> initial_playtime;
    /// Starting channel per client; default draws from the channel's
    /// stationary distribution.
    std::optional<std::vector<int>> initial_channel;
};

/// Empirical rates for one client (or the across-client sums in the
/// aggregate), each with a batch-means standard error.
struct ClientMetrics {
    double outage_rate = 0.0;
    double outage_period_rate = 0.0;
    double average_power = 0.0;
    double composite_qoe = 0.0; ///< outage + period charge + delivery penalties
    std::vector<double> delivery_rate;

    double outage_rate_se = 0.0;
    double outage_period_rate_se = 0.0;
    double average_power_se = 0.0;
    double composite_qoe_se = 0.0;
    std::vector<double> delivery_rate_se;

    long deliveries = 0;      ///< raw counts over the measured window
    long outage_slots = 0;
    long outage_periods = 0;
    double energy_total = 0.0;
};

struct SimMetrics {
    std::vector<ClientMetrics> per_client;
    ClientMetrics aggregate; ///< client sums per slot; power compares to the budget
    long measured_slots = 0;
};

struct TraceRow {
    long slot = 0;
    int client = 0;
    int playtime = 0;
    int channel = 0;
    int quality = 0;
    double energy = 0.0;
    bool success = false;
    bool outage = false;
    bool new_period = false;
};

/// Simulates every client slot by slot under its policy: observe (x, c),
/// apply u, draw delivery success at the channel's odds, step the playtime
/// by the success or failure transition, then step the channel. An outage is
/// a slot that starts with an empty buffer; a period begins on an outage
/// slot whose predecessor was not one (the slot before the run counts as
/// non-outage). Rates average the slots from warmup onward.
SimMetrics run(const std::vector<ClientModel>& models, const std::vector<ChannelModel>& channels,
               const std::vector<FadingPolicy>& policies, const SimConfig& cfg,
               std::vector<TraceRow>* trace = nullptr);

struct ReplicationResult {
    std::vector<SimMetrics> runs;
    SimMetrics pooled; ///< replication means; standard errors across replications
};

/// R independent runs with derived seeds seed_i = base_seed xor i, pooled by
/// plain averaging with between-replication standard errors. Replications
/// are independent streams, so `threads` > 1 fans them out without changing
/// any result.
ReplicationResult replicate(const std::vector<ClientModel>& models,
                            const std::vector<ChannelModel>& channels,
                            const std::vector<FadingPolicy>& policies, const SimConfig& cfg,
                            int replications, int threads = 1);

} // namespace streamdp
