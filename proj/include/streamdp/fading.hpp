#pragma once

#include <string>
#include <vector>

#include "streamdp/dp.hpp"
#include "streamdp/model.hpp"
#include "streamdp/policy.hpp"
#include "streamdp/threshold.hpp"

namespace streamdp {

/// Markov channel: a finite state set evolving independently of the control,
/// with one success-probability matrix per channel state. The base client
/// model keeps the menus and penalties; only delivery odds vary with c.
struct ChannelModel {
    int num_states = 0;
    std::vector<double> transition; ///< C x C row-major, row-stochastic
    std::vector<std::vector<double>> success_prob_per_channel; ///< C matrices, Q x K row-major

    double step(int from, int to) const {
        return transition[static_cast<std::size_t>(from) * num_states +
                          static_cast<std::size_t>(to)];
    }
    double success(int channel, const ClientModel& m, Action u) const {
        return success_prob_per_channel[channel]
                                       [static_cast<std::size_t>(u.quality) *
                                            m.power_levels.size() +
                                        static_cast<std::size_t>(u.power)];
    }
};

struct FadingState {
    int playtime = 0;
    int channel = 0;
};

/// Channel invariants plus every per-channel matrix checked against the base
/// model's monotonicity rules. Empty result means valid.
std::vector<std::string> validate_channel(const ChannelModel& ch, const ClientModel& model);

/// The one-state channel equivalent to a fixed-channel client model.
ChannelModel fixed_channel(const ClientModel& model);

/// Stationary distribution of the channel process alone.
std::vector<double> channel_stationary(const ChannelModel& ch);

/// A stationary policy on the product space (playtime, channel).
struct FadingPolicy {
    int num_channels = 1;
    std::vector<Action> action_of; ///< index playtime * C + channel

    Action at(int playtime, int channel) const {
        return action_of[static_cast<std::size_t>(playtime) * num_channels +
                         static_cast<std::size_t>(channel)];
    }
    int num_playtime_states() const {
        return static_cast<int>(action_of.size()) / num_channels;
    }
};

/// Lifts a fixed-channel policy onto a one-state channel.
FadingPolicy lift_policy(const Policy& p);

/// The restriction x -> u(x, channel) as a plain policy, for per-channel
/// structure checks.
Policy channel_slice(const FadingPolicy& p, int channel);

std::vector<std::string> fading_policy_violations(const FadingPolicy& p, const ClientModel& model,
                                                  const ChannelModel& ch);

struct FadingBackupResult {
    std::vector<double> values; ///< index playtime * C + channel
    FadingPolicy policy;
};

/// Bellman backup on the product space: stage terms as in the fixed-channel
/// recursion with the channel's success matrix, continuation averaged over
/// the next channel. With one channel state this reproduces bellman_backup
/// bit for bit.
FadingBackupResult fading_backup(const std::vector<double>& values, const ClientModel& model,
                                 const ChannelModel& channel, double price, double beta);

struct FadingSolveReport {
    FadingPolicy policy;
    std::vector<double> values; ///< relative values (average) or discounted values
    double gain = 0.0;
    long iterations = 0;
    double residual = 0.0;
    bool converged = false;
    bool per_channel_threshold = false; ///< every channel slice passes is_threshold
};

/// Average-cost solve on the product chain by the same damped relative value
/// iteration as solve_average. The channel matrix must be irreducible;
/// otherwise the error names an unreachable channel. The greedy policy is
/// checked slice by slice: threshold structure must hold at each fixed
/// channel state.
FadingSolveReport solve_fading_average(const ClientModel& model, const ChannelModel& channel,
                                       double price, double tol = 1e-10, long max_iter = 1000000);

/// Discounted companion solve, iterating fading_backup to the usual stopping
/// rule.
FadingSolveReport solve_fading_discounted(const ClientModel& model, const ChannelModel& channel,
                                          double price, double beta, double tol = 1e-10,
                                          long max_iter = 1000000);

} // namespace streamdp
