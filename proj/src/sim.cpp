#include "streamdp/sim.hpp"

#include <cmath>
#include <future>
#include <stdexcept>
#include <string>

namespace streamdp {

namespace {

struct BatchCounts {
    double outage = 0.0;
    double periods = 0.0;
    double energy = 0.0;
    std::vector<double> deliveries; // per quality
};

double batch_se(const std::vector<double>& batch_rates) {
    const std::size_t nb = batch_rates.size();
    if (nb < 2) return 0.0;
    double mean = 0.0;
    for (double r : batch_rates) mean += r;
    mean /= static_cast<double>(nb);
    double var = 0.0;
    for (double r : batch_rates) var += (r - mean) * (r - mean);
    var /= static_cast<double>(nb - 1);
    return std::sqrt(var / static_cast<double>(nb));
}

void require_run_inputs(const std::vector<ClientModel>& models,
                        const std::vector<ChannelModel>& channels,
                        const std::vector<FadingPolicy>& policies, const SimConfig& cfg) {
    if (models.empty()) throw std::invalid_argument("simulation needs at least one client");
    if (channels.size() != models.size() || policies.size() != models.size())
        throw std::invalid_argument("models, channels and policies must align one to one");
    if (!(cfg.horizon > cfg.warmup) || cfg.warmup < 0)
        throw std::invalid_argument("horizon must exceed warmup and warmup must be >= 0");
    if (cfg.batches < 1) throw std::invalid_argument("batches must be >= 1");
    for (std::size_t n = 0; n < models.size(); ++n) {
        auto mv = validate(models[n]);
        if (!mv.empty())
            throw std::invalid_argument("client " + std::to_string(n) + ": " + mv.front());
        auto cv = validate_channel(channels[n], models[n]);
        if (!cv.empty())
            throw std::invalid_argument("client " + std::to_string(n) + ": " + cv.front());
        auto pv = fading_policy_violations(policies[n], models[n], channels[n]);
        if (!pv.empty())
            throw std::invalid_argument("client " + std::to_string(n) + ": " + pv.front());
    }
    if (cfg.initial_playtime && cfg.initial_playtime->size() != models.size())
        throw std::invalid_argument("initial_playtime must list every client");
    if (cfg.initial_channel && cfg.initial_channel->size() != models.size())
        throw std::invalid_argument("initial_channel must list every client");
}

constexpr std::uint64_t kInitSlot = ~0ULL; // substream for initial channel draws

} // namespace

SimMetrics run(const std::vector<ClientModel>& models, const std::vector<ChannelModel>& channels,
               const std::vector<FadingPolicy>& policies, const SimConfig& cfg,
               std::vector<TraceRow>* trace) {
    require_run_inputs(models, channels, policies, cfg);

    const std::size_t n_clients = models.size();
    const long measured = cfg.horizon - cfg.warmup;
    const int nb = static_cast<int>(std::min<long>(cfg.batches, measured));
    const CounterRng rng{cfg.seed};

    std::vector<FadingState> state(n_clients);
    std::vector<bool> prev_outage(n_clients, false); // outage state of the slot before
    for (std::size_t n = 0; n < n_clients; ++n) {
        state[n].playtime = cfg.initial_playtime ? (*cfg.initial_playtime)[n]
                                                 : models[n].buffer_playtime;
        if (state[n].playtime < 0 || state[n].playtime > models[n].buffer_playtime)
            throw std::invalid_argument("initial playtime out of range for client " +
                                        std::to_string(n));
        if (cfg.initial_channel) {
            state[n].channel = (*cfg.initial_channel)[n];
            if (state[n].channel < 0 || state[n].channel >= channels[n].num_states)
                throw std::invalid_argument("initial channel out of range for client " +
                                            std::to_string(n));
        } else {
            auto pi = channel_stationary(channels[n]);
            const double r = rng.uniform(n, kInitSlot, 0);
            double acc = 0.0;
            state[n].channel = channels[n].num_states - 1;
            for (int c = 0; c < channels[n].num_states; ++c) {
                acc += pi[c];
                if (r < acc) {
                    state[n].channel = c;
                    break;
                }
            }
        }
    }

    std::vector<std::vector<BatchCounts>> counts(n_clients);
    for (std::size_t n = 0; n < n_clients; ++n) {
        counts[n].assign(nb, BatchCounts{});
        for (auto& b : counts[n])
            b.deliveries.assign(models[n].quality_penalties.size(), 0.0);
    }

    for (long s = 0; s < cfg.horizon; ++s) {
        const bool counted = s >= cfg.warmup;
        const int batch =
            counted ? static_cast<int>(((s - cfg.warmup) * nb) / measured) : 0;
        for (std::size_t n = 0; n < n_clients; ++n) {
            const ClientModel& m = models[n];
            const ChannelModel& ch = channels[n];
            const FadingState at = state[n];
            const Action u = policies[n].at(at.playtime, at.channel);
            const double p = ch.success(at.channel, m, u);
            const bool success = rng.uniform(n, s, 0) < p;

            StepCost slot;
            slot.outage = at.playtime == 0;
            slot.new_outage_period = slot.outage && !prev_outage[n];
            slot.energy_spent = m.energy(u);
            if (success) slot.delivered_quality = u.quality;

            if (counted) {
                BatchCounts& b = counts[n][batch];
                if (slot.outage) b.outage += 1.0;
                if (slot.new_outage_period) b.periods += 1.0;
                b.energy += slot.energy_spent;
                if (slot.delivered_quality) b.deliveries[*slot.delivered_quality] += 1.0;
            }
            if (trace)
                trace->push_back({s, static_cast<int>(n), at.playtime, at.channel, u.quality,
                                  slot.energy_spent, success, slot.outage,
                                  slot.new_outage_period});

            state[n].playtime = success ? success_transition(at.playtime, m)
                                        : failure_transition(at.playtime);
            if (ch.num_states > 1) {
                const double r = rng.uniform(n, s, 1);
                double acc = 0.0;
                int next = ch.num_states - 1;
                for (int d = 0; d < ch.num_states; ++d) {
                    acc += ch.step(at.channel, d);
                    if (r < acc) {
                        next = d;
                        break;
                    }
                }
                state[n].channel = next;
            }
            prev_outage[n] = slot.outage;
        }
    }

    SimMetrics metrics;
    metrics.measured_slots = measured;
    metrics.per_client.resize(n_clients);

    std::size_t max_q = 0;
    for (const auto& m : models) max_q = std::max(max_q, m.quality_penalties.size());
    metrics.aggregate.delivery_rate.assign(max_q, 0.0);
    metrics.aggregate.delivery_rate_se.assign(max_q, 0.0);
    std::vector<std::vector<double>> agg_batch_rates(4, std::vector<double>(nb, 0.0));

    for (std::size_t n = 0; n < n_clients; ++n) {
        const ClientModel& m = models[n];
        ClientMetrics& out = metrics.per_client[n];
        const std::size_t q_count = m.quality_penalties.size();
        out.delivery_rate.assign(q_count, 0.0);
        out.delivery_rate_se.assign(q_count, 0.0);

        BatchCounts total;
        total.deliveries.assign(q_count, 0.0);
        std::vector<long> batch_size(nb, 0);
        for (long s = 0; s < measured; ++s) batch_size[(s * nb) / measured]++;

        std::vector<double> r_outage(nb), r_periods(nb), r_energy(nb), r_comp(nb);
        std::vector<std::vector<double>> r_deliv(q_count, std::vector<double>(nb));
        for (int b = 0; b < nb; ++b) {
            const BatchCounts& bc = counts[n][b];
            const double size = static_cast<double>(batch_size[b]);
            r_outage[b] = bc.outage / size;
            r_periods[b] = bc.periods / size;
            r_energy[b] = bc.energy / size;
            double comp = r_outage[b] + m.outage_period_penalty * r_periods[b];
            for (std::size_t q = 0; q < q_count; ++q) {
                r_deliv[q][b] = bc.deliveries[q] / size;
                comp += m.quality_penalties[q] * r_deliv[q][b];
            }
            r_comp[b] = comp;
            total.outage += bc.outage;
            total.periods += bc.periods;
            total.energy += bc.energy;
            for (std::size_t q = 0; q < q_count; ++q) total.deliveries[q] += bc.deliveries[q];

            agg_batch_rates[0][b] += r_outage[b];
            agg_batch_rates[1][b] += r_periods[b];
            agg_batch_rates[2][b] += r_energy[b];
            agg_batch_rates[3][b] += r_comp[b];
        }

        const double msl = static_cast<double>(measured);
        out.outage_rate = total.outage / msl;
        out.outage_period_rate = total.periods / msl;
        out.average_power = total.energy / msl;
        out.composite_qoe =
            out.outage_rate + m.outage_period_penalty * out.outage_period_rate;
        for (std::size_t q = 0; q < q_count; ++q) {
            out.delivery_rate[q] = total.deliveries[q] / msl;
            out.composite_qoe += m.quality_penalties[q] * out.delivery_rate[q];
            out.delivery_rate_se[q] = batch_se(r_deliv[q]);
            out.deliveries += static_cast<long>(total.deliveries[q]);
        }
        out.outage_rate_se = batch_se(r_outage);
        out.outage_period_rate_se = batch_se(r_periods);
        out.average_power_se = batch_se(r_energy);
        out.composite_qoe_se = batch_se(r_comp);
        out.outage_slots = static_cast<long>(total.outage);
        out.outage_periods = static_cast<long>(total.periods);
        out.energy_total = total.energy;

        metrics.aggregate.outage_rate += out.outage_rate;
        metrics.aggregate.outage_period_rate += out.outage_period_rate;
        metrics.aggregate.average_power += out.average_power;
        metrics.aggregate.composite_qoe += out.composite_qoe;
        for (std::size_t q = 0; q < q_count; ++q)
            metrics.aggregate.delivery_rate[q] += out.delivery_rate[q];
        metrics.aggregate.deliveries += out.deliveries;
        metrics.aggregate.outage_slots += out.outage_slots;
        metrics.aggregate.outage_periods += out.outage_periods;
        metrics.aggregate.energy_total += out.energy_total;
    }
    metrics.aggregate.outage_rate_se = batch_se(agg_batch_rates[0]);
    metrics.aggregate.outage_period_rate_se = batch_se(agg_batch_rates[1]);
    metrics.aggregate.average_power_se = batch_se(agg_batch_rates[2]);
    metrics.aggregate.composite_qoe_se = batch_se(agg_batch_rates[3]);
    return metrics;
}

namespace {

void pool_field(double ClientMetrics::*rate, double ClientMetrics::*se, ClientMetrics& pooled,
                const std::vector<const ClientMetrics*>& reps) {
    std::vector<double> values;
    values.reserve(reps.size());
    for (const ClientMetrics* r : reps) values.push_back(r->*rate);
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    pooled.*rate = mean;
    pooled.*se = batch_se(values); // same estimator: sd of replication means
}

ClientMetrics pool_clients(const std::vector<const ClientMetrics*>& reps) {
    ClientMetrics pooled;
    pool_field(&ClientMetrics::outage_rate, &ClientMetrics::outage_rate_se, pooled, reps);
    pool_field(&ClientMetrics::outage_period_rate, &ClientMetrics::outage_period_rate_se, pooled,
               reps);
    pool_field(&ClientMetrics::average_power, &ClientMetrics::average_power_se, pooled, reps);
    pool_field(&ClientMetrics::composite_qoe, &ClientMetrics::composite_qoe_se, pooled, reps);
    const std::size_t q_count = reps.front()->delivery_rate.size();
    pooled.delivery_rate.assign(q_count, 0.0);
    pooled.delivery_rate_se.assign(q_count, 0.0);
    for (std::size_t q = 0; q < q_count; ++q) {
        std::vector<double> values;
        for (const ClientMetrics* r : reps) values.push_back(r->delivery_rate[q]);
        double mean = 0.0;
        for (double v : values) mean += v;
        pooled.delivery_rate[q] = mean / static_cast<double>(values.size());
        pooled.delivery_rate_se[q] = batch_se(values);
    }
    for (const ClientMetrics* r : reps) {
        pooled.deliveries += r->deliveries;
        pooled.outage_slots += r->outage_slots;
        pooled.outage_periods += r->outage_periods;
        pooled.energy_total += r->energy_total;
    }
    return pooled;
}

} // namespace

ReplicationResult replicate(const std::vector<ClientModel>& models,
                            const std::vector<ChannelModel>& channels,
                            const std::vector<FadingPolicy>& policies, const SimConfig& cfg,
                            int replications, int threads) {
    if (replications < 1) throw std::invalid_argument("replications must be >= 1");

    ReplicationResult result;
    result.runs.resize(static_cast<std::size_t>(replications));
    auto run_rep = [&](int i) {
        SimConfig rep_cfg = cfg;
        rep_cfg.seed = cfg.seed ^ static_cast<std::uint64_t>(i);
        result.runs[i] = run(models, channels, policies, rep_cfg);
    };
    if (threads > 1 && replications > 1) {
        std::vector<std::future<void>> pending;
        for (int i = 0; i < replications; ++i) {
            if (static_cast<int>(pending.size()) >= threads) {
                pending.front().get();
                pending.erase(pending.begin());
            }
            pending.push_back(std::async(std::launch::async, run_rep, i));
        }
        for (auto& f : pending) f.get();
    } else {
        for (int i = 0; i < replications; ++i) run_rep(i);
    }
    if (replications == 1) {
        result.pooled = result.runs.front();
        return result;
    }

    result.pooled.measured_slots = 0;
    for (const SimMetrics& r : result.runs) result.pooled.measured_slots += r.measured_slots;
    const std::size_t n_clients = models.size();
    result.pooled.per_client.resize(n_clients);
    for (std::size_t n = 0; n < n_clients; ++n) {
        std::vector<const ClientMetrics*> reps;
        for (const SimMetrics& r : result.runs) reps.push_back(&r.per_client[n]);
        result.pooled.per_client[n] = pool_clients(reps);
    }
    std::vector<const ClientMetrics*> agg;
    for (const SimMetrics& r : result.runs) agg.push_back(&r.aggregate);
    result.pooled.aggregate = pool_clients(agg);
    return result;
}

} // namespace streamdp
