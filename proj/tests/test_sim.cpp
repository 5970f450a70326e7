#include <doctest.h>

#include <cmath>

#include "streamdp/sim.hpp"
#include "streamdp/threshold.hpp"
#include "support.hpp"

using namespace streamdp;
using streamdp::testing::canonical_baseline_policy;
using streamdp::testing::canonical_model;
using streamdp::testing::canonical_price;

namespace {

struct SingleClient {
    std::vector<ClientModel> models;
    std::vector<ChannelModel> channels;
    std::vector<FadingPolicy> policies;
};

SingleClient canonical_setup(const Policy& p) {
    ClientModel m = canonical_model();
    return {{m}, {fixed_channel(m)}, {lift_policy(p)}};
}

} // namespace

TEST_CASE("all-idle drains the buffer then stays in outage") {
    auto s = canonical_setup(all_idle_policy(canonical_model()));
    SimConfig cfg;
    cfg.horizon = 50;
    cfg.warmup = 0;
    cfg.seed = 11;
    auto metrics = run(s.models, s.channels, s.policies, cfg);
    const auto& c = metrics.per_client[0];
    // Four playable slots from a full buffer of 4, outage from slot 4 on.
    CHECK(c.outage_slots == 46);
    CHECK(c.outage_periods == 1);
    CHECK(c.outage_rate == doctest::Approx(46.0 / 50.0).epsilon(1e-15));
    CHECK(c.outage_period_rate == doctest::Approx(1.0 / 50.0).epsilon(1e-15));
    CHECK(c.average_power == 0.0);
    CHECK(c.deliveries == 0);
}

TEST_CASE("certain delivery never hits an outage") {
    ClientModel m = canonical_model();
    m.success_prob = {0.0, 1.0, 1.0, 0.0, 1.0, 1.0}; // always delivers when asked
    Policy p = all_idle_policy(m);
    for (int x = 0; x <= m.transmit_cap(); ++x) p.action_of[x] = Action{0, 1};
    SimConfig cfg;
    cfg.horizon = 5000;
    cfg.warmup = 100;
    cfg.seed = 3;
    auto metrics = run({m}, {fixed_channel(m)}, {lift_policy(p)}, cfg);
    CHECK(metrics.per_client[0].outage_slots == 0);
    CHECK(metrics.per_client[0].outage_periods == 0);
}

TEST_CASE("long-run rates reconcile with the exact stationary evaluation") {
    ClientModel m = canonical_model();
    Policy p = canonical_baseline_policy();
    auto exact = evaluate_exact(p, m, canonical_price);

    auto s = canonical_setup(p);
    SimConfig cfg;
    cfg.horizon = 1000000;
    cfg.warmup = 1000;
    cfg.seed = 20260808;
    auto metrics = run(s.models, s.channels, s.policies, cfg);
    const auto& c = metrics.per_client[0];

    CHECK(std::abs(c.outage_rate - exact.outage_rate) <= 3.0 * c.outage_rate_se);
    CHECK(std::abs(c.outage_period_rate - exact.outage_period_rate) <=
          3.0 * c.outage_period_rate_se);
    CHECK(std::abs(c.average_power - exact.average_power) <= 3.0 * c.average_power_se);
    CHECK(std::abs(c.delivery_rate[0] - exact.delivery_rate[0]) <= 3.0 * c.delivery_rate_se[0]);
    CHECK(std::abs(c.composite_qoe - qoe_cost(exact, m)) <= 3.0 * c.composite_qoe_se);

    // The composite rate recomposes from its parts.
    double recomposed = c.outage_rate + m.outage_period_penalty * c.outage_period_rate;
    for (std::size_t q = 0; q < c.delivery_rate.size(); ++q)
        recomposed += m.quality_penalties[q] * c.delivery_rate[q];
    CHECK(c.composite_qoe == doctest::Approx(recomposed).epsilon(1e-12));
    CHECK(c.outage_period_rate <= c.outage_rate);
}

TEST_CASE("identical seeds reproduce metrics bit for bit") {
    auto s = canonical_setup(canonical_baseline_policy());
    SimConfig cfg;
    cfg.horizon = 20000;
    cfg.warmup = 50;
    cfg.seed = 77;
    auto a = run(s.models, s.channels, s.policies, cfg);
    auto b = run(s.models, s.channels, s.policies, cfg);
    CHECK(a.per_client[0].outage_rate == b.per_client[0].outage_rate);
    CHECK(a.per_client[0].average_power == b.per_client[0].average_power);
    CHECK(a.per_client[0].composite_qoe == b.per_client[0].composite_qoe);
    CHECK(a.per_client[0].outage_rate_se == b.per_client[0].outage_rate_se);

    SimConfig other = cfg;
    other.seed = 78;
    auto d = run(s.models, s.channels, s.policies, other);
    CHECK(a.per_client[0].outage_rate != d.per_client[0].outage_rate);
}

TEST_CASE("trace rows replay the streamed accounting") {
    auto s = canonical_setup(canonical_baseline_policy());
    SimConfig cfg;
    cfg.horizon = 4000;
    cfg.warmup = 10;
    cfg.seed = 5;
    std::vector<TraceRow> trace;
    auto metrics = run(s.models, s.channels, s.policies, cfg, &trace);
    REQUIRE(trace.size() == 4000);

    long deliveries = 0, outages = 0, periods = 0;
    double energy = 0.0;
    bool prev_outage = false;
    for (const auto& row : trace) {
        if (row.slot >= cfg.warmup) {
            if (row.success) ++deliveries;
            if (row.outage) ++outages;
            // recompute period starts from the outage bit sequence alone
            if (row.outage && !prev_outage) ++periods;
            energy += row.energy;
        }
        prev_outage = row.outage;
    }
    const auto& c = metrics.per_client[0];
    CHECK(deliveries == c.deliveries);
    CHECK(outages == c.outage_slots);
    CHECK(periods == c.outage_periods);
    CHECK(energy == doctest::Approx(c.energy_total).epsilon(1e-12));
}

TEST_CASE("fading simulation tracks the product-chain solve") {
    ClientModel m = canonical_model();
    ChannelModel ch;
    ch.num_states = 2;
    ch.transition = {0.9, 0.1, 0.5, 0.5};
    std::vector<double> weak = m.success_prob;
    for (double& p : weak) p *= 0.5;
    ch.success_prob_per_channel = {weak, m.success_prob};

    auto report = solve_fading_average(m, ch, canonical_price);
    REQUIRE(report.converged);

    SimConfig cfg;
    cfg.horizon = 400000;
    cfg.warmup = 2000;
    cfg.seed = 99;
    auto metrics = run({m}, {ch}, {report.policy}, cfg);
    const auto& c = metrics.per_client[0];
    const double sim_cost = c.composite_qoe + canonical_price * c.average_power;
    const double se = std::sqrt(c.composite_qoe_se * c.composite_qoe_se +
                                canonical_price * canonical_price * c.average_power_se *
                                    c.average_power_se);
    CHECK(std::abs(sim_cost - report.gain) <= 3.0 * se);
}

TEST_CASE("replications pool means and between-run errors") {
    auto s = canonical_setup(canonical_baseline_policy());
    SimConfig cfg;
    cfg.horizon = 30000;
    cfg.warmup = 100;
    cfg.seed = 7;

    auto single = replicate(s.models, s.channels, s.policies, cfg, 1);
    auto direct = run(s.models, s.channels, s.policies, cfg);
    CHECK(single.pooled.per_client[0].outage_rate == direct.per_client[0].outage_rate);
    CHECK(single.pooled.per_client[0].outage_rate_se == direct.per_client[0].outage_rate_se);

    auto pooled = replicate(s.models, s.channels, s.policies, cfg, 10);
    REQUIRE(pooled.runs.size() == 10);
    double mean = 0.0;
    for (const auto& r : pooled.runs) mean += r.per_client[0].outage_rate;
    mean /= 10.0;
    CHECK(pooled.pooled.per_client[0].outage_rate == doctest::Approx(mean).epsilon(1e-15));
    CHECK(std::abs(pooled.pooled.per_client[0].outage_rate - 1.0 / 7.0) <=
          3.0 * pooled.pooled.per_client[0].outage_rate_se);

    // Derived seeds: replication 0 is the base run itself.
    CHECK(pooled.runs[0].per_client[0].outage_rate == direct.per_client[0].outage_rate);
}

TEST_CASE("simulation rejects inconsistent configurations") {
    auto s = canonical_setup(canonical_baseline_policy());
    SimConfig cfg;
    cfg.horizon = 100;
    cfg.warmup = 100; // horizon must exceed warmup
    CHECK_THROWS_AS(run(s.models, s.channels, s.policies, cfg), std::invalid_argument);

    cfg.warmup = 0;
    SimConfig bad = cfg;
    bad.initial_playtime = std::vector<int>{99};
    CHECK_THROWS_AS(run(s.models, s.channels, s.policies, bad), std::invalid_argument);

    auto wrong = s;
    wrong.policies[0].action_of[0] = Action{0, 0}; // non-canonical zero-power action
    CHECK_THROWS_AS(run(wrong.models, wrong.channels, wrong.policies, cfg),
                    std::invalid_argument);
}
