#include "streamdp/verify.hpp"

#include <algorithm>
#include <cmath>

#include "streamdp/dp.hpp"
#include "streamdp/random_models.hpp"
#include "streamdp/sim.hpp"
#include "streamdp/threshold.hpp"

namespace streamdp {

namespace {

void finish(SuiteReport& report) {
    report.pass = true;
    for (const auto& c : report.checks) report.pass = report.pass && c.pass;
}

} // namespace

SuiteReport verify_threshold(const std::vector<ClientModel>& clients,
                             const VerifyOptions& opts) {
    SuiteReport report;
    report.suite = "threshold";

    auto check_model = [&](const ClientModel& m, const std::string& label) {
        bool ok = true;
        std::string detail;
        for (double beta : {0.9, 0.99}) {
            auto r = solve_discounted(m, opts.price, beta);
            if (!r.converged || !r.threshold) {
                ok = false;
                detail = "discounted beta " + std::to_string(beta);
            }
        }
        auto avg = solve_average(m, opts.price);
        if (!avg.converged || !avg.threshold) {
            ok = false;
            detail = "average-cost solve";
        }
        report.checks.push_back({label, ok, ok ? 1.0 : 0.0, detail});
    };

    for (std::size_t n = 0; n < clients.size(); ++n)
        check_model(clients[n], "config client " + std::to_string(n));
    for (int i = 0; i < opts.random_configs; ++i)
        check_model(random_client_model(opts.seed + static_cast<std::uint64_t>(i)),
                    "random config " + std::to_string(i));
    finish(report);
    return report;
}

SuiteReport verify_gain_monotonicity(const ClientModel& model, const VerifyOptions& opts) {
    SuiteReport report;
    report.suite = "lemma3";
    for (double beta : {0.5, 0.9, 0.99}) {
        double worst = 0.0;
        auto gains = delivery_gains(model, opts.price, beta, 200);
        for (const auto& g : gains)
            for (int x = 1; x < model.transmit_cap(); ++x)
                worst = std::max(worst, g.at(x + 1) - g.at(x));
        report.checks.push_back({"delivery gain nonincreasing, beta " + std::to_string(beta),
                                 worst <= 1e-12, worst, "max violation"});
    }
    finish(report);
    return report;
}

SuiteReport verify_duality(const SystemConfig& cfg, const VerifyOptions&) {
    SuiteReport report;
    report.suite = "duality";

    std::vector<double> grid;
    const double cap = price_cap(cfg);
    for (int i = 0; i <= 100; ++i) grid.push_back(cap * i / 100.0);
    ProbeResult probe = concavity_probe(cfg, grid);

    report.checks.push_back({"dual midpoint concavity", probe.concave,
                             probe.max_midpoint_violation, "max chord excess"});
    report.checks.push_back({"dual nonincreasing past its peak", probe.monotone_after_peak, 0.0,
                             ""});
    const bool slopes_ok = probe.slope_min >= -cfg.power_budget - 1e-9;
    report.checks.push_back(
        {"dual slopes within the subgradient range", slopes_ok, probe.slope_min, "min slope"});

    bool power_monotone = true;
    double worst_step = 0.0;
    for (std::size_t i = 1; i < probe.points.size(); ++i)
        for (std::size_t n = 0; n < probe.points[i].client_powers.size(); ++n) {
            const double step =
                probe.points[i].client_powers[n] - probe.points[i - 1].client_powers[n];
            worst_step = std::max(worst_step, step);
            if (step > 1e-9) power_monotone = false;
        }
    report.checks.push_back({"per-client power nonincreasing in the price", power_monotone,
                             worst_step, "max increase"});

    AscentOptions ascent_opts;
    ascent_opts.tol = 1e-2 * cfg.power_budget;
    AscentResult ascent = subgradient_ascent(cfg, 0.0, ascent_opts);
    const bool settled = ascent.converged || ascent.band_low <= ascent.band_high;
    report.checks.push_back({"ascent settles or reports its band", settled,
                             std::abs(ascent.last.subgradient), "final |subgradient|"});

    Certificate cert = verify_primal_dual(cfg, ascent.best);
    const bool slack_ok = std::abs(cert.complementary_slackness) <=
                          1e-2 * cfg.power_budget * std::max(cert.price, 1.0);
    report.checks.push_back({"complementary slackness residual", slack_ok,
                             cert.complementary_slackness, ""});
    const bool gap_ok = !cert.feasible || cert.duality_gap_bound >= -1e-9;
    report.checks.push_back({"weak duality on the certificate", gap_ok,
                             cert.feasible ? cert.duality_gap_bound : 0.0, "gap bound"});
    finish(report);
    return report;
}

SuiteReport verify_sim_consistency(const ClientModel& model, const VerifyOptions& opts) {
    SuiteReport report;
    report.suite = "sim-consistency";

    auto solved = solve_average(model, opts.price);
    auto exact = evaluate_exact(solved.policy, model, opts.price);

    SimConfig sim_cfg;
    sim_cfg.horizon = opts.sim_horizon;
    sim_cfg.warmup = opts.sim_warmup;
    sim_cfg.seed = opts.seed;
    auto metrics = run({model}, {fixed_channel(model)}, {lift_policy(solved.policy)}, sim_cfg);
    const auto& c = metrics.per_client[0];

    auto within = [&](const std::string& name, double sim, double se, double truth) {
        const double gap = std::abs(sim - truth);
        report.checks.push_back({name, gap <= 3.0 * se || gap <= 1e-12, gap, "abs deviation"});
    };
    within("outage rate", c.outage_rate, c.outage_rate_se, exact.outage_rate);
    within("outage period rate", c.outage_period_rate, c.outage_period_rate_se,
           exact.outage_period_rate);
    within("average power", c.average_power, c.average_power_se, exact.average_power);
    within("composite cost", c.composite_qoe, c.composite_qoe_se, qoe_cost(exact, model));
    finish(report);
    return report;
}

SuiteReport verify_fading_reduction(const ClientModel& model,
                                    const std::optional<ChannelModel>& channel,
                                    const VerifyOptions& opts) {
    SuiteReport report;
    report.suite = "fading-reduction";

    auto flat = solve_average(model, opts.price);
    auto one = solve_fading_average(model, fixed_channel(model), opts.price);
    double value_gap = std::abs(one.gain - flat.gain);
    for (int x = 0; x <= model.buffer_playtime; ++x)
        value_gap = std::max(value_gap, std::abs(one.values[x] - flat.value.values[x]));
    bool same_policy = true;
    for (int x = 0; x <= model.buffer_playtime; ++x)
        same_policy = same_policy && one.policy.at(x, 0) == flat.policy.at(x);
    report.checks.push_back({"one-state channel matches the fixed-channel solve",
                             same_policy && value_gap <= 1e-12, value_gap, "max value gap"});

    ChannelModel two;
    if (channel) {
        two = *channel;
    } else {
        // Synthesized weak/strong pair: state 0 halves the delivery odds.
        two.num_states = 2;
        two.transition = {0.9, 0.1, 0.5, 0.5};
        std::vector<double> weak = model.success_prob;
        for (double& p : weak) p *= 0.5;
        two.success_prob_per_channel = {weak, model.success_prob};
    }
    auto faded = solve_fading_average(model, two, opts.price);
    report.checks.push_back({"product-space solve converges", faded.converged,
                             static_cast<double>(faded.iterations), "iterations"});
    report.checks.push_back({"threshold structure per channel state",
                             faded.per_channel_threshold, 0.0, ""});

    SimConfig sim_cfg;
    sim_cfg.horizon = opts.sim_horizon;
    sim_cfg.warmup = opts.sim_warmup;
    sim_cfg.seed = opts.seed;
    auto metrics = run({model}, {two}, {faded.policy}, sim_cfg);
    const auto& c = metrics.per_client[0];
    const double sim_cost = c.composite_qoe + opts.price * c.average_power;
    const double se = std::sqrt(c.composite_qoe_se * c.composite_qoe_se +
                                opts.price * opts.price * c.average_power_se *
                                    c.average_power_se);
    report.checks.push_back({"simulated cost within three standard errors of the gain",
                             std::abs(sim_cost - faded.gain) <= 3.0 * se,
                             std::abs(sim_cost - faded.gain), "abs deviation"});
    finish(report);
    return report;
}

} // namespace streamdp
