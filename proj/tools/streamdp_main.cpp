// streamdp: threshold-policy synthesis and simulation for power-budgeted
// streaming clients. Subcommands: solve, dual, simulate, verify.

#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "streamdp/dp.hpp"
#include "streamdp/dual.hpp"
#include "streamdp/fading.hpp"
#include "streamdp/json_io.hpp"
#include "streamdp/sim.hpp"
#include "streamdp/threshold.hpp"
#include "streamdp/verify.hpp"

using nlohmann::json;
using namespace streamdp;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNotConverged = 3;

// UTC timestamp; SOURCE_DATE_EPOCH pins it for byte-reproducible outputs.
std::string timestamp_utc() {
    std::time_t t = std::time(nullptr);
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"))
        t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

json manifest(const std::string& command, const std::string& config_path, json params) {
    return json{{"command", command},
                {"config", config_path},
                {"parameters", std::move(params)},
                {"tool_version", kVersion},
                {"timestamp", timestamp_utc()}};
}

void write_json(const std::string& path, const json& j) {
    write_file_atomic(path, j.dump(2) + "\n");
}

std::string sibling_path(const std::string& out, const std::string& suffix) {
    const std::string ext = ".json";
    if (out.size() > ext.size() && out.compare(out.size() - ext.size(), ext.size(), ext) == 0)
        return out.substr(0, out.size() - ext.size()) + suffix;
    return out + suffix;
}

int env_threads() {
    if (const char* v = std::getenv("STREAMDP_THREADS")) {
        const int n = std::atoi(v);
        if (n >= 1) return n;
    }
    return 1;
}

std::string format_row(const char* fmt, ...) {
    char buf[256];
    va_list args;
    va_start(args, fmt);
    std::vsnprintf(buf, sizeof buf, fmt, args);
    va_end(args);
    return buf;
}

struct SolveArgs {
    std::string config, out;
    double price = 0.0;
    double beta = 0.0;
    bool average = false;
    bool list_thresholds = false;
    double tol = 1e-10;
    long max_iter = 1000000;
};

int cmd_solve(const SolveArgs& args) {
    ClientModel model = load_client_model(args.config);
    auto channel = channel_from_json(load_json(args.config), model);

    json params{{"price", args.price}, {"tol", args.tol}, {"max_iter", args.max_iter}};
    params[args.average ? "average" : "beta"] = args.average ? json(true) : json(args.beta);
    if (args.list_thresholds) params["list"] = true;
    json out{{"manifest", manifest("solve", args.config, params)}};

    bool converged = false;
    bool threshold_ok = false;
    if (channel) {
        if (args.list_thresholds)
            throw ConfigError("--list is only available for fixed-channel configs");
        FadingSolveReport report =
            args.average
                ? solve_fading_average(model, *channel, args.price, args.tol, args.max_iter)
                : solve_fading_discounted(model, *channel, args.price, args.beta, args.tol,
                                          args.max_iter);
        converged = report.converged;
        threshold_ok = report.per_channel_threshold;
        out["report"] = json{{"kind", args.average ? "average" : "discounted"},
                             {"gain", report.gain},
                             {"values", report.values},
                             {"iterations", report.iterations},
                             {"residual", report.residual},
                             {"converged", report.converged},
                             {"threshold", report.per_channel_threshold},
                             {"num_channels", channel->num_states}};
        write_json(sibling_path(args.out, ".policy.json"),
                   json{{"manifest", out["manifest"]},
                        {"policy", fading_policy_to_json(report.policy)}});
        if (args.average)
            std::printf("gain %.12g  threshold %s  iterations %ld\n", report.gain,
                        threshold_ok ? "yes" : "no", report.iterations);
        else
            std::printf("value at empty buffer %.12g  threshold %s  iterations %ld\n",
                        report.values[0], threshold_ok ? "yes" : "no", report.iterations);
    } else {
        SolveReport report = args.average
                                 ? solve_average(model, args.price, args.tol, args.max_iter)
                                 : solve_discounted(model, args.price, args.beta, args.tol,
                                                    args.max_iter);
        converged = report.converged;
        threshold_ok = report.threshold;
        auto eval = evaluate_exact(report.policy, model, args.price);
        out["report"] = json{{"kind", args.average ? "average" : "discounted"},
                             {"gain", args.average ? report.gain : eval.average_cost},
                             {"values", report.value.values},
                             {"iterations", report.iterations},
                             {"residual", report.residual},
                             {"converged", report.converged},
                             {"threshold", report.threshold},
                             {"evaluation", evaluation_to_json(eval)}};
        if (args.list_thresholds) {
            json listing = json::array();
            for_each_threshold_policy(model, [&](const Policy& p) {
                listing.push_back(json{{"policy", policy_to_json(p)},
                                       {"average_cost",
                                        evaluate_exact(p, model, args.price).average_cost}});
                return true;
            });
            out["threshold_policies"] = std::move(listing);
        }
        write_json(sibling_path(args.out, ".policy.json"),
                   json{{"manifest", out["manifest"]}, {"policy", policy_to_json(report.policy)}});
        std::printf("%s %.12g  threshold %s  iterations %ld\n",
                    args.average ? "gain" : "value at full buffer",
                    args.average ? report.gain : report.value.values[model.buffer_playtime],
                    threshold_ok ? "yes" : "no", report.iterations);
    }
    write_json(args.out, out);
    return converged ? kExitOk : kExitNotConverged;
}

struct DualArgs {
    std::string config, out;
    double budget = -1.0;
    double alpha0 = 0.0;
    long iters = 500;
    double tol = -1.0;
    double lambda0 = 0.0;
};

int cmd_dual(const DualArgs& args) {
    SystemConfig cfg = load_system(args.config);
    if (args.budget >= 0.0) cfg.power_budget = args.budget;
    auto violations = validate(cfg);
    if (!violations.empty()) {
        std::string msg = "invalid system:";
        for (const auto& v : violations) msg += "\n  " + v;
        throw ConfigError(msg);
    }

    AscentOptions opts;
    opts.alpha0 = args.alpha0;
    opts.max_iter = args.iters;
    opts.tol = args.tol > 0.0 ? args.tol : 1e-2 * cfg.power_budget;

    AscentResult result = subgradient_ascent(cfg, args.lambda0, opts);
    Certificate cert = verify_primal_dual(cfg, result.best);

    json params{{"budget", cfg.power_budget}, {"alpha0", args.alpha0},
                {"iters", args.iters},       {"tol", opts.tol},
                {"lambda0", args.lambda0}};
    json out{{"manifest", manifest("dual", args.config, params)},
             {"certificate", certificate_to_json(cert)},
             {"ascent", ascent_to_json(result)}};
    write_json(args.out, out);

    std::string csv = "# manifest: " + out["manifest"].dump() + "\n";
    csv += "k,lambda,D,g,total_power\n";
    for (const auto& pt : result.history)
        csv += format_row("%d,%.17g,%.17g,%.17g,%.17g\n", pt.iterate, pt.price, pt.dual_value,
                          pt.subgradient, pt.total_power);
    write_file_atomic(sibling_path(args.out, ".csv"), csv);

    std::printf("price %.12g  dual %.12g  power %.12g / budget %.12g  %s\n", result.best.price,
                result.best.dual_value, result.best.total_power, cfg.power_budget,
                result.converged ? "converged" : "not converged");
    return result.converged ? kExitOk : kExitNotConverged;
}

struct SimArgs {
    std::string config, out, policy_path, trace_path;
    bool solve_first = false;
    double price = 0.1;
    long horizon = 1000000;
    long warmup = 1000;
    std::uint64_t seed = 0;
    int reps = 1;
};

int cmd_simulate(const SimArgs& args) {
    SystemConfig cfg = load_system(args.config);
    std::vector<ChannelModel> channels = load_channels(args.config, cfg);

    std::vector<FadingPolicy> policies;
    if (args.solve_first) {
        for (std::size_t n = 0; n < cfg.clients.size(); ++n) {
            if (channels[n].num_states > 1) {
                auto r = solve_fading_average(cfg.clients[n], channels[n], args.price);
                policies.push_back(r.policy);
            } else {
                auto r = solve_average(cfg.clients[n], args.price);
                policies.push_back(lift_policy(r.policy));
            }
        }
    } else {
        json pj = load_json(args.policy_path);
        if (pj.is_object() && pj.contains("policies")) {
            const json& rows = pj["policies"];
            if (!rows.is_array() || rows.size() != cfg.clients.size())
                throw ConfigError("policies: must list one policy per client");
            for (std::size_t n = 0; n < cfg.clients.size(); ++n)
                policies.push_back(fading_policy_from_json(rows[n], cfg.clients[n], channels[n]));
        } else {
            if (cfg.clients.size() != 1)
                throw ConfigError("a single policy file needs a single-client config");
            policies.push_back(fading_policy_from_json(pj, cfg.clients[0], channels[0]));
        }
    }

    SimConfig sim_cfg;
    sim_cfg.horizon = args.horizon;
    sim_cfg.warmup = args.warmup;
    sim_cfg.seed = args.seed;

    json params{{"horizon", args.horizon}, {"warmup", args.warmup},
                {"seed", args.seed},       {"reps", args.reps},
                {"price", args.price},     {"solve_first", args.solve_first}};
    if (!args.policy_path.empty()) params["policy"] = args.policy_path;
    if (!args.trace_path.empty()) params["trace"] = args.trace_path;
    json out{{"manifest", manifest("simulate", args.config, params)}};

    if (!args.trace_path.empty() && args.reps != 1)
        throw ConfigError("--trace requires --reps 1");

    if (args.reps == 1 && !args.trace_path.empty()) {
        std::vector<TraceRow> trace;
        SimMetrics metrics = run(cfg.clients, channels, policies, sim_cfg, &trace);
        out["metrics"] = metrics_to_json(metrics);
        std::string csv = "# manifest: " + out["manifest"].dump() + "\n";
        csv += "slot,client,x,c,q,E,success,outage,new_period\n";
        for (const auto& r : trace)
            csv += format_row("%ld,%d,%d,%d,%d,%.17g,%d,%d,%d\n", r.slot, r.client, r.playtime,
                              r.channel, r.quality, r.energy, r.success ? 1 : 0,
                              r.outage ? 1 : 0, r.new_period ? 1 : 0);
        write_file_atomic(args.trace_path, csv);
        std::printf("aggregate outage rate %.6g  power %.6g\n",
                    metrics.aggregate.outage_rate, metrics.aggregate.average_power);
    } else {
        ReplicationResult reps =
            replicate(cfg.clients, channels, policies, sim_cfg, args.reps, env_threads());
        out["metrics"] = metrics_to_json(reps.pooled);
        if (args.reps > 1) {
            json per_run = json::array();
            for (const auto& r : reps.runs) per_run.push_back(metrics_to_json(r));
            out["replications"] = std::move(per_run);
        }
        std::printf("aggregate outage rate %.6g  power %.6g  (%d replication%s)\n",
                    reps.pooled.aggregate.outage_rate, reps.pooled.aggregate.average_power,
                    args.reps, args.reps == 1 ? "" : "s");
    }
    write_json(args.out, out);
    return kExitOk;
}

struct VerifyArgs {
    std::string config, out, suite;
    double price = 0.1;
    int random_configs = 25;
    std::uint64_t seed = 1;
    long horizon = 200000;
};

int cmd_verify(const VerifyArgs& args) {
    SystemConfig cfg = load_system(args.config);
    VerifyOptions opts;
    opts.price = args.price;
    opts.random_configs = args.random_configs;
    opts.seed = args.seed;
    opts.sim_horizon = args.horizon;

    SuiteReport report;
    if (args.suite == "threshold") {
        report = verify_threshold(cfg.clients, opts);
    } else if (args.suite == "lemma3") {
        report = verify_gain_monotonicity(cfg.clients.front(), opts);
    } else if (args.suite == "duality") {
        auto violations = validate(cfg);
        if (!violations.empty())
            throw ConfigError("duality suite needs a system config with a positive budget: " +
                              violations.front());
        report = verify_duality(cfg, opts);
    } else if (args.suite == "sim-consistency") {
        report = verify_sim_consistency(cfg.clients.front(), opts);
    } else if (args.suite == "fading-reduction") {
        auto channel = channel_from_json(load_json(args.config), cfg.clients.front());
        report = verify_fading_reduction(cfg.clients.front(), channel, opts);
    } else {
        throw ConfigError("unknown suite: " + args.suite);
    }

    json checks = json::array();
    for (const auto& c : report.checks) {
        checks.push_back(json{{"name", c.name},
                              {"pass", c.pass},
                              {"measured", c.measured},
                              {"detail", c.detail}});
        std::printf("%-4s %s (%.3g)\n", c.pass ? "ok" : "FAIL", c.name.c_str(), c.measured);
    }
    json params{{"suite", args.suite},
                {"price", args.price},
                {"random", args.random_configs},
                {"seed", args.seed},
                {"horizon", args.horizon}};
    write_json(args.out, json{{"manifest", manifest("verify", args.config, params)},
                              {"suite", report.suite},
                              {"pass", report.pass},
                              {"checks", checks}});
    std::printf("suite %s: %s\n", report.suite.c_str(), report.pass ? "pass" : "FAIL");
    return report.pass ? kExitOk : kExitCheckFailed;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Threshold-policy synthesis, price decomposition and simulation for power-budgeted "
        "streaming clients.\n\n"
        "File schemas:\n"
        "  client model  {buffer_playtime, play_duration, quality_penalties[], power_levels[],\n"
        "                 success_prob[] (row-major Q x K), outage_period_penalty,\n"
        "                 optional channel {num_states, transition[] (row-major),\n"
        "                 success_prob_per_channel[][]}}\n"
        "  system        {clients: [client model...], power_budget}\n"
        "  policy        {policy: [{state, quality, power_index} ...]} with a channel key on\n"
        "                fading entries; indices are zero-based\n"
        "STREAMDP_THREADS sets the worker count for simulation replications.\n"
        "SOURCE_DATE_EPOCH pins output timestamps for byte-reproducible runs."};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    SolveArgs solve_args;
    auto* solve = app.add_subcommand("solve", "Solve one client's problem at a fixed price");
    solve->add_option("config", solve_args.config, "client model JSON")->required();
    solve->add_option("--price", solve_args.price, "energy price")->check(CLI::NonNegativeNumber);
    auto* beta_opt = solve->add_option("--beta", solve_args.beta, "discount factor in (0,1)");
    auto* avg_opt = solve->add_flag("--average", solve_args.average, "average-cost solve");
    solve->add_option("--out", solve_args.out, "report path (policy lands beside it)")
        ->required();
    solve->add_flag("--list", solve_args.list_thresholds,
                    "embed every threshold policy with its exact cost");
    solve->add_option("--tol", solve_args.tol, "solver tolerance");
    solve->add_option("--max-iter", solve_args.max_iter, "iteration cap");
    beta_opt->excludes(avg_opt);

    DualArgs dual_args;
    auto* dual = app.add_subcommand("dual", "Price iteration across a client system");
    dual->add_option("config", dual_args.config, "system JSON")->required();
    dual->add_option("--budget", dual_args.budget, "average power budget (overrides config)");
    dual->add_option("--alpha0", dual_args.alpha0, "initial step size (0 = auto)");
    dual->add_option("--iters", dual_args.iters, "price iterations");
    dual->add_option("--tol", dual_args.tol, "subgradient stop (default 1% of budget)");
    dual->add_option("--lambda0", dual_args.lambda0, "starting price");
    dual->add_option("--out", dual_args.out, "certificate path (history CSV beside it)")
        ->required();

    SimArgs sim_args;
    auto* sim = app.add_subcommand("simulate", "Monte Carlo run under fixed policies");
    sim->add_option("config", sim_args.config, "client or system JSON")->required();
    auto* pol_opt = sim->add_option("--policy", sim_args.policy_path, "policy JSON");
    auto* solve_first =
        sim->add_flag("--solve-first", sim_args.solve_first, "derive policies by solving");
    sim->add_option("--price", sim_args.price, "price used with --solve-first");
    sim->add_option("--horizon", sim_args.horizon, "slots to simulate");
    sim->add_option("--warmup", sim_args.warmup, "slots excluded from averages");
    sim->add_option("--seed", sim_args.seed, "base seed");
    sim->add_option("--reps", sim_args.reps, "independent replications")
        ->check(CLI::PositiveNumber);
    sim->add_option("--out", sim_args.out, "metrics path")->required();
    sim->add_option("--trace", sim_args.trace_path, "per-slot trace CSV (single replication)");
    solve_first->excludes(pol_opt);

    VerifyArgs verify_args;
    auto* verify = app.add_subcommand("verify", "Run a structural verification suite");
    verify->add_option("config", verify_args.config, "client or system JSON")->required();
    verify
        ->add_option("--suite", verify_args.suite,
                     "threshold | lemma3 | duality | sim-consistency | fading-reduction")
        ->required()
        ->check(CLI::IsMember(
            {"threshold", "lemma3", "duality", "sim-consistency", "fading-reduction"}));
    verify->add_option("--out", verify_args.out, "report path")->required();
    verify->add_option("--price", verify_args.price, "energy price for the checks");
    verify->add_option("--random", verify_args.random_configs, "random configs (threshold)");
    verify->add_option("--seed", verify_args.seed, "seed for random configs / simulation");
    verify->add_option("--horizon", verify_args.horizon, "simulation horizon");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help, --version
        std::cerr << e.what() << "\n";
        return kExitConfig;
    }

    try {
        if (*solve) {
            if (!solve_args.average && beta_opt->count() == 0)
                throw ConfigError("one of --beta or --average is required");
            if (!solve_args.average && !(solve_args.beta > 0.0 && solve_args.beta < 1.0))
                throw ConfigError("beta must be in (0,1)");
            return cmd_solve(solve_args);
        }
        if (*dual) return cmd_dual(dual_args);
        if (*sim) {
            if (!sim_args.solve_first && sim_args.policy_path.empty())
                throw ConfigError("one of --policy or --solve-first is required");
            return cmd_simulate(sim_args);
        }
        if (*verify) return cmd_verify(verify_args);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const InstanceTooLarge& e) {
        std::cerr << "error: " << e.what() << " (count " << e.estimated_count << ")\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNotConverged;
    }
    return kExitOk;
}
