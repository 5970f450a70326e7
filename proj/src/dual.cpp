#include "streamdp/dual.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace streamdp {

std::vector<std::string> validate(const SystemConfig& cfg) {
    std::vector<std::string> out;
    if (cfg.clients.empty()) out.push_back("clients: must contain at least one client");
    if (!(cfg.power_budget > 0.0))
        out.push_back("power_budget: must be > 0 (the idle policy must be strictly feasible)");
    for (std::size_t n = 0; n < cfg.clients.size(); ++n)
        for (const std::string& v : validate(cfg.clients[n]))
            out.push_back("clients[" + std::to_string(n) + "]." + v);
    return out;
}

DualState dual_value(const SystemConfig& cfg, double price, const SolverOptions& opts) {
    if (price < 0.0) throw std::invalid_argument("price must be >= 0");
    auto violations = validate(cfg);
    if (!violations.empty()) throw std::invalid_argument("invalid system: " + violations.front());

    DualState state;
    state.price = price;
    state.clients.reserve(cfg.clients.size());

    double gain_sum = 0.0;
    for (std::size_t n = 0; n < cfg.clients.size(); ++n) {
        SolveReport report = solve_average(cfg.clients[n], price, opts.tol, opts.max_iter);
        if (!report.converged)
            throw std::runtime_error("client " + std::to_string(n) +
                                     ": average-cost solve did not converge");
        ClientSolve cs;
        cs.solver_gain = report.gain;
        cs.policy = report.policy;
        cs.eval = evaluate_exact(report.policy, cfg.clients[n], price);
        cs.gain = cs.eval.average_cost;
        cs.converged = report.converged;
        cs.iterations = report.iterations;
        gain_sum += cs.gain;
        state.total_power += cs.eval.average_power;
        state.clients.push_back(std::move(cs));
    }
    state.dual_value = gain_sum - price * cfg.power_budget;
    state.subgradient = state.total_power - cfg.power_budget;
    return state;
}

double price_cap(const SystemConfig& cfg) {
    double cap = 0.0;
    for (const ClientModel& m : cfg.clients) {
        if (m.num_power_levels() < 2) continue; // cannot spend power at all
        const double min_spend = m.power_levels[1];
        const double max_saving =
            1.0 + m.outage_period_penalty + m.quality_penalties.back();
        cap = std::max(cap, max_saving / min_spend);
    }
    return cap + 1.0;
}

AscentResult subgradient_ascent(const SystemConfig& cfg, double price0,
                                const AscentOptions& opts) {
    if (price0 < 0.0) throw std::invalid_argument("starting price must be >= 0");
    auto violations = validate(cfg);
    if (!violations.empty()) throw std::invalid_argument("invalid system: " + violations.front());

    double alpha0 = opts.alpha0;
    if (alpha0 <= 0.0) {
        double max_power_sum = 0.0;
        for (const ClientModel& m : cfg.clients) max_power_sum += m.power_levels.back();
        alpha0 = max_power_sum > 0.0 ? 1.0 / max_power_sum : 1.0;
    }

    AscentResult result;
    result.cap = price_cap(cfg);
    double price = std::clamp(price0, 0.0, result.cap);

    double best_value = -std::numeric_limits<double>::infinity();
    for (long k = 1; k <= opts.max_iter; ++k) {
        DualState state = dual_value(cfg, price, opts.solver);
        state.iterate = static_cast<int>(k);
        result.history.push_back({static_cast<int>(k), state.price, state.dual_value,
                                  state.subgradient, state.total_power});
        if (state.dual_value > best_value) {
            best_value = state.dual_value;
            result.best = state;
        }
        const double g = state.subgradient;
        result.last = std::move(state);

        if (std::abs(g) <= opts.tol) {
            result.converged = true;
            result.stop = AscentResult::Stop::subgradient_tol;
            break;
        }
        if (price == 0.0 && g < 0.0) {
            result.converged = true;
            result.stop = AscentResult::Stop::slack_at_zero;
            break;
        }
        const double alpha = alpha0 / std::sqrt(static_cast<double>(k));
        price = std::clamp(price + alpha * g, 0.0, result.cap);
    }

    const std::size_t window =
        std::min(result.history.size(), static_cast<std::size_t>(std::max(opts.trail_window, 1)));
    result.band_low = std::numeric_limits<double>::infinity();
    result.band_high = -std::numeric_limits<double>::infinity();
    for (std::size_t i = result.history.size() - window; i < result.history.size(); ++i) {
        result.band_low = std::min(result.band_low, result.history[i].price);
        result.band_high = std::max(result.band_high, result.history[i].price);
    }
    return result;
}

Certificate verify_primal_dual(const SystemConfig& cfg, const DualState& final_state) {
    Certificate cert;
    cert.price = final_state.price;
    cert.dual_value = final_state.dual_value;
    for (std::size_t n = 0; n < cfg.clients.size(); ++n) {
        const ClientSolve& cs = final_state.clients[n];
        cert.primal_qoe_cost += qoe_cost(cs.eval, cfg.clients[n]);
        cert.primal_power += cs.eval.average_power;
    }
    cert.feasible = cert.primal_power <= cfg.power_budget;
    cert.complementary_slackness = cert.price * (cert.primal_power - cfg.power_budget);
    if (cert.feasible) {
        cert.duality_gap_bound = cert.primal_qoe_cost - cert.dual_value;
    } else {
        cert.duality_gap_bound = std::numeric_limits<double>::quiet_NaN();
        cert.warnings.push_back(
            "product policy exceeds the power budget at this price; the constrained optimum "
            "may require mixing at the boundary");
    }
    return cert;
}

ProbeResult concavity_probe(const SystemConfig& cfg, const std::vector<double>& grid,
                            const SolverOptions& opts) {
    if (grid.empty()) throw std::invalid_argument("price grid must be nonempty");
    if (!std::is_sorted(grid.begin(), grid.end()))
        throw std::invalid_argument("price grid must be sorted");

    ProbeResult result;
    result.points.reserve(grid.size());
    for (double price : grid) {
        DualState state = dual_value(cfg, price, opts);
        ProbePoint pt;
        pt.price = price;
        pt.dual_value = state.dual_value;
        pt.total_power = state.total_power;
        for (const ClientSolve& cs : state.clients) {
            pt.client_gains.push_back(cs.gain);
            pt.client_powers.push_back(cs.eval.average_power);
        }
        result.points.push_back(std::move(pt));
    }

    for (std::size_t i = 1; i + 1 < result.points.size(); ++i) {
        const auto& a = result.points[i - 1];
        const auto& b = result.points[i];
        const auto& c = result.points[i + 1];
        const double t = (b.price - a.price) / (c.price - a.price);
        const double chord = (1.0 - t) * a.dual_value + t * c.dual_value;
        result.max_midpoint_violation =
            std::max(result.max_midpoint_violation, chord - b.dual_value);
    }
    result.concave = result.max_midpoint_violation <= 1e-9;

    std::size_t peak = 0;
    for (std::size_t i = 1; i < result.points.size(); ++i)
        if (result.points[i].dual_value > result.points[peak].dual_value) peak = i;
    for (std::size_t i = peak; i + 1 < result.points.size(); ++i)
        if (result.points[i + 1].dual_value > result.points[i].dual_value + 1e-9)
            result.monotone_after_peak = false;

    result.slope_min = std::numeric_limits<double>::infinity();
    result.slope_max = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < result.points.size(); ++i) {
        const double dx = result.points[i].price - result.points[i - 1].price;
        if (dx <= 0.0) continue;
        const double slope = (result.points[i].dual_value - result.points[i - 1].dual_value) / dx;
        result.slope_min = std::min(result.slope_min, slope);
        result.slope_max = std::max(result.slope_max, slope);
    }
    return result;
}

} // namespace streamdp
