#include <doctest.h>

#include <cmath>

#include "streamdp/dual.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace streamdp;
using streamdp::testing::canonical_model;
using streamdp::testing::grid_scan_dual;
using streamdp::testing::product_chain_lagrangian;

namespace {

SystemConfig two_client_system(double budget) {
    return SystemConfig{{canonical_model(), canonical_model()}, budget};
}

// Budget pinned just above an achievable optimal power draw, so the ascent
// can settle with a subgradient under one percent of the budget.
double binding_budget() {
    static const double power_mid = dual_value(two_client_system(1.0), 0.8).total_power;
    return 1.005 * power_mid;
}

} // namespace

TEST_CASE("system validation") {
    SystemConfig cfg = two_client_system(1.0);
    CHECK(validate(cfg).empty());
    cfg.power_budget = 0.0;
    CHECK(!validate(cfg).empty());
    cfg = two_client_system(1.0);
    cfg.clients.clear();
    CHECK(!validate(cfg).empty());
    cfg = two_client_system(1.0);
    cfg.clients[1].quality_penalties = {0.5, 0.1};
    auto violations = validate(cfg);
    REQUIRE(!violations.empty());
    CHECK(violations.front().find("clients[1]") == 0);
}

TEST_CASE("dual at price zero is the unconstrained optimum") {
    SystemConfig cfg = two_client_system(2.0);
    DualState s = dual_value(cfg, 0.0);
    double gain_sum = 0.0;
    for (const auto& c : s.clients) {
        gain_sum += c.gain;
        CHECK(c.converged);
    }
    CHECK(s.dual_value == gain_sum); // the price term vanishes
    CHECK(s.subgradient == doctest::Approx(s.total_power - 2.0).epsilon(1e-15));
}

TEST_CASE("identical clients decompose symmetrically") {
    const double budget = 1.3;
    SystemConfig one{{canonical_model()}, budget};
    SystemConfig two = two_client_system(budget);
    for (double price : {0.0, 0.3, 0.8}) {
        DualState s1 = dual_value(one, price);
        DualState s2 = dual_value(two, price);
        const double single_gain = s1.clients[0].gain;
        CHECK(s2.dual_value ==
              doctest::Approx(2.0 * single_gain - price * budget).epsilon(1e-12));
    }
}

TEST_CASE("a high enough price idles every client") {
    // Idle dominance beyond (1 + outage-period penalty + max quality penalty)
    // divided by the smallest positive energy: (1 + 2 + 0.5) / 1 = 3.5.
    SystemConfig cfg = two_client_system(1.0);
    CHECK(price_cap(cfg) == doctest::Approx(4.5).epsilon(1e-15));
    DualState s = dual_value(cfg, 4.0);
    for (const auto& c : s.clients)
        for (int x = 0; x <= 4; ++x) CHECK(c.policy.at(x) == canonical_model().idle_action());
    CHECK(s.total_power == 0.0);
    CHECK(s.dual_value == doctest::Approx(2.0 - 4.0 * 1.0).epsilon(1e-15));
    CHECK(s.subgradient == -1.0);
}

TEST_CASE("product-chain Lagrangian agrees with the assembled dual value") {
    const double budget = 1.2;
    SystemConfig cfg = two_client_system(budget);
    for (double price : {0.2, 0.8}) {
        DualState s = dual_value(cfg, price);
        const double joint = product_chain_lagrangian(cfg.clients[0], s.clients[0].policy,
                                                      cfg.clients[1], s.clients[1].policy, price,
                                                      budget);
        CHECK(joint == doctest::Approx(s.dual_value).epsilon(1e-8));
    }
}

TEST_CASE("slack budget stops at price zero with a zero gap") {
    SystemConfig cfg = two_client_system(3.0); // more than the free optimum draws
    AscentResult r = subgradient_ascent(cfg, 0.0);
    CHECK(r.converged);
    CHECK(r.stop == AscentResult::Stop::slack_at_zero);
    CHECK(r.best.price == 0.0);
    Certificate cert = verify_primal_dual(cfg, r.best);
    CHECK(cert.feasible);
    CHECK(std::abs(cert.duality_gap_bound) <= 1e-12);
    CHECK(cert.complementary_slackness == 0.0);
    CHECK(cert.warnings.empty());
}

TEST_CASE("binding budget: ascent settles where power crosses the budget") {
    const double budget = binding_budget();
    SystemConfig cfg = two_client_system(budget);

    AscentOptions opts;
    opts.max_iter = 500;
    opts.tol = 1e-2 * budget;
    AscentResult r = subgradient_ascent(cfg, 0.0, opts);

    CHECK(r.converged);
    CHECK(std::abs(r.last.subgradient) <= opts.tol);

    // Best-so-far dual value never decreases along the run.
    double best = -1e300;
    for (const auto& pt : r.history) {
        best = std::max(best, pt.dual_value);
        CHECK(best + 1e-12 >= pt.dual_value);
    }

    // The grid maximizer sits inside the trailing price band, up to the
    // scan's own resolution.
    const double step = 1e-3;
    auto grid = grid_scan_dual(cfg, 0.0, 1.5, step);
    CHECK(grid.price >= r.band_low - step);
    CHECK(grid.price <= r.band_high + step);

    Certificate cert = verify_primal_dual(cfg, r.last);
    CHECK(cert.feasible);
    CHECK(cert.duality_gap_bound >= -1e-9); // weak duality
    CHECK(cert.duality_gap_bound <= 1e-2);
    CHECK(std::abs(cert.complementary_slackness) ==
          doctest::Approx(cert.price * std::abs(cert.primal_power - budget)).epsilon(1e-12));
}

TEST_CASE("near-zero budget drives the system idle") {
    const double eps = 1e-6;
    SystemConfig cfg = two_client_system(eps);
    AscentOptions opts;
    opts.max_iter = 100;
    opts.tol = 2.0 * eps;
    AscentResult r = subgradient_ascent(cfg, 0.0, opts);
    CHECK(r.converged);
    CHECK(r.last.total_power <= eps);
    for (const auto& c : r.last.clients)
        for (int x = 0; x <= 4; ++x) CHECK(c.policy.at(x) == canonical_model().idle_action());
}

TEST_CASE("ascent reports an oscillation band when cut off early") {
    SystemConfig cfg = two_client_system(binding_budget());
    AscentOptions opts;
    opts.max_iter = 3;
    opts.tol = 0.0;
    AscentResult r = subgradient_ascent(cfg, 0.0, opts);
    CHECK(!r.converged);
    CHECK(r.stop == AscentResult::Stop::max_iter);
    CHECK(r.history.size() == 3);
    CHECK(r.band_low <= r.band_high);
}

TEST_CASE("concavity probe: chord tests, slopes, and per-client structure") {
    const double budget = 1.0;
    SystemConfig cfg{{canonical_model()}, budget};
    std::vector<double> grid;
    for (int i = 0; i <= 100; ++i) grid.push_back(5.0 * i / 100.0);
    ProbeResult probe = concavity_probe(cfg, grid);

    CHECK(probe.concave);
    CHECK(probe.max_midpoint_violation <= 1e-9);
    CHECK(probe.monotone_after_peak);

    // Subgradient range bound: slopes between grid points lie in
    // [-budget, max total power - budget].
    CHECK(probe.slope_min >= -budget - 1e-9);
    CHECK(probe.slope_max <= canonical_model().power_levels.back() - budget + 1e-9);

    for (std::size_t i = 1; i < probe.points.size(); ++i) {
        // Power never rises with the price; client value is nondecreasing.
        CHECK(probe.points[i].client_powers[0] <= probe.points[i - 1].client_powers[0] + 1e-9);
        CHECK(probe.points[i].client_gains[0] >= probe.points[i - 1].client_gains[0] - 1e-9);
    }
    for (std::size_t i = 1; i + 1 < probe.points.size(); ++i) {
        // Per-client value is concave in the price as well.
        const double mid = 0.5 * (probe.points[i - 1].client_gains[0] +
                                  probe.points[i + 1].client_gains[0]);
        CHECK(probe.points[i].client_gains[0] >= mid - 1e-9);
    }

    // Weak duality: the always-feasible all-idle product policy bounds every
    // probed dual value from above.
    ClientModel m = canonical_model();
    auto idle_eval = evaluate_exact(all_idle_policy(m), m, 0.0);
    const double idle_primal = qoe_cost(idle_eval, m);
    for (const auto& pt : probe.points) CHECK(idle_primal >= pt.dual_value - 1e-9);
}

TEST_CASE("probe accepts a single-point grid") {
    SystemConfig cfg{{canonical_model()}, 1.0};
    ProbeResult probe = concavity_probe(cfg, {0.0});
    CHECK(probe.points.size() == 1);
    CHECK(probe.concave);
}

TEST_CASE("dual rejects bad inputs") {
    SystemConfig cfg = two_client_system(1.0);
    CHECK_THROWS_AS(dual_value(cfg, -0.1), std::invalid_argument);
    cfg.power_budget = 0.0;
    CHECK_THROWS_AS(dual_value(cfg, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(subgradient_ascent(cfg, 0.0), std::invalid_argument);
}
