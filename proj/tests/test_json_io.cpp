#include <doctest.h>

#include "streamdp/json_io.hpp"
#include "streamdp/random_models.hpp"
#include "support.hpp"

using namespace streamdp;
using streamdp::testing::canonical_baseline_policy;
using streamdp::testing::canonical_model;

TEST_CASE("client models round-trip exactly through their schema") {
    // Doubles survive serialization bit for bit; check across random models.
    for (std::uint64_t seed = 1; seed <= 12; ++seed) {
        ClientModel m = random_client_model(seed);
        ClientModel back = client_model_from_json(client_model_to_json(m));
        CHECK(back.buffer_playtime == m.buffer_playtime);
        CHECK(back.play_duration == m.play_duration);
        CHECK(back.quality_penalties == m.quality_penalties);
        CHECK(back.power_levels == m.power_levels);
        CHECK(back.success_prob == m.success_prob);
        CHECK(back.outage_period_penalty == m.outage_period_penalty);
    }
}

TEST_CASE("system files round-trip") {
    SystemConfig cfg{{canonical_model(), random_client_model(4)}, 1.25};
    SystemConfig back = system_from_json(system_to_json(cfg));
    CHECK(back.num_clients() == 2);
    CHECK(back.power_budget == 1.25);
    CHECK(back.clients[1].success_prob == cfg.clients[1].success_prob);
}

TEST_CASE("policies round-trip, object and bare-array forms") {
    ClientModel m = canonical_model();
    Policy p = canonical_baseline_policy();
    nlohmann::json rows = policy_to_json(p);
    CHECK(policy_from_json(rows, m) == p);
    CHECK(policy_from_json(nlohmann::json{{"policy", rows}}, m) == p);
}

TEST_CASE("fading policies round-trip") {
    ClientModel m = canonical_model();
    ChannelModel ch;
    ch.num_states = 2;
    ch.transition = {0.9, 0.1, 0.5, 0.5};
    std::vector<double> weak = m.success_prob;
    for (double& v : weak) v *= 0.5;
    ch.success_prob_per_channel = {weak, m.success_prob};

    auto report = solve_fading_average(m, ch, 0.1);
    auto back = fading_policy_from_json(fading_policy_to_json(report.policy), m, ch);
    CHECK(back.action_of == report.policy.action_of);
}

TEST_CASE("schema violations raise config errors") {
    nlohmann::json j = client_model_to_json(canonical_model());
    j.erase("power_levels");
    CHECK_THROWS_AS(client_model_from_json(j), ConfigError);

    j = client_model_to_json(canonical_model());
    j["quality_penalties"] = {0.5, 0.1};
    CHECK_THROWS_WITH_AS(client_model_from_json(j), doctest::Contains("strictly increasing"),
                         ConfigError);

    ClientModel m = canonical_model();
    nlohmann::json rows = policy_to_json(canonical_baseline_policy());
    rows.erase(2);
    CHECK_THROWS_WITH_AS(policy_from_json(rows, m), doctest::Contains("missing state"),
                         ConfigError);

    rows = policy_to_json(canonical_baseline_policy());
    rows[4]["power_index"] = 1; // transmit above the cap
    CHECK_THROWS_AS(policy_from_json(rows, m), ConfigError);
}

TEST_CASE("inline channels load per client, others default to fixed") {
    nlohmann::json client = client_model_to_json(canonical_model());
    CHECK(!channel_from_json(client, canonical_model()).has_value());

    client["channel"] = {{"num_states", 1},
                        {"transition", {1.0}},
                        {"success_prob_per_channel", {canonical_model().success_prob}}};
    auto ch = channel_from_json(client, canonical_model());
    REQUIRE(ch.has_value());
    CHECK(ch->num_states == 1);

    client["channel"]["transition"] = {0.5};
    CHECK_THROWS_AS(channel_from_json(client, canonical_model()), ConfigError);
}
