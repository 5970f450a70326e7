#include "streamdp/json_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace streamdp {

using nlohmann::json;

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw ConfigError(msg);
}

std::vector<double> number_array(const json& j, const std::string& key) {
    require(j.contains(key), "missing key: " + key);
    require(j[key].is_array(), key + ": expected an array");
    std::vector<double> out;
    for (const auto& v : j[key]) {
        require(v.is_number(), key + ": expected numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

int integer_field(const json& j, const std::string& key) {
    require(j.contains(key) && j[key].is_number_integer(), "missing integer key: " + key);
    return j[key].get<int>();
}

double number_field(const json& j, const std::string& key) {
    require(j.contains(key) && j[key].is_number(), "missing numeric key: " + key);
    return j[key].get<double>();
}

void require_valid_model(const ClientModel& m) {
    auto violations = validate(m);
    if (violations.empty()) return;
    std::string msg = "invalid client model:";
    for (const auto& v : violations) msg += "\n  " + v;
    throw ConfigError(msg);
}

} // namespace

json client_model_to_json(const ClientModel& m) {
    return json{{"buffer_playtime", m.buffer_playtime},
                {"play_duration", m.play_duration},
                {"quality_penalties", m.quality_penalties},
                {"power_levels", m.power_levels},
                {"success_prob", m.success_prob},
                {"outage_period_penalty", m.outage_period_penalty}};
}

json channel_model_to_json(const ChannelModel& ch) {
    return json{{"num_states", ch.num_states},
                {"transition", ch.transition},
                {"success_prob_per_channel", ch.success_prob_per_channel}};
}

json system_to_json(const SystemConfig& cfg) {
    json clients = json::array();
    for (const auto& m : cfg.clients) clients.push_back(client_model_to_json(m));
    return json{{"clients", clients}, {"power_budget", cfg.power_budget}};
}

json policy_to_json(const Policy& p) {
    json rows = json::array();
    for (int x = 0; x < p.num_states(); ++x)
        rows.push_back(json{{"state", x},
                            {"quality", p.at(x).quality},
                            {"power_index", p.at(x).power}});
    return rows;
}

json fading_policy_to_json(const FadingPolicy& p) {
    json rows = json::array();
    for (int x = 0; x < p.num_playtime_states(); ++x)
        for (int c = 0; c < p.num_channels; ++c)
            rows.push_back(json{{"state", x},
                                {"channel", c},
                                {"quality", p.at(x, c).quality},
                                {"power_index", p.at(x, c).power}});
    return rows;
}

json evaluation_to_json(const StationaryEvaluation& eval) {
    return json{{"distribution", eval.distribution},
                {"average_cost", eval.average_cost},
                {"outage_rate", eval.outage_rate},
                {"outage_period_rate", eval.outage_period_rate},
                {"average_power", eval.average_power},
                {"delivery_rate", eval.delivery_rate}};
}

namespace {

json client_metrics_to_json(const ClientMetrics& c) {
    return json{{"outage_rate", c.outage_rate},
                {"outage_rate_se", c.outage_rate_se},
                {"outage_period_rate", c.outage_period_rate},
                {"outage_period_rate_se", c.outage_period_rate_se},
                {"average_power", c.average_power},
                {"average_power_se", c.average_power_se},
                {"composite_qoe", c.composite_qoe},
                {"composite_qoe_se", c.composite_qoe_se},
                {"delivery_rate", c.delivery_rate},
                {"delivery_rate_se", c.delivery_rate_se},
                {"deliveries", c.deliveries},
                {"outage_slots", c.outage_slots},
                {"outage_periods", c.outage_periods},
                {"energy_total", c.energy_total}};
}

} // namespace

json metrics_to_json(const SimMetrics& metrics) {
    json per_client = json::array();
    for (const auto& c : metrics.per_client) per_client.push_back(client_metrics_to_json(c));
    return json{{"per_client", per_client},
                {"aggregate", client_metrics_to_json(metrics.aggregate)},
                {"measured_slots", metrics.measured_slots}};
}

json certificate_to_json(const Certificate& cert) {
    json j{{"price", cert.price},
           {"dual_value", cert.dual_value},
           {"primal_qoe_cost", cert.primal_qoe_cost},
           {"primal_power", cert.primal_power},
           {"feasible", cert.feasible},
           {"complementary_slackness", cert.complementary_slackness},
           {"warnings", cert.warnings}};
    if (cert.feasible) j["duality_gap_bound"] = cert.duality_gap_bound;
    return j;
}

json ascent_to_json(const AscentResult& result) {
    const char* stop = result.stop == AscentResult::Stop::subgradient_tol ? "subgradient_tol"
                       : result.stop == AscentResult::Stop::slack_at_zero ? "slack_at_zero"
                                                                          : "max_iter";
    json clients = json::array();
    for (const auto& c : result.best.clients)
        clients.push_back(json{{"gain", c.gain},
                               {"average_power", c.eval.average_power},
                               {"iterations", c.iterations}});
    return json{{"converged", result.converged},
                {"stop", stop},
                {"iterations", static_cast<long>(result.history.size())},
                {"price", result.best.price},
                {"dual_value", result.best.dual_value},
                {"subgradient", result.best.subgradient},
                {"total_power", result.best.total_power},
                {"band_low", result.band_low},
                {"band_high", result.band_high},
                {"price_cap", result.cap},
                {"clients", clients}};
}

ClientModel client_model_from_json(const json& j) {
    require(j.is_object(), "client model: expected an object");
    ClientModel m;
    m.buffer_playtime = integer_field(j, "buffer_playtime");
    m.play_duration = integer_field(j, "play_duration");
    m.quality_penalties = number_array(j, "quality_penalties");
    m.power_levels = number_array(j, "power_levels");
    m.success_prob = number_array(j, "success_prob");
    m.outage_period_penalty = number_field(j, "outage_period_penalty");
    require_valid_model(m);
    return m;
}

std::optional<ChannelModel> channel_from_json(const json& j, const ClientModel& m) {
    if (!j.contains("channel")) return std::nullopt;
    const json& c = j["channel"];
    require(c.is_object(), "channel: expected an object");
    ChannelModel ch;
    ch.num_states = integer_field(c, "num_states");
    ch.transition = number_array(c, "transition");
    require(c.contains("success_prob_per_channel") && c["success_prob_per_channel"].is_array(),
            "channel.success_prob_per_channel: expected an array of matrices");
    for (const auto& mat : c["success_prob_per_channel"]) {
        require(mat.is_array(), "channel.success_prob_per_channel: expected arrays");
        std::vector<double> flat;
        for (const auto& v : mat) {
            require(v.is_number(), "channel.success_prob_per_channel: expected numbers");
            flat.push_back(v.get<double>());
        }
        ch.success_prob_per_channel.push_back(std::move(flat));
    }
    auto violations = validate_channel(ch, m);
    if (!violations.empty()) {
        std::string msg = "invalid channel model:";
        for (const auto& v : violations) msg += "\n  " + v;
        throw ConfigError(msg);
    }
    return ch;
}

SystemConfig system_from_json(const json& j) {
    SystemConfig cfg;
    if (j.is_object() && j.contains("clients")) {
        require(j["clients"].is_array(), "clients: expected an array");
        for (const auto& c : j["clients"]) cfg.clients.push_back(client_model_from_json(c));
        cfg.power_budget = j.contains("power_budget") ? number_field(j, "power_budget") : 0.0;
    } else {
        cfg.clients.push_back(client_model_from_json(j));
    }
    require(!cfg.clients.empty(), "clients: must not be empty");
    return cfg;
}

namespace {

Action action_from_row(const json& row, const ClientModel& m) {
    Action u{integer_field(row, "quality"), integer_field(row, "power_index")};
    require(u.quality >= 0 && u.quality < m.num_qualities(), "policy: quality out of range");
    require(u.power >= 0 && u.power < m.num_power_levels(), "policy: power_index out of range");
    return u;
}

const json& policy_rows(const json& j, const char* key) {
    if (j.is_array()) return j;
    require(j.is_object() && j.contains(key), std::string("policy file: missing '") + key + "'");
    require(j[key].is_array(), std::string(key) + ": expected an array");
    return j[key];
}

} // namespace

Policy policy_from_json(const json& j, const ClientModel& m) {
    const json& rows = policy_rows(j, "policy");
    Policy p = all_idle_policy(m);
    p.origin = Policy::Origin::explicit_choice;
    std::vector<bool> seen(static_cast<std::size_t>(m.buffer_playtime) + 1, false);
    for (const auto& row : rows) {
        const int x = integer_field(row, "state");
        require(x >= 0 && x <= m.buffer_playtime, "policy: state out of range");
        require(!seen[x], "policy: duplicate state " + std::to_string(x));
        seen[x] = true;
        p.action_of[x] = action_from_row(row, m);
    }
    for (int x = 0; x <= m.buffer_playtime; ++x)
        require(seen[x], "policy: missing state " + std::to_string(x));
    auto violations = policy_violations(p, m);
    if (!violations.empty()) throw ConfigError("policy: " + violations.front());
    return p;
}

FadingPolicy fading_policy_from_json(const json& j, const ClientModel& m,
                                     const ChannelModel& ch) {
    const json& rows = policy_rows(j, "policy");
    FadingPolicy p;
    p.num_channels = ch.num_states;
    const std::size_t n = static_cast<std::size_t>(m.buffer_playtime + 1) * ch.num_states;
    p.action_of.assign(n, m.idle_action());
    std::vector<bool> seen(n, false);
    for (const auto& row : rows) {
        const int x = integer_field(row, "state");
        const int c = row.contains("channel") ? integer_field(row, "channel") : 0;
        require(x >= 0 && x <= m.buffer_playtime, "policy: state out of range");
        require(c >= 0 && c < ch.num_states, "policy: channel out of range");
        const std::size_t i = static_cast<std::size_t>(x) * ch.num_states + c;
        require(!seen[i], "policy: duplicate (state, channel) entry");
        seen[i] = true;
        p.action_of[i] = action_from_row(row, m);
    }
    for (std::size_t i = 0; i < n; ++i)
        require(seen[i], "policy: missing (state, channel) entries");
    auto violations = fading_policy_violations(p, m, ch);
    if (!violations.empty()) throw ConfigError("policy: " + violations.front());
    return p;
}

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return j;
}

ClientModel load_client_model(const std::string& path) {
    json j = load_json(path);
    if (j.is_object() && j.contains("clients")) {
        SystemConfig cfg = system_from_json(j);
        return cfg.clients.front();
    }
    return client_model_from_json(j);
}

SystemConfig load_system(const std::string& path) { return system_from_json(load_json(path)); }

std::vector<ChannelModel> load_channels(const std::string& path, const SystemConfig& cfg) {
    json j = load_json(path);
    std::vector<ChannelModel> out;
    auto client_entry = [&](std::size_t n) -> const json& {
        if (j.is_object() && j.contains("clients")) return j["clients"][n];
        return j;
    };
    for (std::size_t n = 0; n < cfg.clients.size(); ++n) {
        auto ch = channel_from_json(client_entry(n), cfg.clients[n]);
        out.push_back(ch ? *ch : fixed_channel(cfg.clients[n]));
    }
    return out;
}

void write_file_atomic(const std::string& path, const std::string& text) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp);
        out << text;
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("cannot rename " + tmp + " to " + path);
}

} // namespace streamdp
