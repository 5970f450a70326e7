#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "streamdp/dual.hpp"
#include "streamdp/fading.hpp"
#include "streamdp/model.hpp"
#include "streamdp/policy.hpp"
#include "streamdp/sim.hpp"

namespace streamdp {

/// Raised on malformed or invalid configuration files; the message lists
/// every violation found.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Schemas. A client model file is an object with the fixed keys
// buffer_playtime, play_duration, quality_penalties, power_levels,
// success_prob (row-major Q x K), outage_period_penalty, plus an optional
// channel object {num_states, transition, success_prob_per_channel}. A
// system file is {"clients": [client...], "power_budget": e}. A policy file
// stores the array [{state, quality, power_index}...] (with a channel key on
// fading entries) under "policy"/"policies"; bare arrays load too.

nlohmann::json client_model_to_json(const ClientModel& m);
nlohmann::json channel_model_to_json(const ChannelModel& ch);
nlohmann::json system_to_json(const SystemConfig& cfg);
nlohmann::json policy_to_json(const Policy& p);
nlohmann::json fading_policy_to_json(const FadingPolicy& p);
nlohmann::json evaluation_to_json(const StationaryEvaluation& eval);
nlohmann::json metrics_to_json(const SimMetrics& metrics);
nlohmann::json certificate_to_json(const Certificate& cert);
nlohmann::json ascent_to_json(const AscentResult& result);

/// Parsers throw ConfigError on schema or invariant violations. The
/// *_from_json forms take parsed documents; the load_* forms read files.
ClientModel client_model_from_json(const nlohmann::json& j);
std::optional<ChannelModel> channel_from_json(const nlohmann::json& j, const ClientModel& m);
SystemConfig system_from_json(const nlohmann::json& j);
Policy policy_from_json(const nlohmann::json& j, const ClientModel& m);
FadingPolicy fading_policy_from_json(const nlohmann::json& j, const ClientModel& m,
                                     const ChannelModel& ch);

nlohmann::json load_json(const std::string& path);

/// Client file or system file: a bare client loads as a one-client system
/// with the budget left at zero (callers needing a budget must see one).
ClientModel load_client_model(const std::string& path);
SystemConfig load_system(const std::string& path);

/// Channels declared inline per client; clients without one get the
/// degenerate fixed channel.
std::vector<ChannelModel> load_channels(const std::string& path, const SystemConfig& cfg);

/// Writes `text` atomically: temp file in the same directory, then rename.
void write_file_atomic(const std::string& path, const std::string& text);

} // namespace streamdp
