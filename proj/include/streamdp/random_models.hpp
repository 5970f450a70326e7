#pragma once

#include <cstdint>

#include "streamdp/model.hpp"

namespace streamdp {

struct ModelBounds {
    int max_buffer = 12;
    int max_play_duration = 4;
    int max_qualities = 3;
    int max_power_levels = 3;
};

/// Seeded, platform-stable random client model satisfying every validation
/// invariant (monotone success matrix, strictly increasing menus). Same seed,
/// same model, everywhere.
ClientModel random_client_model(std::uint64_t seed, const ModelBounds& bounds = {});

/// Small-instance variant whose exhaustive policy count stays under control:
/// buffer at most 5, at most two qualities and two power levels.
ClientModel random_tiny_model(std::uint64_t seed);

} // namespace streamdp
