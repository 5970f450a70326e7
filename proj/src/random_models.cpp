#include "streamdp/random_models.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

#include "streamdp/sim.hpp"

namespace streamdp {

namespace {

struct Draws {
    CounterRng rng;
    std::uint64_t next = 0;

    double uniform() { return rng.uniform(0, 0, next++); }
    int uniform_int(int lo, int hi) { // inclusive range
        return lo + static_cast<int>(uniform() * (hi - lo + 1));
    }
};

ClientModel generate(Draws& d, const ModelBounds& bounds) {
    ClientModel m;
    m.buffer_playtime = d.uniform_int(1, bounds.max_buffer);
    m.play_duration = d.uniform_int(1, std::min(bounds.max_play_duration, m.buffer_playtime));

    const int q_count = d.uniform_int(1, bounds.max_qualities);
    const int k_count = d.uniform_int(1, bounds.max_power_levels);

    double penalty = 0.01 + 0.3 * d.uniform();
    for (int q = 0; q < q_count; ++q) {
        m.quality_penalties.push_back(penalty);
        penalty += 0.01 + 0.5 * d.uniform();
    }

    double level = 0.0;
    for (int e = 0; e < k_count; ++e) {
        m.power_levels.push_back(level);
        level += 0.25 + 2.0 * d.uniform();
    }

    // Raw draws turned monotone in both directions by a running maximum.
    m.success_prob.assign(static_cast<std::size_t>(q_count) * k_count, 0.0);
    for (int q = 0; q < q_count; ++q)
        for (int e = 1; e < k_count; ++e) {
            double p = 0.05 + 0.9 * d.uniform();
            if (e > 1) p = std::max(p, m.success_prob[q * k_count + e - 1]);
            if (q > 0) p = std::max(p, m.success_prob[(q - 1) * k_count + e]);
            m.success_prob[q * k_count + e] = p;
        }

    m.outage_period_penalty = 3.0 * d.uniform();
    assert(validate(m).empty());
    return m;
}

} // namespace

ClientModel random_client_model(std::uint64_t seed, const ModelBounds& bounds) {
    Draws d{CounterRng{seed}, 0};
    return generate(d, bounds);
}

ClientModel random_tiny_model(std::uint64_t seed) {
    ModelBounds bounds;
    bounds.max_buffer = 5;
    bounds.max_play_duration = 3;
    bounds.max_qualities = 2;
    bounds.max_power_levels = 2;
    Draws d{CounterRng{seed ^ 0x7115ULL}, 0};
    return generate(d, bounds);
}

} // namespace streamdp
