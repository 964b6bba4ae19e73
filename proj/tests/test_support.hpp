#pragma once

#include <cstdint>
#include <vector>

#include "hsfl/channel.hpp"
#include "hsfl/random.hpp"
#include "hsfl/scenario.hpp"

namespace hsfl::testutil {

// Random K-device scenario with urban-cell constants and integer dataset
// sizes in [d_lo, d_hi].
inline RoundScenario make_random_scenario(int devices, std::uint64_t seed, int d_lo = 20,
                                          int d_hi = 60)
{
    ScenarioConfig cfg;
    cfg.devices = devices;
    RngStream rng(derive_seed(seed, 0xA11));
    RoundScenario sc = make_scenario(cfg, rng);
    for (auto& d : sc.dataset_sizes)
        d = static_cast<double>(d_lo + rng.uniform_int(d_hi - d_lo + 1));
    return sc;
}

inline ChannelDraw draw_for(const RoundScenario& sc, std::uint64_t seed)
{
    RngStream rng(derive_seed(seed, 0xC44));
    return draw_round_channels(sc, rng);
}

}  // namespace hsfl::testutil
