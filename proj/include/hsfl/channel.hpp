#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "hsfl/assignment.hpp"
#include "hsfl/random.hpp"
#include "hsfl/scenario.hpp"

namespace hsfl {

// Urban macro path loss. Distances are stored in meters; the 1e-3 factor
// inside the log matches the model's km normalization.
inline double path_loss_db(double distance_m)
{
    if (!(distance_m > 0.0))
        throw std::invalid_argument("path_loss_db: distance must be positive");
    return 128.1 + 37.6 * std::log10(distance_m * 1e-3);
}

// Linear power gains of the three links of every device, one block-fading
// draw per round.
struct ChannelDraw {
    std::vector<double> h_broadcast;
    std::vector<double> h_uplink;
    std::vector<double> h_downlink;

    int device_count() const { return static_cast<int>(h_broadcast.size()); }
};

// Per-device draw order is broadcast, uplink, downlink; fading factors are
// independent unit-mean exponentials (squared normalized Rayleigh).
inline ChannelDraw draw_round_channels(const RoundScenario& scenario, RngStream& rng)
{
    const int k = scenario.device_count();
    ChannelDraw d;
    d.h_broadcast.resize(static_cast<std::size_t>(k));
    d.h_uplink.resize(static_cast<std::size_t>(k));
    d.h_downlink.resize(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        const double pl = path_loss_db(scenario.distance_m[static_cast<std::size_t>(i)]);
        const double g = std::pow(10.0, -pl / 10.0);
        d.h_broadcast[static_cast<std::size_t>(i)] = g * rng.exponential();
        d.h_uplink[static_cast<std::size_t>(i)] = g * rng.exponential();
        d.h_downlink[static_cast<std::size_t>(i)] = g * rng.exponential();
    }
    return d;
}

// Fading forced to 1; deterministic fallback used by tests.
inline ChannelDraw nominal_channels(const RoundScenario& scenario)
{
    const int k = scenario.device_count();
    ChannelDraw d;
    d.h_broadcast.resize(static_cast<std::size_t>(k));
    d.h_uplink.resize(static_cast<std::size_t>(k));
    d.h_downlink.resize(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        const double pl = path_loss_db(scenario.distance_m[static_cast<std::size_t>(i)]);
        const double g = std::pow(10.0, -pl / 10.0);
        d.h_broadcast[static_cast<std::size_t>(i)] = g;
        d.h_uplink[static_cast<std::size_t>(i)] = g;
        d.h_downlink[static_cast<std::size_t>(i)] = g;
    }
    return d;
}

// Shannon rate over a bandwidth fraction: b*B*log2(1 + p*h / (sigma*b*B)).
// The b -> 0 limit is 0.
inline double link_rate(double fraction, double total_bandwidth_hz, double tx_power_w,
                        double gain, double noise_psd)
{
    if (fraction < 0.0 || fraction > 1.0)
        throw std::invalid_argument("link_rate: fraction outside [0, 1]");
    if (fraction == 0.0) return 0.0;
    const double w = fraction * total_bandwidth_hz;
    return w * std::log2(1.0 + tx_power_w * gain / (noise_psd * w));
}

// Broadcast rate toward the FL set: the slowest FL device pins the rate.
// Empty FL set -> nullopt (no broadcast happens).
inline std::optional<double> broadcast_rate(const SystemConstants& constants,
                                            const ChannelDraw& draw,
                                            const std::vector<Mode>& modes)
{
    std::optional<double> rate;
    for (std::size_t k = 0; k < modes.size(); ++k) {
        if (modes[k] != Mode::FL) continue;
        const double r = constants.broadcast_bandwidth_hz *
            std::log2(1.0 + constants.server_tx_power_w * draw.h_broadcast[k] /
                            (constants.noise_psd_w_per_hz * constants.broadcast_bandwidth_hz));
        if (!rate || r < *rate) rate = r;
    }
    return rate;
}

}  // namespace hsfl
