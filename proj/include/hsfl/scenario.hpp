#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "hsfl/random.hpp"

namespace hsfl {

// System-level constants of one scenario. All values are linear SI units;
// dBm conversions happen at config-parsing time.
struct SystemConstants {
    double broadcast_bandwidth_hz = 0.0;        // B0
    double total_bandwidth_hz = 0.0;            // B
    double server_tx_power_w = 0.0;             // p0
    double noise_psd_w_per_hz = 0.0;            // sigma, linear W/Hz
    double server_flops = 0.0;                  // f0, FLOPs/s
    std::vector<double> device_tx_power_w;      // p_k
    std::vector<double> device_flops;           // f_k, FLOPs/s
};

// One communication round's environment: placement, compute speeds and
// dataset sizes. Immutable once built; channel fading is drawn separately
// per round.
struct RoundScenario {
    SystemConstants constants;
    std::vector<double> distance_m;     // device-to-server distance
    std::vector<double> dataset_sizes;  // D_k

    int device_count() const { return static_cast<int>(distance_m.size()); }

    void validate() const
    {
        const std::size_t k = distance_m.size();
        if (k == 0) throw std::invalid_argument("scenario: no devices");
        if (constants.device_tx_power_w.size() != k || constants.device_flops.size() != k ||
            dataset_sizes.size() != k)
            throw std::invalid_argument("scenario: per-device vectors disagree in length");
        if (constants.broadcast_bandwidth_hz <= 0 || constants.total_bandwidth_hz <= 0 ||
            constants.server_tx_power_w <= 0 || constants.noise_psd_w_per_hz <= 0 ||
            constants.server_flops <= 0)
            throw std::invalid_argument("scenario: system constants must be positive");
        for (std::size_t i = 0; i < k; ++i) {
            if (distance_m[i] <= 0) throw std::invalid_argument("scenario: distance must be positive");
            if (constants.device_tx_power_w[i] <= 0 || constants.device_flops[i] <= 0)
                throw std::invalid_argument("scenario: device constants must be positive");
            if (dataset_sizes[i] < 1)
                throw std::invalid_argument("scenario: dataset size below 1 at device " +
                                            std::to_string(i));
        }
    }
};

inline double dbm_per_hz_to_w_per_hz(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

// Generation parameters; defaults reproduce the 30-device urban cell used
// throughout the experiments.
struct ScenarioConfig {
    int devices = 30;
    double cell_radius_m = 100.0;
    double min_distance_m = 1.0;
    std::vector<std::array<double, 2>> positions_m;  // optional explicit placement
    double server_tx_power_w = 1.0;
    double device_tx_power_w = 0.1;
    std::vector<double> device_tx_power_override;    // optional per-device powers
    double broadcast_bandwidth_hz = 1.4e6;
    double total_bandwidth_hz = 1.4e6;
    double noise_psd_dbm_per_hz = -174.0;
    double server_cycles_per_s = 100e8;
    double device_cycles_min = 1e8;
    double device_cycles_max = 8e8;
    double flops_per_cycle = 16.0;
    std::vector<double> dataset_sizes;               // optional; often filled from a partition
};

// Places devices and draws compute speeds. Dataset sizes default to 1 when
// not supplied; callers that train overwrite them from the data partition.
inline RoundScenario make_scenario(const ScenarioConfig& cfg, RngStream& rng)
{
    if (cfg.devices <= 0) throw std::invalid_argument("make_scenario: devices must be positive");
    const std::size_t k = static_cast<std::size_t>(cfg.devices);

    RoundScenario s;
    s.constants.broadcast_bandwidth_hz = cfg.broadcast_bandwidth_hz;
    s.constants.total_bandwidth_hz = cfg.total_bandwidth_hz;
    s.constants.server_tx_power_w = cfg.server_tx_power_w;
    s.constants.noise_psd_w_per_hz = dbm_per_hz_to_w_per_hz(cfg.noise_psd_dbm_per_hz);
    s.constants.server_flops = cfg.server_cycles_per_s * cfg.flops_per_cycle;

    s.distance_m.resize(k);
    if (!cfg.positions_m.empty()) {
        if (cfg.positions_m.size() != k)
            throw std::invalid_argument("make_scenario: positions_m length mismatch");
        for (std::size_t i = 0; i < k; ++i) {
            const double d = std::hypot(cfg.positions_m[i][0], cfg.positions_m[i][1]);
            s.distance_m[i] = std::max(d, cfg.min_distance_m);
        }
    } else {
        for (std::size_t i = 0; i < k; ++i) {
            // uniform over the disk
            const double r = cfg.cell_radius_m * std::sqrt(rng.uniform01());
            s.distance_m[i] = std::max(r, cfg.min_distance_m);
        }
    }

    s.constants.device_tx_power_w.assign(k, cfg.device_tx_power_w);
    if (!cfg.device_tx_power_override.empty()) {
        if (cfg.device_tx_power_override.size() != k)
            throw std::invalid_argument("make_scenario: device_tx_power_override length mismatch");
        s.constants.device_tx_power_w = cfg.device_tx_power_override;
    }

    s.constants.device_flops.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
        const double cycles = cfg.device_cycles_min +
            (cfg.device_cycles_max - cfg.device_cycles_min) * rng.uniform01();
        s.constants.device_flops[i] = cycles * cfg.flops_per_cycle;
    }

    if (!cfg.dataset_sizes.empty()) {
        if (cfg.dataset_sizes.size() != k)
            throw std::invalid_argument("make_scenario: dataset_sizes length mismatch");
        s.dataset_sizes = cfg.dataset_sizes;
    } else {
        s.dataset_sizes.assign(k, 1.0);
    }

    s.validate();
    return s;
}

}  // namespace hsfl
