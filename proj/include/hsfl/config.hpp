#pragma once

#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hsfl/model_profile.hpp"
#include "hsfl/orchestrator.hpp"
#include "hsfl/scenario.hpp"
#include "hsfl/trainer.hpp"

namespace hsfl {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    ScenarioConfig scenario;
    DatasetConfig dataset;
    Hyperweights weights;
    int rho2_index = 0;  // 0: rho2 given directly
    Tolerances tol;
    std::string scheme = "proposed";
    std::uint64_t seed = 1;
    int rounds = 30;
    double target_loss = std::numeric_limits<double>::quiet_NaN();
    bool stop_at_target = false;
    std::string output_dir = "out";
    ModelProfile profile = lenet5_profile();
    bool verbose = false;
};

namespace detail {

template <class T>
T get_or(const nlohmann::json& j, const std::string& key, T fallback)
{
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError("config field '" + key + "' has the wrong type");
    }
}

inline void require_positive(double v, const std::string& field)
{
    if (!(v > 0.0)) throw ConfigError("config field '" + field + "' must be positive");
}

}  // namespace detail

inline ModelProfile profile_from_json(const nlohmann::json& j)
{
    if (j.is_string()) {
        const auto name = j.get<std::string>();
        if (name == "lenet5") return lenet5_profile();
        throw ConfigError("config field 'model_profile': unknown built-in '" + name + "'");
    }
    if (!j.contains("layers") || !j.at("layers").is_array())
        throw ConfigError("config field 'model_profile.layers' must be an array");
    std::vector<LayerProfile> layers;
    int idx = 0;
    for (const auto& lj : j.at("layers")) {
        const std::string path = "model_profile.layers[" + std::to_string(idx++) + "]";
        LayerProfile l;
        l.param_bits = detail::get_or<double>(lj, "param_bits", 0.0);
        l.flops_per_sample = detail::get_or<double>(lj, "flops_per_sample", 0.0);
        l.fwd_payload_bits = detail::get_or<double>(lj, "fwd_payload_bits", 0.0);
        l.bwd_payload_bits = detail::get_or<double>(lj, "bwd_payload_bits", 0.0);
        if (l.param_bits < 0 || l.flops_per_sample < 0 || l.fwd_payload_bits < 0 ||
            l.bwd_payload_bits < 0)
            throw ConfigError("config field '" + path + "' has a negative entry");
        layers.push_back(l);
    }
    try {
        return ModelProfile::from_layers(std::move(layers));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config field 'model_profile': ") + e.what());
    }
}

inline RunConfig config_from_json(const nlohmann::json& j)
{
    using detail::get_or;
    RunConfig c;

    c.scenario.devices = get_or<int>(j, "devices", c.scenario.devices);
    if (c.scenario.devices < 1) throw ConfigError("config field 'devices' must be >= 1");
    c.scenario.cell_radius_m = get_or<double>(j, "cell_radius_m", c.scenario.cell_radius_m);
    c.scenario.min_distance_m = get_or<double>(j, "min_distance_m", c.scenario.min_distance_m);
    if (j.contains("positions_m")) {
        for (const auto& p : j.at("positions_m")) {
            if (!p.is_array() || p.size() != 2)
                throw ConfigError("config field 'positions_m' entries must be [x, y]");
            c.scenario.positions_m.push_back({p[0].get<double>(), p[1].get<double>()});
        }
    }
    c.scenario.server_tx_power_w =
        get_or<double>(j, "server_tx_power_w", c.scenario.server_tx_power_w);
    if (j.contains("device_tx_power_w")) {
        const auto& p = j.at("device_tx_power_w");
        if (p.is_array())
            c.scenario.device_tx_power_override = p.get<std::vector<double>>();
        else
            c.scenario.device_tx_power_w = p.get<double>();
    }
    c.scenario.broadcast_bandwidth_hz =
        get_or<double>(j, "broadcast_bandwidth_hz", c.scenario.broadcast_bandwidth_hz);
    c.scenario.total_bandwidth_hz =
        get_or<double>(j, "total_bandwidth_hz", c.scenario.total_bandwidth_hz);
    c.scenario.noise_psd_dbm_per_hz =
        get_or<double>(j, "noise_psd_dbm_per_hz", c.scenario.noise_psd_dbm_per_hz);
    c.scenario.server_cycles_per_s =
        get_or<double>(j, "server_cycles_per_s", c.scenario.server_cycles_per_s);
    if (j.contains("device_cycles_per_s_range")) {
        const auto& r = j.at("device_cycles_per_s_range");
        if (!r.is_array() || r.size() != 2)
            throw ConfigError("config field 'device_cycles_per_s_range' must be [lo, hi]");
        c.scenario.device_cycles_min = r[0].get<double>();
        c.scenario.device_cycles_max = r[1].get<double>();
        if (c.scenario.device_cycles_min > c.scenario.device_cycles_max)
            throw ConfigError("config field 'device_cycles_per_s_range' is inverted");
    }
    c.scenario.flops_per_cycle = get_or<double>(j, "flops_per_cycle", c.scenario.flops_per_cycle);
    if (j.contains("dataset_sizes"))
        c.scenario.dataset_sizes = j.at("dataset_sizes").get<std::vector<double>>();

    detail::require_positive(c.scenario.cell_radius_m, "cell_radius_m");
    detail::require_positive(c.scenario.server_tx_power_w, "server_tx_power_w");
    detail::require_positive(c.scenario.broadcast_bandwidth_hz, "broadcast_bandwidth_hz");
    detail::require_positive(c.scenario.total_bandwidth_hz, "total_bandwidth_hz");
    detail::require_positive(c.scenario.server_cycles_per_s, "server_cycles_per_s");
    detail::require_positive(c.scenario.device_cycles_min, "device_cycles_per_s_range[0]");
    detail::require_positive(c.scenario.flops_per_cycle, "flops_per_cycle");

    if (j.contains("dataset")) {
        const auto& d = j.at("dataset");
        c.dataset.samples = get_or<int>(d, "samples", c.dataset.samples);
        c.dataset.classes = get_or<int>(d, "classes", c.dataset.classes);
        c.dataset.dim = get_or<int>(d, "dim", c.dataset.dim);
        c.dataset.phi = get_or<double>(d, "phi", c.dataset.phi);
        c.dataset.holdout_fraction = get_or<double>(d, "holdout_fraction",
                                                    c.dataset.holdout_fraction);
        if (d.contains("hidden")) c.dataset.hidden = d.at("hidden").get<std::vector<int>>();
        c.dataset.eta = get_or<double>(d, "eta", c.dataset.eta);
        detail::require_positive(c.dataset.phi, "dataset.phi");
        if (c.dataset.eta < 0.0) throw ConfigError("config field 'dataset.eta' must be >= 0");
        if (c.dataset.holdout_fraction <= 0.0 || c.dataset.holdout_fraction >= 1.0)
            throw ConfigError("config field 'dataset.holdout_fraction' must be in (0, 1)");
    }

    c.weights.rho1 = get_or<double>(j, "rho1", c.weights.rho1);
    detail::require_positive(c.weights.rho1, "rho1");
    if (j.contains("rho2_index")) {
        c.rho2_index = j.at("rho2_index").get<int>();
        try {
            c.weights.rho2 = rho2_from_index(c.rho2_index);
        } catch (const std::invalid_argument&) {
            throw ConfigError("config field 'rho2_index' must lie in {3..9}");
        }
        if (j.contains("rho2") && j.at("rho2").get<double>() != c.weights.rho2)
            throw ConfigError("config fields 'rho2' and 'rho2_index' disagree");
    } else if (j.contains("rho2")) {
        c.weights.rho2 = j.at("rho2").get<double>();
    }
    detail::require_positive(c.weights.rho2, "rho2");

    c.tol.eps1 = get_or<double>(j, "eps1", c.tol.eps1);
    c.tol.eps2 = get_or<double>(j, "eps2", c.tol.eps2);
    c.tol.eps3 = get_or<double>(j, "eps3", c.tol.eps3);
    c.tol.eps4 = get_or<double>(j, "eps4", c.tol.eps4);
    c.tol.delta = get_or<double>(j, "delta", c.tol.delta);
    detail::require_positive(c.tol.eps1, "eps1");
    detail::require_positive(c.tol.eps2, "eps2");
    detail::require_positive(c.tol.eps3, "eps3");
    detail::require_positive(c.tol.eps4, "eps4");
    detail::require_positive(c.tol.delta, "delta");

    c.scheme = get_or<std::string>(j, "scheme", c.scheme);
    try {
        scheme_from_string(c.scheme);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config field 'scheme': ") + e.what());
    }
    c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
    c.rounds = get_or<int>(j, "rounds", c.rounds);
    if (c.rounds < 1) throw ConfigError("config field 'rounds' must be >= 1");
    c.target_loss = get_or<double>(j, "target_loss", c.target_loss);
    c.stop_at_target = get_or<bool>(j, "stop_at_target", c.stop_at_target);
    c.output_dir = get_or<std::string>(j, "output_dir", c.output_dir);
    c.verbose = get_or<bool>(j, "verbose", c.verbose);

    if (j.contains("model_profile")) c.profile = profile_from_json(j.at("model_profile"));
    return c;
}

// Loads and validates a JSON run config; a missing or blank file yields the
// all-defaults config.
inline RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) return RunConfig{};
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config root must be a JSON object");
    try {
        return config_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config type error: ") + e.what());
    }
}

}  // namespace hsfl
