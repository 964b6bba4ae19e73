#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "hsfl/assignment.hpp"
#include "hsfl/channel.hpp"
#include "hsfl/model_profile.hpp"
#include "hsfl/scenario.hpp"

namespace hsfl {

struct FlDelay {
    double download = 0.0;  // S / R0
    double train = 0.0;     // xi * C / f_k
    double upload = 0.0;    // S / R_fu(b_k)
    double total() const { return download + train + upload; }
};

struct SlDelay {
    double download = 0.0;     // local model over R_sd
    double compute = 0.0;      // xi * (local/f_k + edge/f0)
    double communicate = 0.0;  // xi * (oF/R_su + oB/R_sd)
    double upload = 0.0;       // local model over R_su
    double total() const { return download + compute + communicate + upload; }
};

struct RoundDelays {
    std::vector<FlDelay> fl;   // meaningful for FL devices
    std::vector<SlDelay> sl;   // meaningful for SL devices
    double t_fl = 0.0;         // max over FL devices, 0 when none
    double t_sl = 0.0;         // sum over SL devices, 0 when none
    double t_round = 0.0;      // max(t_fl, t_sl)
};

// Affine delay coefficients per device: T_k(xi) = xi * gamma[k] + lambda[k].
// gamma/lambda carry FL semantics for FL devices and SL semantics for SL
// devices, indexed by device id.
struct DelayCoefficients {
    std::vector<double> gamma;
    std::vector<double> lambda;
};

inline FlDelay fl_device_delay(int device, const ModeAssignment& assignment,
                               const ChannelDraw& draw, const ModelProfile& profile,
                               const RoundScenario& scenario)
{
    const std::size_t k = static_cast<std::size_t>(device);
    if (assignment.modes[k] != Mode::FL)
        throw std::invalid_argument("fl_device_delay: device is not in FL mode");
    const double b = assignment.bandwidth[k];
    if (!(b > 0.0))
        throw InfeasibleAllocation("fl_device_delay: zero bandwidth share");
    const auto r0 = broadcast_rate(scenario.constants, draw, assignment.modes);

    FlDelay d;
    d.download = profile.total_bits() / *r0;
    d.train = assignment.batches[k] * profile.total_flops_per_sample() /
              scenario.constants.device_flops[k];
    d.upload = profile.total_bits() /
               link_rate(b, scenario.constants.total_bandwidth_hz,
                         scenario.constants.device_tx_power_w[k], draw.h_uplink[k],
                         scenario.constants.noise_psd_w_per_hz);
    return d;
}

inline SlDelay sl_device_delay(int device, int cut, double b0, double batch,
                               const ChannelDraw& draw, const ModelProfile& profile,
                               const RoundScenario& scenario)
{
    const std::size_t k = static_cast<std::size_t>(device);
    if (!(b0 > 0.0))
        throw InfeasibleAllocation("sl_device_delay: zero SL bandwidth share");
    const double r_sd = link_rate(b0, scenario.constants.total_bandwidth_hz,
                                  scenario.constants.server_tx_power_w, draw.h_downlink[k],
                                  scenario.constants.noise_psd_w_per_hz);
    const double r_su = link_rate(b0, scenario.constants.total_bandwidth_hz,
                                  scenario.constants.device_tx_power_w[k], draw.h_uplink[k],
                                  scenario.constants.noise_psd_w_per_hz);
    const double local_bits = profile.local_model_bits(cut);

    SlDelay d;
    d.download = local_bits / r_sd;
    d.compute = batch * (profile.local_flops(cut) / scenario.constants.device_flops[k] +
                         profile.edge_flops(cut) / scenario.constants.server_flops);
    d.communicate = batch * (profile.fwd_payload_bits(cut) / r_su +
                             profile.bwd_payload_bits(cut) / r_sd);
    d.upload = local_bits / r_su;
    return d;
}

inline RoundDelays round_delay(const ModeAssignment& assignment, const ChannelDraw& draw,
                               const ModelProfile& profile, const RoundScenario& scenario)
{
    const int n = assignment.device_count();
    RoundDelays out;
    out.fl.resize(static_cast<std::size_t>(n));
    out.sl.resize(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        const std::size_t i = static_cast<std::size_t>(k);
        if (assignment.modes[i] == Mode::FL) {
            out.fl[i] = fl_device_delay(k, assignment, draw, profile, scenario);
            out.t_fl = std::max(out.t_fl, out.fl[i].total());
        } else {
            out.sl[i] = sl_device_delay(k, assignment.cuts[i], assignment.b0,
                                        assignment.batches[i], draw, profile, scenario);
            out.t_sl += out.sl[i].total();
        }
    }
    out.t_round = std::max(out.t_fl, out.t_sl);
    return out;
}

// Splits each device's delay into the batch-size-proportional part (gamma)
// and the model-transfer constant (lambda), at fixed modes, cuts and
// bandwidths. T_k(xi) = xi*gamma + lambda reproduces the direct delay.
inline DelayCoefficients delay_coefficients(const ModeAssignment& assignment,
                                            const ChannelDraw& draw,
                                            const ModelProfile& profile,
                                            const RoundScenario& scenario)
{
    const int n = assignment.device_count();
    DelayCoefficients c;
    c.gamma.resize(static_cast<std::size_t>(n), 0.0);
    c.lambda.resize(static_cast<std::size_t>(n), 0.0);
    const auto r0 = broadcast_rate(scenario.constants, draw, assignment.modes);
    for (int k = 0; k < n; ++k) {
        const std::size_t i = static_cast<std::size_t>(k);
        if (assignment.modes[i] == Mode::FL) {
            c.gamma[i] = profile.total_flops_per_sample() / scenario.constants.device_flops[i];
            const double b = assignment.bandwidth[i];
            if (!(b > 0.0))
                throw InfeasibleAllocation("delay_coefficients: zero FL bandwidth share");
            c.lambda[i] = profile.total_bits() / *r0 +
                          profile.total_bits() /
                              link_rate(b, scenario.constants.total_bandwidth_hz,
                                        scenario.constants.device_tx_power_w[i],
                                        draw.h_uplink[i], scenario.constants.noise_psd_w_per_hz);
        } else {
            const SlDelay probe = sl_device_delay(k, assignment.cuts[i], assignment.b0, 1.0,
                                                  draw, profile, scenario);
            c.gamma[i] = probe.compute + probe.communicate;
            c.lambda[i] = probe.download + probe.upload;
        }
    }
    return c;
}

}  // namespace hsfl
