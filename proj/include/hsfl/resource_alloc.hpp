#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "hsfl/assignment.hpp"
#include "hsfl/channel.hpp"
#include "hsfl/delay.hpp"
#include "hsfl/model_profile.hpp"
#include "hsfl/scenario.hpp"

namespace hsfl {

// Joint output of the cut-layer / bandwidth stage: SL aggregate share b0,
// per-FL-device shares, per-SL-device cuts and the resulting block delays.
struct AllocationResult {
    double b0 = 0.0;
    std::vector<double> bandwidth;  // size K, zero for SL devices
    std::vector<int> cuts;          // size K, zero for FL devices
    double t_fl = 0.0;
    double t_sl = 0.0;
    bool converged = true;
    int iterations = 0;
};

namespace detail {

// Solve w * ln(1 + g/w) = target for w in (0, w_max]; returns w_max when the
// target is unattainable there. Monotone increasing and concave in w, so a
// bracketed Newton iteration converges from below.
inline double solve_effective_width(double target_ln, double g, double w_max)
{
    const auto f = [&](double w) { return w * std::log1p(g / w); };
    if (f(w_max) <= target_ln) return w_max;
    double lo = 0.0, hi = w_max;
    double x = std::min(w_max, target_ln / std::log1p(g / w_max));
    if (!(x > 0.0)) x = 0.5 * w_max;
    for (int it = 0; it < 100; ++it) {
        const double fx = f(x);
        if (fx > target_ln) hi = x; else lo = x;
        const double err = fx - target_ln;
        if (std::abs(err) <= 1e-13 * target_ln || hi - lo <= 1e-15 * w_max) break;
        const double dfx = std::log1p(g / x) - g / (x + g);
        double next = x - err / dfx;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        x = next;
    }
    return x;
}

// Bandwidth fraction that meets an upload deadline; clamps to max_fraction.
inline double fraction_for_upload(double bits, double deadline_s, double max_fraction,
                                  double total_bw, double tx_power, double gain,
                                  double noise_psd)
{
    if (!(deadline_s > 0.0)) return max_fraction;
    const double g = tx_power * gain / noise_psd;  // Hz
    const double target_ln = bits / deadline_s * 0.6931471805599453;  // rate * ln 2
    const double w = solve_effective_width(target_ln, g, max_fraction * total_bw);
    return w / total_bw;
}

}  // namespace detail

// Delay-minimizing cut for one SL device at the given share b0 and batch.
// Exhaustive over the L cuts; ties break toward the shallowest layer.
inline int optimal_cut_layer(int device, double b0, double batch, const ChannelDraw& draw,
                             const ModelProfile& profile, const RoundScenario& scenario,
                             double* delay_out = nullptr)
{
    if (!(b0 > 0.0))
        throw InfeasibleAllocation("optimal_cut_layer: zero SL bandwidth share");
    const std::size_t i = static_cast<std::size_t>(device);
    const double r_sd = link_rate(b0, scenario.constants.total_bandwidth_hz,
                                  scenario.constants.server_tx_power_w, draw.h_downlink[i],
                                  scenario.constants.noise_psd_w_per_hz);
    const double r_su = link_rate(b0, scenario.constants.total_bandwidth_hz,
                                  scenario.constants.device_tx_power_w[i], draw.h_uplink[i],
                                  scenario.constants.noise_psd_w_per_hz);
    const double f_k = scenario.constants.device_flops[i];
    const double f_0 = scenario.constants.server_flops;

    int best_cut = 1;
    double best = std::numeric_limits<double>::infinity();
    for (int l = 1; l <= profile.layer_count(); ++l) {
        const double transfer = profile.local_model_bits(l) * (1.0 / r_sd + 1.0 / r_su);
        const double per_sample = profile.local_flops(l) / f_k + profile.edge_flops(l) / f_0 +
                                  profile.fwd_payload_bits(l) / r_su +
                                  profile.bwd_payload_bits(l) / r_sd;
        const double t = transfer + batch * per_sample;
        if (t < best) {
            best = t;
            best_cut = l;
        }
    }
    if (delay_out) *delay_out = best;
    return best_cut;
}

struct FlAllocation {
    std::vector<double> shares;  // size K, zero for SL devices
    double t_fl = 0.0;           // realized max FL delay at the shares
    double d_star = 0.0;         // equalized delay found by the bisection
    int iterations = 0;
    bool converged = true;
};

// FL-device bandwidth equalization: outer bisection on the common delay d*,
// with each share recovered from its upload deadline. Terminates once the
// share sum lands in [1 - b0 - eps2, 1 - b0]. When a probe leaves no time
// for some upload, that share clamps to the full budget, which drives the
// lower bracket up.
inline FlAllocation fl_bandwidth_allocation(const std::vector<Mode>& modes, double b0,
                                            const std::vector<double>& batches,
                                            const ChannelDraw& draw,
                                            const ModelProfile& profile,
                                            const RoundScenario& scenario, double eps2,
                                            std::vector<std::array<double, 3>>* trace = nullptr)
{
    if (!(eps2 > 0.0)) throw std::invalid_argument("fl_bandwidth_allocation: eps2 must be positive");
    const auto fl = devices_in_mode(modes, Mode::FL);
    FlAllocation out;
    out.shares.assign(modes.size(), 0.0);
    if (fl.empty()) return out;

    const double avail = 1.0 - b0;
    if (!(avail > 0.0))
        throw InfeasibleAllocation("fl_bandwidth_allocation: no bandwidth left for FL devices");

    const auto& c = scenario.constants;
    const double s_bits = profile.total_bits();
    const double r0 = *broadcast_rate(c, draw, modes);
    const double d_broadcast = s_bits / r0;

    const std::size_t m = fl.size();
    std::vector<double> base(m), gain(m), power(m);
    for (std::size_t j = 0; j < m; ++j) {
        const std::size_t i = static_cast<std::size_t>(fl[j]);
        base[j] = d_broadcast +
                  batches[i] * profile.total_flops_per_sample() / c.device_flops[i];
        gain[j] = draw.h_uplink[i];
        power[j] = c.device_tx_power_w[i];
    }

    const auto upload_time = [&](std::size_t j, double b) {
        return s_bits / link_rate(b, c.total_bandwidth_hz, power[j], gain[j], c.noise_psd_w_per_hz);
    };

    double d_lo = 0.0, d_hi = 0.0;
    const double b_eq = avail / static_cast<double>(m);
    for (std::size_t j = 0; j < m; ++j) {
        d_lo = std::max(d_lo, base[j]);
        d_hi = std::max(d_hi, base[j] + upload_time(j, b_eq));
    }

    std::vector<double> b(m, b_eq);
    out.converged = false;
    constexpr int max_iters = 200;
    for (int it = 0; it < max_iters; ++it) {
        const double d = 0.5 * (d_lo + d_hi);
        double sum = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            b[j] = detail::fraction_for_upload(s_bits, d - base[j], avail, c.total_bandwidth_hz,
                                               power[j], gain[j], c.noise_psd_w_per_hz);
            sum += b[j];
        }
        if (trace) trace->push_back({d, sum, avail});
        out.iterations = it + 1;
        out.d_star = d;
        if (sum < avail - eps2) {
            d_hi = d;
        } else if (sum > avail) {
            d_lo = d;
        } else {
            out.converged = true;
            break;
        }
    }

    for (std::size_t j = 0; j < m; ++j) {
        out.shares[static_cast<std::size_t>(fl[j])] = b[j];
        out.t_fl = std::max(out.t_fl, base[j] + upload_time(j, b[j]));
    }
    return out;
}

// SL/FL bandwidth split: bisection on b0 until the SL chain delay and the
// equalized FL delay meet within eps3. Cuts and FL shares are re-optimized
// at every probe since both depend on b0 through the rates. Degenerate
// device sets skip the search entirely.
inline AllocationResult sl_bandwidth_split(const std::vector<Mode>& modes,
                                           const std::vector<double>& batches,
                                           const ChannelDraw& draw, const ModelProfile& profile,
                                           const RoundScenario& scenario, double eps2,
                                           double eps3,
                                           std::vector<std::array<double, 3>>* trace = nullptr)
{
    if (!(eps3 > 0.0)) throw std::invalid_argument("sl_bandwidth_split: eps3 must be positive");
    const auto fl = devices_in_mode(modes, Mode::FL);
    const auto sl = devices_in_mode(modes, Mode::SL);

    AllocationResult out;
    out.bandwidth.assign(modes.size(), 0.0);
    out.cuts.assign(modes.size(), 0);

    const auto eval_sl = [&](double b0) {
        double total = 0.0;
        for (const int k : sl) {
            double d = 0.0;
            out.cuts[static_cast<std::size_t>(k)] = optimal_cut_layer(
                k, b0, batches[static_cast<std::size_t>(k)], draw, profile, scenario, &d);
            total += d;
        }
        return total;
    };

    if (sl.empty()) {
        out.b0 = 0.0;
        if (!fl.empty()) {
            const auto a = fl_bandwidth_allocation(modes, 0.0, batches, draw, profile,
                                                   scenario, eps2);
            out.bandwidth = a.shares;
            out.t_fl = a.t_fl;
            out.converged = a.converged;
        }
        return out;
    }
    if (fl.empty()) {
        out.b0 = 1.0;
        out.t_sl = eval_sl(1.0);
        return out;
    }

    double b_lo = 0.0, b_hi = 1.0;
    double best_gap = std::numeric_limits<double>::infinity();
    AllocationResult best = out;
    out.converged = false;
    constexpr int max_iters = 200;
    for (int it = 0; it < max_iters; ++it) {
        const double b0 = 0.5 * (b_lo + b_hi);
        out.b0 = b0;
        out.t_sl = eval_sl(b0);
        const auto a = fl_bandwidth_allocation(modes, b0, batches, draw, profile, scenario, eps2);
        out.bandwidth = a.shares;
        out.t_fl = a.t_fl;
        out.iterations = it + 1;
        if (trace) trace->push_back({b0, out.t_sl, out.t_fl});

        const double gap = std::abs(out.t_sl - out.t_fl);
        if (gap < best_gap) {
            best_gap = gap;
            best = out;
        }
        if (gap <= eps3) {
            out.converged = true;
            return out;
        }
        if (out.t_sl > out.t_fl) b_lo = b0; else b_hi = b0;
    }
    best.iterations = max_iters;
    best.converged = false;
    return best;
}

}  // namespace hsfl
