#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "hsfl/assignment.hpp"
#include "hsfl/batch_opt.hpp"
#include "hsfl/channel.hpp"
#include "hsfl/delay.hpp"
#include "hsfl/mode_select.hpp"
#include "hsfl/model_profile.hpp"
#include "hsfl/random.hpp"
#include "hsfl/resource_alloc.hpp"
#include "hsfl/scenario.hpp"
#include "hsfl/trainer.hpp"

namespace hsfl {

// Solver tolerances; defaults follow the experimental configuration.
struct Tolerances {
    double eps1 = 1e-5;   // BCD objective-decrease threshold
    double eps2 = 3e-3;   // FL bandwidth sum band
    double eps3 = 1e-3;   // SL/FL delay balance (seconds)
    double eps4 = 1e-6;   // KKT residual of the dual ascent
    double delta = 7.5e-4;  // Gibbs exploration temperature
    int bcd_max_alternations = 50;
    int dual_max_iters = 500000;
};

struct Hyperweights {
    double rho1 = 3.0;
    double rho2 = 2000.0;
};

// rho2 as a function of the index i in {3..9}:
// 5*10^((i-1)/2) for odd i, 2*10^(i/2) for even i.
inline double rho2_from_index(int i)
{
    if (i < 3 || i > 9) throw std::invalid_argument("rho2_from_index: index outside {3..9}");
    if (i % 2 == 1) return 5.0 * std::pow(10.0, (i - 1) / 2);
    return 2.0 * std::pow(10.0, i / 2);
}

struct ObjectiveBreakdown {
    double u = 0.0;
    double u1 = 0.0;
    double u2 = 0.0;
    double t_round = 0.0;
    double gamma1 = 0.0;  // sum of rho2/xi
    double gamma2 = 0.0;  // -rho1 * K_S * (K_S - 1)
};

// u = T - rho1*K_S*(K_S-1) + sum_k rho2/xi_k, with its two block
// decompositions (all three coincide at a full assignment).
inline ObjectiveBreakdown objective_u(double t_round, int sl_count,
                                      const std::vector<double>& batches, double rho1,
                                      double rho2)
{
    ObjectiveBreakdown b;
    b.t_round = t_round;
    for (const double xi : batches) b.gamma1 += rho2 / xi;
    const double ks = static_cast<double>(sl_count);
    b.gamma2 = -rho1 * ks * (ks - 1.0);
    b.u = t_round + b.gamma2 + b.gamma1;
    b.u1 = b.u;
    b.u2 = b.u;
    return b;
}

struct RoundSolution {
    ModeAssignment assignment;   // final modes, cuts, shares, integer batches
    AllocationResult alloc;
    BatchSolution relaxed_batch; // continuous solution of the last batch block
    double u = 0.0;
    double u_lb = 0.0;
    double u_ub = 0.0;
    int bcd_iterations = 0;
    bool bcd_converged = true;
    bool subsolvers_converged = true;
    std::vector<double> objective_trace;  // value after every block update
};

struct ConstraintReport {
    bool vectors_consistent = true;
    bool cuts_in_range = true;
    bool bandwidth_sum_ok = true;
    bool bandwidth_band_used = true;  // FL shares use the budget up to the eps2 band
    bool b0_in_range = true;
    bool shares_in_range = true;
    bool batches_in_range = true;
    bool batches_integral = true;

    bool all_ok() const
    {
        return vectors_consistent && cuts_in_range && bandwidth_sum_ok && b0_in_range &&
               shares_in_range && batches_in_range && batches_integral;
    }
};

// Independent feasibility audit of an emitted solution.
inline ConstraintReport audit_constraints(const RoundSolution& sol,
                                          const RoundScenario& scenario,
                                          const ModelProfile& profile, double eps2)
{
    ConstraintReport r;
    const auto& a = sol.assignment;
    const std::size_t n = static_cast<std::size_t>(scenario.device_count());
    if (a.modes.size() != n || a.cuts.size() != n || a.bandwidth.size() != n ||
        a.batches.size() != n) {
        r.vectors_consistent = false;
        return r;
    }
    double share_sum = 0.0;
    bool any_fl = false;
    for (std::size_t k = 0; k < n; ++k) {
        if (a.modes[k] == Mode::SL) {
            if (a.cuts[k] < 1 || a.cuts[k] > profile.layer_count()) r.cuts_in_range = false;
        } else {
            any_fl = true;
            if (a.bandwidth[k] < 0.0 || a.bandwidth[k] > 1.0) r.shares_in_range = false;
            share_sum += a.bandwidth[k];
        }
        if (a.batches[k] < 1.0 || a.batches[k] > scenario.dataset_sizes[k])
            r.batches_in_range = false;
        if (std::abs(a.batches[k] - std::round(a.batches[k])) > 1e-9) r.batches_integral = false;
    }
    if (a.b0 < 0.0 || a.b0 > 1.0) r.b0_in_range = false;
    if (share_sum + a.b0 > 1.0 + 1e-12) r.bandwidth_sum_ok = false;
    if (any_fl && share_sum < 1.0 - a.b0 - eps2 - 1e-12) r.bandwidth_band_used = false;
    return r;
}

// Block coordinate descent over {modes, cuts, bandwidth} and {batches}:
// alternate the Gibbs mode search and the dual batch solver until the
// objective decrease drops under eps1, then round the batches and re-solve
// the mode block at integer batches.
//
// The Gibbs chain is warm-started at the incumbent mode vector, and a block
// update is only accepted when it does not increase the objective, so the
// recorded trace is exactly nonincreasing.
//
// The integer re-solve occasionally escapes the alternation's local basin
// (its value drops below the relaxed bound u_lb, which then is no bound at
// all). When that happens the descent resumes from the escaped state, so
// the reported u_lb always brackets the returned solution.
inline RoundSolution bcd_solve(const RoundScenario& scenario, const ChannelDraw& draw,
                               const ModelProfile& profile, const Hyperweights& weights,
                               const Tolerances& tol, RngStream& rng)
{
    if (tol.bcd_max_alternations < 1)
        throw std::invalid_argument("bcd_solve: need at least one alternation");
    const int n = scenario.device_count();
    const int stall_limit = 10 * n;
    const int gibbs_cap = 200 * n;

    RoundSolution sol;

    // Step 1: random modes, capped batches, one allocation pass.
    std::vector<Mode> modes(static_cast<std::size_t>(n));
    for (auto& m : modes) m = (rng.uniform_int(2) == 1) ? Mode::SL : Mode::FL;
    std::vector<double> batches(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k)
        batches[static_cast<std::size_t>(k)] =
            std::min(32.0, scenario.dataset_sizes[static_cast<std::size_t>(k)]);

    ModeSearchContext ctx;
    ctx.profile = &profile;
    ctx.scenario = &scenario;
    ctx.draw = &draw;
    ctx.batches = batches;
    ctx.rho1 = weights.rho1;
    ctx.rho2 = weights.rho2;
    ctx.eps2 = tol.eps2;
    ctx.eps3 = tol.eps3;

    ModeEvaluation ev = evaluate_mode(modes, ctx);
    AllocationResult alloc = ev.alloc;
    double u_prev = ev.u1;
    sol.objective_trace.push_back(u_prev);

    BatchSolution relaxed;
    relaxed.xi = batches;
    DelayCoefficients coeffs;
    int alternations = 0;
    constexpr int max_restarts = 8;
    for (int restart = 0; restart < max_restarts; ++restart) {
        bool converged = false;
        while (alternations < tol.bcd_max_alternations) {
            sol.bcd_iterations = ++alternations;

            // mode/split/bandwidth block at fixed batches
            ctx.batches = batches;
            const ModeSelectionResult ms =
                gibbs_mode_selection(modes, ctx, tol.delta, stall_limit, gibbs_cap, rng);
            double u_mid = u_prev;
            if (ms.u1 <= u_prev) {
                modes = ms.modes;
                alloc = ms.alloc;
                u_mid = ms.u1;
            }
            sol.objective_trace.push_back(u_mid);

            // batch-size block at fixed modes, cuts and bandwidth
            ModeAssignment a;
            a.modes = modes;
            a.cuts = alloc.cuts;
            a.bandwidth = alloc.bandwidth;
            a.b0 = alloc.b0;
            a.batches = batches;
            coeffs = delay_coefficients(a, draw, profile, scenario);
            const double ks = static_cast<double>(a.sl_count());
            const double gamma2 = -weights.rho1 * ks * (ks - 1.0);
            const DualAscentResult da = dual_ascent(coeffs, modes, scenario.dataset_sizes,
                                                    weights.rho2, gamma2, tol.eps4,
                                                    tol.dual_max_iters);
            if (!da.solution.converged) sol.subsolvers_converged = false;
            double u_new = u_mid;
            if (da.solution.u2 <= u_mid) {
                batches = da.solution.xi;
                relaxed = da.solution;
                u_new = da.solution.u2;
            } else {
                relaxed.xi = batches;
                relaxed.tau = affine_round_delay(batches, coeffs, modes);
                relaxed.u2 = u_mid;
            }
            sol.objective_trace.push_back(u_new);

            if (u_prev - u_new <= tol.eps1) {
                u_prev = u_new;
                converged = true;
                break;
            }
            u_prev = u_new;
        }
        sol.bcd_converged = converged;
        sol.u_lb = u_prev;

        // Rounding: floor gives the upper bound, then spare SL-chain time
        // is filled back in.
        std::vector<double> floored(batches.size());
        for (std::size_t k = 0; k < batches.size(); ++k)
            floored[k] = std::max(1.0, std::floor(batches[k]));
        const double t_floor = affine_round_delay(floored, coeffs, modes);
        const ObjectiveBreakdown ub = objective_u(
            t_floor, static_cast<int>(devices_in_mode(modes, Mode::SL).size()), floored,
            weights.rho1, weights.rho2);
        sol.u_ub = ub.u;

        std::vector<double> rounded =
            round_batch_sizes(batches, relaxed.tau, coeffs, modes, scenario.dataset_sizes);
        double sl_after = 0.0;
        for (const int k : devices_in_mode(modes, Mode::SL))
            sl_after += rounded[static_cast<std::size_t>(k)] *
                            coeffs.gamma[static_cast<std::size_t>(k)] +
                        coeffs.lambda[static_cast<std::size_t>(k)];
        relaxed.sl_overshoot = std::max(0.0, sl_after - relaxed.tau);

        // Mode-block re-solve at integer batches. The re-filled batches can
        // cost a fraction of one sample's delay more than the floored point
        // when the FL floors opened slack under tau, so the returned
        // solution is the best of three feasible integer candidates; the
        // frozen floored point carries exactly u_ub, which keeps the bound
        // sandwich intact.
        ctx.batches = rounded;
        const ModeSelectionResult resolved =
            gibbs_mode_selection(modes, ctx, tol.delta, stall_limit, gibbs_cap, rng);
        ctx.batches = floored;
        const ModeSelectionResult resolved_floor =
            gibbs_mode_selection(modes, ctx, tol.delta, stall_limit, gibbs_cap, rng);

        sol.u = ub.u;
        sol.assignment.modes = modes;
        sol.assignment.cuts = alloc.cuts;
        sol.assignment.bandwidth = alloc.bandwidth;
        sol.assignment.b0 = alloc.b0;
        sol.assignment.batches = floored;
        sol.alloc = alloc;
        if (resolved_floor.u1 < sol.u) {
            sol.u = resolved_floor.u1;
            sol.assignment.modes = resolved_floor.modes;
            sol.assignment.cuts = resolved_floor.alloc.cuts;
            sol.assignment.bandwidth = resolved_floor.alloc.bandwidth;
            sol.assignment.b0 = resolved_floor.alloc.b0;
            sol.alloc = resolved_floor.alloc;
        }
        if (resolved.u1 < sol.u) {
            sol.u = resolved.u1;
            sol.assignment.modes = resolved.modes;
            sol.assignment.cuts = resolved.alloc.cuts;
            sol.assignment.bandwidth = resolved.alloc.bandwidth;
            sol.assignment.b0 = resolved.alloc.b0;
            sol.assignment.batches = rounded;
            sol.alloc = resolved.alloc;
        }
        const double slack = 1e-12 * std::max(1.0, std::abs(sol.u));
        if (sol.u >= sol.u_lb - slack || alternations >= tol.bcd_max_alternations) break;

        // escaped the basin: adopt the improved state and keep descending
        modes = sol.assignment.modes;
        alloc = sol.alloc;
        batches = sol.assignment.batches;
        u_prev = sol.u;
        sol.objective_trace.push_back(u_prev);
    }
    sol.relaxed_batch = relaxed;
    if (!sol.alloc.converged) sol.subsolvers_converged = false;
    return sol;
}

enum class Scheme { Proposed, SlOnly, FlOnly, VanillaHsfl, HsflBso, HsflLms };

inline const char* scheme_name(Scheme s)
{
    switch (s) {
        case Scheme::Proposed: return "proposed";
        case Scheme::SlOnly: return "sl";
        case Scheme::FlOnly: return "fl";
        case Scheme::VanillaHsfl: return "vanilla-hsfl";
        case Scheme::HsflBso: return "hsfl-bso";
        case Scheme::HsflLms: return "hsfl-lms";
    }
    return "?";
}

inline Scheme scheme_from_string(const std::string& s)
{
    if (s == "proposed") return Scheme::Proposed;
    if (s == "sl" || s == "SL") return Scheme::SlOnly;
    if (s == "fl" || s == "FL") return Scheme::FlOnly;
    if (s == "vanilla" || s == "vanilla-hsfl") return Scheme::VanillaHsfl;
    if (s == "bso" || s == "hsfl-bso" || s == "hsfl+bso") return Scheme::HsflBso;
    if (s == "lms" || s == "hsfl-lms" || s == "hsfl+lms") return Scheme::HsflLms;
    throw std::invalid_argument("unknown scheme: " + s);
}

inline std::vector<Scheme> all_schemes()
{
    return {Scheme::Proposed, Scheme::SlOnly,  Scheme::FlOnly,
            Scheme::VanillaHsfl, Scheme::HsflBso, Scheme::HsflLms};
}

// Substream tags; shared across schemes so compared runs see the same
// randomness (common random numbers).
namespace stream_tag {
constexpr std::uint64_t channel = 1;
constexpr std::uint64_t baseline_modes = 2;
constexpr std::uint64_t baseline_cuts = 3;
constexpr std::uint64_t sl_order = 4;
constexpr std::uint64_t solver = 5;
}  // namespace stream_tag

namespace detail {

inline std::vector<Mode> random_modes(int n, RngStream& rng)
{
    std::vector<Mode> m(static_cast<std::size_t>(n));
    for (auto& x : m) x = (rng.uniform_int(2) == 1) ? Mode::SL : Mode::FL;
    return m;
}

inline std::vector<int> random_cuts(const std::vector<Mode>& modes, int layer_count,
                                    RngStream& rng)
{
    std::vector<int> cuts(modes.size(), 0);
    for (std::size_t k = 0; k < modes.size(); ++k)
        if (modes[k] == Mode::SL) cuts[k] = 1 + rng.uniform_int(layer_count);
    return cuts;
}

inline std::vector<double> full_batches(const RoundScenario& s)
{
    return s.dataset_sizes;
}

// Vanilla HSFL bandwidth: every device gets B/K; SL shares pool into b0.
inline void vanilla_bandwidth(ModeAssignment& a)
{
    const int n = a.device_count();
    const double each = 1.0 / static_cast<double>(n);
    a.bandwidth.assign(static_cast<std::size_t>(n), 0.0);
    int sl = 0;
    for (std::size_t k = 0; k < a.modes.size(); ++k) {
        if (a.modes[k] == Mode::FL) a.bandwidth[k] = each;
        else ++sl;
    }
    a.b0 = each * static_cast<double>(sl);
}

}  // namespace detail

// One round's assignment under a scheme. Baseline randomness comes from
// per-purpose substreams of (seed, round) so every scheme sees the same
// draws where it uses them.
inline RoundSolution scheme_round_solution(Scheme scheme, const RoundScenario& scenario,
                                           const ChannelDraw& draw, const ModelProfile& profile,
                                           const Hyperweights& weights, const Tolerances& tol,
                                           std::uint64_t seed, int round)
{
    const int n = scenario.device_count();
    const auto nan = std::numeric_limits<double>::quiet_NaN();

    if (scheme == Scheme::Proposed) {
        RngStream solver_rng(derive_seed(seed, static_cast<std::uint64_t>(round),
                                         stream_tag::solver));
        return bcd_solve(scenario, draw, profile, weights, tol, solver_rng);
    }

    RngStream mode_rng(derive_seed(seed, static_cast<std::uint64_t>(round),
                                   stream_tag::baseline_modes));
    RngStream cut_rng(derive_seed(seed, static_cast<std::uint64_t>(round),
                                  stream_tag::baseline_cuts));

    RoundSolution sol;
    sol.u_lb = nan;
    sol.u_ub = nan;
    ModeAssignment a;
    a.batches = detail::full_batches(scenario);

    switch (scheme) {
        case Scheme::SlOnly: {
            a.modes.assign(static_cast<std::size_t>(n), Mode::SL);
            a.cuts = detail::random_cuts(a.modes, profile.layer_count(), cut_rng);
            a.bandwidth.assign(static_cast<std::size_t>(n), 0.0);
            a.b0 = 1.0;
            break;
        }
        case Scheme::FlOnly: {
            a.modes.assign(static_cast<std::size_t>(n), Mode::FL);
            a.cuts.assign(static_cast<std::size_t>(n), 0);
            a.bandwidth.assign(static_cast<std::size_t>(n), 1.0 / static_cast<double>(n));
            a.b0 = 0.0;
            break;
        }
        case Scheme::VanillaHsfl:
        case Scheme::HsflBso: {
            a.modes = detail::random_modes(n, mode_rng);
            a.cuts = detail::random_cuts(a.modes, profile.layer_count(), cut_rng);
            detail::vanilla_bandwidth(a);
            if (scheme == Scheme::HsflBso) {
                // batch sizes from the dual solver + rounding, everything
                // else as vanilla
                const bool has_fl = !devices_in_mode(a.modes, Mode::FL).empty();
                const bool has_sl = !devices_in_mode(a.modes, Mode::SL).empty();
                if (has_fl || has_sl) {
                    const DelayCoefficients coeffs =
                        delay_coefficients(a, draw, profile, scenario);
                    const double ks = static_cast<double>(a.sl_count());
                    const DualAscentResult da =
                        dual_ascent(coeffs, a.modes, scenario.dataset_sizes, weights.rho2,
                                    -weights.rho1 * ks * (ks - 1.0), tol.eps4,
                                    tol.dual_max_iters);
                    a.batches = round_batch_sizes(da.solution.xi, da.solution.tau, coeffs,
                                                  a.modes, scenario.dataset_sizes);
                    sol.relaxed_batch = da.solution;
                }
            }
            break;
        }
        case Scheme::HsflLms: {
            // Gibbs mode selection at full batches; no batch optimization.
            ModeSearchContext ctx;
            ctx.profile = &profile;
            ctx.scenario = &scenario;
            ctx.draw = &draw;
            ctx.batches = a.batches;
            ctx.rho1 = weights.rho1;
            ctx.rho2 = weights.rho2;
            ctx.eps2 = tol.eps2;
            ctx.eps3 = tol.eps3;
            RngStream solver_rng(derive_seed(seed, static_cast<std::uint64_t>(round),
                                             stream_tag::solver));
            const auto initial = detail::random_modes(n, mode_rng);
            const ModeSelectionResult ms =
                gibbs_mode_selection(initial, ctx, tol.delta, 10 * n, 200 * n, solver_rng);
            a.modes = ms.modes;
            a.cuts = ms.alloc.cuts;
            a.bandwidth = ms.alloc.bandwidth;
            a.b0 = ms.alloc.b0;
            sol.alloc = ms.alloc;
            break;
        }
        default:
            break;
    }

    sol.assignment = std::move(a);
    return sol;
}

struct ScheduleRow {
    int round = 0;
    std::string scheme;
    double t_fl = 0.0;
    double t_sl = 0.0;
    double t_round = 0.0;
    int sl_count = 0;
    double total_batch = 0.0;
    double u = 0.0;
    double u_lb = 0.0;
    double u_ub = 0.0;
    double cumulative_delay = 0.0;
    double loss = std::numeric_limits<double>::quiet_NaN();
};

struct ScheduleResult {
    std::vector<ScheduleRow> rows;
    int rounds_to_target = -1;
    double cumulative_delay_at_target = std::numeric_limits<double>::infinity();
    ChannelDraw last_draw;
};

struct SimulationConfig {
    int rounds = 30;
    std::uint64_t seed = 1;
    double target_loss = std::numeric_limits<double>::quiet_NaN();  // NaN: no target
    bool stop_at_target = false;
};

// Multi-round simulation of one scheme. Channels are redrawn every round
// from the (seed, round) substream; when a training bundle is supplied the
// toy trainer runs each round and the loss column is filled.
inline ScheduleResult run_schedule(const RoundScenario& scenario, const ModelProfile& profile,
                                   const Hyperweights& weights, const Tolerances& tol,
                                   Scheme scheme, const SimulationConfig& sim,
                                   const TrainingBundle* trainer = nullptr)
{
    ScheduleResult out;
    ToyModel global;
    if (trainer) global = trainer->initial;

    double cumulative = 0.0;
    for (int t = 1; t <= sim.rounds; ++t) {
        RngStream channel_rng(derive_seed(sim.seed, static_cast<std::uint64_t>(t),
                                          stream_tag::channel));
        const ChannelDraw draw = draw_round_channels(scenario, channel_rng);
        RoundSolution sol =
            scheme_round_solution(scheme, scenario, draw, profile, weights, tol, sim.seed, t);

        const RoundDelays rd = round_delay(sol.assignment, draw, profile, scenario);
        cumulative += rd.t_round;

        ScheduleRow row;
        row.round = t;
        row.scheme = scheme_name(scheme);
        row.t_fl = rd.t_fl;
        row.t_sl = rd.t_sl;
        row.t_round = rd.t_round;
        row.sl_count = sol.assignment.sl_count();
        for (const double xi : sol.assignment.batches) row.total_batch += xi;
        row.u = objective_u(rd.t_round, row.sl_count, sol.assignment.batches, weights.rho1,
                            weights.rho2).u;
        row.u_lb = sol.u_lb;
        row.u_ub = sol.u_ub;
        row.cumulative_delay = cumulative;

        if (trainer) {
            RngStream order_rng(derive_seed(sim.seed, static_cast<std::uint64_t>(t),
                                            stream_tag::sl_order));
            const auto sl_ids = devices_in_mode(sol.assignment.modes, Mode::SL);
            const auto perm = order_rng.permutation(static_cast<int>(sl_ids.size()));
            RoundPlan plan;
            plan.modes = sol.assignment.modes;
            plan.batch_sizes.resize(sol.assignment.batches.size());
            for (std::size_t k = 0; k < sol.assignment.batches.size(); ++k)
                plan.batch_sizes[k] = std::max(
                    1, std::min(static_cast<int>(std::llround(sol.assignment.batches[k])),
                                static_cast<int>(trainer->devices[k].count())));
            for (const int p : perm)
                plan.sl_order.push_back(sl_ids[static_cast<std::size_t>(p)]);
            hsfl_training_round(global, trainer->devices, plan, trainer->eta, sim.seed, t);
            row.loss = dataset_loss(global, trainer->holdout);
            if (out.rounds_to_target < 0 && std::isfinite(sim.target_loss) &&
                row.loss <= sim.target_loss) {
                out.rounds_to_target = t;
                out.cumulative_delay_at_target = cumulative;
            }
        }

        out.rows.push_back(std::move(row));
        out.last_draw = draw;
        if (sim.stop_at_target && out.rounds_to_target > 0) break;
    }
    return out;
}

struct SweepRow {
    double rho1 = 0.0;
    int rho2_index = 0;
    double rho2 = 0.0;
    int rounds_to_target = -1;
    double cumulative_delay = 0.0;
    double mean_sl_count = 0.0;
    double mean_total_batch = 0.0;
};

// (rho1, rho2-index) grid of proposed-scheme runs.
inline std::vector<SweepRow> sweep_weights(const RoundScenario& scenario,
                                           const ModelProfile& profile, const Tolerances& tol,
                                           const std::vector<double>& rho1_set,
                                           const std::vector<int>& rho2_index_set,
                                           const SimulationConfig& sim,
                                           const TrainingBundle* trainer = nullptr)
{
    if (rho1_set.empty() || rho2_index_set.empty())
        throw std::invalid_argument("sweep_weights: empty grid");
    std::vector<SweepRow> rows;
    for (const double rho1 : rho1_set) {
        for (const int idx : rho2_index_set) {
            Hyperweights w;
            w.rho1 = rho1;
            w.rho2 = rho2_from_index(idx);
            const ScheduleResult r =
                run_schedule(scenario, profile, w, tol, Scheme::Proposed, sim, trainer);
            SweepRow row;
            row.rho1 = rho1;
            row.rho2_index = idx;
            row.rho2 = w.rho2;
            row.rounds_to_target = r.rounds_to_target;
            row.cumulative_delay = r.rounds_to_target > 0
                                       ? r.cumulative_delay_at_target
                                       : r.rows.back().cumulative_delay;
            for (const auto& rr : r.rows) {
                row.mean_sl_count += rr.sl_count;
                row.mean_total_batch += rr.total_batch;
            }
            row.mean_sl_count /= static_cast<double>(r.rows.size());
            row.mean_total_batch /= static_cast<double>(r.rows.size());
            rows.push_back(row);
        }
    }
    return rows;
}

}  // namespace hsfl
