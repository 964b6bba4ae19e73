#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "hsfl/assignment.hpp"
#include "hsfl/channel.hpp"
#include "hsfl/delay.hpp"
#include "hsfl/model_profile.hpp"
#include "hsfl/random.hpp"
#include "hsfl/resource_alloc.hpp"
#include "hsfl/scenario.hpp"

namespace hsfl {

// Everything held fixed while searching over mode vectors: the channel
// draw, the batch sizes and the objective weights.
struct ModeSearchContext {
    const ModelProfile* profile = nullptr;
    const RoundScenario* scenario = nullptr;
    const ChannelDraw* draw = nullptr;
    std::vector<double> batches;
    double rho1 = 0.0;
    double rho2 = 0.0;
    double eps2 = 3e-3;
    double eps3 = 1e-3;

    double gamma1() const
    {
        double g = 0.0;
        for (const double xi : batches) g += rho2 / xi;
        return g;
    }
};

struct ModeEvaluation {
    double u1 = 0.0;
    double t_round = 0.0;
    AllocationResult alloc;
};

// Objective of the mode subproblem at a fixed batch vector:
// u1 = T - rho1*K_S*(K_S - 1) + Gamma1.
inline ModeEvaluation evaluate_mode(const std::vector<Mode>& modes, const ModeSearchContext& ctx)
{
    ModeEvaluation ev;
    ev.alloc = sl_bandwidth_split(modes, ctx.batches, *ctx.draw, *ctx.profile, *ctx.scenario,
                                  ctx.eps2, ctx.eps3);
    ModeAssignment a;
    a.modes = modes;
    a.cuts = ev.alloc.cuts;
    a.bandwidth = ev.alloc.bandwidth;
    a.b0 = ev.alloc.b0;
    a.batches = ctx.batches;
    const RoundDelays rd = round_delay(a, *ctx.draw, *ctx.profile, *ctx.scenario);
    ev.t_round = rd.t_round;
    const double ks = static_cast<double>(a.sl_count());
    ev.u1 = rd.t_round - ctx.rho1 * ks * (ks - 1.0) + ctx.gamma1();
    return ev;
}

// Logistic acceptance rule. Candidate values below the current one are
// favored; delta sets how sharp the preference is. exp overflow saturates
// to 0 or 1 through IEEE semantics.
inline double gibbs_accept_probability(double u_current, double u_candidate, double delta)
{
    if (!(delta > 0.0))
        throw std::invalid_argument("gibbs_accept_probability: delta must be positive");
    return 1.0 / (1.0 + std::exp((u_candidate - u_current) / delta));
}

struct ModeSelectionResult {
    std::vector<Mode> modes;
    double u1 = std::numeric_limits<double>::infinity();
    AllocationResult alloc;
    int proposals = 0;
    int evaluations = 0;  // distinct mode vectors evaluated
    bool hit_iteration_cap = false;
};

struct GibbsTraceRow {
    int iteration = 0;
    int flipped_device = 0;
    double u_current = 0.0;
    double u_candidate = 0.0;
    bool accepted = false;
};

namespace detail {

inline std::uint64_t mode_mask(const std::vector<Mode>& modes)
{
    std::uint64_t m = 0;
    for (std::size_t k = 0; k < modes.size(); ++k)
        if (modes[k] == Mode::SL) m |= (std::uint64_t{1} << k);
    return m;
}

}  // namespace detail

// Gibbs-sampling mode search. Each proposal flips one uniformly random
// coordinate, swapping it with the complement vector; acceptance follows
// gibbs_accept_probability. The best vector ever evaluated is returned, not
// the final chain state. Stops after stall_limit proposals without a new
// best, or at max_iters.
//
// Evaluations are memoized by mode bitmask for K <= 64; the chain revisits
// states heavily once it settles.
inline ModeSelectionResult gibbs_mode_selection(const std::vector<Mode>& initial,
                                                const ModeSearchContext& ctx, double delta,
                                                int stall_limit, int max_iters, RngStream& rng,
                                                std::vector<GibbsTraceRow>* trace = nullptr)
{
    if (!(delta > 0.0)) throw std::invalid_argument("gibbs_mode_selection: delta must be positive");
    if (stall_limit < 1 || max_iters < 1)
        throw std::invalid_argument("gibbs_mode_selection: limits must be >= 1");
    const int n = static_cast<int>(initial.size());
    const bool memoize = n <= 64;
    std::unordered_map<std::uint64_t, double> cache;
    int evaluations = 0;

    const auto value_of = [&](const std::vector<Mode>& x) {
        if (memoize) {
            const std::uint64_t key = detail::mode_mask(x);
            const auto it = cache.find(key);
            if (it != cache.end()) return it->second;
            const double u = evaluate_mode(x, ctx).u1;
            ++evaluations;
            cache.emplace(key, u);
            return u;
        }
        ++evaluations;
        return evaluate_mode(x, ctx).u1;
    };

    std::vector<Mode> current = initial;
    double u_current = value_of(current);
    std::vector<Mode> best = current;
    double u_best = u_current;

    int stall = 0;
    int proposals = 0;
    while (proposals < max_iters && stall < stall_limit) {
        ++proposals;
        std::vector<Mode> candidate = current;
        const std::size_t flip = static_cast<std::size_t>(rng.uniform_int(n));
        candidate[flip] = (candidate[flip] == Mode::FL) ? Mode::SL : Mode::FL;
        const double u_candidate = value_of(candidate);

        if (u_candidate < u_best) {
            u_best = u_candidate;
            best = candidate;
            stall = 0;
        } else {
            ++stall;
        }
        const double p = gibbs_accept_probability(u_current, u_candidate, delta);
        const bool accepted = rng.uniform01() < p;
        if (trace)
            trace->push_back({proposals, static_cast<int>(flip), u_current, u_candidate,
                              accepted});
        if (accepted) {
            current = std::move(candidate);
            u_current = u_candidate;
        }
    }

    ModeSelectionResult out;
    out.modes = best;
    const ModeEvaluation ev = evaluate_mode(best, ctx);
    out.u1 = ev.u1;
    out.alloc = ev.alloc;
    out.proposals = proposals;
    out.evaluations = evaluations;
    out.hit_iteration_cap = proposals >= max_iters;
    return out;
}

// Test oracle: evaluates all 2^K mode vectors. Ties break toward the
// lexicographically smallest vector.
inline ModeSelectionResult exhaustive_mode_search(int device_count, const ModeSearchContext& ctx)
{
    if (device_count < 1 || device_count > 16)
        throw std::invalid_argument("exhaustive_mode_search: device count must be in [1, 16]");

    ModeSelectionResult out;
    std::vector<Mode> x(static_cast<std::size_t>(device_count), Mode::FL);
    std::vector<Mode> best_x;
    double best_u = std::numeric_limits<double>::infinity();
    const std::uint64_t count = std::uint64_t{1} << device_count;
    for (std::uint64_t mask = 0; mask < count; ++mask) {
        for (int k = 0; k < device_count; ++k)
            x[static_cast<std::size_t>(k)] = ((mask >> k) & 1) ? Mode::SL : Mode::FL;
        const double u = evaluate_mode(x, ctx).u1;
        ++out.evaluations;
        const bool better = u < best_u ||
            (u == best_u && !best_x.empty() &&
             std::lexicographical_compare(x.begin(), x.end(), best_x.begin(), best_x.end(),
                                          [](Mode a, Mode b) {
                                              return static_cast<int>(a) < static_cast<int>(b);
                                          }));
        if (best_x.empty() || better) {
            best_u = u;
            best_x = x;
        }
    }
    out.modes = best_x;
    const ModeEvaluation ev = evaluate_mode(best_x, ctx);
    out.u1 = ev.u1;
    out.alloc = ev.alloc;
    return out;
}

}  // namespace hsfl
