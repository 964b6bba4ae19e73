#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "hsfl/assignment.hpp"
#include "hsfl/delay.hpp"

namespace hsfl {

// Multipliers of the dualized batch-size problem: one lambda per FL device
// (stored by device id, zero elsewhere) and a single mu for the SL chain.
struct DualState {
    std::vector<double> lambda;
    double mu = 0.0;
    int iterations = 0;
    double alpha0 = 0.0;  // step-size scale, alpha_j = alpha0 / sqrt(j)
    double beta0 = 0.0;
};

struct BatchSolution {
    std::vector<double> xi;
    double tau = 0.0;
    double u2 = 0.0;
    bool converged = true;
    double kkt_residual = 0.0;
    double sl_overshoot = 0.0;  // set by rounding: SL delay past tau*
};

struct DualTraceRow {
    int j = 0;
    double lambda_sum = 0.0;
    double mu = 0.0;
    double residual = 0.0;
    double u2 = 0.0;
    double dual_value = 0.0;
};

// Round delay implied by the affine coefficients at batch vector xi.
inline double affine_round_delay(const std::vector<double>& xi, const DelayCoefficients& coeffs,
                                 const std::vector<Mode>& modes)
{
    double t_fl = 0.0, t_sl = 0.0;
    for (std::size_t k = 0; k < modes.size(); ++k) {
        const double t = xi[k] * coeffs.gamma[k] + coeffs.lambda[k];
        if (modes[k] == Mode::FL) t_fl = std::max(t_fl, t);
        else t_sl += t;
    }
    return std::max(t_fl, t_sl);
}

// tau bounds from the batch extremes xi = 1 and xi = D_k.
inline std::pair<double, double> tau_bounds(const DelayCoefficients& coeffs,
                                            const std::vector<Mode>& modes,
                                            const std::vector<double>& dataset_sizes)
{
    std::vector<double> ones(modes.size(), 1.0);
    return {affine_round_delay(ones, coeffs, modes),
            affine_round_delay(dataset_sizes, coeffs, modes)};
}

// Unconstrained stationary point sqrt(rho2 / (multiplier * gamma)); a zero
// multiplier yields +inf, which the clamp resolves to the dataset size.
inline double stationary_batch(double rho2, double multiplier, double gamma)
{
    if (!(rho2 > 0.0)) throw std::invalid_argument("stationary_batch: rho2 must be positive");
    const double denom = multiplier * gamma;
    if (!(denom > 0.0)) return std::numeric_limits<double>::infinity();
    return std::sqrt(rho2 / denom);
}

inline double clamp_batch(double xi0, double dataset_size)
{
    if (dataset_size < 1.0) throw std::invalid_argument("clamp_batch: dataset size below 1");
    return std::max(1.0, std::min(xi0, dataset_size));
}

namespace detail {

inline double mult_sum(const DualState& dual, const std::vector<int>& fl_ids)
{
    double s = dual.mu;
    for (const int k : fl_ids) s += dual.lambda[static_cast<std::size_t>(k)];
    return s;
}

inline std::vector<double> optimal_batches(const DualState& dual, const DelayCoefficients& coeffs,
                                           const std::vector<Mode>& modes,
                                           const std::vector<double>& dataset_sizes, double rho2)
{
    std::vector<double> xi(modes.size());
    for (std::size_t k = 0; k < modes.size(); ++k) {
        const double mult = (modes[k] == Mode::FL) ? dual.lambda[k] : dual.mu;
        xi[k] = clamp_batch(stationary_batch(rho2, mult, coeffs.gamma[k]), dataset_sizes[k]);
    }
    return xi;
}

}  // namespace detail

// Optimal tau given the multipliers: the unconstrained point when the
// multipliers sit on the KKT manifold (sum = 1 within eps4), otherwise the
// active bound selected by the sign of 1 - sum.
inline double tau_star(const DualState& dual, const DelayCoefficients& coeffs,
                       const std::vector<Mode>& modes, const std::vector<double>& dataset_sizes,
                       const std::vector<double>& xi_star, double eps4)
{
    if (!(eps4 > 0.0)) throw std::invalid_argument("tau_star: eps4 must be positive");
    double sum = dual.mu;
    for (std::size_t k = 0; k < modes.size(); ++k)
        if (modes[k] == Mode::FL) sum += dual.lambda[k];
    const auto [tau_lb, tau_ub] = tau_bounds(coeffs, modes, dataset_sizes);
    if (std::abs(1.0 - sum) <= eps4) return affine_round_delay(xi_star, coeffs, modes);
    return (sum > 1.0) ? tau_ub : tau_lb;
}

// Dual function value g(lambda, mu) = min_{xi, tau} L; used by the trace and
// the weak-duality checks.
inline double dual_objective(const DualState& dual, const DelayCoefficients& coeffs,
                             const std::vector<Mode>& modes,
                             const std::vector<double>& dataset_sizes, double rho2,
                             double gamma2, double eps4)
{
    const auto xi = detail::optimal_batches(dual, coeffs, modes, dataset_sizes, rho2);
    const double tau = tau_star(dual, coeffs, modes, dataset_sizes, xi, eps4);
    double sum = dual.mu;
    double l1 = 0.0, l2 = gamma2;
    for (std::size_t k = 0; k < modes.size(); ++k) {
        l1 += rho2 / xi[k];
        if (modes[k] == Mode::FL) {
            sum += dual.lambda[k];
            l1 += dual.lambda[k] * xi[k] * coeffs.gamma[k];
            l2 += dual.lambda[k] * coeffs.lambda[k];
        } else {
            l1 += dual.mu * xi[k] * coeffs.gamma[k];
            l2 += dual.mu * coeffs.lambda[k];
        }
    }
    l1 += tau * (1.0 - sum);
    return l1 + l2;
}

struct DualAscentResult {
    BatchSolution solution;
    DualState dual;
};

// Projected subgradient ascent on the dual of the batch-size problem.
// Multipliers start on the KKT manifold (sum = 1); the stopping test looks
// only at post-update iterates, so at least one dual step always happens.
//
// Steps decay as alpha0/sqrt(j); a plain 1/j schedule covers only
// logarithmic multiplier travel and measurably stalls short of the
// residual tolerance once the early iterations overshoot. The sqrt
// schedule still satisfies the vanishing-step / divergent-sum conditions.
//
// Termination requires the KKT residual |1 - sum(lambda) - mu| <= eps4
// together with a certified primal-dual gap — the scalar residual alone
// does not certify the primal (the sum can be right while the split across
// devices is still coarse). The two conditions rarely hold on the same
// iterate: residual crossings happen early while the gap certifies late,
// so the multipliers are snapshotted whenever the residual condition
// holds, and the run converges once the gap between the best primal and
// the best dual value closes. Returned state: best primal iterate plus the
// snapshotted compliant multipliers.
//
// The residual condition is unreachable when the relaxed optimum pins
// every batch at a bound (tau rests on a bound and the multiplier sum
// settles away from 1), so two secondary certificates cover the boundary
// geometry: an exact fixed point of the update map, and a vanishing gap
// while the residual is clearly off the manifold. Non-convergence inside
// max_iters returns the best iterate, flagged.
inline DualAscentResult dual_ascent(const DelayCoefficients& coeffs,
                                    const std::vector<Mode>& modes,
                                    const std::vector<double>& dataset_sizes, double rho2,
                                    double gamma2, double eps4, int max_iters = 500000,
                                    std::vector<DualTraceRow>* trace = nullptr)
{
    const std::size_t n = modes.size();
    if (n == 0) throw std::invalid_argument("dual_ascent: no devices");
    const auto fl = devices_in_mode(modes, Mode::FL);
    const auto sl = devices_in_mode(modes, Mode::SL);

    DualState dual;
    dual.lambda.assign(n, 0.0);
    for (const int k : fl)
        dual.lambda[static_cast<std::size_t>(k)] = 1.0 / (2.0 * static_cast<double>(fl.size()));
    dual.mu = 0.5;

    double max_gamma = 0.0;
    for (const double g : coeffs.gamma) max_gamma = std::max(max_gamma, g);
    if (!(max_gamma > 0.0)) throw std::invalid_argument("dual_ascent: nonpositive gamma");
    dual.alpha0 = dual.beta0 = 1.0 / (static_cast<double>(n) * max_gamma);

    const auto primal_u2 = [&](const std::vector<double>& xi) {
        double u = affine_round_delay(xi, coeffs, modes) + gamma2;
        for (std::size_t k = 0; k < n; ++k) u += rho2 / xi[k];
        return u;
    };

    auto xi = detail::optimal_batches(dual, coeffs, modes, dataset_sizes, rho2);
    double tau = tau_star(dual, coeffs, modes, dataset_sizes, xi, eps4);

    // best.tau tracks the actual delay at best.xi (not the bound tau_star
    // may have selected at that iterate): the pair is what rounding needs
    BatchSolution best;
    best.xi = xi;
    best.tau = affine_round_delay(xi, coeffs, modes);
    best.u2 = primal_u2(xi);
    best.converged = false;

    bool kkt_converged = false;
    bool boundary_certified = false;
    double residual = 0.0;
    double g_best = -std::numeric_limits<double>::infinity();
    DualState compliant;  // multipliers snapshotted while on the manifold
    bool have_compliant = false;
    for (int j = 1; j <= max_iters; ++j) {
        // subgradients at the current primal
        double sl_sum = 0.0;
        for (const int k : sl)
            sl_sum += xi[static_cast<std::size_t>(k)] * coeffs.gamma[static_cast<std::size_t>(k)] +
                      coeffs.lambda[static_cast<std::size_t>(k)];
        const double delta_s = sl_sum - tau;
        const double step = 1.0 / std::sqrt(static_cast<double>(j));
        const double alpha = dual.alpha0 * step;
        const double beta = dual.beta0 * step;
        bool moved = false;
        for (const int k : fl) {
            const std::size_t i = static_cast<std::size_t>(k);
            const double delta_f = xi[i] * coeffs.gamma[i] + coeffs.lambda[i] - tau;
            const double next = std::max(0.0, dual.lambda[i] + alpha * delta_f);
            moved = moved || next != dual.lambda[i];
            dual.lambda[i] = next;
        }
        const double mu_next = std::max(0.0, dual.mu + beta * delta_s);
        moved = moved || mu_next != dual.mu;
        dual.mu = mu_next;
        dual.iterations = j;

        xi = detail::optimal_batches(dual, coeffs, modes, dataset_sizes, rho2);
        double sum = dual.mu;
        for (const int k : fl) sum += dual.lambda[static_cast<std::size_t>(k)];
        residual = 1.0 - sum;
        tau = tau_star(dual, coeffs, modes, dataset_sizes, xi, eps4);

        const double u2 = primal_u2(xi);
        if (u2 < best.u2) {
            best.xi = xi;
            best.tau = affine_round_delay(xi, coeffs, modes);
            best.u2 = u2;
        }
        const double g = dual_objective(dual, coeffs, modes, dataset_sizes, rho2, gamma2, eps4);
        g_best = std::max(g_best, g);
        const double gap = best.u2 - g_best;
        const double gap_tol = 2e-3 * std::max(std::abs(best.u2), 1e-6);
        if (trace) trace->push_back({j, sum - dual.mu, dual.mu, residual, u2, g});
        if (std::abs(residual) <= eps4 &&
            (!have_compliant || std::abs(residual) < std::abs(1.0 - detail::mult_sum(compliant, fl)))) {
            compliant = dual;
            have_compliant = true;
        }
        if (have_compliant && gap <= gap_tol) {
            kkt_converged = true;
            break;
        }
        const bool gap_closed = gap <= 1e-9 * std::max(1.0, std::abs(best.u2));
        if (gap_closed && (!moved || (j >= 50 && std::abs(residual) > 1e-3))) {
            boundary_certified = true;
            break;
        }
    }

    DualAscentResult out;
    out.solution = best;
    out.solution.converged = kkt_converged || boundary_certified;
    if (kkt_converged && have_compliant) {
        out.dual = compliant;
        out.dual.iterations = dual.iterations;
        out.solution.kkt_residual = std::abs(1.0 - detail::mult_sum(compliant, fl));
    } else {
        out.dual = dual;
        out.solution.kkt_residual = std::abs(residual);
    }
    return out;
}

// Batch rounding: floor everything, then feed spare SL-chain time back one
// sample at a time to the SL device with the smallest batch (ties: lowest
// id), skipping saturated devices. The loop also exits when every SL device
// sits at its dataset size.
inline std::vector<double> round_batch_sizes(const std::vector<double>& xi_star,
                                             double tau_target,
                                             const DelayCoefficients& coeffs,
                                             const std::vector<Mode>& modes,
                                             const std::vector<double>& dataset_sizes)
{
    const std::size_t n = modes.size();
    std::vector<double> xi(n);
    for (std::size_t k = 0; k < n; ++k)
        xi[k] = std::max(1.0, std::floor(xi_star[k]));

    const auto sl = devices_in_mode(modes, Mode::SL);
    if (sl.empty()) return xi;

    double sl_delay = 0.0;
    for (const int k : sl)
        sl_delay += xi[static_cast<std::size_t>(k)] * coeffs.gamma[static_cast<std::size_t>(k)] +
                    coeffs.lambda[static_cast<std::size_t>(k)];
    while (sl_delay < tau_target) {
        int pick = -1;
        for (const int k : sl) {
            const std::size_t i = static_cast<std::size_t>(k);
            if (xi[i] >= dataset_sizes[i]) continue;
            if (pick < 0 || xi[i] < xi[static_cast<std::size_t>(pick)]) pick = k;
        }
        if (pick < 0) break;  // every SL device saturated
        xi[static_cast<std::size_t>(pick)] += 1.0;
        sl_delay += coeffs.gamma[static_cast<std::size_t>(pick)];
    }
    return xi;
}

}  // namespace hsfl
