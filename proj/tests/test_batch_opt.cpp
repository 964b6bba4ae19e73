#include <gtest/gtest.h>

#include <cmath>

#include "hsfl/batch_opt.hpp"
#include "hsfl/resource_alloc.hpp"
#include "test_support.hpp"

using namespace hsfl;

namespace {

struct Instance {
    std::vector<Mode> modes;
    DelayCoefficients coeffs;
    std::vector<double> dataset_sizes;
};

// Mixed FL/SL instance with coefficients computed by the delay module at a
// balanced allocation.
Instance make_instance(int devices, std::uint64_t seed, int d_lo = 20, int d_hi = 50)
{
    Instance in;
    const auto sc = testutil::make_random_scenario(devices, seed, d_lo, d_hi);
    const auto d = testutil::draw_for(sc, seed);
    const auto p = lenet5_profile();
    in.modes.resize(devices);
    RngStream rng(derive_seed(seed, 0xBB));
    for (auto& m : in.modes) m = (rng.uniform_int(2) == 1) ? Mode::SL : Mode::FL;
    if (devices_in_mode(in.modes, Mode::FL).empty()) in.modes[0] = Mode::FL;
    if (devices_in_mode(in.modes, Mode::SL).empty()) in.modes.back() = Mode::SL;
    std::vector<double> batches(devices, 8.0);
    const auto alloc = sl_bandwidth_split(in.modes, batches, d, p, sc, 3e-3, 1e-3);
    ModeAssignment a;
    a.modes = in.modes;
    a.cuts = alloc.cuts;
    a.bandwidth = alloc.bandwidth;
    a.b0 = alloc.b0;
    a.batches = batches;
    in.coeffs = delay_coefficients(a, d, p, sc);
    in.dataset_sizes = sc.dataset_sizes;
    return in;
}

double u2_at(const std::vector<double>& xi, const Instance& in, double rho2, double gamma2)
{
    double u = affine_round_delay(xi, in.coeffs, in.modes) + gamma2;
    for (std::size_t k = 0; k < xi.size(); ++k) u += rho2 / xi[k];
    return u;
}

}  // namespace

TEST(TauBounds, DegenerateAndOrdering)
{
    auto in = make_instance(4, 127);
    std::vector<double> ones(4, 1.0);
    const auto [lb, ub] = tau_bounds(in.coeffs, in.modes, in.dataset_sizes);
    EXPECT_LE(lb, ub);
    const auto [lb1, ub1] = tau_bounds(in.coeffs, in.modes, ones);
    EXPECT_DOUBLE_EQ(lb1, ub1);  // all D_k = 1 collapses the range
}

TEST(TauBounds, HandComputedThreeDevices)
{
    Instance in;
    in.modes = {Mode::FL, Mode::SL, Mode::SL};
    in.coeffs.gamma = {0.5, 0.2, 0.1};
    in.coeffs.lambda = {1.0, 0.3, 0.4};
    in.dataset_sizes = {10, 20, 30};
    const auto [lb, ub] = tau_bounds(in.coeffs, in.modes, in.dataset_sizes);
    // xi = 1: FL max = 1.5; SL sum = 0.5 + 0.5 = 1.0
    EXPECT_DOUBLE_EQ(lb, 1.5);
    // xi = D: FL = 6.0; SL sum = 4.3 + 3.4 = 7.7
    EXPECT_DOUBLE_EQ(ub, 7.7);
}

TEST(StationaryBatch, ScalingAndSentinel)
{
    EXPECT_DOUBLE_EQ(stationary_batch(2.0, 1.0, 2.0), 1.0);  // lambda*gamma = rho2
    EXPECT_DOUBLE_EQ(stationary_batch(4.0 * 2.0, 1.0, 2.0), 2.0);  // rho2 x4 -> xi x2
    EXPECT_TRUE(std::isinf(stationary_batch(1.0, 0.0, 2.0)));
    EXPECT_THROW(stationary_batch(0.0, 1.0, 1.0), std::invalid_argument);
    // faster device (smaller gamma) gets the larger batch
    EXPECT_GT(stationary_batch(1.0, 0.5, 0.01), stationary_batch(1.0, 0.5, 0.02));
}

TEST(ClampBatch, ThreeCases)
{
    EXPECT_DOUBLE_EQ(clamp_batch(0.3, 100.0), 1.0);
    EXPECT_DOUBLE_EQ(clamp_batch(1e9, 1700.0), 1700.0);
    EXPECT_DOUBLE_EQ(clamp_batch(17.2, 100.0), 17.2);
    EXPECT_THROW(clamp_batch(5.0, 0.5), std::invalid_argument);
}

TEST(TauStar, CaseAnalysis)
{
    auto in = make_instance(4, 131);
    const auto [lb, ub] = tau_bounds(in.coeffs, in.modes, in.dataset_sizes);
    std::vector<double> xi(4, 2.0);

    DualState zero;
    zero.lambda.assign(4, 0.0);
    zero.mu = 0.0;
    EXPECT_DOUBLE_EQ(tau_star(zero, in.coeffs, in.modes, in.dataset_sizes, xi, 1e-6), lb);

    DualState heavy = zero;
    heavy.mu = 5.0;
    EXPECT_DOUBLE_EQ(tau_star(heavy, in.coeffs, in.modes, in.dataset_sizes, xi, 1e-6), ub);

    DualState manifold = zero;
    const auto fl = devices_in_mode(in.modes, Mode::FL);
    for (const int k : fl) manifold.lambda[k] = 0.5 / fl.size();
    manifold.mu = 0.5;
    EXPECT_DOUBLE_EQ(tau_star(manifold, in.coeffs, in.modes, in.dataset_sizes, xi, 1e-6),
                     affine_round_delay(xi, in.coeffs, in.modes));
}

TEST(DualAscent, SingleFlDeviceMultiplierGoesToOne)
{
    // rho2 chosen so the stationary batch sits inside (1, D): the unique
    // dual optimum then has lambda = 1
    Instance in;
    in.modes = {Mode::FL};
    in.coeffs.gamma = {0.01};
    in.coeffs.lambda = {0.5};
    in.dataset_sizes = {40};
    const double rho2 = 0.5;
    const auto r = dual_ascent(in.coeffs, in.modes, in.dataset_sizes, rho2, 0.0, 1e-6);
    EXPECT_TRUE(r.solution.converged);
    EXPECT_NEAR(r.dual.lambda[0] + r.dual.mu, 1.0, 1e-6);
    EXPECT_NEAR(r.dual.lambda[0], 1.0, 1e-3);  // mu decays to ~0 with no SL devices
    EXPECT_NEAR(r.solution.xi[0],
                clamp_batch(std::sqrt(rho2 / (r.dual.lambda[0] * 0.01)), 40.0), 1e-9);
}

TEST(DualAscent, ConvergedKktResidualAndWeakDuality)
{
    const auto in = make_instance(4, 137);
    std::vector<DualTraceRow> trace;
    const auto r = dual_ascent(in.coeffs, in.modes, in.dataset_sizes, 0.2, 0.0, 1e-6, 500000,
                               &trace);
    EXPECT_TRUE(r.solution.converged);
    EXPECT_LE(r.solution.kkt_residual, 1e-6);
    for (const auto& row : trace)
        EXPECT_LE(row.dual_value, row.u2 + 1e-6 * std::max(1.0, std::abs(row.u2)));
}

TEST(DualAscent, MatchesGridSearch)
{
    for (std::uint64_t seed : {139, 149, 151}) {
        const auto in = make_instance(4, seed, 10, 30);
        const double rho2 = 0.15;
        const auto r = dual_ascent(in.coeffs, in.modes, in.dataset_sizes, rho2, 0.0, 1e-6);
        ASSERT_TRUE(r.solution.converged);

        // coarse grid then local refinement
        double best = std::numeric_limits<double>::infinity();
        std::vector<double> best_xi(4, 1.0), xi(4);
        const auto scan = [&](const std::vector<double>& centre, double radius, int steps) {
            std::vector<int> idx(4, 0);
            for (idx[0] = 0; idx[0] <= steps; ++idx[0])
                for (idx[1] = 0; idx[1] <= steps; ++idx[1])
                    for (idx[2] = 0; idx[2] <= steps; ++idx[2])
                        for (idx[3] = 0; idx[3] <= steps; ++idx[3]) {
                            for (int k = 0; k < 4; ++k) {
                                const double lo = std::max(1.0, centre[k] - radius);
                                const double hi = std::min(in.dataset_sizes[k], centre[k] + radius);
                                xi[k] = lo + (hi - lo) * idx[k] / steps;
                            }
                            const double u = u2_at(xi, in, rho2, 0.0);
                            if (u < best) {
                                best = u;
                                best_xi = xi;
                            }
                        }
        };
        std::vector<double> centre(4);
        for (int k = 0; k < 4; ++k) centre[k] = 0.5 * (1.0 + in.dataset_sizes[k]);
        scan(centre, *std::max_element(in.dataset_sizes.begin(), in.dataset_sizes.end()), 24);
        scan(best_xi, 2.0, 20);
        scan(best_xi, 0.2, 20);
        EXPECT_LE(r.solution.u2, best * 1.005);
    }
}

TEST(DualAscent, SampledOptimality)
{
    const auto in = make_instance(5, 157);
    const double rho2 = 0.25;
    const auto r = dual_ascent(in.coeffs, in.modes, in.dataset_sizes, rho2, 0.0, 1e-6);
    ASSERT_TRUE(r.solution.converged);
    RngStream rng(derive_seed(157, 0xFE));
    std::vector<double> xi(5);
    for (int trial = 0; trial < 1000; ++trial) {
        for (int k = 0; k < 5; ++k)
            xi[k] = 1.0 + (in.dataset_sizes[k] - 1.0) * rng.uniform01();
        EXPECT_LE(r.solution.u2, u2_at(xi, in, rho2, 0.0) + 1e-6);
    }
}

TEST(DualAscent, UpdateDirectionFollowsSubgradientSign)
{
    // lambda decreases when the device delay sits below tau*, and the
    // resulting stationary batch grows (the dual update steers each delay toward tau).
    const double rho2 = 1.0, gamma = 0.05;
    const double lambda1 = 0.6, alpha = 0.1;
    const double xi1 = clamp_batch(stationary_batch(rho2, lambda1, gamma), 100.0);
    const double tau = xi1 * gamma + 2.0;  // device delay + positive slack
    const double delta_f = xi1 * gamma + 0.0 - tau;  // negative
    ASSERT_LT(delta_f, 0.0);
    const double lambda2 = std::max(0.0, lambda1 + alpha * delta_f);
    EXPECT_LT(lambda2, lambda1);
    EXPECT_GT(stationary_batch(rho2, lambda2, gamma), xi1);
}

TEST(Rounding, FixedPointAndPureFloor)
{
    Instance in;
    in.modes = {Mode::SL, Mode::SL};
    in.coeffs.gamma = {0.1, 0.1};
    in.coeffs.lambda = {0.2, 0.2};
    in.dataset_sizes = {50, 50};
    // integral input whose SL delay already exceeds tau: unchanged
    const auto out = round_batch_sizes({4.0, 6.0}, 1.0, in.coeffs, in.modes, in.dataset_sizes);
    EXPECT_EQ(out, (std::vector<double>{4.0, 6.0}));

    // no SL devices: floor with lower clamp only
    Instance fl;
    fl.modes = {Mode::FL, Mode::FL};
    fl.coeffs.gamma = {0.1, 0.1};
    fl.coeffs.lambda = {0.0, 0.0};
    fl.dataset_sizes = {50, 50};
    const auto f = round_batch_sizes({0.4, 7.9}, 100.0, fl.coeffs, fl.modes, fl.dataset_sizes);
    EXPECT_EQ(f, (std::vector<double>{1.0, 7.0}));
}

TEST(Rounding, StepThroughOracle)
{
    Instance in;
    in.modes = {Mode::SL, Mode::SL, Mode::SL};
    in.coeffs.gamma = {0.10, 0.20, 0.30};
    in.coeffs.lambda = {0.00, 0.00, 0.00};
    in.dataset_sizes = {50, 50, 50};
    const double tau = 3.05;
    // floors: (4,4,4) -> SL delay 0.4+0.8+1.2 = 2.4 < tau
    // hand simulation: increment the smallest batch, ties to lowest id
    std::vector<double> xi = {4, 4, 4};
    double delay = 2.4;
    while (delay < tau) {
        int pick = 0;
        for (int k = 1; k < 3; ++k)
            if (xi[k] < xi[pick]) pick = k;
        xi[pick] += 1;
        delay += in.coeffs.gamma[pick];
    }
    const auto got =
        round_batch_sizes({4.9, 4.9, 4.9}, tau, in.coeffs, in.modes, in.dataset_sizes);
    EXPECT_EQ(got, xi);
    // overshoot bounded by one sample of the last incremented device
    double sl = 0.0;
    for (int k = 0; k < 3; ++k) sl += got[k] * in.coeffs.gamma[k];
    EXPECT_LE(sl - tau, 0.30 + 1e-12);
}

TEST(Rounding, SaturationGuard)
{
    Instance in;
    in.modes = {Mode::SL, Mode::SL};
    in.coeffs.gamma = {0.1, 0.1};
    in.coeffs.lambda = {0.0, 0.0};
    in.dataset_sizes = {3, 3};
    // tau far beyond what saturated batches can reach: loop must exit
    const auto out = round_batch_sizes({2.5, 2.5}, 100.0, in.coeffs, in.modes, in.dataset_sizes);
    EXPECT_EQ(out, (std::vector<double>{3.0, 3.0}));
}

TEST(Rounding, SandwichAgainstContinuousOptimum)
{
    const auto in = make_instance(4, 163, 10, 40);
    const double rho2 = 0.2;
    const auto r = dual_ascent(in.coeffs, in.modes, in.dataset_sizes, rho2, 0.0, 1e-6);
    ASSERT_TRUE(r.solution.converged);
    std::vector<double> floored(4);
    for (int k = 0; k < 4; ++k) floored[k] = std::max(1.0, std::floor(r.solution.xi[k]));
    EXPECT_GE(u2_at(floored, in, rho2, 0.0), r.solution.u2 - 1e-9);
}
