#include <gtest/gtest.h>

#include <cmath>

#include "hsfl/orchestrator.hpp"
#include "test_support.hpp"

using namespace hsfl;

TEST(Objective, PenaltyAndLimits)
{
    std::vector<double> batches = {10.0, 20.0};
    EXPECT_DOUBLE_EQ(objective_u(5.0, 0, batches, 3.0, 2.0).gamma2, 0.0);
    EXPECT_DOUBLE_EQ(objective_u(5.0, 1, batches, 3.0, 2.0).gamma2, 0.0);
    EXPECT_DOUBLE_EQ(objective_u(5.0, 3, batches, 3.0, 2.0).gamma2, -3.0 * 3 * 2);

    std::vector<double> huge = {1e12, 1e12};
    EXPECT_NEAR(objective_u(5.0, 0, huge, 3.0, 2.0).gamma1, 0.0, 1e-11);
}

TEST(Objective, DecompositionIdentity)
{
    RngStream rng(derive_seed(61, 1));
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> batches(4);
        for (auto& x : batches) x = 1.0 + 60.0 * rng.uniform01();
        const double t = 10.0 * rng.uniform01();
        const int ks = rng.uniform_int(5);
        const double rho1 = 0.01 + rng.uniform01();
        const double rho2 = 0.1 + 5.0 * rng.uniform01();
        const auto o = objective_u(t, ks, batches, rho1, rho2);
        EXPECT_NEAR(o.u, o.u1 + o.u2 - o.t_round - o.gamma1 - o.gamma2,
                    1e-12 * std::max(1.0, std::abs(o.u)));
    }
}

TEST(Rho2Index, PaperSet)
{
    const double expect[] = {50, 200, 500, 2000, 5000, 20000, 50000};
    for (int i = 3; i <= 9; ++i) EXPECT_DOUBLE_EQ(rho2_from_index(i), expect[i - 3]);
    EXPECT_THROW(rho2_from_index(2), std::invalid_argument);
    EXPECT_THROW(rho2_from_index(10), std::invalid_argument);
}

TEST(Bcd, MonotoneTraceSandwichAndAudit)
{
    const auto p = lenet5_profile();
    for (std::uint64_t seed : {201, 202, 203}) {
        const auto sc = testutil::make_random_scenario(6, seed);
        const auto d = testutil::draw_for(sc, seed);
        Hyperweights w{0.05, 0.3};
        Tolerances tol;
        RngStream rng(derive_seed(seed, 0x6B));
        const auto sol = bcd_solve(sc, d, p, w, tol, rng);

        EXPECT_TRUE(sol.bcd_converged);
        for (std::size_t i = 1; i < sol.objective_trace.size(); ++i)
            EXPECT_LE(sol.objective_trace[i], sol.objective_trace[i - 1]);
        EXPECT_LE(sol.u_lb, sol.u + 1e-9 * std::abs(sol.u));
        EXPECT_LE(sol.u, sol.u_ub + 1e-9 * std::abs(sol.u));
        EXPECT_TRUE(audit_constraints(sol, sc, p, tol.eps2).all_ok());
    }
}

TEST(Bcd, DeterministicGivenSeed)
{
    const auto p = lenet5_profile();
    const auto sc = testutil::make_random_scenario(5, 211);
    const auto d = testutil::draw_for(sc, 211);
    Hyperweights w{0.05, 0.3};
    Tolerances tol;
    RngStream r1(derive_seed(211, 0x6B));
    RngStream r2(derive_seed(211, 0x6B));
    const auto a = bcd_solve(sc, d, p, w, tol, r1);
    const auto b = bcd_solve(sc, d, p, w, tol, r2);
    EXPECT_EQ(a.assignment.modes, b.assignment.modes);
    EXPECT_EQ(a.assignment.batches, b.assignment.batches);
    EXPECT_DOUBLE_EQ(a.u, b.u);
    EXPECT_EQ(a.objective_trace, b.objective_trace);
}

TEST(Audit, FlagsViolations)
{
    const auto p = lenet5_profile();
    const auto sc = testutil::make_random_scenario(4, 223);
    const auto d = testutil::draw_for(sc, 223);
    Hyperweights w{0.05, 0.3};
    Tolerances tol;
    RngStream rng(derive_seed(223, 0x6B));
    auto sol = bcd_solve(sc, d, p, w, tol, rng);
    ASSERT_TRUE(audit_constraints(sol, sc, p, tol.eps2).all_ok());

    auto bad = sol;
    bad.assignment.batches[0] = sc.dataset_sizes[0] + 5.0;
    EXPECT_FALSE(audit_constraints(bad, sc, p, tol.eps2).batches_in_range);
    bad = sol;
    bad.assignment.batches[0] += 0.5;
    EXPECT_FALSE(audit_constraints(bad, sc, p, tol.eps2).batches_integral);
    bad = sol;
    bad.assignment.b0 = 1.2;
    EXPECT_FALSE(audit_constraints(bad, sc, p, tol.eps2).b0_in_range);
}

TEST(Schemes, StructureOfPureModes)
{
    const auto p = lenet5_profile();
    const auto sc = testutil::make_random_scenario(6, 227, 10, 20);
    Hyperweights w{3.0, 2000.0};
    Tolerances tol;
    SimulationConfig sim;
    sim.rounds = 3;
    sim.seed = 227;

    const auto fl = run_schedule(sc, p, w, tol, Scheme::FlOnly, sim);
    for (const auto& row : fl.rows) {
        EXPECT_DOUBLE_EQ(row.t_sl, 0.0);
        EXPECT_EQ(row.sl_count, 0);
    }
    const auto sl = run_schedule(sc, p, w, tol, Scheme::SlOnly, sim);
    for (const auto& row : sl.rows) {
        EXPECT_DOUBLE_EQ(row.t_fl, 0.0);
        EXPECT_EQ(row.sl_count, 6);
        EXPECT_DOUBLE_EQ(row.t_round, row.t_sl);
    }
    // full batch everywhere in the SL baseline
    double total_d = 0.0;
    for (const double x : sc.dataset_sizes) total_d += x;
    for (const auto& row : sl.rows) EXPECT_DOUBLE_EQ(row.total_batch, total_d);
}

TEST(Schemes, CommonRandomNumbersAcrossSchemes)
{
    const auto p = lenet5_profile();
    const auto sc = testutil::make_random_scenario(6, 229, 10, 20);
    Hyperweights w{3.0, 2000.0};
    Tolerances tol;

    // vanilla and bso share modes and cuts round by round
    for (int round = 1; round <= 3; ++round) {
        RngStream crng(derive_seed(229, round, stream_tag::channel));
        const auto draw = draw_round_channels(sc, crng);
        const auto v = scheme_round_solution(Scheme::VanillaHsfl, sc, draw, p, w, tol, 229, round);
        const auto b = scheme_round_solution(Scheme::HsflBso, sc, draw, p, w, tol, 229, round);
        EXPECT_EQ(v.assignment.modes, b.assignment.modes);
        EXPECT_EQ(v.assignment.cuts, b.assignment.cuts);
        EXPECT_DOUBLE_EQ(v.assignment.b0, b.assignment.b0);
    }

    // channel draws depend only on (seed, round), never on the scheme
    SimulationConfig sim;
    sim.rounds = 2;
    sim.seed = 229;
    const auto a = run_schedule(sc, p, w, tol, Scheme::FlOnly, sim);
    const auto c = run_schedule(sc, p, w, tol, Scheme::SlOnly, sim);
    EXPECT_EQ(a.last_draw.h_uplink, c.last_draw.h_uplink);
}

TEST(Schemes, BsoBatchesAreFeasibleIntegers)
{
    const auto p = lenet5_profile();
    const auto sc = testutil::make_random_scenario(6, 233, 10, 30);
    Hyperweights w{0.05, 0.3};  // interior batch regime
    Tolerances tol;
    RngStream crng(derive_seed(233, 1, stream_tag::channel));
    const auto draw = draw_round_channels(sc, crng);
    const auto sol = scheme_round_solution(Scheme::HsflBso, sc, draw, p, w, tol, 233, 1);
    for (int k = 0; k < 6; ++k) {
        EXPECT_GE(sol.assignment.batches[k], 1.0);
        EXPECT_LE(sol.assignment.batches[k], sc.dataset_sizes[k]);
        EXPECT_DOUBLE_EQ(sol.assignment.batches[k], std::round(sol.assignment.batches[k]));
    }
}

TEST(Schedule, DeterministicRows)
{
    const auto p = lenet5_profile();
    const auto sc = testutil::make_random_scenario(5, 239, 10, 20);
    Hyperweights w{3.0, 2000.0};
    Tolerances tol;
    SimulationConfig sim;
    sim.rounds = 3;
    sim.seed = 239;
    const auto a = run_schedule(sc, p, w, tol, Scheme::VanillaHsfl, sim);
    const auto b = run_schedule(sc, p, w, tol, Scheme::VanillaHsfl, sim);
    ASSERT_EQ(a.rows.size(), b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        EXPECT_DOUBLE_EQ(a.rows[i].t_round, b.rows[i].t_round);
        EXPECT_DOUBLE_EQ(a.rows[i].u, b.rows[i].u);
        EXPECT_DOUBLE_EQ(a.rows[i].cumulative_delay, b.rows[i].cumulative_delay);
    }
}

TEST(Sweep, GridShapeAndTrends)
{
    const auto p = lenet5_profile();
    const auto sc = testutil::make_random_scenario(6, 241, 20, 40);
    Tolerances tol;
    SimulationConfig sim;
    sim.rounds = 2;
    sim.seed = 241;

    EXPECT_THROW(sweep_weights(sc, p, tol, {}, {3}, sim), std::invalid_argument);

    // |rho1| x |rho2| rows
    const auto rows = sweep_weights(sc, p, tol, {0.001, 10.0}, {3, 6}, sim);
    ASSERT_EQ(rows.size(), 4u);

    // mean K_S nondecreasing in rho1 at fixed rho2 index
    for (int idx = 0; idx < 2; ++idx) {
        const auto& low = rows[idx];       // rho1 = 0.001
        const auto& high = rows[2 + idx];  // rho1 = 10
        EXPECT_LE(low.mean_sl_count, high.mean_sl_count + 1e-9);
    }
    // mean total batch nondecreasing in rho2 at fixed rho1
    EXPECT_LE(rows[0].mean_total_batch, rows[1].mean_total_batch + 1e-9);
    EXPECT_LE(rows[2].mean_total_batch, rows[3].mean_total_batch + 1e-9);
}

TEST(Sweep, FullIndexGridHas49Cells)
{
    const auto p = lenet5_profile();
    const auto sc = testutil::make_random_scenario(4, 251, 10, 20);
    Tolerances tol;
    SimulationConfig sim;
    sim.rounds = 1;
    sim.seed = 251;
    const std::vector<double> rho1 = {3, 4, 5, 6, 7, 8, 9};
    const std::vector<int> rho2_idx = {3, 4, 5, 6, 7, 8, 9};
    const auto rows = sweep_weights(sc, p, tol, rho1, rho2_idx, sim);
    EXPECT_EQ(rows.size(), 49u);
}
