// Command-line front end: scenario solving, multi-round simulation, weight
// sweeps, baseline comparisons and a self-test oracle suite.
//
// Exit codes: 0 success, 1 invariant failure (selftest), 2 usage/config.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hsfl/config.hpp"
#include "hsfl/io.hpp"
#include "hsfl/orchestrator.hpp"

namespace {

using namespace hsfl;

struct BuiltRun {
    RunConfig cfg;
    RoundScenario scenario;
    TrainingBundle bundle;
};

struct CliOverrides {
    std::int64_t seed = -1;
    std::string output_dir;
};

BuiltRun build_run(const std::string& config_path, const CliOverrides& over,
                   bool use_partition_sizes)
{
    BuiltRun r;
    if (!config_path.empty()) r.cfg = load_config(config_path);
    if (over.seed >= 0) r.cfg.seed = static_cast<std::uint64_t>(over.seed);
    if (!over.output_dir.empty()) r.cfg.output_dir = over.output_dir;
    RngStream scenario_rng(derive_seed(r.cfg.seed, 0x5C));
    r.scenario = make_scenario(r.cfg.scenario, scenario_rng);
    r.bundle = make_training_bundle(r.cfg.dataset, r.cfg.scenario.devices, r.cfg.seed);
    if (use_partition_sizes || r.cfg.scenario.dataset_sizes.empty())
        r.scenario.dataset_sizes = r.bundle.dataset_sizes();
    r.scenario.validate();
    return r;
}

std::string out_path(const RunConfig& cfg, const std::string& name)
{
    std::filesystem::create_directories(cfg.output_dir);
    return (std::filesystem::path(cfg.output_dir) / name).string();
}

int cmd_solve_round(const std::string& config_path, const CliOverrides& over)
{
    BuiltRun r = build_run(config_path, over, false);
    RngStream channel_rng(derive_seed(r.cfg.seed, 1, stream_tag::channel));
    const ChannelDraw draw = draw_round_channels(r.scenario, channel_rng);
    RngStream solver_rng(derive_seed(r.cfg.seed, 1, stream_tag::solver));
    const RoundSolution sol =
        bcd_solve(r.scenario, draw, r.cfg.profile, r.cfg.weights, r.cfg.tol, solver_rng);

    const auto j = solution_to_json(sol, r.scenario, r.cfg.profile, r.cfg.tol.eps2);
    write_text_file(out_path(r.cfg, "solution.json"), j.dump(2) + "\n");
    const RoundDelays rd = round_delay(sol.assignment, draw, r.cfg.profile, r.scenario);
    write_text_file(out_path(r.cfg, "round_delays.csv"),
                    round_delays_csv(rd, sol.assignment.modes));

    if (r.cfg.verbose) {
        // diagnostic re-runs at the final solution: bisection iterates, the
        // Gibbs chain and the dual ascent
        std::vector<std::array<double, 3>> split_trace;
        sl_bandwidth_split(sol.assignment.modes, sol.assignment.batches, draw, r.cfg.profile,
                           r.scenario, r.cfg.tol.eps2, r.cfg.tol.eps3, &split_trace);
        write_text_file(out_path(r.cfg, "split_trace.csv"),
                        bisection_trace_csv(split_trace, "b0,t_sl,t_fl"));

        ModeSearchContext ctx;
        ctx.profile = &r.cfg.profile;
        ctx.scenario = &r.scenario;
        ctx.draw = &draw;
        ctx.batches = sol.assignment.batches;
        ctx.rho1 = r.cfg.weights.rho1;
        ctx.rho2 = r.cfg.weights.rho2;
        ctx.eps2 = r.cfg.tol.eps2;
        ctx.eps3 = r.cfg.tol.eps3;
        std::vector<GibbsTraceRow> chain;
        RngStream grng(derive_seed(r.cfg.seed, 1, 0x7E));
        const int n = r.scenario.device_count();
        gibbs_mode_selection(sol.assignment.modes, ctx, r.cfg.tol.delta, 10 * n, 200 * n, grng,
                             &chain);
        write_text_file(out_path(r.cfg, "gibbs_trace.csv"), gibbs_trace_csv(chain));

        const DelayCoefficients coeffs =
            delay_coefficients(sol.assignment, draw, r.cfg.profile, r.scenario);
        const double ks = static_cast<double>(sol.assignment.sl_count());
        std::vector<DualTraceRow> dual_rows;
        dual_ascent(coeffs, sol.assignment.modes, r.scenario.dataset_sizes, r.cfg.weights.rho2,
                    -r.cfg.weights.rho1 * ks * (ks - 1.0), r.cfg.tol.eps4,
                    r.cfg.tol.dual_max_iters, &dual_rows);
        write_text_file(out_path(r.cfg, "dual_trace.csv"), dual_trace_csv(dual_rows));
    }
    std::printf("solve-round: u=%s u_lb=%s u_ub=%s K_S=%d alternations=%d -> %s\n",
                format_g12(sol.u).c_str(), format_g12(sol.u_lb).c_str(),
                format_g12(sol.u_ub).c_str(), sol.assignment.sl_count(), sol.bcd_iterations,
                out_path(r.cfg, "solution.json").c_str());
    return 0;
}

int cmd_simulate(const std::string& config_path, const CliOverrides& over,
                 std::vector<std::string> schemes, bool emit_channels)
{
    BuiltRun r = build_run(config_path, over, true);
    if (schemes.empty()) schemes.push_back(r.cfg.scheme);
    SimulationConfig sim;
    sim.rounds = r.cfg.rounds;
    sim.seed = r.cfg.seed;
    sim.target_loss = r.cfg.target_loss;
    sim.stop_at_target = r.cfg.stop_at_target;

    for (const auto& name : schemes) {
        Scheme scheme;
        try {
            scheme = scheme_from_string(name);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        const ScheduleResult res = run_schedule(r.scenario, r.cfg.profile, r.cfg.weights,
                                                r.cfg.tol, scheme, sim, &r.bundle);
        const std::string file = std::string("trace_") + scheme_name(scheme) + ".csv";
        write_text_file(out_path(r.cfg, file), schedule_csv(res.rows));
        std::printf("simulate %s: %zu rounds, rounds_to_target=%d, cumulative=%s -> %s\n",
                    scheme_name(scheme), res.rows.size(), res.rounds_to_target,
                    format_g12(res.rows.back().cumulative_delay).c_str(),
                    out_path(r.cfg, file).c_str());
    }
    if (emit_channels) {
        std::vector<std::pair<int, ChannelDraw>> draws;
        for (int t = 1; t <= sim.rounds; ++t) {
            RngStream crng(derive_seed(sim.seed, static_cast<std::uint64_t>(t),
                                       stream_tag::channel));
            draws.push_back({t, draw_round_channels(r.scenario, crng)});
        }
        write_text_file(out_path(r.cfg, "channels.csv"), channels_csv(draws));
    }
    return 0;
}

int cmd_sweep(const std::string& config_path, const CliOverrides& over,
              std::vector<double> rho1_set, std::vector<int> rho2_index_set)
{
    BuiltRun r = build_run(config_path, over, true);
    if (rho1_set.empty()) rho1_set = {3, 4, 5, 6, 7, 8, 9};
    if (rho2_index_set.empty()) rho2_index_set = {3, 4, 5, 6, 7, 8, 9};
    SimulationConfig sim;
    sim.rounds = r.cfg.rounds;
    sim.seed = r.cfg.seed;
    sim.target_loss = r.cfg.target_loss;
    sim.stop_at_target = r.cfg.stop_at_target;
    const auto rows = sweep_weights(r.scenario, r.cfg.profile, r.cfg.tol, rho1_set,
                                    rho2_index_set, sim, &r.bundle);
    write_text_file(out_path(r.cfg, "sweep.csv"), sweep_csv(rows));
    std::printf("sweep: %zu cells -> %s\n", rows.size(), out_path(r.cfg, "sweep.csv").c_str());
    return 0;
}

int cmd_baselines(const std::string& config_path, const CliOverrides& over)
{
    BuiltRun r = build_run(config_path, over, true);
    SimulationConfig sim;
    sim.rounds = r.cfg.rounds;
    sim.seed = r.cfg.seed;
    sim.target_loss = r.cfg.target_loss;
    sim.stop_at_target = r.cfg.stop_at_target;

    std::string summary = "scheme,rounds_to_target,cumulative_delay\n";
    for (const Scheme scheme : all_schemes()) {
        const ScheduleResult res = run_schedule(r.scenario, r.cfg.profile, r.cfg.weights,
                                                r.cfg.tol, scheme, sim, &r.bundle);
        const std::string file = std::string("trace_") + scheme_name(scheme) + ".csv";
        write_text_file(out_path(r.cfg, file), schedule_csv(res.rows));
        const double cum = res.rounds_to_target > 0 ? res.cumulative_delay_at_target
                                                    : res.rows.back().cumulative_delay;
        summary += std::string(scheme_name(scheme)) + "," +
                   std::to_string(res.rounds_to_target) + "," + format_g12(cum) + "\n";
        std::printf("baseline %-12s rounds_to_target=%-3d cumulative=%s\n", scheme_name(scheme),
                    res.rounds_to_target, format_g12(cum).c_str());
    }
    write_text_file(out_path(r.cfg, "baselines_summary.csv"), summary);
    return 0;
}

bool report(const char* name, bool ok)
{
    std::printf("%s %s\n", ok ? "PASS" : "FAIL", name);
    return ok;
}

// Compact oracle suite: grid searches, exhaustive mode search, finite
// differences, consistency identities.
int cmd_selftest()
{
    bool all = true;
    const auto profile = lenet5_profile();

    {
        const double expect[] = {50, 200, 500, 2000, 5000, 20000, 50000};
        bool ok = true;
        for (int i = 3; i <= 9; ++i) ok = ok && rho2_from_index(i) == expect[i - 3];
        all &= report("rho2 index mapping", ok);
    }

    // scenario shared by the optimizer checks
    ScenarioConfig cfg;
    cfg.devices = 6;
    RngStream srng(derive_seed(99, 1));
    RoundScenario sc = make_scenario(cfg, srng);
    for (auto& d : sc.dataset_sizes) d = 40;
    RngStream crng(derive_seed(99, 2));
    const ChannelDraw draw = draw_round_channels(sc, crng);

    {
        // bandwidth equalization vs simplex grid, 3 FL devices
        std::vector<Mode> modes(6, Mode::SL);
        modes[0] = modes[1] = modes[2] = Mode::FL;
        std::vector<double> batches(6, 16.0);
        const double b0 = 0.4;
        const auto fa = fl_bandwidth_allocation(modes, b0, batches, draw, profile, sc, 3e-3);
        const double avail = 1.0 - b0;
        ModeAssignment a;
        a.modes = modes;
        a.bandwidth = fa.shares;
        a.b0 = b0;
        a.batches = batches;
        a.cuts.assign(6, 1);
        double best = std::numeric_limits<double>::infinity();
        const int n = 200;
        for (int i = 1; i < n; ++i) {
            for (int j = 1; j < n - i; ++j) {
                ModeAssignment g = a;
                g.bandwidth[0] = avail * i / n;
                g.bandwidth[1] = avail * j / n;
                g.bandwidth[2] = avail * (n - i - j) / n;
                double t = 0.0;
                for (int k = 0; k < 3; ++k)
                    t = std::max(t, fl_device_delay(k, g, draw, profile, sc).total());
                best = std::min(best, t);
            }
        }
        all &= report("FL bandwidth equalization vs grid search", fa.t_fl <= best * 1.01);
    }

    {
        // Gibbs vs exhaustive, K = 6
        ModeSearchContext ctx;
        ctx.profile = &profile;
        ctx.scenario = &sc;
        ctx.draw = &draw;
        ctx.batches.assign(6, 16.0);
        ctx.rho1 = 0.05;
        ctx.rho2 = 1.0;
        const auto ex = exhaustive_mode_search(6, ctx);
        bool ok = true;
        for (std::uint64_t seed = 1; seed <= 3; ++seed) {
            RngStream rng(derive_seed(1234, seed));
            std::vector<Mode> init(6, Mode::FL);
            const auto gs = gibbs_mode_selection(init, ctx, 7.5e-4, 60, 1200, rng);
            ok = ok && gs.u1 - ex.u1 <= 0.02 * std::abs(ex.u1) + 1e-12;
        }
        all &= report("Gibbs mode search vs exhaustive optimum", ok);
    }

    {
        // affine delay coefficients reproduce direct delays
        std::vector<Mode> modes = {Mode::FL, Mode::SL, Mode::FL, Mode::SL, Mode::FL, Mode::SL};
        std::vector<double> batches(6, 8.0);
        const auto alloc = sl_bandwidth_split(modes, batches, draw, profile, sc, 3e-3, 1e-3);
        ModeAssignment a;
        a.modes = modes;
        a.cuts = alloc.cuts;
        a.bandwidth = alloc.bandwidth;
        a.b0 = alloc.b0;
        a.batches = batches;
        const auto coeffs = delay_coefficients(a, draw, profile, sc);
        bool ok = true;
        for (int k = 0; k < 6 && ok; ++k) {
            for (double xi : {1.0, 5.0, 23.0}) {
                ModeAssignment b = a;
                b.batches[static_cast<std::size_t>(k)] = xi;
                const double direct =
                    (modes[static_cast<std::size_t>(k)] == Mode::FL)
                        ? fl_device_delay(k, b, draw, profile, sc).total()
                        : sl_device_delay(k, b.cuts[static_cast<std::size_t>(k)], b.b0, xi,
                                          draw, profile, sc).total();
                const double affine = xi * coeffs.gamma[static_cast<std::size_t>(k)] +
                                      coeffs.lambda[static_cast<std::size_t>(k)];
                ok = ok && std::abs(direct - affine) <= 1e-12 * std::max(1.0, direct);
            }
        }
        all &= report("affine delay coefficients consistency", ok);

        // dual ascent: KKT residual and weak duality on an interior instance
        const auto da = dual_ascent(coeffs, modes, sc.dataset_sizes, 0.2, 0.0, 1e-6);
        const double g = dual_objective(da.dual, coeffs, modes, sc.dataset_sizes, 0.2, 0.0, 1e-6);
        all &= report("dual ascent KKT convergence",
                      da.solution.converged && da.solution.kkt_residual <= 1e-6);
        all &= report("weak duality at the returned iterate",
                      g <= da.solution.u2 + 1e-9 * std::max(1.0, std::abs(da.solution.u2)));
    }

    {
        // gradient vs central finite differences
        DatasetConfig dc;
        dc.samples = 200;
        const auto bundle = make_training_bundle(dc, 4, 5);
        const auto& dev = bundle.devices[0];
        std::vector<int> batch;
        for (int i = 0; i < std::min(10, dev.count()); ++i) batch.push_back(i);
        const auto grad = local_gradient(bundle.initial, dev, batch);
        RngStream rng(derive_seed(5, 77));
        bool ok = true;
        for (int probe = 0; probe < 10 && ok; ++probe) {
            const std::size_t i =
                static_cast<std::size_t>(rng.uniform_int(static_cast<int>(grad.size())));
            const double h = 1e-5 * std::max(1.0, std::abs(bundle.initial.params[i]));
            ToyModel plus = bundle.initial, minus = bundle.initial;
            plus.params[i] += h;
            minus.params[i] -= h;
            double lp = 0.0, lm = 0.0;
            for (const int s : batch) {
                lp += detail::sample_loss_grad(plus.arch, plus.params,
                                               &dev.inputs[static_cast<std::size_t>(s) * dev.dim],
                                               dev.labels[static_cast<std::size_t>(s)], nullptr);
                lm += detail::sample_loss_grad(minus.arch, minus.params,
                                               &dev.inputs[static_cast<std::size_t>(s) * dev.dim],
                                               dev.labels[static_cast<std::size_t>(s)], nullptr);
            }
            const double fd = (lp - lm) / (2.0 * h * batch.size());
            ok = std::abs(fd - grad[i]) <= 1e-5 * std::max({1e-6, std::abs(fd), std::abs(grad[i])});
        }
        all &= report("analytic gradient vs finite differences", ok);
    }

    {
        // full round solve: feasibility audit + bound sandwich
        Hyperweights w{0.05, 1.0};
        Tolerances tol;
        RngStream rng(derive_seed(99, 3));
        const auto sol = bcd_solve(sc, draw, profile, w, tol, rng);
        const auto audit = audit_constraints(sol, sc, profile, tol.eps2);
        all &= report("round solution constraint audit", audit.all_ok());
        all &= report("objective bound sandwich",
                      sol.u_lb <= sol.u + 1e-9 && sol.u <= sol.u_ub + 1e-9);
        bool mono = true;
        for (std::size_t i = 1; i < sol.objective_trace.size(); ++i)
            mono = mono && sol.objective_trace[i] <= sol.objective_trace[i - 1] + 1e-12;
        all &= report("BCD objective trace nonincreasing", mono);
    }

    std::printf("selftest: %s\n", all ? "all checks passed" : "FAILURES DETECTED");
    return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Delay-optimal scheduling and simulation for hybrid split/federated learning "
                 "over a simulated wireless network"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> schemes;
    std::vector<double> rho1_set;
    std::vector<int> rho2_index_set;
    bool emit_channels = false;
    CliOverrides over;

    auto* solve = app.add_subcommand("solve-round", "Solve one round with the BCD optimizer");
    solve->add_option("--config", config_path, "JSON config file");
    solve->add_option("--seed", over.seed, "Override the config seed");
    solve->add_option("--out", over.output_dir, "Override the output directory");

    auto* sim = app.add_subcommand("simulate", "Multi-round simulation of one or more schemes");
    sim->add_option("--config", config_path, "JSON config file");
    sim->add_option("--seed", over.seed, "Override the config seed");
    sim->add_option("--out", over.output_dir, "Override the output directory");
    sim->add_option("--scheme", schemes, "Scheme(s): proposed, sl, fl, vanilla, bso, lms");
    sim->add_flag("--emit-channels", emit_channels, "Also write per-round channel gains");

    auto* sweep = app.add_subcommand("sweep", "Run the (rho1, rho2-index) grid");
    sweep->add_option("--config", config_path, "JSON config file");
    sweep->add_option("--seed", over.seed, "Override the config seed");
    sweep->add_option("--out", over.output_dir, "Override the output directory");
    sweep->add_option("--rho1", rho1_set, "rho1 grid values");
    sweep->add_option("--rho2-index", rho2_index_set, "rho2 index grid values (3..9)");

    auto* base = app.add_subcommand("baselines", "Compare all schemes with common random numbers");
    base->add_option("--config", config_path, "JSON config file");
    base->add_option("--seed", over.seed, "Override the config seed");
    base->add_option("--out", over.output_dir, "Override the output directory");

    app.add_subcommand("selftest", "Run the built-in oracle suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand("solve-round")) return cmd_solve_round(config_path, over);
        if (app.got_subcommand("simulate"))
            return cmd_simulate(config_path, over, schemes, emit_channels);
        if (app.got_subcommand("sweep")) return cmd_sweep(config_path, over, rho1_set, rho2_index_set);
        if (app.got_subcommand("baselines")) return cmd_baselines(config_path, over);
        if (app.got_subcommand("selftest")) return cmd_selftest();
    } catch (const hsfl::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
