#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hsfl/config.hpp"
#include "hsfl/io.hpp"

using namespace hsfl;

namespace {

std::filesystem::path temp_dir()
{
    auto dir = std::filesystem::temp_directory_path() / "hsfl_cfg_test";
    std::filesystem::create_directories(dir);
    return dir;
}

std::string write_config(const std::string& name, const std::string& text)
{
    const auto path = temp_dir() / name;
    std::ofstream out(path);
    out << text;
    return path.string();
}

std::string slurp(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST(Config, EmptyFileYieldsDefaults)
{
    const auto path = write_config("empty.json", "  \n");
    const RunConfig c = load_config(path);
    EXPECT_EQ(c.scenario.devices, 30);
    EXPECT_DOUBLE_EQ(c.scenario.total_bandwidth_hz, 1.4e6);
    EXPECT_DOUBLE_EQ(c.scenario.broadcast_bandwidth_hz, 1.4e6);
    EXPECT_DOUBLE_EQ(c.scenario.noise_psd_dbm_per_hz, -174.0);
    EXPECT_DOUBLE_EQ(c.tol.eps1, 1e-5);
    EXPECT_DOUBLE_EQ(c.tol.eps2, 3e-3);
    EXPECT_DOUBLE_EQ(c.tol.eps3, 1e-3);
    EXPECT_DOUBLE_EQ(c.tol.eps4, 1e-6);
    EXPECT_DOUBLE_EQ(c.tol.delta, 7.5e-4);
    EXPECT_EQ(c.profile.layer_count(), 6);
}

TEST(Config, MissingFileFails)
{
    EXPECT_THROW(load_config("/nonexistent/nowhere.json"), ConfigError);
}

TEST(Config, Rho2IndexMapping)
{
    const auto path = write_config("rho.json", R"({"rho2_index": 5})");
    EXPECT_DOUBLE_EQ(load_config(path).weights.rho2, 500.0);
    const auto bad = write_config("rho_bad.json", R"({"rho2_index": 11})");
    EXPECT_THROW(load_config(bad), ConfigError);
    const auto clash = write_config("rho_clash.json", R"({"rho2_index": 5, "rho2": 400})");
    EXPECT_THROW(load_config(clash), ConfigError);
}

TEST(Config, ValidationNamesTheField)
{
    const auto path = write_config("negtol.json", R"({"eps2": -1.0})");
    try {
        load_config(path);
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("eps2"), std::string::npos);
    }
}

TEST(Config, BadSchemeAndParseErrors)
{
    EXPECT_THROW(load_config(write_config("scheme.json", R"({"scheme": "magic"})")), ConfigError);
    EXPECT_THROW(load_config(write_config("broken.json", "{ not json")), ConfigError);
    EXPECT_THROW(load_config(write_config("array.json", "[1,2]")), ConfigError);
}

TEST(Config, PerDevicePowerOverride)
{
    const auto path = write_config("power.json",
                                   R"({"devices": 3, "device_tx_power_w": [0.1, 0.2, 0.3]})");
    const RunConfig c = load_config(path);
    RngStream rng(derive_seed(c.seed, 0x5C));
    const auto sc = make_scenario(c.scenario, rng);
    EXPECT_DOUBLE_EQ(sc.constants.device_tx_power_w[1], 0.2);
}

TEST(Config, InlineModelProfile)
{
    const auto path = write_config("profile.json", R"({
      "model_profile": {"layers": [
        {"param_bits": 0, "flops_per_sample": 0, "fwd_payload_bits": 64, "bwd_payload_bits": 32},
        {"param_bits": 1024, "flops_per_sample": 2048, "fwd_payload_bits": 64,
         "bwd_payload_bits": 32}
      ]}})");
    const RunConfig c = load_config(path);
    EXPECT_EQ(c.profile.layer_count(), 2);
    EXPECT_DOUBLE_EQ(c.profile.total_bits(), 1024.0);

    const auto neg = write_config("profile_neg.json", R"({
      "model_profile": {"layers": [
        {"param_bits": -5}, {"param_bits": 0}
      ]}})");
    EXPECT_THROW(load_config(neg), ConfigError);
}

TEST(Io, FormatterIsStable)
{
    EXPECT_EQ(format_g12(0.1), format_g12(0.1));
    EXPECT_EQ(format_g12(std::numeric_limits<double>::quiet_NaN()), "nan");
    EXPECT_EQ(format_g12(1.0), "1");
}

namespace {

// Smoke tests of the installed CLI binary, when the build exports its path.
const char* cli_path() { return std::getenv("HSFL_CLI"); }

int run_cli(const std::string& args)
{
    const std::string cmd = std::string(cli_path()) + " " + args + " > /dev/null 2>&1";
    return std::system(cmd.c_str());
}

}  // namespace

TEST(Cli, SolveRoundWritesSolution)
{
    if (!cli_path()) GTEST_SKIP() << "HSFL_CLI not set";
    const auto out = temp_dir() / "solve";
    const auto cfg = write_config("cli_solve.json", R"({
      "devices": 5, "seed": 7, "rho1": 0.05, "rho2": 0.3,
      "dataset": {"samples": 300},
      "output_dir": ")" + out.string() + R"("})");
    ASSERT_EQ(run_cli("solve-round --config " + cfg), 0);
    const auto sol = nlohmann::json::parse(slurp((out / "solution.json").string()));
    EXPECT_TRUE(sol.contains("u"));
    EXPECT_TRUE(sol["constraints_ok"].get<bool>());
    EXPECT_TRUE(std::filesystem::exists(out / "round_delays.csv"));
}

TEST(Cli, ByteStableTracesAndCommonChannels)
{
    if (!cli_path()) GTEST_SKIP() << "HSFL_CLI not set";
    const auto out1 = temp_dir() / "sim1";
    const auto out2 = temp_dir() / "sim2";
    const auto base = R"({
      "devices": 5, "seed": 11, "rounds": 3, "dataset": {"samples": 300},
      "output_dir": ")";
    const auto cfg1 = write_config("cli_sim1.json", base + out1.string() + R"("})");
    const auto cfg2 = write_config("cli_sim2.json", base + out2.string() + R"("})");

    ASSERT_EQ(run_cli("simulate --config " + cfg1 + " --scheme sl --emit-channels"), 0);
    ASSERT_EQ(run_cli("simulate --config " + cfg2 + " --scheme fl --emit-channels"), 0);
    // same seed, different schemes: identical channel draws
    EXPECT_EQ(slurp((out1 / "channels.csv").string()), slurp((out2 / "channels.csv").string()));

    // identical run twice: byte-stable trace
    const auto first = slurp((out1 / "trace_sl.csv").string());
    ASSERT_EQ(run_cli("simulate --config " + cfg1 + " --scheme sl"), 0);
    EXPECT_EQ(first, slurp((out1 / "trace_sl.csv").string()));
    EXPECT_NE(first.find("round,scheme,t_fl,t_sl,t_round,K_S,total_batch,u,u_lb,u_ub,"
                         "cumulative_delay,loss"),
              std::string::npos);
}

TEST(Cli, UsageAndConfigErrorsExitTwo)
{
    if (!cli_path()) GTEST_SKIP() << "HSFL_CLI not set";
    EXPECT_NE(run_cli("no-such-command"), 0);
    const auto bad = write_config("cli_bad.json", R"({"eps1": -3})");
    const int status = run_cli("simulate --config " + bad);
    ASSERT_TRUE(WIFEXITED(status));
    EXPECT_EQ(WEXITSTATUS(status), 2);
}

TEST(Cli, SweepRowCount)
{
    if (!cli_path()) GTEST_SKIP() << "HSFL_CLI not set";
    const auto out = temp_dir() / "sweep";
    const auto cfg = write_config("cli_sweep.json", R"({
      "devices": 4, "seed": 3, "rounds": 1, "dataset": {"samples": 200},
      "output_dir": ")" + out.string() + R"("})");
    ASSERT_EQ(run_cli("sweep --config " + cfg + " --rho1 3 4 --rho2-index 3 4"), 0);
    const auto text = slurp((out / "sweep.csv").string());
    int lines = 0;
    for (const char ch : text)
        if (ch == '\n') ++lines;
    EXPECT_EQ(lines, 1 + 4);  // header + |rho1| x |rho2|
}
