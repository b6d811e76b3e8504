#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "cli.hpp"
#include "json.hpp"
#include "wlancap/analytic.hpp"
#include "wlancap/capacity.hpp"
#include "wlancap/delay.hpp"

using namespace wlancap;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::string kScenarios = WLANCAP_SCENARIO_DIR;

struct Outcome {
    int code;
    std::string out, err;
};

Outcome invoke(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string scenario(const std::string& name) { return kScenarios + "/" + name + ".json"; }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Rows of a CSV without quoted fields, header included.
std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        rows.push_back(cells);
    }
    return rows;
}

class TempDir {
public:
    TempDir() {
        std::random_device rd;
        path_ = fs::temp_directory_path() / ("wlancap_test_" + std::to_string(rd()));
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    const fs::path& path() const { return path_; }
    std::string str() const { return path_.string(); }

private:
    fs::path path_;
};

}  // namespace

TEST(CliSolve, ReportsEqualSlotCapacityAsJson) {
    const auto r = invoke({"solve", "--scenario", scenario("equal_slot"), "--format", "json", "--quiet"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto doc = json::parse(r.out);
    EXPECT_EQ(doc["capacity"]["scenario_class"], 1);
    const auto expected = capacity_report(reference_scenario(AccessModel::EqualSlot));
    EXPECT_NEAR(doc["capacity"]["s_s_pps"].get<double>(), expected.s_s_bps / reference_scenario(AccessModel::EqualSlot).payload_bits(), 1e-9);
    EXPECT_EQ(doc["operating_point"]["tau"], 0.0);
}

TEST(CliSolve, BasicAccessIsClassFourAndOptionsMayFollowTheSubcommand) {
    const auto r = invoke({"--scenario", scenario("basic"), "solve", "--quiet"});
    ASSERT_EQ(r.code, 0) << r.err;
    bool found = false;
    for (const auto& row : csv_rows(r.out)) {
        if (row.size() == 3 && row[1] == "scenario_class") {
            EXPECT_EQ(row[2], "4");
            found = true;
        }
    }
    EXPECT_TRUE(found) << r.out;
}

TEST(CliSolve, InfeasibleLoadExitsWithTwo) {
    const auto r = invoke({"solve", "--scenario", scenario("equal_slot"), "--load", "5000", "--quiet"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("infeasible"), std::string::npos) << r.err;
}

TEST(CliSolve, MalformedScenarioNamesTheField) {
    TempDir dir;
    const auto path = dir.path() / "bad.json";
    std::ofstream(path) << R"({"n": 50, "mac": {"w0": 16, "r": 0.5}})";
    const auto r = invoke({"solve", "--scenario", path.string()});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("mac.r"), std::string::npos) << r.err;
    EXPECT_EQ(invoke({"solve", "--scenario", "/nonexistent.json"}).code, 1);
    EXPECT_EQ(invoke({"solve", "--no-such-flag"}).code, 1);
}

TEST(CliSweep, LoadRowsMatchTheDelayModel) {
    const auto r = invoke({"sweep", "--scenario", scenario("equal_slot"), "--axis", "load", "--grid", "30,90", "--quiet"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = csv_rows(r.out);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[0][10], "e_d_us");
    const auto s = reference_scenario(AccessModel::EqualSlot).with_offered_load(90.0);
    const auto d = delay_stats(s, stable_operating_point(s).tau);
    EXPECT_NEAR(std::stod(rows[2][10]), d.e_d_us.value(), 1e-9 * d.e_d_us.value());
}

TEST(CliSweep, RRowsMatchTheCapacityReport) {
    const auto r = invoke({"sweep", "--scenario", scenario("equal_slot"), "--axis", "r", "--grid", "1.5:3:4", "--quiet"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = csv_rows(r.out);
    ASSERT_EQ(rows.size(), 5u);
    const auto curve = sensitivity_curve(reference_scenario(AccessModel::EqualSlot), {1.5, 2.0, 2.5, 3.0});
    for (std::size_t i = 0; i < curve.size(); ++i) {
        EXPECT_NEAR(std::stod(rows[i + 1][9]), curve[i].s_sbmd_bps / reference_scenario(AccessModel::EqualSlot).payload_bits(), 1e-9 * curve[i].s_sbmd_bps);
    }
}

TEST(CliSweep, EmptyGridGivesHeaderOnly) {
    const auto r = invoke({"sweep", "--scenario", scenario("equal_slot"), "--grid", "", "--quiet"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(csv_rows(r.out).size(), 1u);
}

TEST(CliSimulate, OutputsAreByteIdenticalPerSeed) {
    TempDir a, b;
    const std::vector<std::string> common{"simulate", "--scenario", scenario("equal_slot"), "--load", "90",
                                          "--seed", "3", "--slots", "100000", "--collect", "pc-by-state,delay-samples",
                                          "--dump-delays", "--quiet"};
    auto args_a = common, args_b = common;
    args_a.insert(args_a.end(), {"--out", a.str()});
    args_b.insert(args_b.end(), {"--out", b.str(), "--threads", "2"});
    ASSERT_EQ(invoke(args_a).code, 0);
    ASSERT_EQ(invoke(args_b).code, 0);
    for (const char* f : {"simulate.csv", "simulate_pc_by_state.csv", "delays_seed3.bin"}) {
        ASSERT_TRUE(fs::exists(a.path() / f)) << f;
        EXPECT_EQ(slurp(a.path() / f), slurp(b.path() / f)) << f;
    }
    const auto header = csv_rows(slurp(a.path() / "simulate.csv"))[0];
    EXPECT_NE(std::find(header.begin(), header.end(), "pc_stage_variance"), header.end());
    EXPECT_NE(std::find(header.begin(), header.end(), "pc_occupancy_variance"), header.end());
    EXPECT_EQ(slurp(a.path() / "delays_seed3.bin").substr(0, 8), "WLCDELAY");
}

TEST(CliSimulate, DumpNeedsAnOutputDirectory) {
    const auto r = invoke({"simulate", "--scenario", scenario("equal_slot"), "--slots", "1000", "--dump-delays", "--quiet"});
    EXPECT_EQ(r.code, 1);
}

TEST(CliValidate, AgreesAtSixtyPercentOfTheMeanDelayBoundary) {
    const auto r = invoke({"validate", "--scenario", scenario("equal_slot"), "--fractions", "0.6", "--seed", "1", "2",
                        "--slots", "2000000", "--quiet"});
    EXPECT_EQ(r.code, 0) << r.out << r.err;
    const auto rows = csv_rows(r.out);
    ASSERT_EQ(rows.size(), 5u);
    EXPECT_EQ(rows[3][6], "pass");
}

TEST(CliValidate, DivergentVarianceIsSkippedNotFailed) {
    const auto r = invoke({"validate", "--scenario", scenario("equal_slot"), "--loads", "120", "--seed", "1",
                        "--slots", "300000", "--quiet"});
    const auto rows = csv_rows(r.out);
    ASSERT_EQ(rows.size(), 5u);
    EXPECT_EQ(rows[4][1], "sd_delay_us");
    EXPECT_EQ(rows[4][6], "skip");
    EXPECT_EQ(rows[4][7], "analytic variance divergent");
}

TEST(CliValidate, MissingConfigExitsWithOne) {
    EXPECT_EQ(invoke({"validate", "--scenario", scenario("equal_slot"), "--config", "/nonexistent.json"}).code, 1);
}

TEST(CliOptimize, ReportsOptimumAndGain) {
    const auto r = invoke({"optimize-r", "--scenario", scenario("equal_slot"), "--objective", "both", "--quiet"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = csv_rows(r.out);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_NEAR(std::stod(rows[1][2]), optimize_r(reference_scenario(AccessModel::EqualSlot)).r_star, 1e-12);
    EXPECT_GT(std::stod(rows[1][6]), 1.0);
}

TEST(CliScaling, OneRowPerM) {
    const auto r = invoke({"scaling", "--scenario", scenario("equal_slot"), "--m-values", "1,2,3", "--quiet"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(csv_rows(r.out).size(), 4u);
}

TEST(CliReplay, ReproducesTheRecordedOutputs) {
    TempDir first, second;
    ASSERT_EQ(invoke({"simulate", "--scenario", scenario("equal_slot"), "--load", "60", "--seed", "5", "--seed", "6",
                   "--slots", "50000", "--out", first.str(), "--quiet"})
                  .code,
              0);
    const auto manifest = json::parse(slurp(first.path() / "simulate.manifest.json"));
    EXPECT_EQ(manifest["command"], "simulate");
    EXPECT_EQ(manifest["seeds"], json({5, 6}));
    EXPECT_EQ(manifest["overrides"]["load"], "60");
    EXPECT_FALSE(manifest["overrides"].contains("out"));
    ASSERT_EQ(invoke({"replay", "--manifest", (first.path() / "simulate.manifest.json").string(), "--out",
                   second.str(), "--quiet"})
                  .code,
              0);
    EXPECT_EQ(slurp(first.path() / "simulate.csv"), slurp(second.path() / "simulate.csv"));
    EXPECT_EQ(invoke({"replay", "--manifest", "/nonexistent.json"}).code, 1);
}

TEST(CliOutput, FlagTakesPrecedenceOverEnvironment) {
    TempDir env_dir, flag_dir;
    ::setenv("WLANCAP_OUT_DIR", env_dir.str().c_str(), 1);
    ASSERT_EQ(invoke({"solve", "--scenario", scenario("equal_slot"), "--quiet"}).code, 0);
    ASSERT_EQ(invoke({"sweep", "--scenario", scenario("equal_slot"), "--grid", "10", "--out", flag_dir.str(), "--quiet"})
                  .code,
              0);
    ::unsetenv("WLANCAP_OUT_DIR");
    EXPECT_TRUE(fs::exists(env_dir.path() / "solve.csv"));
    EXPECT_TRUE(fs::exists(flag_dir.path() / "sweep_load.csv"));
    EXPECT_FALSE(fs::exists(env_dir.path() / "sweep_load.csv"));
}
