#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include <nlohmann/json.hpp>

#include "ergodic/cli.hpp"

using namespace ergodic;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    fs::path p = fs::temp_directory_path() / ("ergodic_cli_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::vector<std::string>> read_rows(const fs::path& p)
{
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            cells.push_back(cell);
        }
        rows.push_back(cells);
    }
    return rows;
}

const char* kQuadratic = R"(
[run]
mode = solve

[problem]
theta = 2
dim = 1
radius = 8
h = 0.02

[rhs]
form = pure_power
c = 0.5
alpha = 2
)";

} // namespace

TEST_CASE("config parsing rejects unknown keys")
{
    std::string text = "[problem]\nthetta = 2\n";
    try {
        ExperimentConfig::parse(text);
        FAIL("expected a config error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("thetta") != std::string::npos);
    }
    CHECK_THROWS_AS(ExperimentConfig::parse("[bogus]\nx = 1\n"), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::parse("[problem]\ntheta = 2\ntheta = 3\n"), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::parse("[problem]\ntheta = two\n"), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::parse("[rhs]\nform = blend\n"), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::parse("[verify]\nchecks = nonsense\n"), ConfigError);
}

TEST_CASE("config text round trip")
{
    auto cfg = ExperimentConfig::parse(std::string(kQuadratic) + R"(
[solver]
tolerance = 1e-9

[sweep]
axis = c
values = 0.5 1 2

[rhs2]
form = blend
t = 0.25

[rhs2.first]
form = power
c = 1
alpha = 2

[rhs2.second]
form = pure_power
c = 1
alpha = 4
shift = 1

[verify]
checks = uniqueness scaling_law
seeds = 3 5
)");
    auto again = ExperimentConfig::parse(cfg.to_text());
    CHECK(again.to_text() == cfg.to_text());
    CHECK(again.solver.tolerance == 1e-9);
    CHECK(again.sweep_values == std::vector<double>{0.5, 1.0, 2.0});
    REQUIRE(again.rhs2.has_value());
    CHECK(again.rhs2->parts.size() == 2);
    CHECK(again.rhs2->build().value({1.0, 0.0, 0.0}) == doctest::Approx(0.25 * 2.0 + 0.75 * 2.0));
    CHECK(again.verify.seeds == std::vector<std::uint64_t>{3, 5});
}

TEST_CASE("solve writes the solution and trace")
{
    auto dir = scratch("solve_const");
    auto cfg = ExperimentConfig::parse("[run]\nmode = solve\n[problem]\nradius = 3\nh = 0.05\n[rhs]\nform = power\nalpha = 0\n");
    CHECK(run_solve(cfg, dir) == kExitOk);
    auto sol = nlohmann::json::parse(slurp(dir / "solution.json"));
    CHECK(sol["lambda"].get<double>() == doctest::Approx(1.0).epsilon(1e-10));
    for (double v : sol["phi"]["values"]) {
        CHECK(std::abs(v) <= 1e-10);
    }
    CHECK(fs::exists(dir / "phi.csv"));
    CHECK(fs::exists(dir / "trace.jsonl"));
    CHECK(fs::exists(dir / "metadata.json"));

    auto qdir = scratch("solve_quad");
    CHECK(run_solve(ExperimentConfig::parse(kQuadratic), qdir) == kExitOk);
    auto q = nlohmann::json::parse(slurp(qdir / "solution.json"));
    CHECK(std::abs(q["lambda"].get<double>() - 0.5) <= 0.02);
}

TEST_CASE("solve output is byte identical across runs")
{
    auto a = scratch("repro_a");
    auto b = scratch("repro_b");
    auto cfg = ExperimentConfig::parse(kQuadratic);
    REQUIRE(run_solve(cfg, a) == kExitOk);
    REQUIRE(run_solve(cfg, b) == kExitOk);
    for (const char* name : {"solution.json", "phi.csv", "trace.jsonl"}) {
        CAPTURE(name);
        CHECK(slurp(a / name) == slurp(b / name));
    }
}

TEST_CASE("sweeps")
{
    auto dir = scratch("sweep_radius");
    auto cfg = ExperimentConfig::parse(std::string(kQuadratic) + "[sweep]\naxis = radius\nvalues = 4 6 8\n");
    cfg.mode = Mode::sweep;
    cfg.workers = 2;
    CHECK(run_sweep(cfg, dir) == kExitOk);
    auto rows = read_rows(dir / "sweep.csv");
    REQUIRE(rows.size() == 3);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i][2] == "ok");
        if (i > 0) {
            CHECK(std::stod(rows[i][3]) <= std::stod(rows[i - 1][3]) + 1e-3);
        }
    }

    auto serial = scratch("sweep_radius_serial");
    cfg.workers = 1;
    CHECK(run_sweep(cfg, serial) == kExitOk);
    CHECK(slurp(serial / "sweep.csv") == slurp(dir / "sweep.csv"));

    auto edir = scratch("sweep_eps");
    auto ecfg = ExperimentConfig::parse(std::string(kQuadratic) + "[sweep]\naxis = epsilon\nvalues = 0.1 0.05 0.025\n");
    CHECK(run_sweep(ecfg, edir) == kExitOk);
    auto erows = read_rows(edir / "sweep.csv");
    REQUIRE(erows.size() == 3);
    for (const auto& r : erows) {
        CHECK(std::abs(std::stod(r[3]) - 0.5) <= 0.1);
    }

    auto empty = ExperimentConfig::parse(std::string(kQuadratic) + "[sweep]\naxis = radius\n");
    CHECK(run_sweep(empty, scratch("sweep_empty")) == kExitConfig);
}

TEST_CASE("verify runs the requested checks")
{
    auto dir = scratch("verify");
    auto cfg = ExperimentConfig::parse(std::string(kQuadratic) + R"(
[verify]
checks = shift_equivariance scaling_law uniqueness
seeds = 11 29
c = 4
)");
    cfg.mode = Mode::verify;
    CHECK(run_verify(cfg, dir) == kExitOk);
    auto reports = nlohmann::json::parse(slurp(dir / "reports.json"));
    REQUIRE(reports.size() == 3);
    for (const auto& r : reports) {
        CHECK(r["pass"] == true);
    }
    double ratio = reports[1]["comparisons"][0]["measured"].get<double>();
    CHECK(ratio == doctest::Approx(2.0).epsilon(0.05));
    CHECK(fs::exists(dir / "summary.csv"));

    auto again = scratch("verify_again");
    CHECK(run_verify(cfg, again) == kExitOk);
    CHECK(slurp(dir / "reports.json") == slurp(again / "reports.json"));
    CHECK(slurp(dir / "summary.csv") == slurp(again / "summary.csv"));
}

#ifdef ERGODIC_CLI_PATH
TEST_CASE("executable exit codes")
{
    auto dir = scratch("exe");
    auto bad = dir / "bad.ini";
    std::ofstream(bad) << "[run]\nmode = solve\n[problem]\nthetta = 2\n";
    std::string cmd = std::string(ERGODIC_CLI_PATH) + " solve --config " + bad.string() + " --out "
        + (dir / "o").string() + " 2> " + (dir / "err.txt").string();
    int status = std::system(cmd.c_str());
    CHECK(WEXITSTATUS(status) == kExitConfig);
    CHECK(slurp(dir / "err.txt").find("thetta") != std::string::npos);

    auto good = dir / "good.ini";
    std::ofstream(good) << kQuadratic;
    std::string mismatch = std::string(ERGODIC_CLI_PATH) + " sweep --config " + good.string() + " --out "
        + (dir / "o2").string() + " 2> /dev/null";
    CHECK(WEXITSTATUS(std::system(mismatch.c_str())) == kExitConfig);

    std::string ok = std::string(ERGODIC_CLI_PATH) + " solve --config " + good.string() + " --out "
        + (dir / "o3").string() + " > /dev/null";
    CHECK(WEXITSTATUS(std::system(ok.c_str())) == kExitOk);
}
#endif
