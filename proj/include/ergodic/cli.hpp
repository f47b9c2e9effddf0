#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ergodic/analysis.hpp"
#include "ergodic/problem.hpp"
#include "ergodic/solvers.hpp"

namespace ergodic {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parametric description of a right-hand side, as written in a config file.
///
/// form = power | pure_power | blend | tabulated. Blends carry two parts
/// (sections [<prefix>.first] and [<prefix>.second]); tabulated data lives in
/// a JSON file holding {"values": field, "gradient": [field, ...]}.
struct RhsDescriptor {
    std::string form = "power";
    double c = 1.0;
    double alpha = 0.0;
    double shift = 0.0;
    Point center{};
    double t = 0.5;
    std::string table;
    std::vector<RhsDescriptor> parts;

    RhsFunction build() const;
};

enum class Mode { solve, sweep, verify };

std::string to_string(Mode m);

struct VerifyOptions {
    std::vector<std::string> checks;
    std::vector<double> radii{4.0, 6.0, 8.0};
    std::vector<double> h_schedule{0.02};
    double tolerance = 0.03;
    double rel_tolerance = 0.05;
    double shift = 1.0;
    double c = 4.0;
    std::optional<double> alpha;
    std::vector<double> t_grid{0.0, 0.25, 0.5, 0.75, 1.0};
    std::optional<double> f0;
    std::vector<std::uint64_t> seeds;
    double march_time = 50.0;
    std::vector<double> epsilons{0.1, 0.05, 0.025};
    std::optional<double> oracle;
    double q = 1.01;
    double r_inner = 2.0;
    std::vector<GradientWindow> windows;
    std::vector<double> lambdas;
    double margin = 0.05;
    double resolution = 1e-3;
    double slack = 0.02;
};

struct ExperimentConfig {
    Mode mode = Mode::solve;
    std::string output = "out";
    std::uint64_t seed = 1;
    int workers = 1;
    ErgodicMethod method = ErgodicMethod::newton_augmented;

    double theta = 2.0;
    int dim = 1;
    double radius = 8.0;
    double h = 0.01;
    Point anchor{};
    RhsDescriptor rhs;
    std::optional<RhsDescriptor> rhs2;

    SolverSettings solver;

    std::string sweep_axis;
    std::vector<double> sweep_values;

    VerifyOptions verify;

    ProblemSpec problem() const;

    /// Every key, in schema order; parse(to_text()) reproduces the config.
    std::string to_text() const;

    /// Throws ConfigError naming the offending key or line.
    static ExperimentConfig parse(const std::string& text);
    static ExperimentConfig load(const std::filesystem::path& path);
};

/// Names accepted in [verify] checks.
const std::vector<std::string>& known_checks();

/// Exit codes shared by the runners.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitSolver = 2;
inline constexpr int kExitVerification = 3;

/// solution.json, phi.csv, trace.jsonl and metadata.json in `out`.
int run_solve(const ExperimentConfig& config, const std::filesystem::path& out);

/// sweep.csv (one row per axis value, in order) and metadata.json.
int run_sweep(const ExperimentConfig& config, const std::filesystem::path& out);

/// reports.json, summary.csv, plots/*.csv and metadata.json.
int run_verify(const ExperimentConfig& config, const std::filesystem::path& out);

/// Dispatches on config.mode.
int run(const ExperimentConfig& config, const std::filesystem::path& out);

} // namespace ergodic
