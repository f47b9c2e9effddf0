#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "ergodic/grid.hpp"
#include "ergodic/problem.hpp"
#include "ergodic/solvers.hpp"

namespace ergodic {

enum class Relation { equal, at_most, at_least, positive };

std::string to_string(Relation r);

/// One measured-vs-predicted comparison inside a report.
///
/// equal:    |measured - predicted| <= tolerance
/// at_most:  measured <= predicted + tolerance
/// at_least: measured >= predicted - tolerance
/// positive: measured > predicted (tolerance unused)
struct Comparison {
    std::string label;
    double measured = 0.0;
    double predicted = 0.0;
    Relation relation = Relation::equal;
    double tolerance = 0.0;

    bool holds() const;
};

/// Plain tabular data for external plotting.
struct PlotTable {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

struct VerdictReport {
    std::string name;
    std::string provenance;  ///< where the predicted values come from
    std::vector<Comparison> comparisons;
    bool applicable = true;
    bool pass = false;       ///< applicable and every comparison holds
    std::vector<std::pair<std::string, std::string>> inputs;
    std::string notes;
    std::vector<PlotTable> plots;

    /// Recompute `pass` from the comparisons.
    void settle();
};

nlohmann::json to_json(const VerdictReport& report);
void write_reports_json(std::ostream& os, const std::vector<VerdictReport>& reports);
/// name, applicable, pass, then one row per comparison.
void write_summary_csv(std::ostream& os, const std::vector<VerdictReport>& reports);
void write_plot_csv(std::ostream& os, const PlotTable& table);

/// How lambda* is estimated for a given right-hand side.
struct EstimationPlan {
    std::vector<double> radii{4.0, 6.0, 8.0};
    std::vector<double> h{0.02};
    ErgodicMethod method = ErgodicMethod::newton_augmented;
    SolverSettings settings;
};

/// lambda* of `base` with its rhs replaced by `f`, via estimate_lambda_star.
LambdaStarEstimate lambda_star_for(const ProblemSpec& base, const RhsFunction& f, const EstimationPlan& plan);

/// f + c for any representable form.
RhsFunction shift_rhs(const RhsFunction& f, double c);

struct GrowthFit {
    double gamma = 0.0;            ///< log-log slope of phi
    double gradient_exponent = 0.0; ///< log-log slope of |D phi|
    std::size_t nodes = 0;
    PlotTable samples;             ///< log|y|, log phi, log|D phi| per node
};

/// Least-squares slopes of log phi and log |D phi| against log |y| over the
/// annulus r0 <= |y| <= r1, after shifting phi so that min phi = 1.
/// Throws std::invalid_argument if r1 > 0.6 R, r0 <= 0 or fewer than 10 nodes fall in the annulus.
GrowthFit fit_growth_exponent(const Field& phi, double r0, double r1);

VerdictReport check_growth_exponent(const ProblemSpec& spec, double rel_tolerance = 0.1,
    ErgodicMethod method = ErgodicMethod::newton_augmented, const SolverSettings& settings = {});

/// Ratio lambda*(c|y|^alpha)/lambda*(|y|^alpha) against c^{theta*/(theta*+alpha)}
/// for alpha >= 1, the two-sided inequality on c(1+|y|^2)^{alpha/2} otherwise.
VerdictReport check_scaling_law(const ProblemSpec& base, double alpha, double c, const EstimationPlan& plan,
    double rel_tolerance = 0.05);

/// lambda*(f + c) = lambda*(f) + c and matching normalized profiles.
VerdictReport check_shift_equivariance(const ProblemSpec& base, const RhsFunction& f, double c,
    const EstimationPlan& plan, double tolerance);

/// Monotonicity (requires f1 <= f2 on the box, otherwise not applicable)
/// and concavity of t -> lambda*(t f1 + (1-t) f2) over `ts`.
std::vector<VerdictReport> check_lambda_shape(const ProblemSpec& base, const RhsFunction& f1, const RhsFunction& f2,
    const std::vector<double>& ts, const EstimationPlan& plan, double tolerance);

/// sup |f1 - f2| / (1 + |y|^alpha): radial scan plus the tail limit for
/// radial forms, box scan otherwise.
double continuity_gap(const RhsFunction& f1, const RhsFunction& f2, double alpha, const Grid& box);

/// |lambda*(f2) - lambda*(f1)| <= f0 m/(1 + f0 m) max(lambda*(f1), lambda*(f2)).
/// `f0` defaults to the larger of the two certified constants; an explicit
/// value below either one, or a missing constant, throws std::invalid_argument.
VerdictReport check_continuity_bound(const ProblemSpec& base, const RhsFunction& f1, const RhsFunction& f2,
    double alpha, std::optional<double> f0, const EstimationPlan& plan, double tolerance);

/// Q = -1/2 Lap(phi^q) + H(D phi^q) - f + lambda on r_inner <= |y| <= 0.8 R,
/// with phi shifted so min phi = 1. Passes iff min Q > 0; the margin is reported.
VerdictReport check_power_supersolution(const ErgodicSolution& sol, const ProblemSpec& spec, double q,
    double r_inner);

/// sup_{|y|<=r_prime}|D phi| / (1 + sup_{|y|<=r_outer}|f - lambda|^{1/theta}
///  + sup_{|y|<=r_outer}|Df|^{1/(2 theta - 1)}).
double gradient_estimate_ratio(const Field& phi, double lambda, const ProblemSpec& spec, double r_prime,
    double r_outer);

struct GradientWindow {
    double r_prime = 0.0;
    double r_outer = 0.0;  ///< also the box radius of the solve
};

/// The ratio stays within a factor 2 band across the windows.
VerdictReport check_gradient_estimate(const ProblemSpec& base, const std::vector<GradientWindow>& windows,
    ErgodicMethod method = ErgodicMethod::newton_augmented, const SolverSettings& settings = {});

/// Dirichlet solves with constant boundary data succeed for every lambda in
/// the list. Throws std::invalid_argument if some lambda >= lambda_star - margin.
VerdictReport check_dirichlet_family(const ProblemSpec& spec, const std::vector<double>& lambdas,
    double lambda_star, double margin, double boundary_value = 0.0, const SolverSettings& settings = {});

struct ThresholdSearch {
    double threshold = 0.0;
    double solvable = 0.0;    ///< largest lambda known to be solvable
    double unsolvable = 0.0;  ///< smallest lambda known to fail
    int evaluations = 0;
};

/// Bisection for the largest lambda at which the Dirichlet problem with
/// constant boundary data is solvable. `lo` must be solvable and `hi` not.
ThresholdSearch locate_dirichlet_threshold(const ProblemSpec& spec, double lo, double hi, double resolution,
    double boundary_value = 0.0, const SolverSettings& settings = {});

/// Dirichlet threshold against the state-constraint lambda on the same box,
/// within 5 * resolution.
VerdictReport check_characterization(const ProblemSpec& spec, double resolution,
    const SolverSettings& settings = {});

/// Two solves from independent random initial guesses: osc(phi1 - phi2) <= 10 tol.
VerdictReport check_uniqueness(const ProblemSpec& spec, std::uint64_t seed_a, std::uint64_t seed_b,
    ErgodicMethod method = ErgodicMethod::newton_augmented, const SolverSettings& settings = {});

struct CrossMethodOptions {
    double march_time = 50.0;
    std::vector<double> epsilons{0.1, 0.05, 0.025};
    double tolerance = 0.05;
    std::optional<double> oracle;  ///< exact lambda*, when known
};

/// Newton, relative value iteration, policy iteration, parabolic march and
/// extrapolated discounted route agree pairwise.
VerdictReport check_cross_method(const ProblemSpec& spec, const CrossMethodOptions& options,
    const SolverSettings& settings = {});

/// lambda_R over the radii is non-increasing within `slack`.
VerdictReport check_radius_monotonicity(const ProblemSpec& base, const EstimationPlan& plan, double slack);

/// Interior-minimum localization as a report.
VerdictReport check_interior_minimum(const ProblemSpec& spec, ErgodicMethod method = ErgodicMethod::newton_augmented,
    const SolverSettings& settings = {});

} // namespace ergodic
