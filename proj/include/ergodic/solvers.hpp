#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ergodic/grid.hpp"
#include "ergodic/problem.hpp"
#include "ergodic/scheme.hpp"

namespace ergodic {

struct IterationRecord {
    long iteration = 0;
    double residual_sup = 0.0;
    double lambda = 0.0;
    double step = 0.0;
};

struct ConvergenceTrace {
    std::vector<IterationRecord> records;
    double wall_seconds = 0.0;
    std::string termination;
};

/// One JSON object per iteration record, then a summary line.
void write_jsonl(std::ostream& os, const ConvergenceTrace& trace);

struct ErgodicSolution {
    double lambda = 0.0;
    Field phi;  ///< normalized so phi(anchor) == 0
    double residual_sup = 0.0;
    ConvergenceTrace trace;
    BoundaryKind policy = BoundaryKind::state_constraint;
    std::size_t anchor_node = 0;
};

/// Result of a solve whose unknown is a field only (Dirichlet, discounted).
struct FieldSolution {
    Field phi;
    double residual_sup = 0.0;
    ConvergenceTrace trace;
};

struct SolverSettings {
    double tolerance = 1e-8;      ///< sup-norm residual target
    int max_iterations = 200;     ///< Newton / policy iteration budget
    long max_steps = 50'000'000;  ///< explicit-march budget
    int max_halvings = 20;        ///< backtracking floor 2^-20
    double cfl_safety = 0.9;
    int dt_refresh = 50;
    long record_stride = 100;     ///< explicit marches keep every n-th record
    double divergence_bound = 1e12;
};

enum class FailureKind { no_solution_suspected, not_converged, cfl_violation, linear_solve, resolution };

std::string to_string(FailureKind kind);

class SolverFailure : public std::runtime_error {
public:
    SolverFailure(FailureKind kind, const std::string& what, ConvergenceTrace trace = {})
        : std::runtime_error(what), kind_(kind), trace_(std::move(trace))
    {
    }

    FailureKind kind() const { return kind_; }
    const ConvergenceTrace& trace() const { return trace_; }

private:
    FailureKind kind_;
    ConvergenceTrace trace_;
};

enum class ErgodicMethod { newton_augmented, relative_value_iteration, policy_iteration };

std::string to_string(ErgodicMethod method);
ErgodicMethod parse_method(const std::string& name);

/// Damped Newton for G_h[phi] = -lambda in the box with phi = boundary data
/// on the faces. Stagnation is reported as no_solution_suspected.
FieldSolution solve_dirichlet(const ProblemSpec& spec, double lambda, const Field& boundary_data,
    std::optional<Field> initial_guess = std::nullopt, const SolverSettings& settings = {});

/// -1/2 Lap phi + H(D phi) + eps phi = f under state constraints. The
/// un-normalized field is returned; eps * phi(anchor) estimates lambda*.
FieldSolution solve_discounted(const ProblemSpec& spec, double epsilon,
    std::optional<Field> initial_guess = std::nullopt, const SolverSettings& settings = {});

/// State-constraint ergodic problem on the box: (lambda_R, phi^R) with
/// phi^R(anchor) = 0.
ErgodicSolution solve_ergodic(const ProblemSpec& spec, std::optional<Field> initial_guess = std::nullopt,
    ErgodicMethod method = ErgodicMethod::newton_augmented, const SolverSettings& settings = {});

enum class Verdict { pass, fail, not_applicable };

std::string to_string(Verdict v);

struct InteriorMinimum {
    Point location{};
    double f_value = 0.0;
    double lambda = 0.0;
    int steps_to_boundary = 0;
    Verdict verdict = Verdict::not_applicable;
};

/// The minimizer of phi^R must sit at least two nodes inside the box and
/// satisfy f(xbar) <= lambda_R + tol.
InteriorMinimum interior_minimum_check(const ErgodicSolution& sol, const ProblemSpec& spec, double tol = 1e-6);

struct MarchRecord {
    long step = 0;
    double time = 0.0;
    double rate_min = 0.0;
    double rate_mean = 0.0;
    double rate_max = 0.0;
};

struct MarchResult {
    std::vector<MarchRecord> records;
    double lambda_hat = 0.0;
    Field profile;  ///< u(., T) - u(anchor, T)
    Field final_state;
    long steps = 0;
    double wall_seconds = 0.0;
};

/// Explicit monotone march of u_t - 1/2 Lap u + H(Du) = f to time T.
MarchResult parabolic_march(const ProblemSpec& spec, const Field& u0, double final_time,
    const SolverSettings& settings = {});

struct RadiusRow {
    double radius = 0.0;
    double h = 0.0;
    double lambda = 0.0;
    double residual_sup = 0.0;
    double wall_seconds = 0.0;
};

struct LambdaStarEstimate {
    double lambda_star = 0.0;   ///< extrapolated value (or the last lambda_R)
    double last_lambda = 0.0;
    bool extrapolated = false;
    std::vector<RadiusRow> table;
    double slack = 0.0;
    bool monotone = true;
    std::vector<ErgodicSolution> solutions;
};

struct LambdaStarOptions {
    ErgodicMethod method = ErgodicMethod::newton_augmented;
    /// Fixed slack for the monotonicity test; when empty it is twice the
    /// |lambda(h) - lambda(2h)| difference at the first radius.
    std::optional<double> slack;
    /// Throw SolverFailure(resolution) on a monotonicity violation.
    bool strict = true;
    bool keep_solutions = false;
};

LambdaStarEstimate estimate_lambda_star(const ProblemSpec& spec, const std::vector<double>& radii,
    const std::vector<double>& h_per_radius, const LambdaStarOptions& options = {},
    const SolverSettings& settings = {});

/// Least-squares fit lambda_R = l* + a exp(-b R); empty when ill-conditioned.
std::optional<double> extrapolate_exponential(const std::vector<double>& radii, const std::vector<double>& lambdas);

struct DiscountedEstimate {
    std::vector<double> epsilons;
    std::vector<double> values;  ///< eps * phi_eps(anchor)
    double extrapolated = 0.0;
};

/// Vanishing-discount route: eps * phi_eps(anchor) per eps, then polynomial
/// (Richardson) extrapolation to eps = 0.
DiscountedEstimate discounted_lambda(const ProblemSpec& spec, const std::vector<double>& epsilons,
    const SolverSettings& settings = {});

/// Value at 0 of the interpolating polynomial through (x_i, y_i).
double extrapolate_to_zero(const std::vector<double>& x, const std::vector<double>& y);

/// Smooth pseudo-random field for independent initializations.
Field random_initial_guess(const Grid& grid, std::uint64_t seed, double amplitude = 1.0);

} // namespace ergodic
