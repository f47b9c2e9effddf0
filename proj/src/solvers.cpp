#include "ergodic/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <ostream>
#include <random>

#include <Eigen/SparseLU>
#include <nlohmann/json.hpp>

namespace ergodic {

namespace {

using Vec = Eigen::VectorXd;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

double sup_norm(const Vec& r)
{
    double worst = 0.0;
    for (Eigen::Index i = 0; i < r.size(); ++i) {
        double a = std::abs(r[i]);
        if (!std::isfinite(a)) {
            return std::numeric_limits<double>::infinity();
        }
        worst = std::max(worst, a);
    }
    return worst;
}

Vec to_vec(const Field& f)
{
    return Eigen::Map<const Vec>(f.data().data(), static_cast<Eigen::Index>(f.size()));
}

Field to_field(const Grid& g, const Vec& v, std::size_t n)
{
    return Field(g, std::vector<double>(v.data(), v.data() + n));
}

std::span<const double> head(const Vec& v, std::size_t n)
{
    return {v.data(), n};
}

/// [A 1; e_anchor^T 0]: the extra unknown is lambda, the extra row pins phi(anchor).
SparseMatrix bordered(const SparseMatrix& a, std::size_t anchor)
{
    const auto n = a.rows();
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(a.nonZeros() + 2 * n + 1));
    for (int col = 0; col < a.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(a, col); it; ++it) {
            trips.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
        }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        trips.emplace_back(static_cast<int>(i), static_cast<int>(n), 1.0);
    }
    trips.emplace_back(static_cast<int>(n), static_cast<int>(anchor), 1.0);
    SparseMatrix out(n + 1, n + 1);
    out.setFromTriplets(trips.begin(), trips.end());
    return out;
}

Vec solve_sparse(const SparseMatrix& m, const Vec& rhs, const ConvergenceTrace& trace)
{
    Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(m);
    lu.factorize(m);
    if (lu.info() != Eigen::Success) {
        throw SolverFailure(FailureKind::linear_solve, "sparse LU factorization failed", trace);
    }
    Vec x = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !x.allFinite()) {
        throw SolverFailure(FailureKind::linear_solve, "sparse LU solve failed", trace);
    }
    return x;
}

struct NewtonProblem {
    std::function<void(const Vec&, Vec&)> residual;
    std::function<SparseMatrix(const Vec&)> jacobian;
    std::function<double(const Vec&)> lambda_of;
    /// Take the undamped step when backtracking finds no decrease. For a
    /// convex monotone system this is a policy-iteration step, whose iterates
    /// decrease monotonically whenever a solution exists.
    bool full_step_fallback = false;
};

/// Newton with residual-monotone backtracking (halving down to 2^-max_halvings).
Vec damped_newton(Vec x, const NewtonProblem& p, const SolverSettings& s, ConvergenceTrace& trace)
{
    const auto start = Clock::now();
    Vec r(x.size());
    Vec trial_r(x.size());
    p.residual(x, r);
    double res = sup_norm(r);
    double step = 0.0;
    for (int it = 0;; ++it) {
        trace.records.push_back({it, res, p.lambda_of(x), step});
        if (res <= s.tolerance) {
            trace.termination = "converged";
            trace.wall_seconds = seconds_since(start);
            return x;
        }
        if (it >= s.max_iterations) {
            trace.termination = "iteration budget exhausted";
            trace.wall_seconds = seconds_since(start);
            throw SolverFailure(FailureKind::not_converged, "Newton did not converge within the iteration budget", trace);
        }
        Vec dx = solve_sparse(p.jacobian(x), -r, trace);
        double alpha = 1.0;
        bool accepted = false;
        for (int k = 0; k <= s.max_halvings; ++k, alpha *= 0.5) {
            Vec trial = x + alpha * dx;
            p.residual(trial, trial_r);
            double trial_res = sup_norm(trial_r);
            if (trial_res < res) {
                x = std::move(trial);
                r.swap(trial_r);
                res = trial_res;
                accepted = true;
                break;
            }
        }
        if (!accepted && p.full_step_fallback) {
            x += dx;
            p.residual(x, r);
            res = sup_norm(r);
            alpha = 1.0;
            accepted = true;
        }
        if (!accepted) {
            trace.termination = "stagnation: no residual decrease over damped steps";
            trace.wall_seconds = seconds_since(start);
            throw SolverFailure(FailureKind::no_solution_suspected,
                "no-solution-suspected: Newton stagnated (no residual decrease over damped steps)", trace);
        }
        step = alpha;
        if (x.lpNorm<Eigen::Infinity>() > s.divergence_bound) {
            trace.termination = "iterates diverged";
            trace.wall_seconds = seconds_since(start);
            throw SolverFailure(FailureKind::no_solution_suspected, "no-solution-suspected: Newton iterates diverged", trace);
        }
    }
}

double stable_dt(const DiscreteOperator& op, std::span<const double> u, const SolverSettings& s)
{
    const double m = op.grid().dim();
    const double h = op.grid().h();
    return s.cfl_safety / (m / (h * h) + op.max_hamiltonian_slope(u) * m / h);
}

void finalize_normalized(ErgodicSolution& sol, const DiscreteOperator& op)
{
    sol.anchor_node = op.grid().nearest_node(op.spec().anchor);
    sol.phi.normalize_at(sol.anchor_node);
    Field r = apply_operator(op, sol.phi, sol.lambda);
    double res = 0.0;
    for (double v : r.data()) {
        res = std::max(res, std::abs(v));
    }
    sol.residual_sup = res;
    if (!sol.trace.records.empty()) {
        sol.trace.records.back().residual_sup = res;
        sol.trace.records.back().lambda = sol.lambda;
    }
}

ErgodicSolution ergodic_newton(const DiscreteOperator& op, Field guess, const SolverSettings& s)
{
    const std::size_t n = op.grid().size();
    const std::size_t anchor = op.grid().nearest_node(op.spec().anchor);
    guess.normalize_at(anchor);

    Field r0 = apply_operator(op, guess, 0.0);
    Vec x(static_cast<Eigen::Index>(n + 1));
    x.head(static_cast<Eigen::Index>(n)) = to_vec(guess);
    x[static_cast<Eigen::Index>(n)] = -0.5 * (r0.max() + r0.min());

    NewtonProblem p;
    p.residual = [&](const Vec& v, Vec& out) {
        op.residual(head(v, n), v[static_cast<Eigen::Index>(n)], {out.data(), n});
        out[static_cast<Eigen::Index>(n)] = v[static_cast<Eigen::Index>(anchor)];
    };
    p.jacobian = [&](const Vec& v) {
        auto drift = optimal_drift_field(op, head(v, n));
        return bordered(drift_matrix(op, drift), anchor);
    };
    p.lambda_of = [&](const Vec& v) { return v[static_cast<Eigen::Index>(n)]; };

    ErgodicSolution sol;
    x = damped_newton(std::move(x), p, s, sol.trace);
    sol.lambda = x[static_cast<Eigen::Index>(n)];
    sol.phi = to_field(op.grid(), x, n);
    return sol;
}

ErgodicSolution ergodic_policy_iteration(const DiscreteOperator& op, const Field& guess, const SolverSettings& s)
{
    const auto start = Clock::now();
    const Grid& g = op.grid();
    const std::size_t n = g.size();
    const std::size_t anchor = g.nearest_node(op.spec().anchor);
    const double theta = op.theta();

    ErgodicSolution sol;
    auto drift = optimal_drift_field(op, guess.values());
    Vec rhs(static_cast<Eigen::Index>(n + 1));
    Field r(g);
    for (int it = 0;; ++it) {
        for (std::size_t k = 0; k < n; ++k) {
            rhs[static_cast<Eigen::Index>(k)] = op.rhs_values()[k] + drift_cost(theta, drift[k]);
        }
        rhs[static_cast<Eigen::Index>(n)] = 0.0;
        Vec x = solve_sparse(bordered(drift_matrix(op, drift), anchor), rhs, sol.trace);
        sol.phi = to_field(g, x, n);
        sol.lambda = x[static_cast<Eigen::Index>(n)];
        op.residual(sol.phi.values(), sol.lambda, r.values());
        double res = std::max(std::abs(r.max()), std::abs(r.min()));
        sol.trace.records.push_back({it, res, sol.lambda, 1.0});
        if (res <= s.tolerance) {
            sol.trace.termination = "converged";
            break;
        }
        if (!std::isfinite(res) || it >= s.max_iterations) {
            sol.trace.termination = "iteration budget exhausted";
            sol.trace.wall_seconds = seconds_since(start);
            throw SolverFailure(FailureKind::not_converged, "policy iteration did not converge", sol.trace);
        }
        drift = optimal_drift_field(op, sol.phi.values());
    }
    sol.trace.wall_seconds = seconds_since(start);
    return sol;
}

ErgodicSolution ergodic_relative_value_iteration(const DiscreteOperator& op, Field u, const SolverSettings& s)
{
    const auto start = Clock::now();
    const Grid& g = op.grid();
    const std::size_t n = g.size();
    const std::size_t anchor = g.nearest_node(op.spec().anchor);
    u.normalize_at(anchor);

    ErgodicSolution sol;
    std::vector<double> rate(n);
    double dt = 0.0;
    const double blowup = 1e6 * (1.0 + std::max(std::abs(op.rhs_values().max()), std::abs(op.rhs_values().min())));
    for (long step = 0;; ++step) {
        if (step % s.dt_refresh == 0) {
            dt = stable_dt(op, u.values(), s);
        }
        op.residual(u.values(), 0.0, rate);
        double mean = 0.0;
        for (auto& v : rate) {
            v = -v;
            mean += v;
        }
        mean /= static_cast<double>(n);
        double dev = 0.0;
        for (double v : rate) {
            dev = std::max(dev, std::abs(v - mean));
        }
        bool done = dev <= s.tolerance;
        if (done || step % s.record_stride == 0) {
            sol.trace.records.push_back({step, dev, mean, dt});
        }
        if (done) {
            sol.trace.termination = "converged";
            sol.lambda = mean;
            break;
        }
        if (!std::isfinite(dev) || dev > blowup) {
            sol.trace.termination = "explicit march blew up";
            sol.trace.wall_seconds = seconds_since(start);
            throw SolverFailure(FailureKind::cfl_violation, "relative value iteration blew up; reduce dt", sol.trace);
        }
        if (step >= s.max_steps) {
            sol.trace.termination = "step budget exhausted";
            sol.trace.wall_seconds = seconds_since(start);
            throw SolverFailure(FailureKind::not_converged, "relative value iteration did not converge", sol.trace);
        }
        for (std::size_t k = 0; k < n; ++k) {
            u[k] += dt * rate[k];
        }
        u.normalize_at(anchor);
    }
    sol.phi = std::move(u);
    sol.trace.wall_seconds = seconds_since(start);
    return sol;
}

} // namespace

void write_jsonl(std::ostream& os, const ConvergenceTrace& trace)
{
    for (const auto& r : trace.records) {
        nlohmann::json j = {{"iteration", r.iteration}, {"residual_sup", r.residual_sup}, {"lambda", r.lambda},
            {"step", r.step}};
        os << j.dump() << '\n';
    }
    nlohmann::json summary = {{"termination", trace.termination}, {"wall_seconds", trace.wall_seconds}};
    os << summary.dump() << '\n';
}

std::string to_string(FailureKind kind)
{
    switch (kind) {
    case FailureKind::no_solution_suspected:
        return "no-solution-suspected";
    case FailureKind::not_converged:
        return "not-converged";
    case FailureKind::cfl_violation:
        return "cfl-violation";
    case FailureKind::linear_solve:
        return "linear-solve";
    case FailureKind::resolution:
        return "resolution";
    }
    return "unknown";
}

std::string to_string(ErgodicMethod method)
{
    switch (method) {
    case ErgodicMethod::newton_augmented:
        return "newton_augmented";
    case ErgodicMethod::relative_value_iteration:
        return "relative_value_iteration";
    case ErgodicMethod::policy_iteration:
        return "policy_iteration";
    }
    return "unknown";
}

ErgodicMethod parse_method(const std::string& name)
{
    for (auto m : {ErgodicMethod::newton_augmented, ErgodicMethod::relative_value_iteration,
             ErgodicMethod::policy_iteration}) {
        if (to_string(m) == name) {
            return m;
        }
    }
    throw std::invalid_argument("unknown solver method '" + name + "'");
}

std::string to_string(Verdict v)
{
    switch (v) {
    case Verdict::pass:
        return "pass";
    case Verdict::fail:
        return "fail";
    case Verdict::not_applicable:
        break;
    }
    return "n/a";
}

FieldSolution solve_dirichlet(const ProblemSpec& spec, double lambda, const Field& boundary_data,
    std::optional<Field> initial_guess, const SolverSettings& settings)
{
    DiscreteOperator op(spec, BoundaryPolicy::dirichlet(boundary_data));
    const Grid& g = op.grid();
    const std::size_t n = g.size();
    Field guess = initial_guess ? std::move(*initial_guess) : Field(g);
    if (guess.grid() != g) {
        throw std::invalid_argument("initial guess lives on a different grid");
    }
    for (std::size_t k = 0; k < n; ++k) {
        if (g.is_boundary(k)) {
            guess[k] = boundary_data[k];
        }
    }
    NewtonProblem p;
    p.residual = [&](const Vec& v, Vec& out) { op.residual(head(v, n), lambda, {out.data(), n}); };
    p.jacobian = [&](const Vec& v) { return drift_matrix(op, optimal_drift_field(op, head(v, n))); };
    p.lambda_of = [&](const Vec&) { return lambda; };
    p.full_step_fallback = true;

    FieldSolution sol;
    Vec x;
    try {
        x = damped_newton(to_vec(guess), p, settings, sol.trace);
    } catch (const SolverFailure& e) {
        if (e.kind() != FailureKind::not_converged) {
            throw;
        }
        throw SolverFailure(FailureKind::no_solution_suspected,
            "no-solution-suspected: Newton/policy steps did not settle within the iteration budget", e.trace());
    }
    sol.phi = to_field(g, x, n);
    sol.residual_sup = sol.trace.records.back().residual_sup;
    return sol;
}

FieldSolution solve_discounted(const ProblemSpec& spec, double epsilon, std::optional<Field> initial_guess,
    const SolverSettings& settings)
{
    if (!(epsilon > 0.0)) {
        throw std::invalid_argument("discount rate must be positive");
    }
    DiscreteOperator op(spec, BoundaryPolicy::state_constraint());
    const Grid& g = op.grid();
    const std::size_t n = g.size();
    const std::size_t anchor = g.nearest_node(spec.anchor);
    Field guess = initial_guess ? std::move(*initial_guess) : Field(g, op.rhs_values()[anchor] / epsilon);
    if (guess.grid() != g) {
        throw std::invalid_argument("initial guess lives on a different grid");
    }
    NewtonProblem p;
    p.residual = [&](const Vec& v, Vec& out) {
        op.residual(head(v, n), 0.0, {out.data(), n});
        out += epsilon * v;
    };
    p.jacobian = [&](const Vec& v) {
        SparseMatrix m = drift_matrix(op, optimal_drift_field(op, head(v, n)));
        for (Eigen::Index k = 0; k < m.rows(); ++k) {
            m.coeffRef(k, k) += epsilon;
        }
        return m;
    };
    p.lambda_of = [&](const Vec& v) { return epsilon * v[static_cast<Eigen::Index>(anchor)]; };

    FieldSolution sol;
    Vec x = damped_newton(to_vec(guess), p, settings, sol.trace);
    sol.phi = to_field(g, x, n);
    sol.residual_sup = sol.trace.records.back().residual_sup;
    return sol;
}

ErgodicSolution solve_ergodic(const ProblemSpec& spec, std::optional<Field> initial_guess, ErgodicMethod method,
    const SolverSettings& settings)
{
    DiscreteOperator op(spec, BoundaryPolicy::state_constraint());
    Field guess = initial_guess ? std::move(*initial_guess) : Field(op.grid());
    if (guess.grid() != op.grid()) {
        throw std::invalid_argument("initial guess lives on a different grid");
    }
    if (!guess.all_finite()) {
        throw std::invalid_argument("initial guess has non-finite values");
    }
    ErgodicSolution sol;
    switch (method) {
    case ErgodicMethod::newton_augmented:
        sol = ergodic_newton(op, std::move(guess), settings);
        break;
    case ErgodicMethod::relative_value_iteration:
        sol = ergodic_relative_value_iteration(op, std::move(guess), settings);
        break;
    case ErgodicMethod::policy_iteration:
        sol = ergodic_policy_iteration(op, guess, settings);
        break;
    }
    sol.policy = BoundaryKind::state_constraint;
    finalize_normalized(sol, op);
    return sol;
}

InteriorMinimum interior_minimum_check(const ErgodicSolution& sol, const ProblemSpec& spec, double tol)
{
    InteriorMinimum out;
    const Grid& g = sol.phi.grid();
    auto it = std::min_element(sol.phi.data().begin(), sol.phi.data().end());
    auto k = static_cast<std::size_t>(it - sol.phi.data().begin());
    out.location = g.coordinates(k);
    out.f_value = spec.rhs.value(out.location);
    out.lambda = sol.lambda;
    out.steps_to_boundary = g.steps_to_boundary(k);
    if (sol.policy != BoundaryKind::state_constraint) {
        out.verdict = Verdict::not_applicable;
        return out;
    }
    bool ok = out.steps_to_boundary >= 2 && out.f_value <= sol.lambda + tol;
    out.verdict = ok ? Verdict::pass : Verdict::fail;
    return out;
}

MarchResult parabolic_march(const ProblemSpec& spec, const Field& u0, double final_time, const SolverSettings& s)
{
    const auto start = Clock::now();
    DiscreteOperator op(spec, BoundaryPolicy::state_constraint());
    const Grid& g = op.grid();
    if (u0.grid() != g) {
        throw std::invalid_argument("initial condition lives on a different grid");
    }
    if (!u0.all_finite()) {
        throw std::invalid_argument("initial condition has non-finite values");
    }
    if (!(final_time > 0.0)) {
        throw std::invalid_argument("final time must be positive");
    }
    const std::size_t n = g.size();
    const double blowup = 1e6 * (1.0 + std::max(std::abs(op.rhs_values().max()), std::abs(op.rhs_values().min())));
    MarchResult out;
    Field u = u0;
    std::vector<double> rate(n);
    double t = 0.0;
    double dt = 0.0;
    auto compute_rate = [&](MarchRecord& rec) {
        op.residual(u.values(), 0.0, rate);
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        double mean = 0.0;
        for (auto& v : rate) {
            v = -v;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            mean += v;
        }
        rec.rate_min = lo;
        rec.rate_max = hi;
        rec.rate_mean = mean / static_cast<double>(n);
        if (!std::isfinite(mean) || std::max(std::abs(lo), std::abs(hi)) > blowup) {
            throw SolverFailure(FailureKind::cfl_violation, "parabolic march blew up; reduce dt");
        }
    };
    long step = 0;
    for (;; ++step) {
        MarchRecord rec{step, t};
        compute_rate(rec);
        bool done = t >= final_time;
        if (done || step % s.record_stride == 0) {
            out.records.push_back(rec);
        }
        if (done) {
            out.lambda_hat = rec.rate_mean;
            break;
        }
        if (step >= s.max_steps) {
            throw SolverFailure(FailureKind::not_converged, "parabolic march exceeded its step budget");
        }
        if (step % s.dt_refresh == 0) {
            dt = stable_dt(op, u.values(), s);
        }
        double this_dt = std::min(dt, final_time - t);
        for (std::size_t k = 0; k < n; ++k) {
            u[k] += this_dt * rate[k];
        }
        t = (final_time - t <= dt) ? final_time : t + this_dt;
    }
    out.steps = step;
    out.final_state = u;
    out.profile = u;
    out.profile.normalize_at(g.nearest_node(spec.anchor));
    out.wall_seconds = seconds_since(start);
    return out;
}

std::optional<double> extrapolate_exponential(const std::vector<double>& radii, const std::vector<double>& lambdas)
{
    const std::size_t n = radii.size();
    if (n < 3 || lambdas.size() != n) {
        return std::nullopt;
    }
    double spread = std::abs(lambdas.front() - lambdas.back());
    if (spread < 1e-10) {
        return std::nullopt;
    }
    double best_sse = std::numeric_limits<double>::infinity();
    double best_l = 0.0;
    double best_b = 0.0;
    const double b_lo = 1e-3;
    const double b_hi = 20.0;
    const int samples = 400;
    for (int i = 0; i <= samples; ++i) {
        double b = b_lo * std::pow(b_hi / b_lo, static_cast<double>(i) / samples);
        // linear least squares in (l, a) with basis {1, exp(-b R)}
        double s1 = 0, se = 0, see = 0, sy = 0, sey = 0;
        for (std::size_t k = 0; k < n; ++k) {
            double e = std::exp(-b * radii[k]);
            s1 += 1;
            se += e;
            see += e * e;
            sy += lambdas[k];
            sey += e * lambdas[k];
        }
        double det = s1 * see - se * se;
        if (std::abs(det) < 1e-14 * s1 * see) {
            continue;
        }
        double l = (see * sy - se * sey) / det;
        double a = (s1 * sey - se * sy) / det;
        double sse = 0;
        for (std::size_t k = 0; k < n; ++k) {
            double d = l + a * std::exp(-b * radii[k]) - lambdas[k];
            sse += d * d;
        }
        if (sse < best_sse) {
            best_sse = sse;
            best_l = l;
            best_b = b;
        }
    }
    if (!std::isfinite(best_sse) || best_b <= b_lo * 1.0001 || best_b >= b_hi * 0.9999) {
        return std::nullopt;
    }
    if (std::abs(best_l - lambdas.back()) > spread) {
        return std::nullopt;
    }
    return best_l;
}

LambdaStarEstimate estimate_lambda_star(const ProblemSpec& spec, const std::vector<double>& radii,
    const std::vector<double>& h_per_radius, const LambdaStarOptions& options, const SolverSettings& settings)
{
    if (radii.size() < 3) {
        throw std::invalid_argument("lambda* estimation needs at least three radii");
    }
    if (!std::is_sorted(radii.begin(), radii.end()) || std::adjacent_find(radii.begin(), radii.end()) != radii.end()) {
        throw std::invalid_argument("radii must be strictly increasing");
    }
    if (h_per_radius.size() != 1 && h_per_radius.size() != radii.size()) {
        throw std::invalid_argument("give one grid spacing or one per radius");
    }
    LambdaStarEstimate est;
    std::vector<double> lambdas;
    for (std::size_t i = 0; i < radii.size(); ++i) {
        double h = h_per_radius.size() == 1 ? h_per_radius.front() : h_per_radius[i];
        auto sub = spec.with_radius(radii[i]).with_h(h);
        auto sol = solve_ergodic(sub, std::nullopt, options.method, settings);
        est.table.push_back({radii[i], h, sol.lambda, sol.residual_sup, sol.trace.wall_seconds});
        lambdas.push_back(sol.lambda);
        if (options.keep_solutions) {
            est.solutions.push_back(std::move(sol));
        }
    }
    if (options.slack) {
        est.slack = *options.slack;
    } else {
        const auto& first = est.table.front();
        auto coarse = solve_ergodic(spec.with_radius(first.radius).with_h(2.0 * first.h), std::nullopt,
            options.method, settings);
        est.slack = std::max(2.0 * std::abs(first.lambda - coarse.lambda), 1e-9);
    }
    for (std::size_t i = 1; i < lambdas.size(); ++i) {
        if (lambdas[i] > lambdas[i - 1] + est.slack) {
            est.monotone = false;
        }
    }
    est.last_lambda = lambdas.back();
    auto fit = extrapolate_exponential(radii, lambdas);
    est.extrapolated = fit.has_value();
    est.lambda_star = fit.value_or(est.last_lambda);
    if (!est.monotone && options.strict) {
        throw SolverFailure(FailureKind::resolution,
            "lambda_R increases with R beyond the discretization slack; refine the grid");
    }
    return est;
}

double extrapolate_to_zero(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.empty() || x.size() != y.size()) {
        throw std::invalid_argument("extrapolation needs matching, non-empty samples");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double w = 1.0;
        for (std::size_t j = 0; j < x.size(); ++j) {
            if (j != i) {
                if (x[i] == x[j]) {
                    throw std::invalid_argument("extrapolation abscissae must be distinct");
                }
                w *= (0.0 - x[j]) / (x[i] - x[j]);
            }
        }
        acc += w * y[i];
    }
    return acc;
}

DiscountedEstimate discounted_lambda(const ProblemSpec& spec, const std::vector<double>& epsilons,
    const SolverSettings& settings)
{
    if (epsilons.empty()) {
        throw std::invalid_argument("no discount rates given");
    }
    DiscountedEstimate est;
    est.epsilons = epsilons;
    std::sort(est.epsilons.begin(), est.epsilons.end(), std::greater<>());
    const std::size_t anchor = spec.make_grid().nearest_node(spec.anchor);
    std::optional<Field> guess;
    double prev_eps = 0.0;
    for (double eps : est.epsilons) {
        if (guess) {
            // phi_eps ~ lambda/eps + phi, so move the constant part to the new rate
            double lambda = prev_eps * (*guess)[anchor];
            for (auto& v : guess->data()) {
                v += lambda * (1.0 / eps - 1.0 / prev_eps);
            }
        }
        auto sol = solve_discounted(spec, eps, guess, settings);
        est.values.push_back(eps * sol.phi[anchor]);
        guess = std::move(sol.phi);
        prev_eps = eps;
    }
    est.extrapolated = extrapolate_to_zero(est.epsilons, est.values);
    return est;
}

Field random_initial_guess(const Grid& grid, std::uint64_t seed, double amplitude)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    constexpr int kModes = 4;
    std::array<std::array<double, kModes>, kMaxDim> amp{};
    std::array<std::array<double, kModes>, kMaxDim> ph{};
    for (int a = 0; a < grid.dim(); ++a) {
        for (int k = 0; k < kModes; ++k) {
            amp[static_cast<std::size_t>(a)][static_cast<std::size_t>(k)] = unit(rng) / (k + 1);
            ph[static_cast<std::size_t>(a)][static_cast<std::size_t>(k)] = phase(rng);
        }
    }
    const double curvature = 0.5 * (unit(rng) + 1.0);
    const double ext = grid.extent();
    return sample(grid, [&](const Point& p) {
        double v = 0.0;
        double r2 = 0.0;
        for (int a = 0; a < grid.dim(); ++a) {
            auto ua = static_cast<std::size_t>(a);
            for (int k = 0; k < kModes; ++k) {
                auto uk = static_cast<std::size_t>(k);
                v += amp[ua][uk] * std::sin((k + 1) * std::numbers::pi * p[ua] / ext + ph[ua][uk]);
            }
            r2 += p[ua] * p[ua];
        }
        return amplitude * (v + curvature * r2 / (ext * ext));
    });
}

} // namespace ergodic
