#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ergodic/solvers.hpp"

using namespace ergodic;

namespace {

ProblemSpec make_spec(double theta, int dim, double radius, double h, RhsFunction f)
{
    ProblemSpec s;
    s.theta = theta;
    s.dim = dim;
    s.radius = radius;
    s.h = h;
    s.rhs = std::move(f);
    return s;
}

// f = |y|^theta/theta has phi = |y|^2/2 and lambda = m/2.
ProblemSpec closed_form(double theta, int dim, double radius, double h)
{
    return make_spec(theta, dim, radius, h, make_pure_power_rhs(1.0 / theta, theta, 0.0));
}

double sup_error_to_quadratic(const Field& phi, double r_max)
{
    const Grid& g = phi.grid();
    double lo = 1e300;
    double hi = -1e300;
    for (std::size_t k = 0; k < g.size(); ++k) {
        double r = g.norm(k);
        if (r <= r_max) {
            lo = std::min(lo, phi[k] - 0.5 * r * r);
            hi = std::max(hi, phi[k] - 0.5 * r * r);
        }
    }
    return 0.5 * (hi - lo);
}

} // namespace

TEST_CASE("ergodic closed forms")
{
    auto s1 = closed_form(2.0, 1, 8.0, 0.01);
    auto a = solve_ergodic(s1);
    CHECK(std::abs(a.lambda - 0.5) <= 0.02);
    CHECK(sup_error_to_quadratic(a.phi, 4.0) <= 0.05);
    CHECK(a.phi[a.anchor_node] == 0.0);
    CHECK(a.trace.records.back().residual_sup == a.residual_sup);
    CHECK(a.residual_sup <= SolverSettings{}.tolerance);

    auto b = solve_ergodic(closed_form(1.5, 1, 8.0, 0.01));
    CHECK(std::abs(b.lambda - 0.5) <= 0.03);

    auto c = solve_ergodic(closed_form(2.0, 2, 6.0, 0.05));
    CHECK(std::abs(c.lambda - 1.0) <= 0.05);
}

TEST_CASE("ergodic methods agree")
{
    auto s = closed_form(2.0, 1, 4.0, 0.05);
    double newton = solve_ergodic(s).lambda;
    double howard = solve_ergodic(s, std::nullopt, ErgodicMethod::policy_iteration).lambda;
    SolverSettings rvi;
    rvi.tolerance = 1e-7;
    double explicit_rate = solve_ergodic(s, std::nullopt, ErgodicMethod::relative_value_iteration, rvi).lambda;
    CHECK(howard == doctest::Approx(newton).epsilon(1e-8));
    CHECK(explicit_rate == doctest::Approx(newton).epsilon(1e-5));
}

TEST_CASE("constant right-hand side")
{
    auto s = make_spec(2.0, 1, 3.0, 0.05, make_power_rhs(1.0, 0.0, 0.0));
    auto sol = solve_ergodic(s);
    CHECK(sol.lambda == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::max(std::abs(sol.phi.min()), std::abs(sol.phi.max())) <= 1e-10);

    auto disc = solve_discounted(s, 0.25);
    for (double v : disc.phi.data()) {
        CHECK(v == doctest::Approx(4.0).epsilon(1e-10));
    }

    auto march = parabolic_march(s, Field(s.make_grid()), 1.0);
    CHECK(march.lambda_hat == doctest::Approx(1.0).epsilon(1e-12));
    for (const auto& r : march.records) {
        CHECK(r.rate_min == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(r.rate_max == doctest::Approx(1.0).epsilon(1e-10));
    }
    CHECK(march.final_state[0] == doctest::Approx(1.0).epsilon(1e-10));

    auto est = estimate_lambda_star(s, {4.0, 6.0, 8.0}, {0.05});
    for (const auto& row : est.table) {
        CHECK(row.lambda == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("dirichlet problems")
{
    // f = 0 written as 1 - 1
    auto flat = make_spec(2.0, 1, 2.0, 0.05, make_power_rhs(1.0, 0.0, -1.0));
    Field g0(flat.make_grid());
    auto z = solve_dirichlet(flat, 0.0, g0);
    CHECK(std::max(std::abs(z.phi.min()), std::abs(z.phi.max())) <= 1e-10);

    // first-order upwinding; the constant grows like exp(R^2), so keep R small
    auto err = [](double h) {
        auto s = closed_form(2.0, 1, 1.0, h);
        Field data = sample(s.make_grid(), [](const Point& p) { return 0.5 * p[0] * p[0]; });
        auto sol = solve_dirichlet(s, 0.5, data);
        double worst = 0.0;
        for (std::size_t k = 0; k < data.size(); ++k) {
            worst = std::max(worst, std::abs(sol.phi[k] - data[k]));
        }
        return worst;
    };
    double coarse = err(0.025);
    double fine = err(0.0125);
    CHECK(coarse <= 2.0 * 0.025);
    CHECK(std::log2(coarse / fine) >= 0.8);

    auto s = closed_form(2.0, 1, 4.0, 0.05);
    double lambda_hat = solve_ergodic(s).lambda;
    Field data = sample(s.make_grid(), [](const Point& p) { return 0.5 * p[0] * p[0]; });
    try {
        solve_dirichlet(s, lambda_hat + 5.0, data);
        FAIL("expected the solve to fail");
    } catch (const SolverFailure& e) {
        CHECK(e.kind() == FailureKind::no_solution_suspected);
        CHECK(to_string(e.kind()) == "no-solution-suspected");
    }
}

TEST_CASE("discounted route")
{
    auto s = make_spec(2.0, 1, 6.0, 0.02, make_pure_power_rhs(0.5, 2.0, 0.3));
    auto d = discounted_lambda(s, {0.1, 0.05, 0.025});
    CHECK(d.values.size() == 3);
    CHECK(std::abs(d.extrapolated - 0.8) <= 0.03);
}

TEST_CASE("lambda star estimation")
{
    auto s = closed_form(2.0, 1, 8.0, 0.02);
    auto est = estimate_lambda_star(s, {4.0, 6.0, 8.0}, {0.02});
    REQUIRE(est.table.size() == 3);
    for (std::size_t i = 0; i < est.table.size(); ++i) {
        CHECK(std::abs(est.table[i].lambda - 0.5) <= 0.03);
        if (i > 0) {
            CHECK(est.table[i].lambda <= est.table[i - 1].lambda + est.slack);
        }
    }
    CHECK(est.monotone);

    auto q = make_spec(2.0, 1, 8.0, 0.02, make_power_rhs(1.0, 2.0, 0.0));
    auto e2 = estimate_lambda_star(q, {4.0, 6.0, 8.0}, {0.02});
    CHECK(std::abs(e2.lambda_star - (1.0 + 1.0 / std::sqrt(2.0))) <= 0.03);

    CHECK_THROWS(estimate_lambda_star(q, {4.0, 6.0}, {0.02}));
    CHECK_THROWS(estimate_lambda_star(q, {6.0, 4.0, 8.0}, {0.02}));
}

TEST_CASE("extrapolation helpers")
{
    std::vector<double> r{4.0, 6.0, 8.0, 10.0};
    std::vector<double> l;
    for (double x : r) {
        l.push_back(2.0 + 0.5 * std::exp(-0.7 * x));
    }
    auto fit = extrapolate_exponential(r, l);
    REQUIRE(fit.has_value());
    CHECK(*fit == doctest::Approx(2.0).epsilon(1e-3));
    CHECK_FALSE(extrapolate_exponential({4.0, 6.0, 8.0}, {1.0, 1.0, 1.0}).has_value());

    // quadratic through three points is reproduced exactly
    std::vector<double> x{0.1, 0.05, 0.025};
    std::vector<double> y;
    for (double v : x) {
        y.push_back(3.0 - 2.0 * v + 5.0 * v * v);
    }
    CHECK(extrapolate_to_zero(x, y) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("interior minimum")
{
    auto s = closed_form(2.0, 1, 6.0, 0.02);
    auto sol = solve_ergodic(s);
    auto im = interior_minimum_check(sol, s);
    CHECK(im.verdict == Verdict::pass);
    CHECK(std::abs(im.location[0]) <= 0.02);

    auto well = make_spec(2.0, 1, 6.0, 0.02, make_pure_power_rhs(0.5, 2.0, 0.0, Point{2.0, 0.0, 0.0}));
    auto ws = solve_ergodic(well);
    auto wm = interior_minimum_check(ws, well);
    CHECK(wm.verdict == Verdict::pass);
    CHECK(wm.location[0] == doctest::Approx(2.0).epsilon(0.02));

    ErgodicSolution d = sol;
    d.policy = BoundaryKind::dirichlet;
    CHECK(interior_minimum_check(d, s).verdict == Verdict::not_applicable);
    CHECK(to_string(Verdict::not_applicable) == "n/a");
}

TEST_CASE("parabolic march")
{
    auto s = closed_form(2.0, 1, 8.0, 0.05);
    // boundary rows perturb the mean rate at O(h)
    auto drift = [&](double h) {
        auto sh = closed_form(2.0, 1, 8.0, h);
        Field u0 = sample(sh.make_grid(), [](const Point& p) { return 0.5 * p[0] * p[0]; });
        auto run = parabolic_march(sh, u0, 0.5);
        CHECK(sup_error_to_quadratic(run.profile, 4.0) <= 0.02);
        return std::abs(run.lambda_hat - 0.5);
    };
    double d1 = drift(0.05);
    double d2 = drift(0.025);
    CHECK(d1 <= 0.1);
    CHECK(d2 <= 0.6 * d1);

    auto long_run = parabolic_march(s, Field(s.make_grid()), 50.0);
    CHECK(std::abs(long_run.lambda_hat - 0.5) <= 0.03);
    auto sol = solve_ergodic(s);
    CHECK(sup_diff_within(long_run.profile, sol.phi, 4.0) <= 0.05);
}

TEST_CASE("names and traces")
{
    for (auto m : {ErgodicMethod::newton_augmented, ErgodicMethod::relative_value_iteration,
             ErgodicMethod::policy_iteration}) {
        CHECK(parse_method(to_string(m)) == m);
    }
    CHECK_THROWS(parse_method("gradient_descent"));

    ConvergenceTrace t;
    t.records.push_back({1, 0.5, 1.0, 1.0});
    t.termination = "converged";
    std::ostringstream os;
    write_jsonl(os, t);
    CHECK(os.str().find("\"residual_sup\"") != std::string::npos);

    Grid g(2, 2.0, 0.1);
    CHECK(random_initial_guess(g, 4) == random_initial_guess(g, 4));
    CHECK(random_initial_guess(g, 4) != random_initial_guess(g, 5));
}
