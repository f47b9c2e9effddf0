#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "ergodic/grid.hpp"

using namespace ergodic;

TEST_CASE("grid geometry")
{
    Grid g(2, 1.0, 0.1);
    CHECK(g.n_per_axis() == 21);
    CHECK(g.size() == 441);
    CHECK(g.coordinates(g.origin()) == Point{0.0, 0.0, 0.0});
    for (std::size_t k = 0; k < g.size(); k += 37) {
        CHECK(g.linear_index(g.multi_index(k)) == k);
        auto p = g.coordinates(k);
        CHECK(p[0] == doctest::Approx((g.axis_index(k, 0) - g.half_count()) * 0.1));
    }
    CHECK(g.is_boundary(0));
    CHECK_FALSE(g.is_boundary(g.origin()));
    CHECK(g.steps_to_boundary(g.origin()) == 10);

    // R not a multiple of h rounds to the nearest node count
    Grid r(1, 1.04, 0.1);
    CHECK(r.n_per_axis() == 21);

    CHECK_THROWS_AS(Grid(0, 1.0, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(Grid(4, 1.0, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(Grid(1, -1.0, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(Grid(1, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("one-sided differences")
{
    Grid g(1, 1.0, 0.1);
    Field c(g, 5.0);
    for (std::size_t k = 1; k + 1 < g.size(); ++k) {
        CHECK(forward_diff(c, 0, k) == 0.0);
        CHECK(backward_diff(c, 0, k) == 0.0);
    }
    Field lin = sample(g, [](const Point& p) { return p[0]; });
    for (std::size_t k = 1; k + 1 < g.size(); ++k) {
        CHECK(forward_diff(lin, 0, k) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(backward_diff(lin, 0, k) == doctest::Approx(1.0).epsilon(1e-12));
    }
    Field sq = sample(g, [](const Point& p) { return p[0] * p[0]; });
    CHECK(forward_diff(sq, 0, g.origin()) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(backward_diff(sq, 0, g.origin()) == doctest::Approx(-0.1).epsilon(1e-12));

    CHECK_THROWS_AS(forward_diff(sq, 0, g.size() - 1), std::out_of_range);
    CHECK_THROWS_AS(backward_diff(sq, 0, 0), std::out_of_range);
}

TEST_CASE("laplacian exactness and order")
{
    Grid g1(1, 1.0, 0.1);
    Field c(g1, 3.0);
    Field sq = sample(g1, [](const Point& p) { return p[0] * p[0]; });
    for (std::size_t k = 1; k + 1 < g1.size(); ++k) {
        CHECK(laplacian(c, k) == 0.0);
        CHECK(laplacian(sq, k) == doctest::Approx(2.0).epsilon(1e-10));
    }
    CHECK_THROWS_AS(laplacian(sq, 0), std::out_of_range);

    Grid g2(2, 1.0, 0.1);
    Field q = sample(g2, [](const Point& p) { return p[0] * p[0] + p[1] * p[1]; });
    for (std::size_t k = 0; k < g2.size(); ++k) {
        if (!g2.is_boundary(k)) {
            CHECK(laplacian(q, k) == doctest::Approx(4.0).epsilon(1e-10));
        }
    }

    // sin x cos y has Laplacian -2 sin x cos y; error is O(h^2)
    auto err = [](double h) {
        Grid g(2, 1.0, h);
        Field u = sample(g, [](const Point& p) { return std::sin(p[0]) * std::cos(p[1]); });
        double worst = 0.0;
        for (std::size_t k = 0; k < g.size(); ++k) {
            if (!g.is_boundary(k)) {
                auto p = g.coordinates(k);
                worst = std::max(worst, std::abs(laplacian(u, k) + 2.0 * std::sin(p[0]) * std::cos(p[1])));
            }
        }
        return worst;
    };
    CHECK(std::log2(err(0.1) / err(0.05)) >= 1.9);
}

TEST_CASE("field summaries and normalization")
{
    Grid g(1, 1.0, 0.5);
    Field f(g, std::vector<double>{3.0, -1.0, 2.0, 4.0, 0.5});
    CHECK(f.min() == -1.0);
    CHECK(f.max() == 4.0);
    CHECK(f.all_finite());
    f.normalize_at(g.origin());
    CHECK(f[g.origin()] == 0.0);
    CHECK(f[0] == 1.0);
    f[1] = std::nan("");
    CHECK_FALSE(f.all_finite());
    CHECK_THROWS_AS(Field(g, std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("csv and json round trips are bit exact")
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unit(-1e3, 1e3);
    for (int dim = 1; dim <= 2; ++dim) {
        Grid g(dim, 1.3, 0.1);
        Field f(g);
        for (auto& v : f.data()) {
            v = unit(rng) / 7.0;
        }
        f[0] = 1e-300;
        f[1] = -0.0;

        std::stringstream csv;
        write_csv(csv, f);
        Field back = read_csv(csv, g);
        CHECK(back == f);

        auto j = field_to_json(f);
        Field from_json = field_from_json(nlohmann::json::parse(j.dump()));
        CHECK(from_json == f);
        CHECK(from_json.grid() == g);
    }
    CHECK(grid_from_json(grid_to_json(Grid(3, 0.5, 0.25))) == Grid(3, 0.5, 0.25));
}

TEST_CASE("sup difference within a radius")
{
    Grid g(1, 2.0, 0.5);
    Field a = sample(g, [](const Point& p) { return p[0]; });
    Field b(g);
    CHECK(sup_diff_within(a, b, 1.0) == 1.0);
    CHECK(sup_diff_within(a, b, 2.0) == 2.0);
}
