#pragma once

// Numerical properties of the discrete operator, shared by the unit tests
// and the acceptance binary.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

#include "ergodic/scheme.hpp"

namespace ergodic::checks {

inline ProblemSpec closed_form_spec(double theta, int dim, double radius, double h)
{
    ProblemSpec s;
    s.theta = theta;
    s.dim = dim;
    s.radius = radius;
    s.h = h;
    s.rhs = make_pure_power_rhs(1.0 / theta, theta, 0.0);
    return s;
}

/// Degenerate ellipticity: u <= v with u(x0) = v(x0) gives G[u](x0) >= G[v](x0).
inline int monotonicity_violations(int trials, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double thetas[] = {1.5, 2.0, 3.0};
    int violations = 0;
    for (int t = 0; t < trials; ++t) {
        int dim = 1 + static_cast<int>(rng() % 2);
        double theta = thetas[rng() % 3];
        auto spec = closed_form_spec(theta, dim, 1.0, 0.25);
        DiscreteOperator op(spec, BoundaryPolicy::state_constraint());
        const Grid& g = op.grid();
        Field u(g);
        for (auto& x : u.data()) {
            x = 4.0 * unit(rng) - 2.0;
        }
        Field v = u;
        std::size_t k = rng() % g.size();
        for (std::size_t j = 0; j < g.size(); ++j) {
            if (j != k && rng() % 2 == 0) {
                v[j] += 2.0 * unit(rng);
            }
        }
        double gu = apply_operator(op, u, 0.0)[k];
        double gv = apply_operator(op, v, 0.0)[k];
        if (gu < gv - 1e-12 * (1.0 + std::abs(gu))) {
            ++violations;
        }
    }
    return violations;
}

/// Dyadic values keep u + C exact, so the residual must match bit for bit.
inline bool constant_invariance_exact(std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    for (int dim = 1; dim <= 2; ++dim) {
        for (double theta : {1.5, 2.0, 3.0}) {
            auto spec = closed_form_spec(theta, dim, 2.0, 0.125);
            DiscreteOperator op(spec, BoundaryPolicy::state_constraint());
            Field u(op.grid());
            for (auto& v : u.data()) {
                v = static_cast<double>(rng() % (1u << 20)) / (1u << 20);
            }
            Field shifted = u;
            for (auto& v : shifted.data()) {
                v += 7.0;
            }
            if (apply_operator(op, u, 0.3) != apply_operator(op, shifted, 0.3)) {
                return false;
            }
        }
    }
    return true;
}

/// residual(u, lambda) == residual(u, 0) + lambda exactly.
inline bool lambda_linearity_exact(std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int dim = 1; dim <= 2; ++dim) {
        auto spec = closed_form_spec(2.0, dim, 2.0, 0.1);
        DiscreteOperator op(spec, BoundaryPolicy::state_constraint());
        Field u(op.grid());
        for (auto& v : u.data()) {
            v = unit(rng);
        }
        for (double lambda : {0.5, -3.25, 1e3}) {
            Field a = apply_operator(op, u, lambda);
            Field b = apply_operator(op, u, 0.0);
            for (std::size_t k = 0; k < a.size(); ++k) {
                if (a[k] != b[k] + lambda) {
                    return false;
                }
            }
        }
    }
    return true;
}

/// Largest relative error between J v and a centred difference of the residual.
inline double jacobian_fd_error(double theta, int dim, std::uint64_t seed)
{
    auto spec = closed_form_spec(theta, dim, 2.0, dim == 1 ? 0.05 : 0.2);
    DiscreteOperator op(spec, BoundaryPolicy::state_constraint());
    const Grid& g = op.grid();
    Field u = sample(g, [](const Point& p) {
        return 0.5 * ((p[0] - 0.0137) * (p[0] - 0.0137) + (p[1] + 0.0291) * (p[1] + 0.0291)) + 0.2 * std::sin(p[0]);
    });
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    Eigen::VectorXd v(static_cast<Eigen::Index>(g.size()));
    for (Eigen::Index k = 0; k < v.size(); ++k) {
        v[k] = unit(rng);
    }
    const double eps = 1e-6;
    Field up = u;
    Field dn = u;
    for (std::size_t k = 0; k < g.size(); ++k) {
        up[k] += eps * v[static_cast<Eigen::Index>(k)];
        dn[k] -= eps * v[static_cast<Eigen::Index>(k)];
    }
    Field rp = apply_operator(op, up, 0.0);
    Field rm = apply_operator(op, dn, 0.0);
    Eigen::VectorXd jv = linearize(op, u, 0.0) * v;
    double err = 0.0;
    double scale = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        double fd = (rp[k] - rm[k]) / (2.0 * eps);
        err = std::max(err, std::abs(fd - jv[static_cast<Eigen::Index>(k)]));
        scale = std::max(scale, std::abs(jv[static_cast<Eigen::Index>(k)]));
    }
    return err / scale;
}

/// Sup of G_h[phi] + lambda on |y| <= R/2 for the exact pair phi = |y|^2/2,
/// lambda = m/2 of f = |y|^theta/theta.
inline double consistency_error(double theta, int dim, double h)
{
    auto spec = closed_form_spec(theta, dim, 4.0, h);
    DiscreteOperator op(spec, BoundaryPolicy::state_constraint());
    const Grid& g = op.grid();
    Field phi = sample(g, [](const Point& p) { return 0.5 * (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]); });
    Field r = apply_operator(op, phi, 0.5 * dim);
    double worst = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (g.norm(k) <= 2.0) {
            worst = std::max(worst, std::abs(r[k]));
        }
    }
    return worst;
}

inline double consistency_order(double theta, int dim)
{
    double coarse = consistency_error(theta, dim, 0.1);
    double fine = consistency_error(theta, dim, 0.05);
    return std::log2(coarse / fine);
}

/// Hopf-Cole residual of the exact solution on |y| <= 2.
inline double hopf_cole_error(double theta, int dim, double h)
{
    auto spec = closed_form_spec(theta, dim, 3.0, h);
    const Grid g = spec.make_grid();
    Field phi = sample(g, [](const Point& p) { return 0.5 * (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]); });
    Field r = hopf_cole_residual(phi, 0.5 * dim, spec);
    double worst = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (g.norm(k) <= 2.0) {
            worst = std::max(worst, std::abs(r[k]));
        }
    }
    return worst;
}

inline double hopf_cole_order(double theta, int dim)
{
    return std::log2(hopf_cole_error(theta, dim, 0.1) / hopf_cole_error(theta, dim, 0.05));
}

} // namespace ergodic::checks
