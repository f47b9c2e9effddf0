#include "ergodic/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ergodic {

namespace {

// Clamp for |p| in derivative denominators when theta < 2.
constexpr double kSlopeFloor = 1e-10;

void require_same_grid(const Grid& a, const Grid& b)
{
    if (a != b) {
        throw std::invalid_argument("field lives on a different grid than the operator");
    }
}

double norm(const Point& p)
{
    return std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
}

} // namespace

UpwindGradient godunov_gradient(const Field& field, std::size_t node, const BoundaryPolicy& policy)
{
    const Grid& g = field.grid();
    if (node >= g.size()) {
        throw std::out_of_range("node outside the grid");
    }
    if (policy.kind == BoundaryKind::dirichlet) {
        if (!policy.boundary_data) {
            throw std::invalid_argument("dirichlet policy without boundary data");
        }
        if (g.is_boundary(node)) {
            throw std::out_of_range("dirichlet operator is undefined on boundary nodes");
        }
    }
    UpwindGradient out;
    double sum = 0.0;
    for (int a = 0; a < g.dim(); ++a) {
        auto ua = static_cast<std::size_t>(a);
        bool back = g.has_backward(node, a);
        bool fwd = g.has_forward(node, a);
        double cand_back = back ? std::max(backward_diff(field, a, node), 0.0) : 0.0;
        double cand_fwd = fwd ? std::max(-forward_diff(field, a, node), 0.0) : 0.0;
        if (cand_back > 0.0 && cand_back >= cand_fwd) {
            out.slope[ua] = cand_back;
            out.branch[ua] = UpwindBranch::backward;
        } else if (cand_fwd > 0.0) {
            out.slope[ua] = -cand_fwd;
            out.branch[ua] = UpwindBranch::forward;
        }
        sum += out.slope[ua] * out.slope[ua];
    }
    out.magnitude = std::sqrt(sum);
    return out;
}

DiscreteOperator::DiscreteOperator(ProblemSpec spec, BoundaryPolicy policy)
    : spec_(std::move(spec)), policy_(std::move(policy))
{
    spec_.validate();
    grid_ = spec_.make_grid();
    if (policy_.kind == BoundaryKind::dirichlet) {
        if (!policy_.boundary_data) {
            throw std::invalid_argument("dirichlet policy without boundary data");
        }
        require_same_grid(policy_.boundary_data->grid(), grid_);
    }
    rhs_ = sample_rhs(spec_.rhs, grid_);
    neighbours_.assign(grid_.size() * kMaxDim, 0);
    flags_.assign(grid_.size(), 0);
    for (std::size_t k = 0; k < grid_.size(); ++k) {
        for (int a = 0; a < grid_.dim(); ++a) {
            std::uint8_t arm = 0;
            if (grid_.has_backward(k, a)) {
                arm |= kBackwardBit;
            }
            if (grid_.has_forward(k, a)) {
                arm |= kForwardBit;
            }
            neighbours_[k * kMaxDim + static_cast<std::size_t>(a)] = arm;
        }
        if (grid_.is_boundary(k)) {
            flags_[k] |= kBoundaryBit;
        }
    }
}

double DiscreteOperator::hamiltonian(double magnitude) const
{
    const double theta = spec_.theta;
    if (theta == 2.0) {
        return 0.5 * magnitude * magnitude;
    }
    if (theta == 3.0) {
        return magnitude * magnitude * magnitude / 3.0;
    }
    return std::pow(magnitude, theta) / theta;
}

UpwindGradient DiscreteOperator::upwind(std::span<const double> u, std::size_t node) const
{
    UpwindGradient out;
    const double inv_h = 1.0 / grid_.h();
    const double uk = u[node];
    double sum = 0.0;
    for (int a = 0; a < grid_.dim(); ++a) {
        auto ua = static_cast<std::size_t>(a);
        std::size_t s = grid_.stride(a);
        std::uint8_t arm = arms(node, a);
        double cand_back = (arm & kBackwardBit) ? std::max((uk - u[node - s]) * inv_h, 0.0) : 0.0;
        double cand_fwd = (arm & kForwardBit) ? std::max((uk - u[node + s]) * inv_h, 0.0) : 0.0;
        if (cand_back > 0.0 && cand_back >= cand_fwd) {
            out.slope[ua] = cand_back;
            out.branch[ua] = UpwindBranch::backward;
        } else if (cand_fwd > 0.0) {
            out.slope[ua] = -cand_fwd;
            out.branch[ua] = UpwindBranch::forward;
        }
        sum += out.slope[ua] * out.slope[ua];
    }
    out.magnitude = std::sqrt(sum);
    return out;
}

double DiscreteOperator::laplacian(std::span<const double> u, std::size_t node) const
{
    const double uk = u[node];
    double sum = 0.0;
    for (int a = 0; a < grid_.dim(); ++a) {
        std::size_t s = grid_.stride(a);
        std::uint8_t arm = arms(node, a);
        if (arm & kBackwardBit) {
            sum += u[node - s] - uk;
        }
        if (arm & kForwardBit) {
            sum += u[node + s] - uk;
        }
    }
    return sum / (grid_.h() * grid_.h());
}

void DiscreteOperator::residual(std::span<const double> u, double lambda, std::span<double> out) const
{
    if (u.size() != grid_.size() || out.size() != grid_.size()) {
        throw std::invalid_argument("residual buffers do not match the grid");
    }
    const bool dirichlet = policy_.kind == BoundaryKind::dirichlet;
    for (std::size_t k = 0; k < grid_.size(); ++k) {
        if (dirichlet && (flags_[k] & kBoundaryBit)) {
            out[k] = u[k] - (*policy_.boundary_data)[k];
            continue;
        }
        double mag = upwind(u, k).magnitude;
        out[k] = -0.5 * laplacian(u, k) + hamiltonian(mag) - rhs_[k] + lambda;
    }
}

double DiscreteOperator::max_hamiltonian_slope(std::span<const double> u) const
{
    double worst = 0.0;
    for (std::size_t k = 0; k < grid_.size(); ++k) {
        if (on_dirichlet_boundary(k)) {
            continue;
        }
        worst = std::max(worst, upwind(u, k).magnitude);
    }
    return std::pow(worst, spec_.theta - 1.0);
}

Field apply_operator(const DiscreteOperator& op, const Field& phi, double lambda)
{
    require_same_grid(phi.grid(), op.grid());
    Field out(op.grid());
    op.residual(phi.values(), lambda, out.values());
    return out;
}

Point optimal_drift(double theta, const Point& slope)
{
    double mag = norm(slope);
    Point b{};
    if (mag == 0.0) {
        return b;
    }
    double scale = std::pow(std::max(mag, kSlopeFloor), theta - 2.0);
    for (std::size_t a = 0; a < b.size(); ++a) {
        b[a] = scale * slope[a];
    }
    return b;
}

Point optimal_drift(const DiscreteOperator& op, const Field& phi, std::size_t node)
{
    require_same_grid(phi.grid(), op.grid());
    if (node >= op.grid().size()) {
        throw std::out_of_range("node outside the grid");
    }
    if (op.on_dirichlet_boundary(node)) {
        return Point{};
    }
    return optimal_drift(op.theta(), op.upwind(phi.values(), node).slope);
}

std::vector<Point> optimal_drift_field(const DiscreteOperator& op, std::span<const double> u)
{
    std::vector<Point> out(op.grid().size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        if (!op.on_dirichlet_boundary(k)) {
            out[k] = optimal_drift(op.theta(), op.upwind(u, k).slope);
        }
    }
    return out;
}

double drift_cost(double theta, const Point& drift)
{
    double ts = theta / (theta - 1.0);
    double mag = norm(drift);
    if (mag == 0.0) {
        return 0.0;
    }
    return std::pow(mag, ts) / ts;
}

SparseMatrix drift_matrix(const DiscreteOperator& op, std::span<const Point> drift)
{
    const Grid& g = op.grid();
    if (drift.size() != g.size()) {
        throw std::invalid_argument("drift field does not match the grid");
    }
    const double h = g.h();
    const double diff = 0.5 / (h * h);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(g.size() * static_cast<std::size_t>(1 + 2 * g.dim()));
    for (std::size_t k = 0; k < g.size(); ++k) {
        auto row = static_cast<int>(k);
        if (op.on_dirichlet_boundary(k)) {
            trips.emplace_back(row, row, 1.0);
            continue;
        }
        double diag = 0.0;
        for (int a = 0; a < g.dim(); ++a) {
            auto ua = static_cast<std::size_t>(a);
            std::size_t s = g.stride(a);
            bool back = g.has_backward(k, a);
            bool fwd = g.has_forward(k, a);
            double b = drift[k][ua];
            if (back) {
                trips.emplace_back(row, static_cast<int>(k - s), -diff);
                diag += diff;
            }
            if (fwd) {
                trips.emplace_back(row, static_cast<int>(k + s), -diff);
                diag += diff;
            }
            // b > 0 pairs with the backward difference, b < 0 with the forward one
            if (b > 0.0 && back) {
                trips.emplace_back(row, static_cast<int>(k - s), -b / h);
                diag += b / h;
            } else if (b < 0.0 && fwd) {
                trips.emplace_back(row, static_cast<int>(k + s), b / h);
                diag -= b / h;
            }
        }
        trips.emplace_back(row, row, diag);
    }
    SparseMatrix m(static_cast<int>(g.size()), static_cast<int>(g.size()));
    m.setFromTriplets(trips.begin(), trips.end());
    return m;
}

SparseMatrix linearize(const DiscreteOperator& op, const Field& phi, double /*lambda*/)
{
    require_same_grid(phi.grid(), op.grid());
    auto drift = optimal_drift_field(op, phi.values());
    return drift_matrix(op, drift);
}

Field hopf_cole_residual(const Field& phi, double lambda, const ProblemSpec& spec)
{
    const Grid& g = phi.grid();
    const double theta = spec.theta;
    Field z(g);
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (-phi[k] > 700.0) {
            throw std::overflow_error("exp(-phi) overflows; renormalize phi (e.g. subtract its minimum)");
        }
        z[k] = -std::exp(-phi[k]);
    }
    Field out(g);
    const double h = g.h();
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (g.is_boundary(k)) {
            continue;
        }
        double grad2 = 0.0;
        for (int a = 0; a < g.dim(); ++a) {
            std::size_t s = g.stride(a);
            double dz = (z[k + s] - z[k - s]) / (2.0 * h);
            double q = dz / z[k];
            grad2 += q * q;
        }
        double q = std::sqrt(grad2);
        double f = spec.rhs.value(g.coordinates(k));
        double n = z[k] * (0.5 * grad2 - std::pow(q, theta) / theta + f - lambda);
        out[k] = -0.5 * laplacian(z, k) + n;
    }
    return out;
}

} // namespace ergodic
