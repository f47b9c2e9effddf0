#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/SparseCore>

#include "ergodic/grid.hpp"
#include "ergodic/problem.hpp"

namespace ergodic {

using SparseMatrix = Eigen::SparseMatrix<double>;

enum class BoundaryKind { state_constraint, dirichlet };

/// How the discrete operator treats nodes on the box faces.
///
/// state_constraint: stencil arms leaving the grid are dropped from both the
/// Laplacian and the upwind gradient, so only inward information is used.
/// dirichlet: the operator lives on interior nodes; boundary rows pin the
/// field to `boundary_data`.
struct BoundaryPolicy {
    BoundaryKind kind = BoundaryKind::state_constraint;
    std::optional<Field> boundary_data;

    static BoundaryPolicy state_constraint() { return {}; }
    static BoundaryPolicy dirichlet(Field data) { return {BoundaryKind::dirichlet, std::move(data)}; }
};

enum class UpwindBranch : std::uint8_t { none, backward, forward };

/// Godunov upwind gradient at one node.
struct UpwindGradient {
    /// Signed upwind slope per axis: the backward difference when it wins,
    /// the (negative) forward difference when that wins, zero otherwise.
    Point slope{};
    std::array<UpwindBranch, kMaxDim> branch{};
    double magnitude = 0.0;
};

UpwindGradient godunov_gradient(const Field& field, std::size_t node, const BoundaryPolicy& policy);

/// Monotone discretization of G[phi] = -1/2 Lap phi + (1/theta)|D phi|^theta - f.
class DiscreteOperator {
public:
    DiscreteOperator(ProblemSpec spec, BoundaryPolicy policy);

    const ProblemSpec& spec() const { return spec_; }
    const Grid& grid() const { return grid_; }
    const BoundaryPolicy& policy() const { return policy_; }
    const Field& rhs_values() const { return rhs_; }
    double theta() const { return spec_.theta; }

    bool on_dirichlet_boundary(std::size_t node) const
    {
        return policy_.kind == BoundaryKind::dirichlet && (flags_[node] & kBoundaryBit);
    }

    double hamiltonian(double magnitude) const;

    /// Godunov gradient computed from raw values (no bounds checks).
    UpwindGradient upwind(std::span<const double> u, std::size_t node) const;
    /// Laplacian with the policy's treatment of missing arms.
    double laplacian(std::span<const double> u, std::size_t node) const;

    /// out[k] = G_h[u](k) + lambda (or u - g on Dirichlet boundary nodes).
    void residual(std::span<const double> u, double lambda, std::span<double> out) const;

    /// Largest Lipschitz constant of the Hamiltonian over the current upwind
    /// gradients, |p|^{theta-1}.
    double max_hamiltonian_slope(std::span<const double> u) const;

private:
    static constexpr std::uint8_t kBackwardBit = 1;
    static constexpr std::uint8_t kForwardBit = 2;
    static constexpr std::uint8_t kBoundaryBit = 0x80;

    std::uint8_t arms(std::size_t node, int axis) const { return neighbours_[node * kMaxDim + static_cast<std::size_t>(axis)]; }

    ProblemSpec spec_;
    Grid grid_;
    BoundaryPolicy policy_;
    Field rhs_;
    std::vector<std::uint8_t> neighbours_;
    std::vector<std::uint8_t> flags_;
};

Field apply_operator(const DiscreteOperator& op, const Field& phi, double lambda);

/// Legendre-dual optimal drift b* = |p|^{theta-2} p; zero when p = 0.
Point optimal_drift(double theta, const Point& slope);
Point optimal_drift(const DiscreteOperator& op, const Field& phi, std::size_t node);

/// Per-node optimal drifts over the whole grid.
std::vector<Point> optimal_drift_field(const DiscreteOperator& op, std::span<const double> u);

/// Convex conjugate cost (1/theta*)|b|^{theta*}.
double drift_cost(double theta, const Point& drift);

/// Matrix of u -> -1/2 Lap_h u + b.D u, with b.D upwinded in b; Dirichlet
/// boundary rows are identity rows.
SparseMatrix drift_matrix(const DiscreteOperator& op, std::span<const Point> drift);

/// Jacobian of the residual map at phi (lambda enters additively).
SparseMatrix linearize(const DiscreteOperator& op, const Field& phi, double lambda);

/// Residual of the Hopf-Cole transformed equation -1/2 Lap z + N(y, z, Dz)
/// with z = -exp(-phi), centred differences, interior nodes only.
Field hopf_cole_residual(const Field& phi, double lambda, const ProblemSpec& spec);

} // namespace ergodic
