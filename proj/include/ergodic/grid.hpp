#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace ergodic {

/// Largest dimension the tensor grids support.
inline constexpr int kMaxDim = 3;

using Point = std::array<double, kMaxDim>;
using MultiIndex = std::array<int, kMaxDim>;

/// Uniform tensor grid on the box [-R, R]^m.
///
/// Node coordinates are exactly i*h for integer i in [-K, K] with
/// K = round(R/h), so the node count per axis is always odd and the origin
/// is a node.
class Grid {
public:
    Grid() = default;
    Grid(int dim, double radius, double h);

    int dim() const { return dim_; }
    double radius() const { return radius_; }
    double h() const { return h_; }
    int half_count() const { return half_; }
    int n_per_axis() const { return 2 * half_ + 1; }
    std::size_t size() const { return size_; }

    /// Half-width actually covered by the nodes (K*h).
    double extent() const { return half_ * h_; }

    std::size_t stride(int axis) const { return strides_[static_cast<std::size_t>(axis)]; }

    MultiIndex multi_index(std::size_t node) const;
    std::size_t linear_index(const MultiIndex& idx) const;
    int axis_index(std::size_t node, int axis) const;

    Point coordinates(std::size_t node) const;
    double norm(std::size_t node) const;

    /// Index of the node nearest to `p` (clamped to the box).
    std::size_t nearest_node(const Point& p) const;
    std::size_t origin() const { return nearest_node(Point{}); }

    bool is_boundary(std::size_t node) const;
    bool has_forward(std::size_t node, int axis) const;
    bool has_backward(std::size_t node, int axis) const;

    /// Distance (in node steps) from `node` to the nearest box face.
    int steps_to_boundary(std::size_t node) const;

    bool operator==(const Grid& other) const;
    bool operator!=(const Grid& other) const { return !(*this == other); }

private:
    int dim_ = 1;
    double radius_ = 1.0;
    double h_ = 1.0;
    int half_ = 1;
    std::size_t size_ = 3;
    std::array<std::size_t, kMaxDim> strides_{};
};

/// Real-valued grid function (one value per node).
class Field {
public:
    Field() = default;
    explicit Field(Grid grid, double fill = 0.0);
    Field(Grid grid, std::vector<double> values);

    const Grid& grid() const { return grid_; }
    std::size_t size() const { return values_.size(); }

    double& operator[](std::size_t node) { return values_[node]; }
    double operator[](std::size_t node) const { return values_[node]; }

    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }
    std::vector<double>& data() { return values_; }
    const std::vector<double>& data() const { return values_; }

    double min() const;
    double max() const;
    bool all_finite() const;

    /// Subtracts the value at `node` so the field vanishes there.
    void normalize_at(std::size_t node);

    bool operator==(const Field& other) const = default;

private:
    Grid grid_;
    std::vector<double> values_;
};

/// Samples `fn(point)` at every node.
template <typename Fn>
Field sample(const Grid& grid, Fn&& fn)
{
    Field out(grid);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        out[k] = fn(grid.coordinates(k));
    }
    return out;
}

double forward_diff(const Field& field, int axis, std::size_t node);
double backward_diff(const Field& field, int axis, std::size_t node);

/// Standard (2m+1)-point Laplacian at a strictly interior node.
double laplacian(const Field& field, std::size_t node);

/// Sup norm of `a - b` over the nodes with |y| <= radius.
double sup_diff_within(const Field& a, const Field& b, double radius);

// Serialization: CSV has one row per node (coordinates, then value); JSON
// carries the grid metadata. Values are written with 17 significant digits.
void write_csv(std::ostream& os, const Field& field);
Field read_csv(std::istream& is, const Grid& grid);

nlohmann::json grid_to_json(const Grid& grid);
Grid grid_from_json(const nlohmann::json& j);
nlohmann::json field_to_json(const Field& field);
Field field_from_json(const nlohmann::json& j);

std::string format_double(double x);

} // namespace ergodic
