#include "ergodic/grid.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace ergodic {

Grid::Grid(int dim, double radius, double h)
    : dim_(dim), radius_(radius), h_(h)
{
    if (dim < 1 || dim > kMaxDim) {
        throw std::invalid_argument("grid dimension must be in [1, 3], got " + std::to_string(dim));
    }
    if (!(radius > 0.0) || !(h > 0.0)) {
        throw std::invalid_argument("grid radius and spacing must be positive");
    }
    half_ = static_cast<int>(std::lround(radius / h));
    if (half_ < 1) {
        throw std::invalid_argument("grid spacing larger than the box radius");
    }
    std::size_t n = static_cast<std::size_t>(2 * half_ + 1);
    std::size_t s = 1;
    for (int a = 0; a < kMaxDim; ++a) {
        strides_[static_cast<std::size_t>(a)] = a < dim_ ? s : 0;
        if (a < dim_) {
            s *= n;
        }
    }
    size_ = s;
}

MultiIndex Grid::multi_index(std::size_t node) const
{
    MultiIndex idx{};
    std::size_t n = static_cast<std::size_t>(n_per_axis());
    for (int a = 0; a < dim_; ++a) {
        idx[static_cast<std::size_t>(a)] = static_cast<int>(node % n);
        node /= n;
    }
    return idx;
}

std::size_t Grid::linear_index(const MultiIndex& idx) const
{
    std::size_t k = 0;
    for (int a = 0; a < dim_; ++a) {
        auto i = idx[static_cast<std::size_t>(a)];
        if (i < 0 || i >= n_per_axis()) {
            throw std::out_of_range("multi-index outside the grid");
        }
        k += static_cast<std::size_t>(i) * stride(a);
    }
    return k;
}

int Grid::axis_index(std::size_t node, int axis) const
{
    return static_cast<int>((node / stride(axis)) % static_cast<std::size_t>(n_per_axis()));
}

Point Grid::coordinates(std::size_t node) const
{
    Point p{};
    for (int a = 0; a < dim_; ++a) {
        p[static_cast<std::size_t>(a)] = static_cast<double>(axis_index(node, a) - half_) * h_;
    }
    return p;
}

double Grid::norm(std::size_t node) const
{
    double s = 0.0;
    for (int a = 0; a < dim_; ++a) {
        double x = static_cast<double>(axis_index(node, a) - half_) * h_;
        s += x * x;
    }
    return std::sqrt(s);
}

std::size_t Grid::nearest_node(const Point& p) const
{
    MultiIndex idx{};
    for (int a = 0; a < dim_; ++a) {
        long i = std::lround(p[static_cast<std::size_t>(a)] / h_) + half_;
        idx[static_cast<std::size_t>(a)] = static_cast<int>(std::clamp(i, 0L, static_cast<long>(2 * half_)));
    }
    return linear_index(idx);
}

bool Grid::is_boundary(std::size_t node) const
{
    for (int a = 0; a < dim_; ++a) {
        int i = axis_index(node, a);
        if (i == 0 || i == 2 * half_) {
            return true;
        }
    }
    return false;
}

bool Grid::has_forward(std::size_t node, int axis) const
{
    return axis_index(node, axis) < 2 * half_;
}

bool Grid::has_backward(std::size_t node, int axis) const
{
    return axis_index(node, axis) > 0;
}

int Grid::steps_to_boundary(std::size_t node) const
{
    int best = 2 * half_;
    for (int a = 0; a < dim_; ++a) {
        int i = axis_index(node, a);
        best = std::min({best, i, 2 * half_ - i});
    }
    return best;
}

bool Grid::operator==(const Grid& other) const
{
    return dim_ == other.dim_ && half_ == other.half_ && h_ == other.h_;
}

Field::Field(Grid grid, double fill) : grid_(grid), values_(grid.size(), fill) {}

Field::Field(Grid grid, std::vector<double> values) : grid_(grid), values_(std::move(values))
{
    if (values_.size() != grid_.size()) {
        throw std::invalid_argument("field value count does not match the grid");
    }
}

double Field::min() const
{
    return *std::min_element(values_.begin(), values_.end());
}

double Field::max() const
{
    return *std::max_element(values_.begin(), values_.end());
}

bool Field::all_finite() const
{
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

void Field::normalize_at(std::size_t node)
{
    double ref = values_.at(node);
    for (auto& v : values_) {
        v -= ref;
    }
}

double forward_diff(const Field& field, int axis, std::size_t node)
{
    const Grid& g = field.grid();
    if (axis < 0 || axis >= g.dim() || !g.has_forward(node, axis)) {
        throw std::out_of_range("forward difference leaves the grid");
    }
    return (field[node + g.stride(axis)] - field[node]) / g.h();
}

double backward_diff(const Field& field, int axis, std::size_t node)
{
    const Grid& g = field.grid();
    if (axis < 0 || axis >= g.dim() || !g.has_backward(node, axis)) {
        throw std::out_of_range("backward difference leaves the grid");
    }
    return (field[node] - field[node - g.stride(axis)]) / g.h();
}

double laplacian(const Field& field, std::size_t node)
{
    const Grid& g = field.grid();
    if (g.is_boundary(node)) {
        throw std::out_of_range("laplacian requires an interior node");
    }
    double h2 = g.h() * g.h();
    double sum = 0.0;
    for (int a = 0; a < g.dim(); ++a) {
        std::size_t s = g.stride(a);
        sum += (field[node + s] - 2.0 * field[node] + field[node - s]) / h2;
    }
    return sum;
}

double sup_diff_within(const Field& a, const Field& b, double radius)
{
    if (a.grid() != b.grid()) {
        throw std::invalid_argument("fields live on different grids");
    }
    double worst = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (a.grid().norm(k) <= radius + 1e-12) {
            worst = std::max(worst, std::abs(a[k] - b[k]));
        }
    }
    return worst;
}

std::string format_double(double x)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

void write_csv(std::ostream& os, const Field& field)
{
    const Grid& g = field.grid();
    static constexpr const char* names[] = {"x", "y", "z"};
    for (int a = 0; a < g.dim(); ++a) {
        os << names[a] << ',';
    }
    os << "value\n";
    for (std::size_t k = 0; k < g.size(); ++k) {
        Point p = g.coordinates(k);
        for (int a = 0; a < g.dim(); ++a) {
            os << format_double(p[static_cast<std::size_t>(a)]) << ',';
        }
        os << format_double(field[k]) << '\n';
    }
}

Field read_csv(std::istream& is, const Grid& grid)
{
    std::string line;
    if (!std::getline(is, line)) {
        throw std::runtime_error("empty field CSV");
    }
    Field out(grid);
    std::size_t k = 0;
    while (std::getline(is, line)) {
        if (line.empty()) {
            continue;
        }
        if (k >= grid.size()) {
            throw std::runtime_error("field CSV has more rows than grid nodes");
        }
        auto comma = line.rfind(',');
        std::string cell = comma == std::string::npos ? line : line.substr(comma + 1);
        out[k++] = std::stod(cell);
    }
    if (k != grid.size()) {
        throw std::runtime_error("field CSV row count does not match the grid");
    }
    return out;
}

nlohmann::json grid_to_json(const Grid& grid)
{
    return {{"dim", grid.dim()}, {"radius", grid.radius()}, {"h", grid.h()},
            {"n_per_axis", grid.n_per_axis()}};
}

Grid grid_from_json(const nlohmann::json& j)
{
    return Grid(j.at("dim").get<int>(), j.at("radius").get<double>(), j.at("h").get<double>());
}

nlohmann::json field_to_json(const Field& field)
{
    return {{"grid", grid_to_json(field.grid())}, {"values", field.data()}};
}

Field field_from_json(const nlohmann::json& j)
{
    return Field(grid_from_json(j.at("grid")), j.at("values").get<std::vector<double>>());
}

} // namespace ergodic
