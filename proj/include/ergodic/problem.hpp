#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ergodic/grid.hpp"

namespace ergodic {

enum class Tristate { no, yes, undetermined };

std::string to_string(Tristate t);

/// Right-hand side f of the ergodic problem, together with its gradient.
///
/// Instances are immutable handles; copies share the underlying data.
class RhsFunction {
public:
    enum class Form { power, pure_power, tabulated, blend };

    double value(const Point& y) const;
    Point gradient(const Point& y) const;

    Form form() const;
    /// Growth exponent alpha; empty for tabulated data.
    std::optional<double> alpha() const;
    /// Smallest constant for which the two-sided power bound
    /// f0^{-1}(|y|^alpha + 1) <= f(y) <= f0(|y|^alpha + 1) holds, when certified.
    std::optional<double> f0() const;
    /// Smallest constant K with |Df| <= K(1 + |y|^{alpha-1}) (or |Df| <= K for alpha < 1).
    std::optional<double> gradient_constant() const;
    /// Known global minimum of f over R^m, if analytically available.
    std::optional<double> infimum() const;

    /// True when f depends only on |y| (centred at the origin).
    bool is_radial() const;
    /// lim_{|y|->inf} f(y)/|y|^alpha for radial power-type forms.
    std::optional<double> tail_coefficient(double alpha) const;

    std::string describe() const;

    // Parametric data, for serialization. Only meaningful for the matching form.
    double coefficient() const;
    double shift() const;
    Point center() const;
    double blend_weight() const;
    const RhsFunction& blend_first() const;
    const RhsFunction& blend_second() const;
    const Field& table() const;
    const std::vector<Field>& table_gradient() const;

    struct Impl;
    explicit RhsFunction(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

private:
    std::shared_ptr<const Impl> impl_;
};

/// f(y) = c (1 + |y - center|^2)^{alpha/2} + shift, smooth everywhere.
RhsFunction make_power_rhs(double c, double alpha, double shift, const Point& center = {});

/// f(y) = c |y - center|^alpha + shift; homogeneous, used for scaling laws.
RhsFunction make_pure_power_rhs(double c, double alpha, double shift, const Point& center = {});

/// Values and gradient components tabulated on a grid; multilinear
/// interpolation in between, error outside the table.
RhsFunction make_tabulated_rhs(Field values, std::vector<Field> gradient);

/// Pointwise t f1 + (1 - t) f2.
RhsFunction blend_rhs(const RhsFunction& f1, const RhsFunction& f2, double t);

struct HypothesisReport {
    Tristate bounded_below = Tristate::undetermined;
    Tristate coercive = Tristate::undetermined;
    Tristate h0 = Tristate::undetermined;
    Tristate h1 = Tristate::undetermined;
    std::optional<double> alpha;
    std::optional<double> gamma;
    std::optional<double> f0;
    std::optional<double> gradient_constant;
    std::string notes;
};

HypothesisReport validate_hypotheses(const RhsFunction& rhs, double theta);

/// One instance of the ergodic problem on a box.
struct ProblemSpec {
    double theta = 2.0;
    int dim = 1;
    RhsFunction rhs = make_power_rhs(1.0, 0.0, 0.0);
    double radius = 8.0;
    double h = 0.01;
    Point anchor{};

    double theta_star() const { return theta / (theta - 1.0); }
    Grid make_grid() const { return Grid(dim, radius, h); }
    /// Throws std::invalid_argument when an invariant is violated.
    void validate() const;

    ProblemSpec with_radius(double r) const;
    ProblemSpec with_h(double spacing) const;
    ProblemSpec with_rhs(RhsFunction f) const;
};

/// f evaluated at every node of `grid`.
Field sample_rhs(const RhsFunction& rhs, const Grid& grid);

} // namespace ergodic
