#include "ergodic/problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace ergodic {

struct RhsFunction::Impl {
    Form form = Form::power;
    // power / pure_power
    double c = 1.0;
    double alpha = 0.0;
    double shift = 0.0;
    Point center{};
    // tabulated
    Field table;
    std::vector<Field> table_gradient;
    // blend
    std::optional<RhsFunction> first;
    std::optional<RhsFunction> second;
    double t = 1.0;
    // cached hypothesis constants
    std::optional<double> f0;
    std::optional<double> gradient_constant;
};

std::string to_string(Tristate t)
{
    switch (t) {
    case Tristate::no:
        return "no";
    case Tristate::yes:
        return "yes";
    case Tristate::undetermined:
        break;
    }
    return "undetermined";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double offset_norm2(const Point& y, const Point& center)
{
    double s = 0.0;
    for (std::size_t a = 0; a < y.size(); ++a) {
        double d = y[a] - center[a];
        s += d * d;
    }
    return s;
}

bool is_origin(const Point& p)
{
    return std::all_of(p.begin(), p.end(), [](double v) { return v == 0.0; });
}

// Multilinear interpolation of `f` at `y`; throws outside the table.
double interpolate(const Field& f, const Point& y)
{
    const Grid& g = f.grid();
    const double ext = g.extent();
    std::array<int, kMaxDim> lo{};
    std::array<double, kMaxDim> w{};
    for (int a = 0; a < g.dim(); ++a) {
        auto ua = static_cast<std::size_t>(a);
        double x = y[ua];
        if (x < -ext - 1e-12 || x > ext + 1e-12) {
            throw std::out_of_range("tabulated right-hand side evaluated outside its table");
        }
        double s = (std::clamp(x, -ext, ext) + ext) / g.h();
        int i = std::min(static_cast<int>(std::floor(s)), g.n_per_axis() - 2);
        lo[ua] = i;
        w[ua] = s - i;
    }
    double acc = 0.0;
    int corners = 1 << g.dim();
    for (int mask = 0; mask < corners; ++mask) {
        MultiIndex idx{};
        double weight = 1.0;
        for (int a = 0; a < g.dim(); ++a) {
            auto ua = static_cast<std::size_t>(a);
            bool up = (mask >> a) & 1;
            idx[ua] = lo[ua] + (up ? 1 : 0);
            weight *= up ? w[ua] : 1.0 - w[ua];
        }
        if (weight != 0.0) {
            acc += weight * f[g.linear_index(idx)];
        }
    }
    return acc;
}

struct RadialBounds {
    double sup = 0.0;
    double inf = kInf;
};

// Scans ratio(r) along the first axis out to r = 1e6, including the
// analytic tail limit when known.
template <typename Ratio>
RadialBounds scan_radial(Ratio&& ratio, std::optional<double> tail)
{
    RadialBounds b;
    auto visit = [&](double v) {
        b.sup = std::max(b.sup, v);
        b.inf = std::min(b.inf, v);
    };
    for (int i = 0; i <= 20000; ++i) {
        visit(ratio(i * 1e-3));
    }
    for (double r = 20.0; r <= 1e6; r *= 1.01) {
        visit(ratio(r));
    }
    if (tail) {
        visit(*tail);
    }
    return b;
}

Point axis_point(double r)
{
    Point p{};
    p[0] = r;
    return p;
}

double point_norm(const Point& p)
{
    return std::sqrt(offset_norm2(p, Point{}));
}

std::optional<double> gradient_tail(const RhsFunction& f, double alpha)
{
    using Form = RhsFunction::Form;
    switch (f.form()) {
    case Form::power:
    case Form::pure_power: {
        double a = *f.alpha();
        if (a == alpha) {
            return f.coefficient() * a;
        }
        return a < alpha ? 0.0 : kInf;
    }
    case Form::blend: {
        double t = f.blend_weight();
        auto g1 = gradient_tail(f.blend_first(), alpha);
        auto g2 = gradient_tail(f.blend_second(), alpha);
        if (!g1 || !g2) {
            return std::nullopt;
        }
        return (t > 0 ? t * *g1 : 0.0) + (t < 1 ? (1 - t) * *g2 : 0.0);
    }
    case Form::tabulated:
        break;
    }
    return std::nullopt;
}

void compute_constants(RhsFunction::Impl& impl, const RhsFunction& self)
{
    if (!self.is_radial()) {
        return;
    }
    auto alpha = self.alpha();
    if (!alpha || *alpha <= 0.0) {
        return;
    }
    const double a = *alpha;
    auto h1 = scan_radial(
        [&](double r) { return self.value(axis_point(r)) / (1.0 + std::pow(r, a)); },
        self.tail_coefficient(a));
    if (h1.inf > 0.0 && std::isfinite(h1.sup)) {
        impl.f0 = std::max(h1.sup, 1.0 / h1.inf);
    }
    bool singular_at_center = impl.form == RhsFunction::Form::pure_power && a < 1.0;
    if (impl.form == RhsFunction::Form::blend) {
        // a blend inherits a singular gradient from either component
        auto sing = [](const RhsFunction& f) {
            return f.form() == RhsFunction::Form::pure_power && *f.alpha() < 1.0;
        };
        singular_at_center = (impl.t > 0 && sing(*impl.first)) || (impl.t < 1 && sing(*impl.second));
    }
    if (!singular_at_center) {
        auto h0 = scan_radial(
            [&](double r) {
                double g = point_norm(self.gradient(axis_point(r)));
                return a >= 1.0 ? g / (1.0 + std::pow(r, a - 1.0)) : g;
            },
            a >= 1.0 ? gradient_tail(self, a) : std::optional<double>{});
        if (std::isfinite(h0.sup)) {
            impl.gradient_constant = h0.sup;
        }
    }
}

} // namespace

double RhsFunction::value(const Point& y) const
{
    const Impl& d = *impl_;
    switch (d.form) {
    case Form::power:
        return d.c * std::pow(1.0 + offset_norm2(y, d.center), 0.5 * d.alpha) + d.shift;
    case Form::pure_power: {
        double r2 = offset_norm2(y, d.center);
        if (d.alpha == 0.0) {
            return d.c + d.shift;
        }
        return d.c * std::pow(r2, 0.5 * d.alpha) + d.shift;
    }
    case Form::tabulated:
        return interpolate(d.table, y);
    case Form::blend:
        return d.t * d.first->value(y) + (1.0 - d.t) * d.second->value(y);
    }
    return 0.0;
}

Point RhsFunction::gradient(const Point& y) const
{
    const Impl& d = *impl_;
    Point g{};
    switch (d.form) {
    case Form::power: {
        double s = d.c * d.alpha * std::pow(1.0 + offset_norm2(y, d.center), 0.5 * d.alpha - 1.0);
        for (std::size_t a = 0; a < g.size(); ++a) {
            g[a] = s * (y[a] - d.center[a]);
        }
        break;
    }
    case Form::pure_power: {
        double r2 = offset_norm2(y, d.center);
        if (r2 == 0.0 || d.alpha == 0.0) {
            break;
        }
        double s = d.c * d.alpha * std::pow(r2, 0.5 * d.alpha - 1.0);
        for (std::size_t a = 0; a < g.size(); ++a) {
            g[a] = s * (y[a] - d.center[a]);
        }
        break;
    }
    case Form::tabulated:
        for (std::size_t a = 0; a < d.table_gradient.size(); ++a) {
            g[a] = interpolate(d.table_gradient[a], y);
        }
        break;
    case Form::blend: {
        Point g1 = d.first->gradient(y);
        Point g2 = d.second->gradient(y);
        for (std::size_t a = 0; a < g.size(); ++a) {
            g[a] = d.t * g1[a] + (1.0 - d.t) * g2[a];
        }
        break;
    }
    }
    return g;
}

RhsFunction::Form RhsFunction::form() const
{
    return impl_->form;
}

std::optional<double> RhsFunction::alpha() const
{
    const Impl& d = *impl_;
    switch (d.form) {
    case Form::power:
    case Form::pure_power:
        return d.alpha;
    case Form::tabulated:
        return std::nullopt;
    case Form::blend: {
        auto a1 = d.first->alpha();
        auto a2 = d.second->alpha();
        if (d.t == 1.0) {
            return a1;
        }
        if (d.t == 0.0) {
            return a2;
        }
        if (!a1 || !a2) {
            return std::nullopt;
        }
        return std::max(*a1, *a2);
    }
    }
    return std::nullopt;
}

std::optional<double> RhsFunction::f0() const
{
    return impl_->f0;
}

std::optional<double> RhsFunction::gradient_constant() const
{
    return impl_->gradient_constant;
}

std::optional<double> RhsFunction::infimum() const
{
    const Impl& d = *impl_;
    switch (d.form) {
    case Form::power:
        return d.c + d.shift;
    case Form::pure_power:
        return d.alpha == 0.0 ? d.c + d.shift : d.shift;
    case Form::tabulated:
        return std::nullopt;
    case Form::blend: {
        auto m1 = d.first->infimum();
        auto m2 = d.second->infimum();
        bool same_center = d.first->form() != Form::tabulated && d.second->form() != Form::tabulated
            && d.first->center() == d.second->center();
        if (m1 && m2 && same_center) {
            return d.t * *m1 + (1.0 - d.t) * *m2;
        }
        return std::nullopt;
    }
    }
    return std::nullopt;
}

bool RhsFunction::is_radial() const
{
    const Impl& d = *impl_;
    switch (d.form) {
    case Form::power:
    case Form::pure_power:
        return is_origin(d.center);
    case Form::tabulated:
        return false;
    case Form::blend:
        return d.first->is_radial() && d.second->is_radial();
    }
    return false;
}

std::optional<double> RhsFunction::tail_coefficient(double alpha) const
{
    const Impl& d = *impl_;
    switch (d.form) {
    case Form::power:
    case Form::pure_power:
        if (!is_origin(d.center)) {
            return std::nullopt;
        }
        if (d.alpha == alpha) {
            return alpha == 0.0 ? d.c + d.shift : d.c;
        }
        return d.alpha < alpha ? 0.0 : kInf;
    case Form::tabulated:
        return std::nullopt;
    case Form::blend: {
        auto l1 = d.first->tail_coefficient(alpha);
        auto l2 = d.second->tail_coefficient(alpha);
        if (!l1 || !l2) {
            return std::nullopt;
        }
        return (d.t > 0 ? d.t * *l1 : 0.0) + (d.t < 1 ? (1 - d.t) * *l2 : 0.0);
    }
    }
    return std::nullopt;
}

std::string RhsFunction::describe() const
{
    const Impl& d = *impl_;
    std::ostringstream os;
    switch (d.form) {
    case Form::power:
        os << d.c << "*(1+|y|^2)^(" << d.alpha << "/2)+" << d.shift;
        break;
    case Form::pure_power:
        os << d.c << "*|y|^" << d.alpha << "+" << d.shift;
        break;
    case Form::tabulated:
        os << "tabulated(" << d.table.size() << " nodes)";
        break;
    case Form::blend:
        os << d.t << "*[" << d.first->describe() << "]+" << (1.0 - d.t) << "*[" << d.second->describe() << "]";
        break;
    }
    if ((d.form == Form::power || d.form == Form::pure_power) && !is_origin(d.center)) {
        os << " centred at (" << d.center[0] << "," << d.center[1] << "," << d.center[2] << ")";
    }
    return os.str();
}

double RhsFunction::coefficient() const { return impl_->c; }
double RhsFunction::shift() const { return impl_->shift; }
Point RhsFunction::center() const { return impl_->center; }
double RhsFunction::blend_weight() const { return impl_->t; }

const RhsFunction& RhsFunction::blend_first() const
{
    if (impl_->form != Form::blend) {
        throw std::logic_error("not a blended right-hand side");
    }
    return *impl_->first;
}

const RhsFunction& RhsFunction::blend_second() const
{
    if (impl_->form != Form::blend) {
        throw std::logic_error("not a blended right-hand side");
    }
    return *impl_->second;
}

const Field& RhsFunction::table() const
{
    if (impl_->form != Form::tabulated) {
        throw std::logic_error("not a tabulated right-hand side");
    }
    return impl_->table;
}

const std::vector<Field>& RhsFunction::table_gradient() const
{
    if (impl_->form != Form::tabulated) {
        throw std::logic_error("not a tabulated right-hand side");
    }
    return impl_->table_gradient;
}

namespace {

RhsFunction make_power_form(RhsFunction::Form form, double c, double alpha, double shift, const Point& center)
{
    if (!(c > 0.0) || !std::isfinite(c)) {
        throw std::invalid_argument("power right-hand side needs c > 0");
    }
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
        throw std::invalid_argument("power right-hand side needs alpha >= 0");
    }
    auto impl = std::make_shared<RhsFunction::Impl>();
    impl->form = form;
    impl->c = c;
    impl->alpha = alpha;
    impl->shift = shift;
    impl->center = center;
    RhsFunction view(impl);
    compute_constants(*impl, view);
    return RhsFunction(std::move(impl));
}

} // namespace

RhsFunction make_power_rhs(double c, double alpha, double shift, const Point& center)
{
    return make_power_form(RhsFunction::Form::power, c, alpha, shift, center);
}

RhsFunction make_pure_power_rhs(double c, double alpha, double shift, const Point& center)
{
    return make_power_form(RhsFunction::Form::pure_power, c, alpha, shift, center);
}

RhsFunction make_tabulated_rhs(Field values, std::vector<Field> gradient)
{
    if (static_cast<int>(gradient.size()) != values.grid().dim()) {
        throw std::invalid_argument("tabulated gradient needs one component per axis");
    }
    for (const auto& g : gradient) {
        if (g.grid() != values.grid()) {
            throw std::invalid_argument("tabulated gradient lives on a different grid");
        }
    }
    if (!values.all_finite()) {
        throw std::invalid_argument("tabulated right-hand side has non-finite values");
    }
    auto impl = std::make_shared<RhsFunction::Impl>();
    impl->form = RhsFunction::Form::tabulated;
    impl->table = std::move(values);
    impl->table_gradient = std::move(gradient);
    return RhsFunction(std::move(impl));
}

RhsFunction blend_rhs(const RhsFunction& f1, const RhsFunction& f2, double t)
{
    if (!(t >= 0.0 && t <= 1.0)) {
        throw std::invalid_argument("blend weight must lie in [0, 1]");
    }
    auto impl = std::make_shared<RhsFunction::Impl>();
    impl->form = RhsFunction::Form::blend;
    impl->first = f1;
    impl->second = f2;
    impl->t = t;
    RhsFunction view(impl);
    compute_constants(*impl, view);
    return RhsFunction(std::move(impl));
}

HypothesisReport validate_hypotheses(const RhsFunction& rhs, double theta)
{
    if (!(theta > 1.0)) {
        throw std::invalid_argument("theta must exceed 1");
    }
    HypothesisReport rep;
    rep.alpha = rhs.alpha();
    if (rep.alpha) {
        rep.gamma = *rep.alpha / theta + 1.0;
    }
    using Form = RhsFunction::Form;

    if (rhs.form() == Form::tabulated) {
        const Field& t = rhs.table();
        const Grid& g = t.grid();
        double shell_min = std::numeric_limits<double>::infinity();
        double inner_max = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < g.size(); ++k) {
            int steps = g.steps_to_boundary(k);
            if (steps == 0) {
                shell_min = std::min(shell_min, t[k]);
            } else if (steps >= g.half_count() / 2) {
                inner_max = std::max(inner_max, t[k]);
            }
        }
        rep.coercive = shell_min > inner_max ? Tristate::yes : Tristate::no;
        rep.notes = "tabulated data: growth constants undetermined on R^m; coercivity checked on the outermost table shell";
        return rep;
    }

    auto alpha = *rep.alpha;
    bool bounded = true;
    bool coercive = alpha > 0.0;
    if (rhs.form() == Form::blend) {
        auto sub1 = validate_hypotheses(rhs.blend_first(), theta);
        auto sub2 = validate_hypotheses(rhs.blend_second(), theta);
        double t = rhs.blend_weight();
        bounded = sub1.bounded_below == Tristate::yes && sub2.bounded_below == Tristate::yes;
        coercive = bounded
            && ((t > 0 && sub1.coercive == Tristate::yes) || (t < 1 && sub2.coercive == Tristate::yes));
        if (sub1.bounded_below == Tristate::undetermined || sub2.bounded_below == Tristate::undetermined) {
            rep.bounded_below = Tristate::undetermined;
            rep.coercive = Tristate::undetermined;
            rep.notes = "blend of tabulated data";
            return rep;
        }
    }
    rep.bounded_below = bounded ? Tristate::yes : Tristate::no;
    rep.coercive = coercive ? Tristate::yes : Tristate::no;

    if (alpha <= 0.0) {
        rep.h0 = Tristate::no;
        rep.h1 = Tristate::no;
        rep.notes = "alpha = 0: growth hypotheses need alpha > 0";
        return rep;
    }
    if (!rhs.is_radial()) {
        rep.h0 = Tristate::yes;
        rep.h1 = Tristate::undetermined;
        rep.notes = "off-centre power form: constants not certified";
        return rep;
    }
    rep.gradient_constant = rhs.gradient_constant();
    rep.h0 = rep.gradient_constant ? Tristate::yes : Tristate::no;
    rep.f0 = rhs.f0();
    rep.h1 = rep.f0 ? Tristate::yes : Tristate::no;
    return rep;
}

void ProblemSpec::validate() const
{
    if (!(theta > 1.0)) {
        throw std::invalid_argument("theta must exceed 1");
    }
    if (dim < 1 || dim > kMaxDim) {
        throw std::invalid_argument("dimension must be 1, 2 or 3");
    }
    if (!(radius > 0.0) || !(h > 0.0)) {
        throw std::invalid_argument("radius and grid spacing must be positive");
    }
    for (int a = 0; a < kMaxDim; ++a) {
        double x = anchor[static_cast<std::size_t>(a)];
        if (a >= dim ? x != 0.0 : std::abs(x) > radius) {
            throw std::invalid_argument("anchor lies outside the box");
        }
    }
}

ProblemSpec ProblemSpec::with_radius(double r) const
{
    ProblemSpec s = *this;
    s.radius = r;
    return s;
}

ProblemSpec ProblemSpec::with_h(double spacing) const
{
    ProblemSpec s = *this;
    s.h = spacing;
    return s;
}

ProblemSpec ProblemSpec::with_rhs(RhsFunction f) const
{
    ProblemSpec s = *this;
    s.rhs = std::move(f);
    return s;
}

Field sample_rhs(const RhsFunction& rhs, const Grid& grid)
{
    return sample(grid, [&](const Point& p) { return rhs.value(p); });
}

} // namespace ergodic
