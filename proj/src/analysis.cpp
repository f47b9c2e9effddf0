#include "ergodic/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "ergodic/scheme.hpp"

namespace ergodic {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string num(double x)
{
    return format_double(x);
}

double oscillation(const Field& a, const Field& b)
{
    double lo = kInf;
    double hi = -kInf;
    for (std::size_t k = 0; k < a.size(); ++k) {
        double d = a[k] - b[k];
        lo = std::min(lo, d);
        hi = std::max(hi, d);
    }
    return hi - lo;
}

double slope(const std::vector<double>& x, const std::vector<double>& y)
{
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

PlotTable radius_table(const std::string& name, const LambdaStarEstimate& est)
{
    PlotTable t{name, {"radius", "h", "lambda_R", "residual_sup"}, {}};
    for (const auto& row : est.table) {
        t.rows.push_back({row.radius, row.h, row.lambda, row.residual_sup});
    }
    return t;
}

void add_spec_inputs(VerdictReport& r, const ProblemSpec& spec)
{
    r.inputs.emplace_back("theta", num(spec.theta));
    r.inputs.emplace_back("dim", std::to_string(spec.dim));
    r.inputs.emplace_back("rhs", spec.rhs.describe());
    r.inputs.emplace_back("radius", num(spec.radius));
    r.inputs.emplace_back("h", num(spec.h));
}

void add_plan_inputs(VerdictReport& r, const EstimationPlan& plan)
{
    std::string radii;
    for (double x : plan.radii) {
        radii += (radii.empty() ? "" : " ") + num(x);
    }
    std::string hs;
    for (double x : plan.h) {
        hs += (hs.empty() ? "" : " ") + num(x);
    }
    r.inputs.emplace_back("radii", radii);
    r.inputs.emplace_back("h_schedule", hs);
    r.inputs.emplace_back("method", to_string(plan.method));
}

} // namespace

std::string to_string(Relation r)
{
    switch (r) {
    case Relation::equal:
        return "equal";
    case Relation::at_most:
        return "at_most";
    case Relation::at_least:
        return "at_least";
    case Relation::positive:
        return "positive";
    }
    return "unknown";
}

bool Comparison::holds() const
{
    if (std::isnan(measured) || std::isnan(predicted)) {
        return false;
    }
    switch (relation) {
    case Relation::equal:
        return std::abs(measured - predicted) <= tolerance;
    case Relation::at_most:
        return measured <= predicted + tolerance;
    case Relation::at_least:
        return measured >= predicted - tolerance;
    case Relation::positive:
        return measured > predicted;
    }
    return false;
}

void VerdictReport::settle()
{
    pass = applicable && !comparisons.empty()
        && std::all_of(comparisons.begin(), comparisons.end(), [](const Comparison& c) { return c.holds(); });
}

nlohmann::json to_json(const VerdictReport& report)
{
    nlohmann::json comps = nlohmann::json::array();
    for (const auto& c : report.comparisons) {
        comps.push_back({{"label", c.label}, {"measured", c.measured}, {"predicted", c.predicted},
            {"relation", to_string(c.relation)}, {"tolerance", c.tolerance}, {"holds", c.holds()}});
    }
    nlohmann::json inputs = nlohmann::json::object();
    for (const auto& [k, v] : report.inputs) {
        inputs[k] = v;
    }
    return {{"name", report.name}, {"provenance", report.provenance}, {"applicable", report.applicable},
        {"pass", report.pass}, {"comparisons", comps}, {"inputs", inputs}, {"notes", report.notes}};
}

void write_reports_json(std::ostream& os, const std::vector<VerdictReport>& reports)
{
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : reports) {
        arr.push_back(to_json(r));
    }
    os << arr.dump(2) << '\n';
}

void write_summary_csv(std::ostream& os, const std::vector<VerdictReport>& reports)
{
    os << "check,applicable,pass,label,measured,predicted,relation,tolerance,holds\n";
    for (const auto& r : reports) {
        if (r.comparisons.empty()) {
            os << r.name << ',' << r.applicable << ',' << r.pass << ",,,,,,\n";
        }
        for (const auto& c : r.comparisons) {
            os << r.name << ',' << r.applicable << ',' << r.pass << ',' << c.label << ',' << num(c.measured) << ','
               << num(c.predicted) << ',' << to_string(c.relation) << ',' << num(c.tolerance) << ',' << c.holds()
               << '\n';
        }
    }
}

void write_plot_csv(std::ostream& os, const PlotTable& table)
{
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        os << (i ? "," : "") << table.columns[i];
    }
    os << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            os << (i ? "," : "") << num(row[i]);
        }
        os << '\n';
    }
}

LambdaStarEstimate lambda_star_for(const ProblemSpec& base, const RhsFunction& f, const EstimationPlan& plan)
{
    LambdaStarOptions opts;
    opts.method = plan.method;
    opts.strict = false;
    opts.slack = 0.0;
    return estimate_lambda_star(base.with_rhs(f), plan.radii, plan.h, opts, plan.settings);
}

RhsFunction shift_rhs(const RhsFunction& f, double c)
{
    switch (f.form()) {
    case RhsFunction::Form::power:
        return make_power_rhs(f.coefficient(), *f.alpha(), f.shift() + c, f.center());
    case RhsFunction::Form::pure_power:
        return make_pure_power_rhs(f.coefficient(), *f.alpha(), f.shift() + c, f.center());
    case RhsFunction::Form::tabulated: {
        Field values = f.table();
        for (auto& v : values.data()) {
            v += c;
        }
        return make_tabulated_rhs(std::move(values), f.table_gradient());
    }
    case RhsFunction::Form::blend:
        return blend_rhs(shift_rhs(f.blend_first(), c), shift_rhs(f.blend_second(), c), f.blend_weight());
    }
    throw std::logic_error("unknown right-hand side form");
}

GrowthFit fit_growth_exponent(const Field& phi, double r0, double r1)
{
    const Grid& g = phi.grid();
    if (!(r0 > 0.0) || !(r1 > r0)) {
        throw std::invalid_argument("growth fit needs 0 < r0 < r1");
    }
    if (r1 > 0.6 * g.extent() * (1.0 + 1e-12)) {
        throw std::invalid_argument("growth fit window must stay within 0.6 R of the origin");
    }
    Field shifted = phi;
    const double lift = 1.0 - phi.min();
    for (auto& v : shifted.data()) {
        v += lift;
    }
    GrowthFit fit;
    fit.samples = {"growth_fit", {"log_r", "log_phi", "log_grad"}, {}};
    std::vector<double> lr, lp, lrg, lg;
    const auto policy = BoundaryPolicy::state_constraint();
    for (std::size_t k = 0; k < g.size(); ++k) {
        double r = g.norm(k);
        if (r < r0 || r > r1) {
            continue;
        }
        double grad = godunov_gradient(shifted, k, policy).magnitude;
        double l = std::log(r);
        lr.push_back(l);
        lp.push_back(std::log(shifted[k]));
        if (grad > 0.0) {
            lrg.push_back(l);
            lg.push_back(std::log(grad));
        }
        fit.samples.rows.push_back({l, std::log(shifted[k]), grad > 0.0 ? std::log(grad) : -kInf});
    }
    fit.nodes = lr.size();
    if (fit.nodes < 10) {
        throw std::invalid_argument("growth fit annulus contains fewer than 10 nodes");
    }
    fit.gamma = slope(lr, lp);
    fit.gradient_exponent = lg.size() >= 2 ? slope(lrg, lg) : 0.0;
    return fit;
}

VerdictReport check_growth_exponent(const ProblemSpec& spec, double rel_tolerance, ErgodicMethod method,
    const SolverSettings& settings)
{
    auto alpha = spec.rhs.alpha();
    if (!alpha) {
        throw std::invalid_argument("growth check needs a right-hand side with a known alpha");
    }
    VerdictReport r;
    r.name = "growth_exponent";
    r.provenance = "gamma = alpha/theta + 1";
    add_spec_inputs(r, spec);
    auto sol = solve_ergodic(spec, std::nullopt, method, settings);
    const double ext = sol.phi.grid().extent();
    auto fit = fit_growth_exponent(sol.phi, 0.3 * ext, 0.6 * ext);
    const double gamma = *alpha / spec.theta + 1.0;
    r.comparisons.push_back({"gamma", fit.gamma, gamma, Relation::equal, rel_tolerance * gamma});
    r.comparisons.push_back(
        {"gradient_exponent", fit.gradient_exponent, gamma - 1.0, Relation::equal, rel_tolerance * gamma});
    r.inputs.emplace_back("window", num(0.3 * ext) + " " + num(0.6 * ext));
    r.inputs.emplace_back("fit_nodes", std::to_string(fit.nodes));
    r.plots.push_back(std::move(fit.samples));
    r.settle();
    return r;
}

VerdictReport check_scaling_law(const ProblemSpec& base, double alpha, double c, const EstimationPlan& plan,
    double rel_tolerance)
{
    if (!(c > 0.0)) {
        throw std::invalid_argument("scaling law needs c > 0");
    }
    VerdictReport r;
    r.name = "scaling_law";
    add_spec_inputs(r, base);
    add_plan_inputs(r, plan);
    r.inputs.emplace_back("alpha", num(alpha));
    r.inputs.emplace_back("c", num(c));
    const double ts = base.theta_star();
    if (alpha >= 1.0) {
        r.provenance = "lambda*(c|y|^alpha) = c^{theta*/(theta*+alpha)} lambda*(|y|^alpha)";
        auto unit = lambda_star_for(base, make_pure_power_rhs(1.0, alpha, 0.0), plan);
        auto scaled = lambda_star_for(base, make_pure_power_rhs(c, alpha, 0.0), plan);
        const double predicted = std::pow(c, ts / (ts + alpha));
        r.comparisons.push_back({"ratio", scaled.lambda_star / unit.lambda_star, predicted, Relation::equal,
            rel_tolerance * predicted});
        r.inputs.emplace_back("lambda_unit", num(unit.lambda_star));
        r.inputs.emplace_back("lambda_scaled", num(scaled.lambda_star));
        r.plots.push_back(radius_table("lambda_R_unit", unit));
        r.plots.push_back(radius_table("lambda_R_scaled", scaled));
    } else {
        r.provenance = "0 <= lambda*(c(1+|y|^2)^{alpha/2}) <= c + c^{theta*/(theta*+1)} lambda*(|y|)";
        auto smooth = lambda_star_for(base, make_power_rhs(c, alpha, 0.0), plan);
        auto linear = lambda_star_for(base, make_pure_power_rhs(1.0, 1.0, 0.0), plan);
        const double upper = c + std::pow(c, ts / (ts + 1.0)) * linear.lambda_star;
        r.comparisons.push_back({"lower", smooth.lambda_star, 0.0, Relation::at_least, rel_tolerance * upper});
        r.comparisons.push_back({"upper", smooth.lambda_star, upper, Relation::at_most, rel_tolerance * upper});
        r.inputs.emplace_back("lambda_linear", num(linear.lambda_star));
        r.plots.push_back(radius_table("lambda_R_smooth", smooth));
        r.plots.push_back(radius_table("lambda_R_linear", linear));
    }
    r.settle();
    return r;
}

VerdictReport check_shift_equivariance(const ProblemSpec& base, const RhsFunction& f, double c,
    const EstimationPlan& plan, double tolerance)
{
    VerdictReport r;
    r.name = "shift_equivariance";
    r.provenance = "lambda*(f + c) = lambda*(f) + c";
    add_spec_inputs(r, base.with_rhs(f));
    add_plan_inputs(r, plan);
    r.inputs.emplace_back("c", num(c));
    LambdaStarOptions opts;
    opts.method = plan.method;
    opts.strict = false;
    opts.slack = 0.0;
    opts.keep_solutions = true;
    auto a = estimate_lambda_star(base.with_rhs(f), plan.radii, plan.h, opts, plan.settings);
    auto b = estimate_lambda_star(base.with_rhs(shift_rhs(f, c)), plan.radii, plan.h, opts, plan.settings);
    r.comparisons.push_back({"lambda_difference", b.lambda_star - a.lambda_star, c, Relation::equal, tolerance});
    const Field& pa = a.solutions.back().phi;
    const Field& pb = b.solutions.back().phi;
    r.comparisons.push_back(
        {"profile_sup_difference", sup_diff_within(pa, pb, pa.grid().extent()), 0.0, Relation::at_most, tolerance});
    r.settle();
    return r;
}

std::vector<VerdictReport> check_lambda_shape(const ProblemSpec& base, const RhsFunction& f1, const RhsFunction& f2,
    const std::vector<double>& ts, const EstimationPlan& plan, double tolerance)
{
    if (plan.radii.empty()) {
        throw std::invalid_argument("estimation plan has no radii");
    }
    const double l1 = lambda_star_for(base, f1, plan).lambda_star;
    const double l2 = lambda_star_for(base, f2, plan).lambda_star;

    VerdictReport mono;
    mono.name = "monotonicity";
    mono.provenance = "f1 <= f2 implies lambda*(f1) <= lambda*(f2)";
    mono.inputs.emplace_back("f1", f1.describe());
    mono.inputs.emplace_back("f2", f2.describe());
    add_plan_inputs(mono, plan);
    const double h_last = plan.h.size() == 1 ? plan.h.front() : plan.h.back();
    Grid box(base.dim, plan.radii.back(), h_last);
    bool ordered = true;
    for (std::size_t k = 0; k < box.size() && ordered; ++k) {
        auto y = box.coordinates(k);
        ordered = f1.value(y) <= f2.value(y);
    }
    if (ordered) {
        mono.comparisons.push_back({"lambda_f1_vs_f2", l1, l2, Relation::at_most, tolerance});
    } else {
        mono.applicable = false;
        mono.notes = "f1 <= f2 fails on the box; monotonicity does not apply to this pair";
    }
    mono.settle();

    VerdictReport conc;
    conc.name = "concavity";
    conc.provenance = "lambda*(t f1 + (1-t) f2) >= t lambda*(f1) + (1-t) lambda*(f2)";
    conc.inputs = mono.inputs;
    PlotTable curve{"lambda_blend", {"t", "lambda", "chord"}, {}};
    for (double t : ts) {
        double lt = t == 1.0 ? l1 : t == 0.0 ? l2 : lambda_star_for(base, blend_rhs(f1, f2, t), plan).lambda_star;
        double chord = t * l1 + (1.0 - t) * l2;
        conc.comparisons.push_back({"t=" + num(t), lt, chord, Relation::at_least, tolerance});
        curve.rows.push_back({t, lt, chord});
    }
    conc.plots.push_back(std::move(curve));
    conc.settle();
    return {mono, conc};
}

double continuity_gap(const RhsFunction& f1, const RhsFunction& f2, double alpha, const Grid& box)
{
    auto ratio = [&](const Point& y) {
        double r = std::sqrt(y[0] * y[0] + y[1] * y[1] + y[2] * y[2]);
        return std::abs(f1.value(y) - f2.value(y)) / (1.0 + std::pow(r, alpha));
    };
    double gap = 0.0;
    if (f1.is_radial() && f2.is_radial()) {
        for (double r = 0.0; r <= 20.0; r += 1e-3) {
            gap = std::max(gap, ratio(Point{r, 0.0, 0.0}));
        }
        for (double r = 20.0; r <= 1e6; r *= 1.01) {
            gap = std::max(gap, ratio(Point{r, 0.0, 0.0}));
        }
        auto t1 = f1.tail_coefficient(alpha);
        auto t2 = f2.tail_coefficient(alpha);
        if (t1 && t2) {
            gap = std::max(gap, std::abs(*t1 - *t2));
        }
        return gap;
    }
    for (std::size_t k = 0; k < box.size(); ++k) {
        gap = std::max(gap, ratio(box.coordinates(k)));
    }
    return gap;
}

VerdictReport check_continuity_bound(const ProblemSpec& base, const RhsFunction& f1, const RhsFunction& f2,
    double alpha, std::optional<double> f0, const EstimationPlan& plan, double tolerance)
{
    if (alpha < 1.0) {
        throw std::invalid_argument("continuity bound needs alpha >= 1");
    }
    auto c1 = f1.f0();
    auto c2 = f2.f0();
    if (!c1 || !c2) {
        throw std::invalid_argument("continuity bound needs certified f0 constants for both right-hand sides");
    }
    const double needed = std::max(*c1, *c2);
    const double shared = f0.value_or(needed);
    if (shared < needed * (1.0 - 1e-12)) {
        throw std::invalid_argument("f0 mismatch: " + num(shared) + " is below the constant " + num(needed)
            + " required by one of the right-hand sides");
    }
    VerdictReport r;
    r.name = "continuity_bound";
    r.provenance = "|lambda*(f2) - lambda*(f1)| <= f0 m/(1 + f0 m) max(lambda*(f1), lambda*(f2))";
    r.inputs.emplace_back("f1", f1.describe());
    r.inputs.emplace_back("f2", f2.describe());
    add_plan_inputs(r, plan);
    const double l1 = lambda_star_for(base, f1, plan).lambda_star;
    const double l2 = lambda_star_for(base, f2, plan).lambda_star;
    const double h_last = plan.h.size() == 1 ? plan.h.front() : plan.h.back();
    const double m = continuity_gap(f1, f2, alpha, Grid(base.dim, plan.radii.back(), h_last));
    const double bound = shared * m / (1.0 + shared * m) * std::max(l1, l2);
    r.inputs.emplace_back("f0", num(shared));
    r.inputs.emplace_back("gap_m", num(m));
    r.inputs.emplace_back("lambda_f1", num(l1));
    r.inputs.emplace_back("lambda_f2", num(l2));
    r.comparisons.push_back({"lambda_gap", std::abs(l2 - l1), bound, Relation::at_most, tolerance});
    r.settle();
    return r;
}

VerdictReport check_power_supersolution(const ErgodicSolution& sol, const ProblemSpec& spec, double q,
    double r_inner)
{
    if (!(q >= 1.0) || q > 1.05) {
        throw std::invalid_argument("supersolution check needs q in [1, 1.05]");
    }
    DiscreteOperator op(spec, BoundaryPolicy::state_constraint());
    const Grid& g = op.grid();
    if (sol.phi.grid() != g) {
        throw std::invalid_argument("solution lives on a different grid than the spec");
    }
    const double lift = 1.0 - sol.phi.min();
    Field psi(g);
    for (std::size_t k = 0; k < g.size(); ++k) {
        psi[k] = std::pow(sol.phi[k] + lift, q);
    }
    Field qfield = apply_operator(op, psi, sol.lambda);
    const double r_outer = 0.8 * g.extent();
    double margin = kInf;
    std::size_t count = 0;
    PlotTable profile{"supersolution_margin", {"r", "Q"}, {}};
    for (std::size_t k = 0; k < g.size(); ++k) {
        double r = g.norm(k);
        if (r < r_inner || r > r_outer) {
            continue;
        }
        ++count;
        margin = std::min(margin, qfield[k]);
        profile.rows.push_back({r, qfield[k]});
    }
    if (count == 0) {
        throw std::invalid_argument("supersolution annulus contains no nodes");
    }
    VerdictReport r;
    r.name = "power_supersolution";
    r.provenance = "phi^q is a strict supersolution outside a large ball";
    add_spec_inputs(r, spec);
    r.inputs.emplace_back("q", num(q));
    r.inputs.emplace_back("r_inner", num(r_inner));
    r.inputs.emplace_back("r_outer", num(r_outer));
    r.comparisons.push_back({"min_Q", margin, 0.0, Relation::positive, 0.0});
    r.plots.push_back(std::move(profile));
    r.settle();
    return r;
}

double gradient_estimate_ratio(const Field& phi, double lambda, const ProblemSpec& spec, double r_prime,
    double r_outer)
{
    const Grid& g = phi.grid();
    if (r_prime + 1.0 > r_outer * (1.0 + 1e-12)) {
        throw std::invalid_argument("gradient estimate needs r_prime + 1 <= r_outer");
    }
    const auto policy = BoundaryPolicy::state_constraint();
    double grad = 0.0;
    double fpart = 0.0;
    double dfpart = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        double r = g.norm(k);
        if (r <= r_prime) {
            grad = std::max(grad, godunov_gradient(phi, k, policy).magnitude);
        }
        if (r <= r_outer) {
            auto y = g.coordinates(k);
            auto df = spec.rhs.gradient(y);
            double dn = std::sqrt(df[0] * df[0] + df[1] * df[1] + df[2] * df[2]);
            fpart = std::max(fpart, std::pow(std::abs(spec.rhs.value(y) - lambda), 1.0 / spec.theta));
            dfpart = std::max(dfpart, std::pow(dn, 1.0 / (2.0 * spec.theta - 1.0)));
        }
    }
    return grad / (1.0 + fpart + dfpart);
}

VerdictReport check_gradient_estimate(const ProblemSpec& base, const std::vector<GradientWindow>& windows,
    ErgodicMethod method, const SolverSettings& settings)
{
    if (windows.empty()) {
        throw std::invalid_argument("gradient estimate needs at least one window");
    }
    VerdictReport r;
    r.name = "gradient_estimate";
    r.provenance = "K depends only on the dimension and theta";
    add_spec_inputs(r, base);
    PlotTable table{"gradient_ratio", {"r_prime", "r_outer", "K_hat"}, {}};
    double lo = kInf;
    double hi = 0.0;
    for (const auto& w : windows) {
        auto spec = base.with_radius(w.r_outer);
        auto sol = solve_ergodic(spec, std::nullopt, method, settings);
        double k = gradient_estimate_ratio(sol.phi, sol.lambda, spec, w.r_prime, w.r_outer);
        lo = std::min(lo, k);
        hi = std::max(hi, k);
        table.rows.push_back({w.r_prime, w.r_outer, k});
    }
    double band = hi == 0.0 ? 1.0 : (lo > 0.0 ? hi / lo : kInf);
    r.comparisons.push_back({"band", band, 2.0, Relation::at_most, 0.0});
    r.plots.push_back(std::move(table));
    r.settle();
    return r;
}

VerdictReport check_dirichlet_family(const ProblemSpec& spec, const std::vector<double>& lambdas,
    double lambda_star, double margin, double boundary_value, const SolverSettings& settings)
{
    for (double l : lambdas) {
        if (l >= lambda_star - margin) {
            throw std::invalid_argument("lambda " + num(l) + " is not below lambda* - margin");
        }
    }
    VerdictReport r;
    r.name = "dirichlet_family";
    r.provenance = "solvable for every level below lambda*";
    add_spec_inputs(r, spec);
    r.inputs.emplace_back("lambda_star", num(lambda_star));
    r.inputs.emplace_back("boundary_value", num(boundary_value));
    Field data(spec.make_grid(), boundary_value);
    for (double l : lambdas) {
        double res = kInf;
        try {
            res = solve_dirichlet(spec, l, data, std::nullopt, settings).residual_sup;
        } catch (const SolverFailure& e) {
            r.notes += "lambda=" + num(l) + ": " + e.what() + "; ";
        }
        r.comparisons.push_back({"residual at lambda=" + num(l), res, settings.tolerance, Relation::at_most, 0.0});
    }
    r.settle();
    return r;
}

ThresholdSearch locate_dirichlet_threshold(const ProblemSpec& spec, double lo, double hi, double resolution,
    double boundary_value, const SolverSettings& settings)
{
    if (!(hi > lo) || !(resolution > 0.0)) {
        throw std::invalid_argument("bisection needs lo < hi and a positive resolution");
    }
    Field data(spec.make_grid(), boundary_value);
    ThresholdSearch out;
    std::optional<Field> warm;
    auto attempt = [&](double l) -> bool {
        ++out.evaluations;
        try {
            auto sol = solve_dirichlet(spec, l, data, warm, settings);
            warm = std::move(sol.phi);
            return true;
        } catch (const SolverFailure&) {
            return false;
        }
    };
    if (!attempt(lo)) {
        throw std::invalid_argument("lower bracket " + num(lo) + " is not solvable");
    }
    Field at_lo = *warm;
    if (attempt(hi)) {
        throw std::invalid_argument("upper bracket " + num(hi) + " is solvable");
    }
    warm = at_lo;
    while (hi - lo > resolution) {
        double mid = 0.5 * (lo + hi);
        if (attempt(mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    out.solvable = lo;
    out.unsolvable = hi;
    out.threshold = 0.5 * (lo + hi);
    return out;
}

VerdictReport check_characterization(const ProblemSpec& spec, double resolution, const SolverSettings& settings)
{
    VerdictReport r;
    r.name = "characterization";
    r.provenance = "bounded-below solutions carry lambda = lambda*";
    add_spec_inputs(r, spec);
    auto sol = solve_ergodic(spec, std::nullopt, ErgodicMethod::newton_augmented, settings);
    const Field f = sample_rhs(spec.rhs, spec.make_grid());
    const double lo = f.min();
    double hi = sol.lambda + 1.0;
    auto search = locate_dirichlet_threshold(spec, lo, hi, resolution, 0.0, settings);
    r.inputs.emplace_back("lambda_state_constraint", num(sol.lambda));
    r.inputs.emplace_back("resolution", num(resolution));
    r.inputs.emplace_back("bracket", num(search.solvable) + " " + num(search.unsolvable));
    r.inputs.emplace_back("evaluations", std::to_string(search.evaluations));
    r.comparisons.push_back({"threshold", search.threshold, sol.lambda, Relation::equal, 5.0 * resolution});
    r.settle();
    return r;
}

VerdictReport check_uniqueness(const ProblemSpec& spec, std::uint64_t seed_a, std::uint64_t seed_b,
    ErgodicMethod method, const SolverSettings& settings)
{
    VerdictReport r;
    r.name = "uniqueness";
    r.provenance = "solutions are unique up to an additive constant";
    add_spec_inputs(r, spec);
    r.inputs.emplace_back("seeds", std::to_string(seed_a) + " " + std::to_string(seed_b));
    const Grid g = spec.make_grid();
    auto a = solve_ergodic(spec, random_initial_guess(g, seed_a), method, settings);
    auto b = solve_ergodic(spec, random_initial_guess(g, seed_b), method, settings);
    const double tol = 10.0 * settings.tolerance;
    r.comparisons.push_back({"profile_oscillation", oscillation(a.phi, b.phi), 0.0, Relation::at_most, tol});
    r.comparisons.push_back({"lambda_difference", std::abs(a.lambda - b.lambda), 0.0, Relation::at_most, tol});
    r.settle();
    return r;
}

VerdictReport check_cross_method(const ProblemSpec& spec, const CrossMethodOptions& options,
    const SolverSettings& settings)
{
    VerdictReport r;
    r.name = "cross_method";
    r.provenance = options.oracle ? "closed form and pairwise agreement" : "pairwise agreement";
    add_spec_inputs(r, spec);
    std::vector<std::pair<std::string, double>> routes;
    for (auto m : {ErgodicMethod::newton_augmented, ErgodicMethod::relative_value_iteration,
             ErgodicMethod::policy_iteration}) {
        routes.emplace_back(to_string(m), solve_ergodic(spec, std::nullopt, m, settings).lambda);
    }
    auto march = parabolic_march(spec, Field(spec.make_grid()), options.march_time, settings);
    routes.emplace_back("parabolic_march", march.lambda_hat);
    auto disc = discounted_lambda(spec, options.epsilons, settings);
    routes.emplace_back("discounted", disc.extrapolated);
    for (std::size_t i = 0; i < routes.size(); ++i) {
        r.inputs.emplace_back("lambda_" + routes[i].first, num(routes[i].second));
        for (std::size_t j = i + 1; j < routes.size(); ++j) {
            r.comparisons.push_back({routes[i].first + " vs " + routes[j].first, routes[i].second,
                routes[j].second, Relation::equal, options.tolerance});
        }
    }
    if (options.oracle) {
        for (const auto& [name, value] : routes) {
            r.comparisons.push_back({name + " vs oracle", value, *options.oracle, Relation::equal, options.tolerance});
        }
    }
    PlotTable trace{"march_rate", {"time", "rate_min", "rate_mean", "rate_max"}, {}};
    for (const auto& rec : march.records) {
        trace.rows.push_back({rec.time, rec.rate_min, rec.rate_mean, rec.rate_max});
    }
    r.plots.push_back(std::move(trace));
    PlotTable eps{"discounted", {"epsilon", "eps_phi_anchor"}, {}};
    for (std::size_t i = 0; i < disc.epsilons.size(); ++i) {
        eps.rows.push_back({disc.epsilons[i], disc.values[i]});
    }
    r.plots.push_back(std::move(eps));
    r.settle();
    return r;
}

VerdictReport check_radius_monotonicity(const ProblemSpec& base, const EstimationPlan& plan, double slack)
{
    VerdictReport r;
    r.name = "radius_monotonicity";
    r.provenance = "lambda_R is non-increasing in R";
    add_spec_inputs(r, base);
    add_plan_inputs(r, plan);
    LambdaStarOptions opts;
    opts.method = plan.method;
    opts.strict = false;
    opts.slack = slack;
    auto est = estimate_lambda_star(base, plan.radii, plan.h, opts, plan.settings);
    for (std::size_t i = 1; i < est.table.size(); ++i) {
        r.comparisons.push_back({"R=" + num(est.table[i].radius) + " vs R=" + num(est.table[i - 1].radius),
            est.table[i].lambda, est.table[i - 1].lambda, Relation::at_most, slack});
    }
    r.inputs.emplace_back("lambda_star", num(est.lambda_star));
    r.plots.push_back(radius_table("lambda_R", est));
    r.settle();
    return r;
}

VerdictReport check_interior_minimum(const ProblemSpec& spec, ErgodicMethod method, const SolverSettings& settings)
{
    VerdictReport r;
    r.name = "interior_minimum";
    r.provenance = "f at the minimizer of phi_R is at most lambda_R";
    add_spec_inputs(r, spec);
    auto sol = solve_ergodic(spec, std::nullopt, method, settings);
    auto m = interior_minimum_check(sol, spec);
    std::ostringstream loc;
    loc << m.location[0] << ' ' << m.location[1] << ' ' << m.location[2];
    r.inputs.emplace_back("argmin", loc.str());
    r.comparisons.push_back({"f_at_argmin", m.f_value, m.lambda, Relation::at_most, 1e-6});
    r.comparisons.push_back({"steps_to_boundary", static_cast<double>(m.steps_to_boundary), 2.0, Relation::at_least, 0.0});
    r.settle();
    return r;
}

} // namespace ergodic
