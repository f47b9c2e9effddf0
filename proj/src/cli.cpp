#include "ergodic/cli.hpp"

#include <atomic>
#include <charconv>
#include <chrono>
#include <ctime>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

namespace ergodic {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s)
{
    const char* ws = " \t\r\n";
    auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) {
        return {};
    }
    auto e = s.find_last_not_of(ws);
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> tokens(std::string_view s)
{
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == ' ' || ch == '\t' || ch == ',') {
            if (!cur.empty()) {
                out.push_back(cur);
                cur.clear();
            }
        } else {
            cur += ch;
        }
    }
    if (!cur.empty()) {
        out.push_back(cur);
    }
    return out;
}

double to_double(const std::string& s, const std::string& key)
{
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) {
        throw ConfigError("key '" + key + "': '" + s + "' is not a number");
    }
    return v;
}

std::uint64_t to_u64(const std::string& s, const std::string& key)
{
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) {
        throw ConfigError("key '" + key + "': '" + s + "' is not a non-negative integer");
    }
    return v;
}

int to_int(const std::string& s, const std::string& key)
{
    int v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) {
        throw ConfigError("key '" + key + "': '" + s + "' is not an integer");
    }
    return v;
}

std::vector<double> to_list(const std::string& s, const std::string& key)
{
    std::vector<double> out;
    for (const auto& t : tokens(s)) {
        out.push_back(to_double(t, key));
    }
    return out;
}

std::string single(const std::string& s, const std::string& key)
{
    auto t = tokens(s);
    if (t.size() != 1) {
        throw ConfigError("key '" + key + "' expects a single value");
    }
    return t.front();
}

Point to_point(const std::string& s, const std::string& key)
{
    auto v = to_list(s, key);
    if (v.empty() || v.size() > static_cast<std::size_t>(kMaxDim)) {
        throw ConfigError("key '" + key + "' expects 1 to 3 coordinates");
    }
    Point p{};
    std::copy(v.begin(), v.end(), p.begin());
    return p;
}

std::string fmt(double x)
{
    return format_double(x);
}

std::string fmt_list(const std::vector<double>& v)
{
    std::string out;
    for (double x : v) {
        out += (out.empty() ? "" : " ") + fmt(x);
    }
    return out;
}

std::string fmt_point(const Point& p)
{
    return fmt(p[0]) + " " + fmt(p[1]) + " " + fmt(p[2]);
}

std::string fmt_opt(const std::optional<double>& v)
{
    return v ? fmt(*v) : std::string();
}

struct Entry {
    std::string section;
    std::string key;
    std::function<std::string(const ExperimentConfig&)> get;
    std::function<void(ExperimentConfig&, const std::string&, const std::string&)> set;
};

#define ERGODIC_DOUBLE(sec, name, member)                                                                             \
    Entry                                                                                                             \
    {                                                                                                                 \
        sec, name, [](const ExperimentConfig& c) { return fmt(c.member); },                                          \
            [](ExperimentConfig& c, const std::string& v, const std::string& k) { c.member = to_double(single(v, k), k); } \
    }
#define ERGODIC_LIST(sec, name, member)                                                                               \
    Entry                                                                                                             \
    {                                                                                                                 \
        sec, name, [](const ExperimentConfig& c) { return fmt_list(c.member); },                                     \
            [](ExperimentConfig& c, const std::string& v, const std::string& k) { c.member = to_list(v, k); }        \
    }
#define ERGODIC_OPTIONAL(sec, name, member)                                                                           \
    Entry                                                                                                             \
    {                                                                                                                 \
        sec, name, [](const ExperimentConfig& c) { return fmt_opt(c.member); },                                      \
            [](ExperimentConfig& c, const std::string& v, const std::string& k) {                                    \
                c.member = trim(v).empty() ? std::nullopt : std::optional<double>(to_double(single(v, k), k));       \
            }                                                                                                         \
    }

const std::vector<Entry>& schema()
{
    static const std::vector<Entry> entries = {
        {"run", "mode", [](const ExperimentConfig& c) { return to_string(c.mode); },
            [](ExperimentConfig& c, const std::string& v, const std::string& k) {
                auto s = single(v, k);
                if (s == "solve") {
                    c.mode = Mode::solve;
                } else if (s == "sweep") {
                    c.mode = Mode::sweep;
                } else if (s == "verify") {
                    c.mode = Mode::verify;
                } else {
                    throw ConfigError("key '" + k + "': unknown mode '" + s + "'");
                }
            }},
        {"run", "output", [](const ExperimentConfig& c) { return c.output; },
            [](ExperimentConfig& c, const std::string& v, const std::string&) { c.output = trim(v); }},
        {"run", "seed", [](const ExperimentConfig& c) { return std::to_string(c.seed); },
            [](ExperimentConfig& c, const std::string& v, const std::string& k) { c.seed = to_u64(single(v, k), k); }},
        {"run", "workers", [](const ExperimentConfig& c) { return std::to_string(c.workers); },
            [](ExperimentConfig& c, const std::string& v, const std::string& k) {
                c.workers = to_int(single(v, k), k);
                if (c.workers < 1) {
                    throw ConfigError("key '" + k + "' must be at least 1");
                }
            }},
        {"run", "method", [](const ExperimentConfig& c) { return to_string(c.method); },
            [](ExperimentConfig& c, const std::string& v, const std::string& k) {
                try {
                    c.method = parse_method(single(v, k));
                } catch (const std::invalid_argument& e) {
                    throw ConfigError("key '" + k + "': " + e.what());
                }
            }},
        ERGODIC_DOUBLE("problem", "theta", theta),
        {"problem", "dim", [](const ExperimentConfig& c) { return std::to_string(c.dim); },
            [](ExperimentConfig& c, const std::string& v, const std::string& k) { c.dim = to_int(single(v, k), k); }},
        ERGODIC_DOUBLE("problem", "radius", radius),
        ERGODIC_DOUBLE("problem", "h", h),
        {"problem", "anchor", [](const ExperimentConfig& c) { return fmt_point(c.anchor); },
            [](ExperimentConfig& c, const std::string& v, const std::string& k) { c.anchor = to_point(v, k); }},
        ERGODIC_DOUBLE("solver", "tolerance", solver.tolerance),
        {"solver", "max_iterations", [](const ExperimentConfig& c) { return std::to_string(c.solver.max_iterations); },
            [](ExperimentConfig& c, const std::string& v, const std::string& k) {
                c.solver.max_iterations = to_int(single(v, k), k);
            }},
        {"solver", "max_steps", [](const ExperimentConfig& c) { return std::to_string(c.solver.max_steps); },
            [](ExperimentConfig& c, const std::string& v, const std::string& k) {
                c.solver.max_steps = static_cast<long>(to_u64(single(v, k), k));
            }},
        {"solver", "max_halvings", [](const ExperimentConfig& c) { return std::to_string(c.solver.max_halvings); },
            [](ExperimentConfig& c, const std::string& v, const std::string& k) {
                c.solver.max_halvings = to_int(single(v, k), k);
            }},
        ERGODIC_DOUBLE("solver", "cfl_safety", solver.cfl_safety),
        {"solver", "dt_refresh", [](const ExperimentConfig& c) { return std::to_string(c.solver.dt_refresh); },
            [](ExperimentConfig& c, const std::string& v, const std::string& k) {
                c.solver.dt_refresh = std::max(1, to_int(single(v, k), k));
            }},
        {"solver", "record_stride", [](const ExperimentConfig& c) { return std::to_string(c.solver.record_stride); },
            [](ExperimentConfig& c, const std::string& v, const std::string& k) {
                c.solver.record_stride = std::max<long>(1, static_cast<long>(to_u64(single(v, k), k)));
            }},
        ERGODIC_DOUBLE("solver", "divergence_bound", solver.divergence_bound),
        {"sweep", "axis", [](const ExperimentConfig& c) { return c.sweep_axis; },
            [](ExperimentConfig& c, const std::string& v, const std::string&) { c.sweep_axis = trim(v); }},
        ERGODIC_LIST("sweep", "values", sweep_values),
        {"verify", "checks",
            [](const ExperimentConfig& c) {
                std::string out;
                for (const auto& s : c.verify.checks) {
                    out += (out.empty() ? "" : " ") + s;
                }
                return out;
            },
            [](ExperimentConfig& c, const std::string& v, const std::string& k) {
                c.verify.checks = tokens(v);
                for (const auto& name : c.verify.checks) {
                    const auto& known = known_checks();
                    if (std::find(known.begin(), known.end(), name) == known.end()) {
                        throw ConfigError("key '" + k + "': unknown check '" + name + "'");
                    }
                }
            }},
        ERGODIC_LIST("verify", "radii", verify.radii),
        ERGODIC_LIST("verify", "h_schedule", verify.h_schedule),
        ERGODIC_DOUBLE("verify", "tolerance", verify.tolerance),
        ERGODIC_DOUBLE("verify", "rel_tolerance", verify.rel_tolerance),
        ERGODIC_DOUBLE("verify", "shift", verify.shift),
        ERGODIC_DOUBLE("verify", "c", verify.c),
        ERGODIC_OPTIONAL("verify", "alpha", verify.alpha),
        ERGODIC_LIST("verify", "t_grid", verify.t_grid),
        ERGODIC_OPTIONAL("verify", "f0", verify.f0),
        {"verify", "seeds",
            [](const ExperimentConfig& c) {
                std::string out;
                for (auto s : c.verify.seeds) {
                    out += (out.empty() ? "" : " ") + std::to_string(s);
                }
                return out;
            },
            [](ExperimentConfig& c, const std::string& v, const std::string& k) {
                c.verify.seeds.clear();
                for (const auto& t : tokens(v)) {
                    c.verify.seeds.push_back(to_u64(t, k));
                }
            }},
        ERGODIC_DOUBLE("verify", "march_time", verify.march_time),
        ERGODIC_LIST("verify", "epsilons", verify.epsilons),
        ERGODIC_OPTIONAL("verify", "oracle", verify.oracle),
        ERGODIC_DOUBLE("verify", "q", verify.q),
        ERGODIC_DOUBLE("verify", "r_inner", verify.r_inner),
        {"verify", "windows",
            [](const ExperimentConfig& c) {
                std::string out;
                for (const auto& w : c.verify.windows) {
                    out += (out.empty() ? "" : " ") + fmt(w.r_prime) + ":" + fmt(w.r_outer);
                }
                return out;
            },
            [](ExperimentConfig& c, const std::string& v, const std::string& k) {
                c.verify.windows.clear();
                for (const auto& t : tokens(v)) {
                    auto colon = t.find(':');
                    if (colon == std::string::npos) {
                        throw ConfigError("key '" + k + "' expects r_prime:r_outer pairs");
                    }
                    c.verify.windows.push_back({to_double(t.substr(0, colon), k), to_double(t.substr(colon + 1), k)});
                }
            }},
        ERGODIC_LIST("verify", "lambdas", verify.lambdas),
        ERGODIC_DOUBLE("verify", "margin", verify.margin),
        ERGODIC_DOUBLE("verify", "resolution", verify.resolution),
        ERGODIC_DOUBLE("verify", "slack", verify.slack),
    };
    return entries;
}

#undef ERGODIC_DOUBLE
#undef ERGODIC_LIST
#undef ERGODIC_OPTIONAL

const std::set<std::string> kRhsKeys = {"form", "c", "alpha", "shift", "center", "t", "table"};

bool is_rhs_section(const std::string& s)
{
    auto root = s.substr(0, s.find('.'));
    return root == "rhs" || root == "rhs2";
}

/// Walks "rhs.first.second" style paths, creating blend parts on demand.
RhsDescriptor& rhs_at(ExperimentConfig& cfg, const std::string& section)
{
    std::vector<std::string> parts;
    std::string cur;
    for (char ch : section) {
        if (ch == '.') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    parts.push_back(cur);
    RhsDescriptor* d = nullptr;
    if (parts.front() == "rhs") {
        d = &cfg.rhs;
    } else {
        if (!cfg.rhs2) {
            cfg.rhs2.emplace();
        }
        d = &*cfg.rhs2;
    }
    for (std::size_t i = 1; i < parts.size(); ++i) {
        if (parts[i] != "first" && parts[i] != "second") {
            throw ConfigError("unknown section [" + section + "]");
        }
        if (d->parts.size() < 2) {
            d->parts.resize(2);
        }
        d = &d->parts[parts[i] == "first" ? 0 : 1];
    }
    return *d;
}

void set_rhs_key(RhsDescriptor& d, const std::string& key, const std::string& value, const std::string& full)
{
    if (key == "form") {
        d.form = single(value, full);
        static const std::set<std::string> forms = {"power", "pure_power", "blend", "tabulated"};
        if (!forms.count(d.form)) {
            throw ConfigError("key '" + full + "': unknown form '" + d.form + "'");
        }
    } else if (key == "c") {
        d.c = to_double(single(value, full), full);
    } else if (key == "alpha") {
        d.alpha = to_double(single(value, full), full);
    } else if (key == "shift") {
        d.shift = to_double(single(value, full), full);
    } else if (key == "center") {
        d.center = to_point(value, full);
    } else if (key == "t") {
        d.t = to_double(single(value, full), full);
    } else {
        d.table = trim(value);
    }
}

void check_rhs_shape(const RhsDescriptor& d, const std::string& section)
{
    if (d.form == "blend") {
        if (d.parts.size() != 2) {
            throw ConfigError("blend in [" + section + "] needs [" + section + ".first] and [" + section + ".second]");
        }
        check_rhs_shape(d.parts[0], section + ".first");
        check_rhs_shape(d.parts[1], section + ".second");
    } else if (!d.parts.empty()) {
        throw ConfigError("[" + section + ".first/.second] given but [" + section + "] is not a blend");
    } else if (d.form == "tabulated" && d.table.empty()) {
        throw ConfigError("tabulated [" + section + "] needs a 'table' file");
    }
}

void write_rhs(std::ostream& os, const RhsDescriptor& d, const std::string& section)
{
    os << "\n[" << section << "]\nform = " << d.form << '\n';
    if (d.form == "power" || d.form == "pure_power") {
        os << "c = " << fmt(d.c) << "\nalpha = " << fmt(d.alpha) << "\nshift = " << fmt(d.shift)
           << "\ncenter = " << fmt_point(d.center) << '\n';
    } else if (d.form == "tabulated") {
        os << "table = " << d.table << '\n';
    } else {
        os << "t = " << fmt(d.t) << '\n';
        write_rhs(os, d.parts[0], section + ".first");
        write_rhs(os, d.parts[1], section + ".second");
    }
}

std::string timestamp()
{
    auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

void write_metadata(const fs::path& out, const ExperimentConfig& cfg, nlohmann::json extra)
{
    extra["timestamp"] = timestamp();
    extra["config"] = cfg.to_text();
    std::ofstream os(out / "metadata.json");
    os << extra.dump(2) << '\n';
}

std::ofstream open_out(const fs::path& p)
{
    std::ofstream os(p);
    if (!os) {
        throw std::runtime_error("cannot write " + p.string());
    }
    return os;
}

/// Runs job(i) for i in [0, n) on up to `workers` threads.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& job)
{
    const auto threads = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, workers)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            job(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                job(i);
            }
        });
    }
    for (auto& th : pool) {
        th.join();
    }
}

// Like write_jsonl but without wall time, so reruns are byte-identical.
void write_trace(std::ostream& os, const ConvergenceTrace& trace)
{
    for (const auto& r : trace.records) {
        nlohmann::json j = {{"iteration", r.iteration}, {"residual_sup", r.residual_sup}, {"lambda", r.lambda},
            {"step", r.step}};
        os << j.dump() << '\n';
    }
    os << nlohmann::json({{"termination", trace.termination}}).dump() << '\n';
}

EstimationPlan plan_of(const ExperimentConfig& cfg)
{
    EstimationPlan plan;
    plan.radii = cfg.verify.radii;
    plan.h = cfg.verify.h_schedule;
    plan.method = cfg.method;
    plan.settings = cfg.solver;
    return plan;
}

RhsFunction require_rhs2(const ExperimentConfig& cfg, const std::string& check)
{
    if (!cfg.rhs2) {
        throw ConfigError("check '" + check + "' needs a second right-hand side in [rhs2]");
    }
    return cfg.rhs2->build();
}

std::vector<VerdictReport> run_check(const ExperimentConfig& cfg, const std::string& name)
{
    const ProblemSpec spec = cfg.problem();
    const auto& v = cfg.verify;
    const EstimationPlan plan = plan_of(cfg);
    if (name == "shift_equivariance") {
        return {check_shift_equivariance(spec, spec.rhs, v.shift, plan, v.tolerance)};
    }
    if (name == "scaling_law") {
        double alpha = v.alpha.value_or(spec.rhs.alpha().value_or(1.0));
        return {check_scaling_law(spec, alpha, v.c, plan, v.rel_tolerance)};
    }
    if (name == "lambda_shape") {
        return check_lambda_shape(spec, spec.rhs, require_rhs2(cfg, name), v.t_grid, plan, v.tolerance);
    }
    if (name == "continuity") {
        auto alpha = v.alpha ? v.alpha : spec.rhs.alpha();
        if (!alpha) {
            throw ConfigError("check 'continuity' needs verify.alpha");
        }
        return {check_continuity_bound(spec, spec.rhs, require_rhs2(cfg, name), *alpha, v.f0, plan, v.tolerance)};
    }
    if (name == "growth") {
        return {check_growth_exponent(spec, v.rel_tolerance, cfg.method, cfg.solver)};
    }
    if (name == "supersolution") {
        auto sol = solve_ergodic(spec, std::nullopt, cfg.method, cfg.solver);
        return {check_power_supersolution(sol, spec, v.q, v.r_inner)};
    }
    if (name == "gradient_estimate") {
        auto windows = v.windows;
        if (windows.empty()) {
            for (double r : v.radii) {
                windows.push_back({0.5 * r, r});
            }
        }
        return {check_gradient_estimate(spec, windows, cfg.method, cfg.solver)};
    }
    if (name == "dirichlet_family") {
        auto sol = solve_ergodic(spec, std::nullopt, cfg.method, cfg.solver);
        auto lambdas = v.lambdas;
        if (lambdas.empty()) {
            lambdas.push_back(sample_rhs(spec.rhs, spec.make_grid()).min());
        }
        return {check_dirichlet_family(spec, lambdas, sol.lambda, v.margin, 0.0, cfg.solver)};
    }
    if (name == "characterization") {
        return {check_characterization(spec, v.resolution, cfg.solver)};
    }
    if (name == "uniqueness") {
        auto seeds = v.seeds;
        if (seeds.size() < 2) {
            seeds = {cfg.seed, cfg.seed + 1};
        }
        return {check_uniqueness(spec, seeds[0], seeds[1], cfg.method, cfg.solver)};
    }
    if (name == "cross_method") {
        CrossMethodOptions opts;
        opts.march_time = v.march_time;
        opts.epsilons = v.epsilons;
        opts.tolerance = v.tolerance;
        opts.oracle = v.oracle;
        return {check_cross_method(spec, opts, cfg.solver)};
    }
    if (name == "radius_monotonicity") {
        return {check_radius_monotonicity(spec, plan, v.slack)};
    }
    if (name == "interior_minimum") {
        return {check_interior_minimum(spec, cfg.method, cfg.solver)};
    }
    throw ConfigError("unknown check '" + name + "'");
}

} // namespace

RhsFunction RhsDescriptor::build() const
{
    if (form == "power") {
        return make_power_rhs(c, alpha, shift, center);
    }
    if (form == "pure_power") {
        return make_pure_power_rhs(c, alpha, shift, center);
    }
    if (form == "blend") {
        if (parts.size() != 2) {
            throw ConfigError("blend right-hand side needs two parts");
        }
        return blend_rhs(parts[0].build(), parts[1].build(), t);
    }
    if (form == "tabulated") {
        std::ifstream is(table);
        if (!is) {
            throw ConfigError("cannot read table file '" + table + "'");
        }
        nlohmann::json j;
        try {
            is >> j;
            std::vector<Field> grad;
            for (const auto& g : j.at("gradient")) {
                grad.push_back(field_from_json(g));
            }
            return make_tabulated_rhs(field_from_json(j.at("values")), std::move(grad));
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("malformed table file '" + table + "': " + e.what());
        }
    }
    throw ConfigError("unknown right-hand side form '" + form + "'");
}

std::string to_string(Mode m)
{
    switch (m) {
    case Mode::solve:
        return "solve";
    case Mode::sweep:
        return "sweep";
    case Mode::verify:
        return "verify";
    }
    return "unknown";
}

const std::vector<std::string>& known_checks()
{
    static const std::vector<std::string> names = {"shift_equivariance", "scaling_law", "lambda_shape", "continuity",
        "growth", "supersolution", "gradient_estimate", "dirichlet_family", "characterization", "uniqueness",
        "cross_method", "radius_monotonicity", "interior_minimum"};
    return names;
}

ProblemSpec ExperimentConfig::problem() const
{
    ProblemSpec s;
    s.theta = theta;
    s.dim = dim;
    s.rhs = rhs.build();
    s.radius = radius;
    s.h = h;
    s.anchor = anchor;
    return s;
}

std::string ExperimentConfig::to_text() const
{
    std::ostringstream os;
    std::string section;
    for (const auto& e : schema()) {
        if (e.section != section) {
            os << (section.empty() ? "" : "\n") << '[' << e.section << "]\n";
            section = e.section;
        }
        auto value = e.get(*this);
        if (!value.empty()) {
            os << e.key << " = " << value << '\n';
        }
    }
    write_rhs(os, rhs, "rhs");
    if (rhs2) {
        write_rhs(os, *rhs2, "rhs2");
    }
    return os.str();
}

ExperimentConfig ExperimentConfig::parse(const std::string& text)
{
    ExperimentConfig cfg;
    std::map<std::string, const Entry*> index;
    std::set<std::string> sections;
    for (const auto& e : schema()) {
        index[e.section + "." + e.key] = &e;
        sections.insert(e.section);
    }
    std::set<std::string> seen;
    std::istringstream is(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
            }
            section = trim(std::string_view(line).substr(1, line.size() - 2));
            if (!sections.count(section) && !is_rhs_section(section)) {
                throw ConfigError("line " + std::to_string(lineno) + ": unknown section [" + section + "]");
            }
            if (is_rhs_section(section)) {
                rhs_at(cfg, section);
            }
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        }
        if (section.empty()) {
            throw ConfigError("line " + std::to_string(lineno) + ": key outside any section");
        }
        std::string key = trim(std::string_view(line).substr(0, eq));
        std::string value = trim(std::string_view(line).substr(eq + 1));
        std::string full = section + "." + key;
        if (!seen.insert(full).second) {
            throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + full + "'");
        }
        if (is_rhs_section(section)) {
            if (!kRhsKeys.count(key)) {
                throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + full + "'");
            }
            set_rhs_key(rhs_at(cfg, section), key, value, full);
            continue;
        }
        auto it = index.find(full);
        if (it == index.end()) {
            throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + full + "'");
        }
        it->second->set(cfg, value, full);
    }
    check_rhs_shape(cfg.rhs, "rhs");
    if (cfg.rhs2) {
        check_rhs_shape(*cfg.rhs2, "rhs2");
    }
    return cfg;
}

ExperimentConfig ExperimentConfig::load(const fs::path& path)
{
    std::ifstream is(path);
    if (!is) {
        throw ConfigError("cannot read config file '" + path.string() + "'");
    }
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse(ss.str());
}

int run_solve(const ExperimentConfig& config, const fs::path& out)
{
    ProblemSpec spec;
    try {
        spec = config.problem();
        spec.validate();
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    }
    fs::create_directories(out);
    const auto start = std::chrono::steady_clock::now();
    try {
        auto sol = solve_ergodic(spec, std::nullopt, config.method, config.solver);
        nlohmann::json j = {{"lambda", sol.lambda}, {"residual_sup", sol.residual_sup},
            {"method", to_string(config.method)}, {"termination", sol.trace.termination},
            {"iterations", sol.trace.records.size()}, {"anchor_node", sol.anchor_node}, {"rhs", spec.rhs.describe()},
            {"phi", field_to_json(sol.phi)}};
        open_out(out / "solution.json") << j.dump(2) << '\n';
        auto csv = open_out(out / "phi.csv");
        write_csv(csv, sol.phi);
        auto trace = open_out(out / "trace.jsonl");
        write_trace(trace, sol.trace);
        write_metadata(out, config,
            {{"wall_seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()}});
        std::cout << "lambda = " << format_double(sol.lambda) << "  residual = " << format_double(sol.residual_sup)
                  << '\n';
        return kExitOk;
    } catch (const SolverFailure& e) {
        auto trace = open_out(out / "trace.jsonl");
        write_trace(trace, e.trace());
        write_metadata(out, config, {{"failure", to_string(e.kind())}});
        std::cerr << "solver failure (" << to_string(e.kind()) << "): " << e.what() << '\n';
        return kExitSolver;
    }
}

int run_sweep(const ExperimentConfig& config, const fs::path& out)
{
    static const std::set<std::string> axes = {"radius", "h", "epsilon", "c", "alpha", "shift", "theta"};
    if (!axes.count(config.sweep_axis)) {
        std::cerr << "config error: sweep.axis must be one of radius, h, epsilon, c, alpha, shift, theta\n";
        return kExitConfig;
    }
    if (config.sweep_values.empty()) {
        std::cerr << "config error: sweep.values is empty\n";
        return kExitConfig;
    }
    try {
        config.problem().validate();
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    }
    struct Row {
        std::string status = "ok";
        double lambda = std::numeric_limits<double>::quiet_NaN();
        double residual = std::numeric_limits<double>::quiet_NaN();
        double seconds = 0.0;
        std::string message;
    };
    std::vector<Row> rows(config.sweep_values.size());
    parallel_for(rows.size(), config.workers, [&](std::size_t i) {
        const double value = config.sweep_values[i];
        Row& row = rows[i];
        const auto start = std::chrono::steady_clock::now();
        try {
            ExperimentConfig c = config;
            if (config.sweep_axis == "radius") {
                c.radius = value;
            } else if (config.sweep_axis == "h") {
                c.h = value;
            } else if (config.sweep_axis == "theta") {
                c.theta = value;
            } else if (config.sweep_axis == "c") {
                c.rhs.c = value;
            } else if (config.sweep_axis == "alpha") {
                c.rhs.alpha = value;
            } else if (config.sweep_axis == "shift") {
                c.rhs.shift = value;
            }
            auto spec = c.problem();
            if (config.sweep_axis == "epsilon") {
                auto sol = solve_discounted(spec, value, std::nullopt, c.solver);
                row.lambda = value * sol.phi[spec.make_grid().nearest_node(spec.anchor)];
                row.residual = sol.residual_sup;
            } else {
                auto sol = solve_ergodic(spec, std::nullopt, c.method, c.solver);
                row.lambda = sol.lambda;
                row.residual = sol.residual_sup;
            }
        } catch (const SolverFailure& e) {
            row.status = to_string(e.kind());
            row.message = e.what();
        } catch (const std::exception& e) {
            row.status = "error";
            row.message = e.what();
        }
        row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    });
    fs::create_directories(out);
    auto csv = open_out(out / "sweep.csv");
    csv << "index," << config.sweep_axis << ",status,lambda,residual_sup\n";
    nlohmann::json timing = nlohmann::json::array();
    bool all_ok = true;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        csv << i << ',' << format_double(config.sweep_values[i]) << ',' << r.status << ','
            << format_double(r.lambda) << ',' << format_double(r.residual) << '\n';
        timing.push_back({{"index", i}, {"wall_seconds", r.seconds}, {"message", r.message}});
        if (r.status != "ok") {
            all_ok = false;
            std::cerr << "row " << i << " (" << config.sweep_axis << " = " << format_double(config.sweep_values[i])
                      << "): " << r.message << '\n';
        }
    }
    write_metadata(out, config, {{"rows", timing}});
    return all_ok ? kExitOk : kExitSolver;
}

int run_verify(const ExperimentConfig& config, const fs::path& out)
{
    if (config.verify.checks.empty()) {
        std::cerr << "config error: verify.checks is empty\n";
        return kExitConfig;
    }
    try {
        config.problem().validate();
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    }
    const auto& names = config.verify.checks;
    std::vector<std::vector<VerdictReport>> results(names.size());
    std::vector<double> seconds(names.size());
    std::mutex config_error_mutex;
    std::optional<std::string> config_error;
    parallel_for(names.size(), config.workers, [&](std::size_t i) {
        const auto start = std::chrono::steady_clock::now();
        try {
            results[i] = run_check(config, names[i]);
        } catch (const ConfigError& e) {
            std::lock_guard lock(config_error_mutex);
            config_error = e.what();
        } catch (const std::exception& e) {
            VerdictReport r;
            r.name = names[i];
            r.notes = std::string("check raised: ") + e.what();
            r.settle();
            results[i] = {r};
        }
        seconds[i] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    });
    if (config_error) {
        std::cerr << "config error: " << *config_error << '\n';
        return kExitConfig;
    }
    std::vector<VerdictReport> reports;
    for (auto& r : results) {
        reports.insert(reports.end(), r.begin(), r.end());
    }
    fs::create_directories(out / "plots");
    auto json = open_out(out / "reports.json");
    write_reports_json(json, reports);
    auto csv = open_out(out / "summary.csv");
    write_summary_csv(csv, reports);
    for (std::size_t i = 0; i < reports.size(); ++i) {
        for (const auto& p : reports[i].plots) {
            auto os = open_out(out / "plots" / (std::to_string(i) + "_" + reports[i].name + "_" + p.name + ".csv"));
            write_plot_csv(os, p);
        }
    }
    nlohmann::json timing = nlohmann::json::array();
    for (std::size_t i = 0; i < names.size(); ++i) {
        timing.push_back({{"check", names[i]}, {"wall_seconds", seconds[i]}});
    }
    write_metadata(out, config, {{"checks", timing}});
    bool ok = true;
    for (const auto& r : reports) {
        std::cout << (r.pass ? "pass " : "FAIL ") << r.name << (r.notes.empty() ? "" : "  (" + r.notes + ")") << '\n';
        ok = ok && r.pass;
    }
    return ok ? kExitOk : kExitVerification;
}

int run(const ExperimentConfig& config, const fs::path& out)
{
    try {
        switch (config.mode) {
        case Mode::solve:
            return run_solve(config, out);
        case Mode::sweep:
            return run_sweep(config, out);
        case Mode::verify:
            return run_verify(config, out);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    }
    return kExitConfig;
}

} // namespace ergodic
