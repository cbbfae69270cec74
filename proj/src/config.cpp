#include "degma/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "degma/radial.hpp"

namespace degma {

namespace pt = boost::property_tree;

namespace {

const std::set<std::string> kKeys = {
    "schema", "command", "seed", "out",
    "problem.p", "problem.h",
    "domain.kind", "domain.center", "domain.radius", "domain.semi_x", "domain.semi_y", "domain.vertices",
    "boundary.kind", "boundary.value", "boundary.rho", "boundary.table",
    "grid.n",
    "solver.max_sweeps", "solver.tol", "solver.source", "solver.convexity", "solver.nested", "solver.coarsest",
    "solver.presweeps", "solver.max_fallback_fraction",
    "radial.rho", "radial.R", "radial.tol",
    "continuation.lambda", "continuation.delta0", "continuation.delta_min", "continuation.patches",
    "continuation.checkpoints", "continuation.restart",
    "diagnose.input", "diagnose.patches", "diagnose.tol",
};

[[noreturn]] void field_error(const std::string& key, const std::string& what) {
    throw std::invalid_argument("config field '" + key + "': " + what);
}

std::string trim(std::string s) {
    auto ws = [](unsigned char c) { return std::isspace(c); };
    s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), ws));
    s.erase(std::find_if_not(s.rbegin(), s.rend(), ws).base(), s.end());
    return s;
}

double to_double(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double d;
    try {
        d = std::stod(v, &used);
    } catch (const std::exception&) {
        field_error(key, "expected a number, got '" + v + "'");
    }
    if (used != v.size() || !std::isfinite(d)) field_error(key, "expected a number, got '" + v + "'");
    return d;
}

long long to_int(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    long long n;
    try {
        n = std::stoll(v, &used);
    } catch (const std::exception&) {
        field_error(key, "expected an integer, got '" + v + "'");
    }
    if (used != v.size()) field_error(key, "expected an integer, got '" + v + "'");
    return n;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    field_error(key, "expected true or false, got '" + v + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::string s = v;
    std::replace(s.begin(), s.end(), ',', ' ');
    std::istringstream in(s);
    std::string tok;
    while (in >> tok) out.push_back(to_double(key, tok));
    return out;
}

Point to_point(const std::string& key, const std::string& v) {
    auto xs = to_list(key, v);
    if (xs.size() != 2) field_error(key, "expected two numbers 'x y', got '" + v + "'");
    return {xs[0], xs[1]};
}

std::vector<Point> to_points(const std::string& key, const std::string& v) {
    std::vector<Point> out;
    std::istringstream in(v);
    std::string item;
    while (std::getline(in, item, ';')) {
        item = trim(item);
        if (!item.empty()) out.push_back(to_point(key, item));
    }
    if (out.size() < 3) field_error(key, "a polygon needs at least three 'x y' vertices separated by ';'");
    return out;
}

// Flattened "section.key" -> value view of the ptree.
std::map<std::string, std::string> flatten(const pt::ptree& tree) {
    std::map<std::string, std::string> out;
    for (const auto& [name, child] : tree) {
        if (child.empty()) {
            out[name] = trim(child.data());
            continue;
        }
        for (const auto& [key, leaf] : child) out[name + "." + key] = trim(leaf.data());
    }
    return out;
}

RunConfig build(std::map<std::string, std::string> kv, const Overrides& overrides) {
    for (const auto& [k, v] : overrides) kv[k] = trim(v);
    for (const auto& [k, v] : kv)
        if (!kKeys.count(k)) throw std::invalid_argument("config field '" + k + "': unknown key");

    RunConfig c;
    auto has = [&](const char* k) { return kv.count(k) > 0; };
    auto get = [&](const char* k) -> const std::string& { return kv.at(k); };

    if (has("schema")) {
        long long s = to_int("schema", get("schema"));
        if (s != kConfigSchema)
            field_error("schema", "unsupported version " + std::to_string(s) + " (expected " +
                                      std::to_string(kConfigSchema) + ")");
    }
    if (has("command")) {
        c.command = get("command");
        static const std::set<std::string> cmds = {"radial", "solve", "continuation", "diagnose"};
        if (!cmds.count(c.command)) field_error("command", "expected radial, solve, continuation or diagnose");
    }
    if (has("seed")) {
        long long s = to_int("seed", get("seed"));
        if (s < 0) field_error("seed", "must be nonnegative");
        c.seed = static_cast<std::uint64_t>(s);
    }
    if (has("out")) c.out = get("out");

    if (has("problem.p")) c.p = to_double("problem.p", get("problem.p"));
    if (!(c.p > 0.0 && c.p < 2.0)) field_error("problem.p", "must satisfy 0 < p < 2");
    if (has("problem.h")) c.h0 = to_double("problem.h", get("problem.h"));
    if (!(c.h0 > 0.0)) field_error("problem.h", "forcing must be positive");

    if (has("domain.kind")) {
        const std::string& k = get("domain.kind");
        if (k == "disk") c.domain.kind = DomainKind::disk;
        else if (k == "ellipse") c.domain.kind = DomainKind::ellipse;
        else if (k == "polygon") c.domain.kind = DomainKind::polygon;
        else field_error("domain.kind", "expected disk, ellipse or polygon, got '" + k + "'");
    }
    if (has("domain.center")) c.domain.center = to_point("domain.center", get("domain.center"));
    if (has("domain.radius")) c.domain.radius = to_double("domain.radius", get("domain.radius"));
    if (has("domain.semi_x")) c.domain.semi_x = to_double("domain.semi_x", get("domain.semi_x"));
    if (has("domain.semi_y")) c.domain.semi_y = to_double("domain.semi_y", get("domain.semi_y"));
    if (has("domain.vertices")) c.domain.vertices = to_points("domain.vertices", get("domain.vertices"));
    if (c.domain.kind == DomainKind::disk && !(c.domain.radius > 0.0))
        field_error("domain.radius", "must be positive");
    if (c.domain.kind == DomainKind::ellipse && !(c.domain.semi_x > 0.0 && c.domain.semi_y > 0.0))
        field_error("domain.semi_x", "semi-axes must be positive");
    if (c.domain.kind == DomainKind::polygon && c.domain.vertices.empty())
        field_error("domain.vertices", "required for a polygon");

    if (has("boundary.kind")) {
        const std::string& k = get("boundary.kind");
        if (k == "constant") c.boundary.kind = BoundaryKind::constant;
        else if (k == "radial") c.boundary.kind = BoundaryKind::radial;
        else if (k == "table") c.boundary.kind = BoundaryKind::table;
        else field_error("boundary.kind", "expected constant, radial or table, got '" + k + "'");
    }
    if (has("boundary.value")) c.boundary.value = to_double("boundary.value", get("boundary.value"));
    if (has("boundary.rho")) c.boundary.rho = to_double("boundary.rho", get("boundary.rho"));
    if (has("boundary.table")) c.boundary.table = get("boundary.table");
    if (c.boundary.kind == BoundaryKind::constant && !(c.boundary.value > 0.0))
        field_error("boundary.value", "must be positive");
    if (c.boundary.kind == BoundaryKind::radial && !(c.boundary.rho > 0.0))
        field_error("boundary.rho", "must be positive");
    if (c.boundary.kind == BoundaryKind::table && c.boundary.table.empty())
        field_error("boundary.table", "required for a table boundary");

    if (has("grid.n")) c.solver.n = static_cast<int>(to_int("grid.n", get("grid.n")));
    if (c.solver.n < 16) field_error("grid.n", "must be at least 16");
    if (has("solver.max_sweeps")) c.solver.max_sweeps = static_cast<int>(to_int("solver.max_sweeps", get("solver.max_sweeps")));
    if (c.solver.max_sweeps < 1) field_error("solver.max_sweeps", "must be at least 1");
    if (has("solver.tol")) c.solver.tol = to_double("solver.tol", get("solver.tol"));
    if (!(c.solver.tol > 0.0)) field_error("solver.tol", "must be positive");
    if (has("solver.source")) {
        const std::string& s = get("solver.source");
        if (s == "lagged") c.solver.source = SourceMode::lagged;
        else if (s == "implicit") c.solver.source = SourceMode::implicit;
        else field_error("solver.source", "expected lagged or implicit");
    }
    if (has("solver.convexity")) {
        const std::string& s = get("solver.convexity");
        if (s == "repair") c.solver.convexity = ConvexityMode::repair;
        else if (s == "none") c.solver.convexity = ConvexityMode::none;
        else field_error("solver.convexity", "expected repair or none");
    }
    if (has("solver.nested")) c.solver.nested = to_bool("solver.nested", get("solver.nested"));
    if (has("solver.coarsest")) c.solver.coarsest = static_cast<int>(to_int("solver.coarsest", get("solver.coarsest")));
    if (c.solver.coarsest < 16) field_error("solver.coarsest", "must be at least 16");
    if (has("solver.presweeps")) c.solver.presweeps = static_cast<int>(to_int("solver.presweeps", get("solver.presweeps")));
    if (c.solver.presweeps < 0) field_error("solver.presweeps", "must be nonnegative");
    if (has("solver.max_fallback_fraction"))
        c.solver.max_fallback_fraction = to_double("solver.max_fallback_fraction", get("solver.max_fallback_fraction"));
    if (!(c.solver.max_fallback_fraction >= 0.0 && c.solver.max_fallback_fraction <= 1.0))
        field_error("solver.max_fallback_fraction", "must lie in [0, 1]");

    if (has("radial.rho")) c.rho = to_double("radial.rho", get("radial.rho"));
    if (!(c.rho > 0.0)) field_error("radial.rho", "must be positive");
    if (has("radial.R")) c.R = to_double("radial.R", get("radial.R"));
    if (!(c.R > c.rho)) field_error("radial.R", "must exceed radial.rho");
    if (has("radial.tol")) c.radial_tol = to_double("radial.tol", get("radial.tol"));
    if (!(c.radial_tol > 0.0)) field_error("radial.tol", "must be positive");

    if (has("continuation.lambda")) c.lambda = to_double("continuation.lambda", get("continuation.lambda"));
    if (!(c.lambda > 0.0 && c.lambda < 0.25)) field_error("continuation.lambda", "must lie in (0, 1/4)");
    if (has("continuation.delta0")) c.delta0 = to_double("continuation.delta0", get("continuation.delta0"));
    if (!(c.delta0 > 0.0 && c.delta0 <= 1.0)) field_error("continuation.delta0", "must lie in (0, 1]");
    if (has("continuation.delta_min")) c.delta_min = to_double("continuation.delta_min", get("continuation.delta_min"));
    if (!(c.delta_min > 0.0 && c.delta_min <= c.delta0))
        field_error("continuation.delta_min", "must lie in (0, delta0]");
    if (has("continuation.patches"))
        c.continuation_patches = static_cast<int>(to_int("continuation.patches", get("continuation.patches")));
    if (c.continuation_patches < 0) field_error("continuation.patches", "must be nonnegative");
    if (has("continuation.checkpoints")) {
        c.checkpoints = to_list("continuation.checkpoints", get("continuation.checkpoints"));
        for (double t : c.checkpoints)
            if (!(t >= 0.0 && t <= 1.0)) field_error("continuation.checkpoints", "values must lie in [0, 1]");
    }
    if (has("continuation.restart")) c.restart = get("continuation.restart");

    if (has("diagnose.input")) c.input = get("diagnose.input");
    if (has("diagnose.patches")) c.patches = static_cast<int>(to_int("diagnose.patches", get("diagnose.patches")));
    if (c.patches < 0) field_error("diagnose.patches", "must be nonnegative");
    if (has("diagnose.tol")) c.classify_tol = to_double("diagnose.tol", get("diagnose.tol"));
    if (!(c.classify_tol > 0.0)) field_error("diagnose.tol", "must be positive");
    return c;
}

std::string fmt(double v) {
    std::ostringstream o;
    o.precision(17);
    o << v;
    return o.str();
}

}  // namespace

ConvexDomain DomainSpec::build() const {
    switch (kind) {
        case DomainKind::disk: return ConvexDomain::disk(center, radius);
        case DomainKind::ellipse: return ConvexDomain::ellipse(center, semi_x, semi_y);
        case DomainKind::polygon: return ConvexDomain::polygon(vertices);
    }
    throw std::logic_error("unhandled domain kind");
}

BoundaryData BoundarySpec::build(const ConvexDomain& domain, const ExponentPack& pack, double h0) const {
    switch (kind) {
        case BoundaryKind::constant: {
            double v = value;
            return BoundaryData([v](Point) { return v; }, domain, pack);
        }
        case BoundaryKind::radial: {
            double r_out = 0.0;
            for (Point b : domain.boundary_samples(1024)) r_out = std::max(r_out, norm(b));
            if (!domain.contains({0.0, 0.0}) || !(r_out > rho))
                throw std::invalid_argument("config field 'boundary.rho': the oracle ball must lie inside the domain");
            auto prof = std::make_shared<RadialSolution>(solve_radial(pack.p, rho, h0, r_out));
            return BoundaryData([prof](Point P) { return prof->f_at(std::min(norm(P), prof->R)); }, domain, pack);
        }
        case BoundaryKind::table: {
            std::ifstream in(table);
            if (!in) throw std::invalid_argument("config field 'boundary.table': cannot read " + table);
            std::vector<std::pair<double, double>> rows;
            std::string line;
            int lineno = 0;
            while (std::getline(in, line)) {
                ++lineno;
                line = trim(line);
                if (line.empty() || line[0] == '#' || std::isalpha(static_cast<unsigned char>(line[0]))) continue;
                double a, v;
                if (std::sscanf(line.c_str(), "%lf,%lf", &a, &v) != 2)
                    throw std::invalid_argument("boundary table " + table + ": malformed line " + std::to_string(lineno));
                const double tau = 2.0 * std::numbers::pi;
                rows.emplace_back(std::fmod(std::fmod(a, tau) + tau, tau), v);
            }
            if (rows.size() < 2) throw std::invalid_argument("boundary table " + table + ": needs at least two rows");
            std::sort(rows.begin(), rows.end());
            Point c = domain.center();
            auto data = std::make_shared<std::vector<std::pair<double, double>>>(std::move(rows));
            return BoundaryData(
                [data, c](Point P) {
                    const double tau = 2.0 * std::numbers::pi;
                    const auto& r = *data;
                    double a = std::atan2(P.y - c.y, P.x - c.x);
                    if (a < 0) a += tau;
                    auto it = std::upper_bound(r.begin(), r.end(), std::make_pair(a, -1e300));
                    const auto& hi = it == r.end() ? r.front() : *it;
                    const auto& lo = it == r.begin() ? r.back() : *(it - 1);
                    double span = hi.first - lo.first;
                    double off = a - lo.first;
                    if (span <= 0) span += tau;
                    if (off < 0) off += tau;
                    double w = span > 0 ? off / span : 0.0;
                    return (1 - w) * lo.second + w * hi.second;
                },
                domain, pack);
        }
    }
    throw std::logic_error("unhandled boundary kind");
}

ContinuationConfig RunConfig::continuation() const {
    ContinuationConfig c;
    c.solve = solver;
    c.delta0 = delta0;
    c.delta_min = delta_min;
    c.patches = continuation_patches;
    c.seed = seed;
    c.checkpoints = checkpoints;
    return c;
}

RunConfig parse_config_text(const std::string& text, const Overrides& overrides) {
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw std::invalid_argument("config: " + std::string(e.what()));
    }
    return build(flatten(tree), overrides);
}

RunConfig load_config(const std::string& path, const Overrides& overrides) {
    if (path.empty()) return build({}, overrides);
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_config_text(ss.str(), overrides);
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
}

std::string to_ini(const RunConfig& c) {
    std::ostringstream o;
    o << "schema = " << c.schema << "\n";
    if (!c.command.empty()) o << "command = " << c.command << "\n";
    o << "seed = " << c.seed << "\nout = " << c.out << "\n";
    o << "\n[problem]\np = " << fmt(c.p) << "\nh = " << fmt(c.h0) << "\n";
    o << "\n[domain]\nkind = " << to_string(c.domain.kind) << "\n";
    o << "center = " << fmt(c.domain.center.x) << " " << fmt(c.domain.center.y) << "\n";
    if (c.domain.kind == DomainKind::disk) o << "radius = " << fmt(c.domain.radius) << "\n";
    if (c.domain.kind == DomainKind::ellipse)
        o << "semi_x = " << fmt(c.domain.semi_x) << "\nsemi_y = " << fmt(c.domain.semi_y) << "\n";
    if (c.domain.kind == DomainKind::polygon) {
        o << "vertices = ";
        for (std::size_t k = 0; k < c.domain.vertices.size(); ++k)
            o << (k ? "; " : "") << fmt(c.domain.vertices[k].x) << " " << fmt(c.domain.vertices[k].y);
        o << "\n";
    }
    static const char* bk[] = {"constant", "radial", "table"};
    o << "\n[boundary]\nkind = " << bk[static_cast<int>(c.boundary.kind)] << "\n";
    o << "value = " << fmt(c.boundary.value) << "\nrho = " << fmt(c.boundary.rho) << "\n";
    if (!c.boundary.table.empty()) o << "table = " << c.boundary.table << "\n";
    o << "\n[grid]\nn = " << c.solver.n << "\n";
    o << "\n[solver]\nmax_sweeps = " << c.solver.max_sweeps << "\ntol = " << fmt(c.solver.tol) << "\n";
    o << "source = " << (c.solver.source == SourceMode::lagged ? "lagged" : "implicit") << "\n";
    o << "convexity = " << (c.solver.convexity == ConvexityMode::repair ? "repair" : "none") << "\n";
    o << "nested = " << (c.solver.nested ? "true" : "false") << "\ncoarsest = " << c.solver.coarsest << "\n";
    o << "presweeps = " << c.solver.presweeps << "\nmax_fallback_fraction = " << fmt(c.solver.max_fallback_fraction)
      << "\n";
    o << "\n[radial]\nrho = " << fmt(c.rho) << "\nR = " << fmt(c.R) << "\ntol = " << fmt(c.radial_tol) << "\n";
    o << "\n[continuation]\nlambda = " << fmt(c.lambda) << "\ndelta0 = " << fmt(c.delta0)
      << "\ndelta_min = " << fmt(c.delta_min) << "\npatches = " << c.continuation_patches << "\n";
    if (!c.checkpoints.empty()) {
        o << "checkpoints =";
        for (double t : c.checkpoints) o << " " << fmt(t);
        o << "\n";
    }
    if (!c.restart.empty()) o << "restart = " << c.restart << "\n";
    o << "\n[diagnose]\n";
    if (!c.input.empty()) o << "input = " << c.input << "\n";
    o << "patches = " << c.patches << "\ntol = " << fmt(c.classify_tol) << "\n";
    return o.str();
}

}  // namespace degma
