#include "degma/output.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <openssl/evp.h>

#include "degma/transforms.hpp"

namespace degma {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::FILE* open_or_throw(const std::string& path) {
    std::FILE* fp = std::fopen(path.c_str(), "w");
    if (!fp) throw std::runtime_error("cannot write " + path);
    return fp;
}

// nlohmann writes NaN and infinities as null; keep that explicit.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json range(const Range& r) { return r.empty() ? json(nullptr) : json::array({num(r.min), num(r.max)}); }

}  // namespace

void write_solution_csv(const ScalarField2D& f, const ScalarField2D& g, const std::string& path) {
    if (!(f.spec() == g.spec())) throw std::invalid_argument("density and pressure grids differ");
    std::FILE* fp = open_or_throw(path);
    std::fprintf(fp, "x,y,f,g,mask\n");
    for (int j = 0; j < f.n(); ++j)
        for (int i = 0; i < f.n(); ++i) {
            Point p = f.node(i, j);
            std::fprintf(fp, "%.17g,%.17g,%.17g,%.17g,%d\n", p.x, p.y, f(i, j), g(i, j),
                         static_cast<int>(f.kind(i, j)));
        }
    std::fclose(fp);
}

ScalarField2D read_solution_csv(const std::string& path, const ConvexDomain& domain, int n) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    ScalarField2D f = make_grid(domain, n);
    std::string line;
    std::getline(in, line);
    if (line.rfind("x,y,f,g,mask", 0) != 0) throw std::runtime_error(path + ": expected header x,y,f,g,mask");
    std::size_t k = 0;
    const double tol = 1e-9 * f.delta();
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (k >= f.size()) throw std::runtime_error(path + ": more rows than an n = " + std::to_string(n) + " grid");
        double x, y, fv, gv;
        int mask;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%d", &x, &y, &fv, &gv, &mask) != 5)
            throw std::runtime_error(path + ": malformed row " + std::to_string(k + 2));
        int i = static_cast<int>(k % n), j = static_cast<int>(k / n);
        Point P = f.node(i, j);
        if (std::abs(P.x - x) > tol || std::abs(P.y - y) > tol || mask != static_cast<int>(f.kind(i, j)))
            throw std::runtime_error(path + ": row " + std::to_string(k + 2) + " does not match the configured grid");
        f[k++] = fv;
    }
    if (k != f.size()) throw std::runtime_error(path + ": fewer rows than an n = " + std::to_string(n) + " grid");
    return f;
}

void write_profile_csv(const RadialSolution& sol, const std::string& path) {
    RadialPressure pr = radial_pressure(sol);
    std::FILE* fp = open_or_throw(path);
    std::fprintf(fp, "r,f,fprime,g,gprime\n");
    for (std::size_t i = 0; i < sol.r.size(); ++i)
        std::fprintf(fp, "%.17g,%.17g,%.17g,%.17g,%.17g\n", sol.r[i], sol.f[i], sol.fprime[i], pr.g[i], pr.gprime[i]);
    std::fclose(fp);
}

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    std::array<char, 1 << 16> buf;
    while (in) {
        in.read(buf.data(), buf.size());
        if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned len = 0;
    EVP_DigestFinal_ex(ctx, md, &len);
    EVP_MD_CTX_free(ctx);
    std::string hex;
    char two[3];
    for (unsigned i = 0; i < len; ++i) {
        std::snprintf(two, sizeof two, "%02x", md[i]);
        hex += two;
    }
    return hex;
}

std::string Manifest::path(const std::string& name) const { return (fs::path(dir_) / name).string(); }

void Manifest::add(const std::string& file, const std::string& kind) { entries_.push_back({file, kind}); }

void Manifest::write(const std::string& command, int status) const {
    json m;
    m["schema"] = kReportSchema;
    m["command"] = command;
    m["status"] = status;
    json files = json::array();
    for (const Entry& e : entries_) {
        json f;
        f["path"] = fs::relative(fs::path(e.file), fs::path(dir_)).generic_string();
        f["kind"] = e.kind;
        f["bytes"] = fs::file_size(e.file);
        f["sha256"] = sha256_file(e.file);
        files.push_back(f);
    }
    m["files"] = files;
    write_json(m, path("manifest.json"));
}

json to_json(const ConvergenceReport& r) {
    json j;
    j["converged"] = r.converged;
    j["newton_steps"] = r.newton_steps;
    j["sweeps"] = r.sweeps;
    j["residual"] = num(r.residual);
    j["update"] = num(r.update);
    j["fallbacks"] = r.fallbacks;
    j["convexity_repairs"] = r.convexity_repairs;
    json levels = json::array();
    for (const LevelLog& l : r.levels) {
        json lv;
        lv["n"] = l.n;
        lv["newton_steps"] = l.newton_steps;
        lv["sweeps"] = l.sweeps;
        lv["residual"] = num(l.residual);
        lv["update"] = num(l.update);
        levels.push_back(lv);
    }
    j["levels"] = levels;
    return j;
}

json to_json(const PatchReport& r) {
    json j;
    j["base"] = json::array({r.base.x, r.base.y});
    j["eta"] = r.eta;
    if (!r.error.empty()) {
        j["error"] = r.error;
        return j;
    }
    j["A_eig"] = range(r.A_eig);
    j["b"] = range(r.b);
    j["b1"] = range(r.b1);
    j["det_A"] = range(r.det_raw);
    j["det_identity"] = num(r.det_identity);
    j["b_identity"] = num(r.b_identity);
    j["b_interface"] = num(r.b_axis);
    j["residual"] = num(r.residual);
    json h;
    for (int f = 0; f < 5; ++f) h[kHolderFields[f]] = num(r.holder[f]);
    j["holder"] = h;
    j["positive"] = r.positive;
    return j;
}

json to_json(const EstimateReport& r) {
    json j;
    j["schema"] = kReportSchema;
    j["empty"] = r.empty;
    j["nodes"] = r.nodes;
    j["band"] = r.band;
    j["grad"] = range(r.grad);
    j["M_eig"] = range(r.M_eig);
    j["G"] = range(r.G);
    j["Q"] = range(r.Q);
    j["Z_min"] = num(r.Z_min);
    j["Mf_eig"] = range(r.Mf_eig);
    j["detM_identity"] = num(r.detM);
    j["free_boundary"] = num(r.fb);
    j["kappa"] = range(r.kappa);
    j["interface_vertices"] = r.interface_vertices;
    j["patch_A_eig"] = range(r.patch_A_eig);
    j["patch_b"] = range(r.patch_b);
    j["patch_det_identity"] = num(r.patch_det_identity);
    j["patch_b_identity"] = num(r.patch_b_identity);
    json h;
    for (int f = 0; f < 5; ++f) h[kHolderFields[f]] = num(r.holder_max[f]);
    j["holder_max"] = h;
    j["patches_positive"] = r.patches_positive;
    j["patch_failures"] = r.patch_failures;
    json ps = json::array();
    for (const PatchReport& p : r.patches) ps.push_back(to_json(p));
    j["patches"] = ps;
    return j;
}

json to_json(const ClassifyResult& r) {
    json j;
    j["classification"] = to_string(r.kind);
    j["convex"] = r.convex;
    j["worst_above"] = num(r.worst_above);
    j["worst_below"] = num(r.worst_below);
    j["witnesses"] = r.witnesses.size();
    j["vertex_witnesses"] = r.vertex_witnesses.size();
    j["convexity_witnesses"] = r.convexity_witnesses.size();
    return j;
}

void write_json(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << '\n';
}

void write_interface_polyline(const Interface& iface, const std::string& path) {
    std::FILE* fp = open_or_throw(path);
    std::fprintf(fp, "x,y\n");
    for (const Point& v : iface.vertices) std::fprintf(fp, "%.17g,%.17g\n", v.x, v.y);
    if (iface.size()) std::fprintf(fp, "%.17g,%.17g\n", iface.vertices[0].x, iface.vertices[0].y);
    std::fclose(fp);
}

void write_heatmap(const ScalarField2D& field, const std::string& path) {
    std::FILE* fp = open_or_throw(path);
    std::fprintf(fp, "x,y,value\n");
    for (int j = 0; j < field.n(); ++j)
        for (int i = 0; i < field.n(); ++i) {
            if (field.kind(i, j) != NodeKind::interior) continue;
            Point p = field.node(i, j);
            std::fprintf(fp, "%.17g,%.17g,%.17g\n", p.x, p.y, field(i, j));
        }
    std::fclose(fp);
}

void write_ledger_series(const std::vector<std::string>& ledger, const std::string& path) {
    std::FILE* fp = open_or_throw(path);
    std::fprintf(fp, "t,residual\n");
    for (const std::string& line : ledger) {
        json rec = json::parse(line);
        if (!rec.value("accepted", false)) continue;
        std::fprintf(fp, "%.17g,%.17g\n", rec["t"].get<double>(), rec["residual"].get<double>());
    }
    std::fclose(fp);
}

}  // namespace degma
