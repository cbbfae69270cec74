#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "degma/calculus.hpp"
#include "degma/parallel.hpp"
#include "degma/solver.hpp"

namespace degma {

double Interface::mean_radius(Point about) const {
    if (vertices.empty()) return 0.0;
    double s = 0.0;
    for (const Point& v : vertices) s += norm(v - about);
    return s / vertices.size();
}

double Interface::distance(Point p) const {
    double best = std::numeric_limits<double>::infinity();
    const std::size_t m = vertices.size();
    for (std::size_t k = 0; k < m; ++k) {
        Point a = vertices[k], e = vertices[(k + 1) % m] - a;
        double ee = dot(e, e);
        double t = ee > 0 ? std::clamp(dot(p - a, e) / ee, 0.0, 1.0) : 0.0;
        best = std::min(best, norm(p - (a + t * e)));
    }
    return best;
}

void write_interface_csv(const Interface& iface, const std::string& path) {
    std::FILE* fp = std::fopen(path.c_str(), "w");
    if (!fp) throw std::runtime_error("cannot write " + path);
    std::fprintf(fp, "x,y,kappa,gnu\n");
    for (std::size_t k = 0; k < iface.size(); ++k)
        std::fprintf(fp, "%.17g,%.17g,%.17g,%.17g\n", iface.vertices[k].x, iface.vertices[k].y, iface.kappa[k],
                     iface.gnu[k]);
    std::fclose(fp);
}

namespace {

struct Crossing {
    Point at;
    Point vertex;
    double gnu = 0.0, kappa = 0.0;
    bool ok = false;
};

std::vector<double> cumulative_length(const std::vector<Point>& v) {
    std::vector<double> L(v.size() + 1, 0.0);
    for (std::size_t k = 0; k < v.size(); ++k) L[k + 1] = L[k] + norm(v[(k + 1) % v.size()] - v[k]);
    return L;
}

// Mean over vertices within `half` arclength on the closed curve.
std::vector<double> arclength_mean(const std::vector<double>& val, const std::vector<double>& L, double half) {
    const std::size_t m = val.size();
    const double total = L.back();
    std::vector<double> out(m);
    for (std::size_t k = 0; k < m; ++k) {
        double s = 0.0;
        int c = 0;
        for (std::size_t i = 0; i < m; ++i) {
            double d = std::abs(L[i] - L[k]);
            d = std::min(d, total - d);
            if (d <= half) {
                s += val[i];
                ++c;
            }
        }
        out[k] = s / c;
    }
    return out;
}

Point at_length(const std::vector<Point>& v, const std::vector<double>& L, double s) {
    s = std::fmod(s, L.back());
    if (s < 0) s += L.back();
    std::size_t k = std::upper_bound(L.begin(), L.end(), s) - L.begin() - 1;
    k = std::min(k, v.size() - 1);
    double seg = L[k + 1] - L[k];
    double t = seg > 0 ? (s - L[k]) / seg : 0.0;
    return v[k] + t * (v[(k + 1) % v.size()] - v[k]);
}

}  // namespace

Interface extract_interface(const ScalarField2D& g, const ExponentPack& pack) {
    (void)pack;
    const int n = g.n();
    const double h = g.delta();
    double cx = 0, cy = 0;
    int nz = 0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            if (g.kind(i, j) != NodeKind::interior || g(i, j) > 0.0) continue;
            for (int dj = -1; dj <= 1; ++dj)
                for (int di = -1; di <= 1; ++di)
                    if (!g.readable(i + di, j + dj) || g.kind(i + di, j + dj) != NodeKind::interior)
                        throw std::runtime_error("open polyline: interface touches the domain boundary");
            Point p = g.node(i, j);
            cx += p.x;
            cy += p.y;
            ++nz;
        }
    if (nz == 0) throw std::runtime_error("empty vanishing set");
    Interface out;
    out.center = {cx / nz, cy / nz};

    const double eps0 = 2.0 * h * max_gradient_norm(g);
    std::vector<Crossing> cr;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            if (!g.readable(i, j)) continue;
            for (auto [di, dj] : {std::pair{1, 0}, std::pair{0, 1}}) {
                if (!g.readable(i + di, j + dj)) continue;
                double a = g(i, j), b = g(i + di, j + dj);
                if ((a - eps0) * (b - eps0) >= 0) continue;
                double t = (eps0 - a) / (b - a);
                Crossing c;
                c.at = g.node(i, j) + t * Point{di * h, dj * h};
                cr.push_back(c);
            }
        }

    parallel_for(cr.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t k = b; k < e; ++k) {
            auto fit = local_quadratic_fit(g, cr[k].at, 6.0 * h, 0.5 * eps0);
            if (!fit) continue;
            double m = norm(fit->grad);
            if (!(m > 0)) continue;
            Point nu = (1.0 / m) * fit->grad, tau{-nu.y, nu.x};
            double gnn = quad_form(fit->hess, nu, nu), gtt = quad_form(fit->hess, tau, tau);
            // Distance back to the zero level along nu on the fitted quadratic.
            double s = fit->value / m;
            for (int it = 0; it < 8; ++it) s = (fit->value + 0.5 * gnn * s * s) / m;
            double k0 = gtt / m;
            cr[k].vertex = cr[k].at - s * nu;
            cr[k].gnu = m - gnn * s;
            cr[k].kappa = k0 / (1.0 - k0 * s);
            cr[k].ok = std::isfinite(cr[k].gnu) && std::isfinite(cr[k].kappa);
        }
    });
    std::erase_if(cr, [](const Crossing& c) { return !c.ok; });
    if (cr.size() < 8) throw std::runtime_error("too few interface crossings");
    auto angle = [&](const Crossing& c) { return std::atan2(c.vertex.y - out.center.y, c.vertex.x - out.center.x); };
    std::stable_sort(cr.begin(), cr.end(), [&](const Crossing& a, const Crossing& b) { return angle(a) < angle(b); });

    std::vector<double> gnu, kap;
    for (const Crossing& c : cr) {
        out.vertices.push_back(c.vertex);
        gnu.push_back(c.gnu);
        kap.push_back(c.kappa);
    }
    std::vector<double> L = cumulative_length(out.vertices);
    out.gnu = arclength_mean(gnu, L, 3.0 * h);
    out.kappa = arclength_mean(kap, L, 3.0 * h);

    // Circumscribed circle through resampled points two steps apart.
    const double spacing = 4.0 * h;
    const int M = std::max(8, static_cast<int>(L.back() / spacing));
    std::vector<Point> rs(M);
    std::vector<double> kg(M);
    for (int k = 0; k < M; ++k) rs[k] = at_length(out.vertices, L, L.back() * k / M);
    for (int k = 0; k < M; ++k) {
        Point A = rs[(k - 2 + M) % M], B = rs[k], C = rs[(k + 2) % M];
        double a = norm(B - C), b = norm(A - C), c = norm(A - B);
        kg[k] = 2.0 * cross(B - A, C - A) / (a * b * c);
    }
    out.kappa_geom.resize(out.vertices.size());
    for (std::size_t v = 0; v < out.vertices.size(); ++v) {
        double pos = L[v] / L.back() * M;
        int k0 = static_cast<int>(std::floor(pos)) % M;
        double t = pos - std::floor(pos);
        out.kappa_geom[v] = (1 - t) * kg[k0] + t * kg[(k0 + 1) % M];
    }
    return out;
}

FreeBoundaryResidual free_boundary_relation(const Interface& iface, const ScalarField2D& h, const ExponentPack& pack) {
    FreeBoundaryResidual r;
    r.residual.resize(iface.size());
    for (std::size_t k = 0; k < iface.size(); ++k) {
        double hv = sample_bilinear(h, iface.vertices[k]);
        r.residual[k] = pack.theta * std::pow(iface.gnu[k], 3) * iface.kappa[k] - hv;
        r.sup = std::max(r.sup, std::abs(r.residual[k]));
    }
    return r;
}

}  // namespace degma
