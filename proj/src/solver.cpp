#include "degma/solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "degma/transforms.hpp"

namespace degma {

void SolveConfig::validate() const {
    if (!(tol > 0.0)) throw std::invalid_argument("solver.tol must be positive");
    if (max_sweeps < 1) throw std::invalid_argument("solver.max_sweeps must be at least 1");
    if (n < 16) throw std::invalid_argument("grid.n must be at least 16");
    if (coarsest < 16) throw std::invalid_argument("solver.coarsest must be at least 16");
}

namespace {

// Stencil arms: +x, -x, +y, -y, (+,+), (-,-), (-,+), (+,-).
constexpr int kDir[8][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {-1, -1}, {-1, 1}, {1, -1}};
// Smallest admitted cut fraction; the extrapolated ghost value uses it.
constexpr double kMinCut = 1e-3;

// A neighbour value is either an unknown or a + b * u_self (cut arm through
// the boundary, extrapolated to the full arm length).
struct Arm {
    int nb = -1;
    double a = 0.0;
    double b = 0.0;
};

struct System {
    double d2 = 0.0;
    double p = 1.0;
    std::vector<std::size_t> node;  // unknown -> grid index
    std::vector<int> unk;           // grid index -> unknown or -1
    std::vector<std::array<Arm, 8>> arms;
    std::vector<double> h;

    std::size_t size() const { return node.size(); }
};

System build_system(const ScalarField2D& grid, const BoundaryData& bd, const ScalarField2D& h, double p) {
    const ConvexDomain& dom = *grid.domain();
    System s;
    s.d2 = grid.delta() * grid.delta();
    s.p = p;
    s.unk.assign(grid.size(), -1);
    for (int j = 0; j < grid.n(); ++j)
        for (int i = 0; i < grid.n(); ++i) {
            if (grid.readable(i, j)) {
                double hv = h(i, j);
                if (!(hv > 0.0) || !std::isfinite(hv))
                    throw std::invalid_argument("forcing must satisfy lambda < h < 1/lambda for some lambda > 0; h = " +
                                                std::to_string(hv) + " at node (" + std::to_string(i) + ", " +
                                                std::to_string(j) + ")");
            }
            if (grid.kind(i, j) != NodeKind::interior) continue;
            s.unk[grid.index(i, j)] = static_cast<int>(s.node.size());
            s.node.push_back(grid.index(i, j));
        }
    s.arms.resize(s.size());
    s.h.resize(s.size());
    for (std::size_t k = 0; k < s.size(); ++k) {
        int i = static_cast<int>(s.node[k] % grid.n()), j = static_cast<int>(s.node[k] / grid.n());
        s.h[k] = h[s.node[k]];
        Point P = grid.node(i, j);
        for (int m = 0; m < 8; ++m) {
            int ii = i + kDir[m][0], jj = j + kDir[m][1];
            Arm& arm = s.arms[k][m];
            if (grid.readable(ii, jj) && grid.kind(ii, jj) == NodeKind::interior) {
                arm.nb = s.unk[grid.index(ii, jj)];
            } else if (grid.readable(ii, jj)) {
                arm.a = bd.density(grid.node(ii, jj));
            } else {
                Point Q = P + grid.delta() * Point{double(kDir[m][0]), double(kDir[m][1])};
                double t = dom.exit_fraction(P, Q);
                double phi = bd.density(P + t * (Q - P));
                t = std::max(t, kMinCut);
                arm.a = phi / t;
                arm.b = 1.0 - 1.0 / t;
            }
        }
    }
    return s;
}

struct Local {
    std::array<double, 8> c;  // constant part of each arm value
    std::array<double, 8> b;  // coefficient of u_self
};

Local local(const System& s, const std::vector<double>& u, std::size_t k) {
    Local L;
    for (int m = 0; m < 8; ++m) {
        const Arm& a = s.arms[k][m];
        if (a.nb >= 0) {
            L.c[m] = u[a.nb];
            L.b[m] = 0.0;
        } else {
            L.c[m] = a.a;
            L.b[m] = a.b;
        }
    }
    return L;
}

struct D2 {
    double xx, yy, xy;
};

D2 derivs(const System& s, const std::vector<double>& u, std::size_t k) {
    Local L = local(s, u, k);
    double v[8];
    for (int m = 0; m < 8; ++m) v[m] = L.c[m] + L.b[m] * u[k];
    return {(v[0] + v[1] - 2 * u[k]) / s.d2, (v[2] + v[3] - 2 * u[k]) / s.d2,
            (v[4] + v[5] - v[6] - v[7]) / (4 * s.d2)};
}

double source(const System& s, double uk, std::size_t k) { return s.h[k] * std::pow(std::max(uk, 0.0), s.p); }

// Smaller root of (a1 u + b1)(a2 u + b2) = r with a1, a2 < 0 and r >= 0: the
// unique root where both factors stay nonnegative.
double product_root(double a1, double b1, double a2, double b2, double r) {
    double A = a1 * a2, B = a1 * b2 + a2 * b1, C = b1 * b2 - r;
    double disc = std::max(B * B - 4 * A * C, 0.0);
    double sq = std::sqrt(disc);
    // Stable form of (-B - sq) / (2A).
    if (B >= 0) return (-B - sq) / (2 * A);
    return 2 * C / (-B + sq);
}

// Nodewise solve of the discrete relation for u_k with the source lagged at
// `lag`. Returns the convex-branch root; sets fallback when the root had to
// come from the axis/diagonal products.
double node_root(const System& s, const std::vector<double>& u, std::size_t k, double lag, bool& fallback) {
    Local L = local(s, u, k);
    double ax = -2 + L.b[0] + L.b[1], bx = L.c[0] + L.c[1];
    double ay = -2 + L.b[2] + L.b[3], by = L.c[2] + L.c[3];
    double gm = L.b[4] + L.b[5] - L.b[6] - L.b[7], dl = L.c[4] + L.c[5] - L.c[6] - L.c[7];
    double rhs = s.d2 * s.d2 * source(s, lag, k);
    double A = ax * ay - gm * gm / 16, B = ax * by + ay * bx - gm * dl / 8, C = bx * by - dl * dl / 16 - rhs;
    double scale = std::abs(bx) + std::abs(by) + 1e-300;
    auto admissible = [&](double r) { return ax * r + bx >= -1e-12 * scale && ay * r + by >= -1e-12 * scale; };
    double best = -std::numeric_limits<double>::infinity();
    bool found = false;
    double disc = B * B - 4 * A * C;
    if (std::abs(A) > 1e-300 && disc >= 0) {
        double sq = std::sqrt(disc);
        double r1 = B >= 0 ? (-B - sq) / (2 * A) : (-B + sq) / (2 * A);
        double r2 = r1 != 0.0 ? C / (A * r1) : -B / A;
        for (double r : {r1, r2})
            if (std::isfinite(r) && admissible(r) && (!found || r > best)) {
                best = r;
                found = true;
            }
    }
    fallback = !found;
    if (found) return best;
    double ux = product_root(ax, bx, ay, by, rhs);
    double a4 = 0.5 * (-2 + L.b[4] + L.b[5]), b4 = 0.5 * (L.c[4] + L.c[5]);
    double a6 = 0.5 * (-2 + L.b[6] + L.b[7]), b6 = 0.5 * (L.c[6] + L.c[7]);
    double ud = product_root(a4, b4, a6, b6, rhs);
    return std::min(ux, ud);
}

struct Solver {
    const System& s;
    const SolveConfig& cfg;
    ConvergenceReport& rep;

    // Complementarity residual: |F| on positive nodes; at zero nodes the amount
    // by which a convex neighbourhood forces the node to lift off.
    double merit(const std::vector<double>& u) const {
        double m = 0.0;
        for (std::size_t k = 0; k < s.size(); ++k) {
            D2 d = derivs(s, u, k);
            double det = d.xx * d.yy - d.xy * d.xy;
            if (u[k] > 0) m = std::max(m, std::abs(det - source(s, u[k], k)));
            else if (det > 0 && d.xx > 0 && d.yy > 0) m = std::max(m, det);
        }
        return m;
    }

    // Gauss-Seidel pass of nodewise roots, projected onto f >= 0.
    double sweep(std::vector<double>& u) {
        double change = 0.0;
        for (std::size_t k = 0; k < s.size(); ++k) {
            bool fb = false;
            double v = std::max(node_root(s, u, k, u[k], fb), 0.0);
            if (cfg.source == SourceMode::implicit)
                for (int it = 0; it < 3; ++it) v = std::max(node_root(s, u, k, v, fb), 0.0);
            rep.fallbacks += fb;
            change = std::max(change, std::abs(v - u[k]));
            u[k] = v;
        }
        ++rep.sweeps;
        return change;
    }

    // Jacobi passes of the nodewise root on nodes whose axis second
    // differences left the convex cone.
    void repair(std::vector<double>& u) {
        if (cfg.convexity == ConvexityMode::none) return;
        for (int pass = 0; pass < 50; ++pass) {
            std::vector<std::pair<std::size_t, double>> fix;
            for (std::size_t k = 0; k < s.size(); ++k) {
                if (u[k] <= 0) continue;
                D2 d = derivs(s, u, k);
                if (d.xx >= 0 && d.yy >= 0) continue;
                bool fb = false;
                fix.emplace_back(k, std::max(node_root(s, u, k, u[k], fb), 0.0));
                rep.fallbacks += fb;
            }
            if (fix.empty()) return;
            for (auto& [k, v] : fix) u[k] = v;
            rep.convexity_repairs += static_cast<int>(fix.size());
            ++rep.sweeps;
        }
    }

    bool newton_step(std::vector<double>& u, double& update) {
        const std::size_t N = s.size();
        std::vector<double> F(N);
        std::vector<D2> d(N);
        std::vector<int> fidx(N, -1);
        int nf = 0;
        for (std::size_t k = 0; k < N; ++k) {
            d[k] = derivs(s, u, k);
            double det = d[k].xx * d[k].yy - d[k].xy * d[k].xy;
            F[k] = det - source(s, u[k], k);
            bool free = u[k] > 0 || (det > 0 && d[k].xx > 0 && d[k].yy > 0);
            if (free) fidx[k] = nf++;
        }
        std::vector<double> du(N, 0.0);
        if (nf > 0) {
            std::vector<Eigen::Triplet<double>> trip;
            trip.reserve(static_cast<std::size_t>(nf) * 9);
            Eigen::VectorXd rhs(nf);
            for (std::size_t k = 0; k < N; ++k) {
                int r = fidx[k];
                if (r < 0) continue;
                const D2& e = d[k];
                double c[8] = {e.yy, e.yy, e.xx, e.xx, -0.5 * e.xy, -0.5 * e.xy, 0.5 * e.xy, 0.5 * e.xy};
                double diag = -2 * (e.xx + e.yy);
                for (int m = 0; m < 8; ++m) {
                    const Arm& a = s.arms[k][m];
                    if (a.nb >= 0) {
                        if (fidx[a.nb] >= 0) trip.emplace_back(r, fidx[a.nb], c[m] / s.d2);
                    } else {
                        diag += c[m] * a.b;
                    }
                }
                double dsrc = u[k] > 0 ? s.p * s.h[k] * std::pow(u[k], s.p - 1) : 0.0;
                trip.emplace_back(r, r, diag / s.d2 - dsrc);
                rhs[r] = -F[k];
            }
            Eigen::SparseMatrix<double> J(nf, nf);
            J.setFromTriplets(trip.begin(), trip.end());
            J.makeCompressed();
            Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
            lu.compute(J);
            if (lu.info() != Eigen::Success) return false;
            Eigen::VectorXd x = lu.solve(rhs);
            if (lu.info() != Eigen::Success || !x.allFinite()) return false;
            for (std::size_t k = 0; k < N; ++k)
                if (fidx[k] >= 0) du[k] = x[fidx[k]];
        }
        ++rep.newton_steps;
        // Backtracking on the complementarity residual.
        double m0 = merit(u), lam = 1.0;
        std::vector<double> un(N);
        for (int t = 0; t < 20; ++t) {
            for (std::size_t k = 0; k < N; ++k) un[k] = std::max(u[k] + lam * du[k], 0.0);
            if (merit(un) < m0 || lam < 1e-3) break;
            lam *= 0.5;
        }
        repair(un);
        double umax = 0.0;
        update = 0.0;
        for (std::size_t k = 0; k < N; ++k) {
            update = std::max(update, std::abs(un[k] - u[k]));
            umax = std::max(umax, std::abs(un[k]));
        }
        update /= std::max(umax, 1e-300);
        u.swap(un);
        return true;
    }

    // Newton with nodewise sweeps as the fallback; returns true on convergence.
    bool run(std::vector<double>& u, LevelLog& log) {
        int budget = cfg.max_sweeps;
        double update = 1.0;
        for (int it = 0; it < budget; ++it) {
            if (!newton_step(u, update)) {
                double umax = 1e-300;
                for (double v : u) umax = std::max(umax, v);
                update = 0.0;
                for (int k = 0; k < 10; ++k) update = sweep(u) / umax;
                ++log.sweeps;
            }
            ++log.newton_steps;
            log.update = update;
            if (update <= cfg.tol) {
                log.residual = merit(u);
                return true;
            }
        }
        log.residual = merit(u);
        return false;
    }
};

ScalarField2D coarse_grid(const ScalarField2D& fine, int nc) {
    return make_grid(*fine.domain(), nc);
}

// Prolongation in pressure: bilinear over readable coarse corners.
std::vector<double> prolong(const ScalarField2D& coarse_f, const ScalarField2D& fine, const System& fs,
                            const BoundaryData& bd, const ExponentPack& pack) {
    ScalarField2D gc = pressure_from_density(coarse_f, pack);
    std::vector<double> u(fs.size());
    for (std::size_t k = 0; k < fs.size(); ++k) {
        int i = static_cast<int>(fs.node[k] % fine.n()), j = static_cast<int>(fs.node[k] / fine.n());
        Point P = fine.node(i, j);
        double g;
        try {
            g = sample_bilinear(gc, P);
        } catch (const std::out_of_range&) {
            g = bd.pressure(fine.domain()->radial_projection(P));
        }
        u[k] = density_value(std::max(g, 0.0), pack);
    }
    return u;
}

}  // namespace

ScalarField2D cold_start(const ScalarField2D& grid, const BoundaryData& boundary, const ExponentPack& pack) {
    const ConvexDomain& dom = *grid.domain();
    ScalarField2D f = grid.filled(0.0);
    for (int j = 0; j < grid.n(); ++j)
        for (int i = 0; i < grid.n(); ++i) {
            if (!grid.readable(i, j)) continue;
            Point P = grid.node(i, j);
            double s = std::min(dom.gauge(P), 1.0);
            double gb = boundary.pressure(dom.radial_projection(P));
            f(i, j) = density_value(gb * std::max(0.0, (s - 0.5) / 0.5), pack);
        }
    return f;
}

double scheme_residual(const BoundaryData& boundary, const ScalarField2D& h, const ExponentPack& pack,
                       const ScalarField2D& f) {
    System sys = build_system(f, boundary, h, pack.p);
    SolveConfig cfg;
    ConvergenceReport rep;
    Solver S{sys, cfg, rep};
    std::vector<double> u(sys.size());
    for (std::size_t k = 0; k < sys.size(); ++k) u[k] = std::max(f[sys.node[k]], 0.0);
    return S.merit(u);
}

PressureSolution solve_ma(const ConvexDomain& domain, const BoundaryData& boundary, const ScalarField2D& h,
                          const ExponentPack& pack, const SolveConfig& cfg,
                          const std::optional<ScalarField2D>& initial) {
    cfg.validate();
    ScalarField2D grid = make_grid(domain, cfg.n);
    if (!(h.spec() == grid.spec())) throw std::invalid_argument("forcing grid does not match the solve grid");

    // Level sizes, finest last.
    std::vector<int> sizes{cfg.n};
    if (cfg.nested && !initial)
        while ((sizes.front() - 1) % 2 == 0 && (sizes.front() - 1) / 2 + 1 >= cfg.coarsest)
            sizes.insert(sizes.begin(), (sizes.front() - 1) / 2 + 1);

    PressureSolution sol;
    sol.pack = pack;
    ConvergenceReport& rep = sol.report;
    ScalarField2D prev;
    std::vector<double> u;
    bool ok = false;
    for (std::size_t lv = 0; lv < sizes.size(); ++lv) {
        const int n = sizes[lv];
        const int stride = (cfg.n - 1) / (n - 1);
        ScalarField2D g_l = n == cfg.n ? grid : coarse_grid(grid, n);
        ScalarField2D h_l = g_l.filled(0.0);
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) h_l(i, j) = h(i * stride, j * stride);
        System sys = build_system(g_l, boundary, h_l, pack.p);
        Solver S{sys, cfg, rep};
        LevelLog log;
        log.n = n;
        if (lv == 0) {
            ScalarField2D start = initial ? *initial : cold_start(g_l, boundary, pack);
            u.resize(sys.size());
            for (std::size_t k = 0; k < sys.size(); ++k) u[k] = std::max(start[sys.node[k]], 0.0);
            if (!initial) {
                // Nodewise sweeps settle the vanishing set before Newton.
                double umax = 1e-300;
                for (double v : u) umax = std::max(umax, v);
                for (int k = 0; k < 40 * n; ++k) {
                    ++log.sweeps;
                    if (S.sweep(u) <= 1e-6 * umax) break;
                }
            }
        } else {
            u = prolong(prev, g_l, sys, boundary, pack);
            for (int k = 0; k < cfg.presweeps; ++k, ++log.sweeps) S.sweep(u);
        }
        ok = S.run(u, log);
        rep.levels.push_back(log);
        ScalarField2D f = g_l.filled(0.0);
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i)
                if (g_l.kind(i, j) == NodeKind::boundary) f(i, j) = boundary.density(g_l.node(i, j));
        for (std::size_t k = 0; k < sys.size(); ++k) f[sys.node[k]] = u[k];
        prev = std::move(f);
        if (lv + 1 == sizes.size()) {
            rep.converged = ok;
            rep.residual = log.residual;
            rep.update = log.update;
            // Nodes of the final iterate where no convex root exists.
            int bad = 0;
            for (std::size_t k = 0; k < sys.size(); ++k) {
                bool fb = false;
                if (u[k] > 0) node_root(sys, u, k, u[k], fb);
                bad += fb;
            }
            if (bad > cfg.max_fallback_fraction * static_cast<double>(sys.size()))
                throw std::runtime_error("convexity enforcement failed at " + std::to_string(bad) + " nodes");
        }
    }
    sol.f = std::move(prev);
    sol.g = pressure_from_density(sol.f, pack);
    sol.h = h;
    try {
        sol.interface = extract_interface(sol.g, pack);
    } catch (const std::runtime_error&) {
        sol.interface = Interface{};
    }
    return sol;
}

}  // namespace degma
