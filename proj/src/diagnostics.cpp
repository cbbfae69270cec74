#include "degma/diagnostics.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "degma/calculus.hpp"
#include "degma/parallel.hpp"
#include "degma/solver.hpp"

namespace degma {

std::string to_string(Classification c) {
    switch (c) {
        case Classification::supersolution: return "supersolution";
        case Classification::subsolution: return "subsolution";
        case Classification::solution: return "solution";
        case Classification::neither: return "neither";
    }
    return "neither";
}

namespace {

double cartesian_G(Point d, const Sym2& H) {
    return d.y * d.y * H.xx - 2 * d.x * d.y * H.xy + d.x * d.x * H.yy;
}

// Nodes of Omega(g) with full stencils and at least band * delta from the polyline.
std::vector<std::uint8_t> bulk_nodes(const ScalarField2D& g, const GradientField& gr, const HessianField& he,
                                     const Interface& iface, double band) {
    std::vector<std::uint8_t> ok(g.size(), 0);
    const double dmin = band * g.delta();
    parallel_for(g.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t k = b; k < e; ++k) {
            if (g.kind(k) != NodeKind::interior || !(g[k] > 0.0)) continue;
            if (gr.quality[k] != Stencil::full || he.quality[k] != Stencil::full) continue;
            int i = static_cast<int>(k % g.n()), j = static_cast<int>(k / g.n());
            if (iface.size() && iface.distance(g.node(i, j)) < dmin) continue;
            ok[k] = 1;
        }
    });
    return ok;
}

}  // namespace

ScalarField2D operator_P(const ScalarField2D& g, const ExponentPack& pack) {
    GradientField gr = gradient(g);
    HessianField he = hessian(g);
    ScalarField2D out = g.filled(0.0);
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (gr.quality[k] != Stencil::full || he.quality[k] != Stencil::full) continue;
        out[k] = g[k] * he.v[k].det() + pack.theta * cartesian_G(gr.v[k], he.v[k]);
    }
    return out;
}

ClassifyResult classify(const ScalarField2D& g, const ScalarField2D& h, const ExponentPack& pack, double tol) {
    ClassifyResult res;
    // Convexity of the associated density on its positivity set. Stencils that
    // reach a zero node straddle the kink at the interface and are skipped.
    ScalarField2D f = density_from_pressure(g, pack);
    HessianField fh = hessian(f);
    double scale = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k)
        if (fh.quality[k] == Stencil::full) scale = std::max(scale, std::abs(fh.v[k].xx) + std::abs(fh.v[k].yy));
    auto touches_zero = [&](int i, int j) {
        for (int dj = -1; dj <= 1; ++dj)
            for (int di = -1; di <= 1; ++di)
                if (f.readable(i + di, j + dj) && !(f(i + di, j + dj) > 0.0)) return true;
        return false;
    };
    for (std::size_t k = 0; k < f.size(); ++k) {
        if (fh.quality[k] != Stencil::full || f.kind(k) != NodeKind::interior || !(f[k] > 0.0)) continue;
        if (touches_zero(static_cast<int>(k % f.n()), static_cast<int>(k / f.n()))) continue;
        if (eigenvalues(fh.v[k]).first < -1e-8 * scale) res.convexity_witnesses.push_back(k);
    }
    res.convex = res.convexity_witnesses.empty();

    Interface iface;
    try {
        iface = extract_interface(g, pack);
    } catch (const std::runtime_error&) {
    }
    GradientField gr = gradient(g);
    HessianField he = hessian(g);
    auto bulk = bulk_nodes(g, gr, he, iface, 3.0);
    std::vector<std::size_t> above, below;
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (!bulk[k]) continue;
        double P = g[k] * he.v[k].det() + pack.theta * cartesian_G(gr.v[k], he.v[k]);
        double rel = (P - h[k]) / h[k];
        res.worst_above = std::max(res.worst_above, rel);
        res.worst_below = std::max(res.worst_below, -rel);
        if (rel > tol) above.push_back(k);
        if (-rel > tol) below.push_back(k);
    }
    std::vector<std::size_t> vabove, vbelow;
    for (std::size_t v = 0; v < iface.size(); ++v) {
        double hv = sample_bilinear(h, iface.vertices[v]);
        double rel = (pack.theta * std::pow(iface.gnu[v], 3) * iface.kappa[v] - hv) / hv;
        res.worst_above = std::max(res.worst_above, rel);
        res.worst_below = std::max(res.worst_below, -rel);
        if (rel > tol) vabove.push_back(v);
        if (-rel > tol) vbelow.push_back(v);
    }
    bool super = above.empty() && vabove.empty(), sub = below.empty() && vbelow.empty();
    if (!res.convex) {
        res.kind = Classification::neither;
        res.witnesses = res.convexity_witnesses;
    } else if (super && sub) {
        res.kind = Classification::solution;
    } else if (super) {
        res.kind = Classification::supersolution;
        res.witnesses = below;
        res.vertex_witnesses = vbelow;
    } else if (sub) {
        res.kind = Classification::subsolution;
        res.witnesses = above;
        res.vertex_witnesses = vabove;
    } else {
        res.kind = Classification::neither;
        res.witnesses = above;
        res.witnesses.insert(res.witnesses.end(), below.begin(), below.end());
        res.vertex_witnesses = vabove;
        res.vertex_witnesses.insert(res.vertex_witnesses.end(), vbelow.begin(), vbelow.end());
    }
    return res;
}

ComparisonResult comparison_check(const ScalarField2D& g1, const ScalarField2D& g2, double tol) {
    if (!(g1.spec() == g2.spec())) throw std::invalid_argument("comparison needs fields on one grid");
    ComparisonResult r;
    for (int j = 0; j < g1.n(); ++j)
        for (int i = 0; i < g1.n(); ++i) {
            if (!g1.readable(i, j)) continue;
            std::size_t k = g1.index(i, j);
            double diff = g2[k] - g1[k];
            r.worst = std::max(r.worst, diff);
            bool near_boundary = g1.kind(i, j) == NodeKind::boundary;
            for (int d = 0; d < 4 && !near_boundary; ++d) {
                int ii = i + (d == 0) - (d == 1), jj = j + (d == 2) - (d == 3);
                near_boundary = !g1.readable(ii, jj) || g1.kind(ii, jj) != NodeKind::interior;
            }
            if (near_boundary && diff > tol) r.boundary_violations.push_back(k);
            if (g1[k] <= 0.0 && g2[k] > tol) r.support_violations.push_back(k);
            if (diff > tol) r.violations.push_back(k);
        }
    r.hypotheses_ok = r.boundary_violations.empty() && r.support_violations.empty();
    r.pass = r.violations.empty();
    return r;
}

EstimateReport estimate_suite(const PressureSolution& sol, double band) {
    EstimateReport rep;
    rep.band = band;
    const ScalarField2D& g = sol.g;
    const ExponentPack& pk = sol.pack;
    GradientField gr = gradient(g);
    HessianField he = hessian(g);
    auto bulk = bulk_nodes(g, gr, he, sol.interface, band);
    GradientField fgr = gradient(sol.f);
    HessianField fhe = hessian(sol.f);
    const double q13 = std::cbrt(pk.q);
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (!bulk[k]) continue;
        ++rep.nodes;
        Point d = gr.v[k];
        const Sym2& H = he.v[k];
        double gn = norm(d);
        Point nu = (1.0 / gn) * d, tau{-nu.y, nu.x};
        double gnn = quad_form(H, nu, nu), gnt = quad_form(H, nu, tau), gtt = quad_form(H, tau, tau);
        double gv = g[k];
        Sym2 M{gv * gnn + pk.theta * gn * gn, std::sqrt(gv) * gnt, gtt};
        auto [m0, m1] = eigenvalues(M);
        rep.grad.add(gn);
        rep.M_eig.add(m0);
        rep.M_eig.add(m1);
        rep.G.add(cartesian_G(d, H));
        Sym2 Qm{gv * H.xx + pk.theta * d.x * d.x, gv * H.xy + pk.theta * d.x * d.y, gv * H.yy + pk.theta * d.y * d.y};
        rep.Q.add(eigenvalues(Qm).second);
        rep.Z_min = std::min(rep.Z_min, std::sqrt(gv) * H.det());
        double hv = sol.h[k];
        rep.detM = std::max(rep.detM, std::abs(M.det() - hv) / hv);
        // Same matrix written with density derivatives in the density frame.
        double fv = sol.f[k];
        Point fd = fgr.v[k];
        double fn = norm(fd);
        if (fn > 0 && fv > 0) {
            Point fnu = (1.0 / fn) * fd, ftau{-fnu.y, fnu.x};
            Sym2 Mf{q13 * std::pow(fv, (1 - 2 * pk.p) / 3) * quad_form(fhe.v[k], fnu, fnu),
                    std::pow(fv, -pk.p / 2) * quad_form(fhe.v[k], fnu, ftau),
                    std::pow(fv, -(1 + pk.p) / 3) / q13 * quad_form(fhe.v[k], ftau, ftau)};
            auto [e0, e1] = eigenvalues(Mf);
            rep.Mf_eig.add(e0);
            rep.Mf_eig.add(e1);
        }
    }
    const Interface& I = sol.interface;
    rep.interface_vertices = static_cast<int>(I.size());
    for (std::size_t v = 0; v < I.size(); ++v) {
        double gn = I.gnu[v];
        rep.grad.add(gn);
        rep.Q.add(pk.theta * gn * gn);
        rep.G.add(gn * gn * gn * I.kappa[v]);
        rep.kappa.add(I.kappa[v]);
    }
    if (I.size()) rep.fb = free_boundary_relation(I, sol.h, pk).sup;
    rep.empty = rep.nodes == 0;
    return rep;
}

std::vector<HodographPatch> default_patches(const PressureSolution& sol, int count) {
    std::vector<HodographPatch> out;
    const Interface& I = sol.interface;
    if (I.size() == 0 || count <= 0) return out;
    double eta = default_patch_eta(sol);
    for (int c = 0; c < count; ++c) {
        std::size_t v = I.size() * c / count;
        out.push_back(build_hodograph_patch(sol, I.vertices[v], eta));
    }
    return out;
}

PatchReport patch_report(const PressureSolution& sol, const HodographPatch& patch) {
    PatchReport r;
    r.base = patch.base;
    r.eta = patch.eta;
    const ExponentPack& pk = sol.pack;
    const PatchLattice& lat = patch.lat;
    const PatchDerivatives& d = patch.d;
    const double h = sol.g.delta();
    const double eps0 = 2.0 * h * max_gradient_norm(sol.g);
    std::vector<double> res = hodograph_residual(patch, pk);
    for (int k = 0; k <= lat.K; ++k)
        for (int j = 0; j <= lat.J; ++j) {
            std::size_t n = lat.index(k, j);
            double qz = d.qz[n], qz4 = std::pow(qz, 4), z = lat.z(k);
            Sym2 A{-d.qyy[n] / qz4, d.sqzqzy[n] / qz4, (pk.theta * qz - d.zqzz[n]) / qz4};
            auto [a0, a1] = eigenvalues(A);
            r.A_eig.add(a0);
            r.A_eig.add(a1);
            double zdet = d.zqzz[n] * d.qyy[n] - d.sqzqzy[n] * d.sqzqzy[n];
            double b = (4 * zdet - 3 * pk.theta * qz * d.qyy[n]) / (qz4 * qz);
            double b1 = (4 * zdet - (3 * pk.theta + 1) * qz * d.qyy[n]) / (qz4 * qz);
            r.b.add(b);
            r.b1.add(b1);
            r.det_raw.add(A.det());
            double H = patch.H[n];
            Point X = patch.physical(patch.q[n], lat.y(j));
            r.det_identity = std::max(r.det_identity, std::abs(qz4 * A.det() - H) / H);
            r.residual = std::max(r.residual, std::abs(res[n]));
            if (a0 <= 0 || b <= 0) r.positive = false;
            if (k == 0) r.b_axis = std::max(r.b_axis, std::abs(b - 3 * H / qz) / std::abs(b));
            // Second route: primal derivatives at the physical point.
            auto fit = local_quadratic_fit(sol.g, X, 12.0 * h, 0.5 * eps0);
            if (fit) {
                double gx = dot(fit->grad, patch.n0);
                double target = gx * (3 * H + z * fit->hess.det());
                r.b_identity = std::max(r.b_identity, std::abs(b - target) / std::abs(b));
            }
        }
    std::vector<ZY> nodes;
    for (int k = 0; k <= lat.K; ++k)
        for (int j = 0; j <= lat.J; ++j) nodes.push_back({lat.z(k), lat.y(j)});
    const double sep = 2.0 * std::max(lat.dsigma, lat.dy);
    const std::vector<double>* fields[5] = {&d.qz, &d.qy, &d.zqzz, &d.sqzqzy, &d.qyy};
    for (int f = 0; f < 5; ++f) r.holder[f] = holder_seminorm_s(nodes, *fields[f], 0.5, sep);
    return r;
}

void hodograph_suite(const PressureSolution& sol, const std::vector<HodographPatch>& patches, EstimateReport& rep) {
    for (const HodographPatch& p : patches) {
        PatchReport r = patch_report(sol, p);
        rep.patch_A_eig.merge(r.A_eig);
        rep.patch_b.merge(r.b);
        rep.patch_det_identity = std::max(rep.patch_det_identity, r.det_identity);
        rep.patch_b_identity = std::max(rep.patch_b_identity, r.b_identity);
        for (int f = 0; f < 5; ++f) rep.holder_max[f] = std::max(rep.holder_max[f], r.holder[f]);
        rep.patches_positive = rep.patches_positive && r.positive;
        rep.patches.push_back(std::move(r));
    }
}

std::vector<double> linearized_apply(const HodographPatch& patch, const ExponentPack& pack,
                                     const std::vector<double>& direction_ext) {
    const PatchLattice& lat = patch.lat;
    const PatchDerivatives& d = patch.d;
    PatchDerivatives t = patch_derivatives(lat, direction_ext);
    std::vector<double> out(lat.size());
    for (int k = 0; k <= lat.K; ++k)
        for (int j = 0; j <= lat.J; ++j) {
            std::size_t n = lat.index(k, j);
            double z = lat.z(k), qz = d.qz[n];
            double zqzz = z * d.qzz[n], zqzy2 = z * d.qzy[n];
            double zdet = zqzz * d.qyy[n] - z * d.qzy[n] * d.qzy[n];
            double second = -z * d.qyy[n] * t.qzz[n] + 2 * zqzy2 * t.qzy[n] + (pack.theta * qz - zqzz) * t.qyy[n];
            double b = (4 * zdet - 3 * pack.theta * qz * d.qyy[n]) / std::pow(qz, 5);
            out[n] = second / std::pow(qz, 4) + b * t.qz[n];
        }
    return out;
}

std::vector<double> linearized_apply_canonical(const HodographPatch& patch, const ExponentPack& pack,
                                               const std::vector<double>& direction_ext) {
    const PatchLattice& lat = patch.lat;
    const PatchDerivatives& d = patch.d;
    PatchDerivatives t = patch_derivatives(lat, direction_ext);
    std::vector<double> out(lat.size());
    for (std::size_t n = 0; n < out.size(); ++n) {
        double qz4 = std::pow(d.qz[n], 4);
        double a11 = -d.qyy[n] / qz4, a12 = d.sqzqzy[n] / qz4, a22 = (pack.theta * d.qz[n] - d.zqzz[n]) / qz4;
        double zdet = d.zqzz[n] * d.qyy[n] - d.sqzqzy[n] * d.sqzqzy[n];
        double b = (4 * zdet - 3 * pack.theta * d.qz[n] * d.qyy[n]) / (qz4 * d.qz[n]);
        out[n] = a11 * t.zqzz[n] + 2 * a12 * t.sqzqzy[n] + a22 * t.qyy[n] + b * t.qz[n];
    }
    return out;
}

LinearizationCheck linearization_check(const HodographPatch& patch, const ExponentPack& pack, std::uint64_t seed,
                                       int directions, std::vector<double> eps) {
    LinearizationCheck out;
    out.eps = eps;
    const PatchLattice& lat = patch.lat;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    const double zs = patch.eta * patch.eta, ys = patch.eta;
    std::vector<double> N0 = hodograph_operator(lat, patch.d, pack);
    for (int dir = 0; dir < directions; ++dir) {
        double a[8];
        for (double& v : a) v = U(rng);
        auto qt = [&](double z, double y) {
            double Z = z / zs, Y = y / ys;
            return a[0] + a[1] * Z + a[2] * Y + a[3] * Z * Z + a[4] * Z * Y + a[5] * Y * Y +
                   a[6] * std::sin(3.0 * Y + a[7]) * std::cos(Z);
        };
        std::vector<double> dir_ext = sample_on_lattice(lat, qt);
        std::vector<double> L = linearized_apply(patch, pack, dir_ext);
        std::vector<double> errs;
        for (double e : eps) {
            std::vector<double> pert(patch.ext);
            for (std::size_t i = 0; i < pert.size(); ++i) pert[i] += e * dir_ext[i];
            std::vector<double> N1 = hodograph_operator(lat, patch_derivatives(lat, pert), pack);
            double err = 0.0;
            for (std::size_t n = 0; n < N1.size(); ++n) err = std::max(err, std::abs((N1[n] - N0[n]) / e - L[n]));
            errs.push_back(err);
        }
        // Least-squares slope of log error against log eps.
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const double m = static_cast<double>(eps.size());
        for (std::size_t i = 0; i < eps.size(); ++i) {
            double x = std::log(eps[i]), y = std::log(errs[i]);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        out.order.push_back((m * sxy - sx * sy) / (m * sxx - sx * sx));
        out.errors.push_back(std::move(errs));
    }
    return out;
}

EstimateReport full_report(const PressureSolution& sol, int patch_count) {
    EstimateReport rep = estimate_suite(sol);
    if (sol.interface.size() == 0 || patch_count <= 0) return rep;
    const Interface& I = sol.interface;
    double eta = default_patch_eta(sol);
    std::vector<HodographPatch> patches;
    for (int c = 0; c < patch_count; ++c) {
        std::size_t v = I.size() * c / patch_count;
        try {
            patches.push_back(build_hodograph_patch(sol, I.vertices[v], eta));
        } catch (const std::runtime_error& e) {
            PatchReport failed;
            failed.base = I.vertices[v];
            failed.eta = eta;
            failed.positive = false;
            failed.error = e.what();
            rep.patches.push_back(failed);
            ++rep.patch_failures;
            rep.patches_positive = false;
        }
    }
    hodograph_suite(sol, patches, rep);
    return rep;
}

}  // namespace degma
