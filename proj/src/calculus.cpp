#include "degma/calculus.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace degma {

std::pair<double, double> eigenvalues(const Sym2& m) {
    double mean = 0.5 * (m.xx + m.yy);
    double rad = std::hypot(0.5 * (m.xx - m.yy), m.xy);
    return {mean - rad, mean + rad};
}

namespace {

struct Axis {
    int di, dj;
};

// First derivative along one axis; returns quality.
Stencil first_diff(const ScalarField2D& f, int i, int j, Axis a, double& out) {
    const double h = f.delta();
    bool fwd = f.readable(i + a.di, j + a.dj), bwd = f.readable(i - a.di, j - a.dj);
    double u0 = f(i, j);
    if (fwd && bwd) {
        out = (f(i + a.di, j + a.dj) - f(i - a.di, j - a.dj)) / (2 * h);
        return Stencil::full;
    }
    if (fwd && f.readable(i + 2 * a.di, j + 2 * a.dj)) {
        out = (-3 * u0 + 4 * f(i + a.di, j + a.dj) - f(i + 2 * a.di, j + 2 * a.dj)) / (2 * h);
        return Stencil::full;
    }
    if (bwd && f.readable(i - 2 * a.di, j - 2 * a.dj)) {
        out = (3 * u0 - 4 * f(i - a.di, j - a.dj) + f(i - 2 * a.di, j - 2 * a.dj)) / (2 * h);
        return Stencil::full;
    }
    if (fwd) {
        out = (f(i + a.di, j + a.dj) - u0) / h;
        return Stencil::degraded;
    }
    if (bwd) {
        out = (u0 - f(i - a.di, j - a.dj)) / h;
        return Stencil::degraded;
    }
    out = 0.0;
    return Stencil::undefined;
}

Stencil second_diff(const ScalarField2D& f, int i, int j, Axis a, double& out) {
    const double h2 = f.delta() * f.delta();
    bool fwd = f.readable(i + a.di, j + a.dj), bwd = f.readable(i - a.di, j - a.dj);
    if (fwd && bwd) {
        out = (f(i + a.di, j + a.dj) - 2 * f(i, j) + f(i - a.di, j - a.dj)) / h2;
        return Stencil::full;
    }
    for (int s : {1, -1}) {
        if (f.readable(i + s * a.di, j + s * a.dj) && f.readable(i + 2 * s * a.di, j + 2 * s * a.dj)) {
            out = (f(i, j) - 2 * f(i + s * a.di, j + s * a.dj) + f(i + 2 * s * a.di, j + 2 * s * a.dj)) / h2;
            return Stencil::degraded;
        }
    }
    out = 0.0;
    return Stencil::undefined;
}

Stencil cross_diff(const ScalarField2D& f, int i, int j, double& out) {
    const double h2 = f.delta() * f.delta();
    if (f.readable(i + 1, j + 1) && f.readable(i - 1, j - 1) && f.readable(i - 1, j + 1) &&
        f.readable(i + 1, j - 1)) {
        out = (f(i + 1, j + 1) + f(i - 1, j - 1) - f(i - 1, j + 1) - f(i + 1, j - 1)) / (4 * h2);
        return Stencil::full;
    }
    for (int a : {1, -1})
        for (int b : {1, -1})
            if (f.readable(i + a, j + b) && f.readable(i + a, j) && f.readable(i, j + b)) {
                out = a * b * (f(i + a, j + b) - f(i + a, j) - f(i, j + b) + f(i, j)) / h2;
                return Stencil::degraded;
            }
    out = 0.0;
    return Stencil::undefined;
}

Stencil combine(Stencil a, Stencil b) { return static_cast<Stencil>(std::min(static_cast<int>(a), static_cast<int>(b))); }

}  // namespace

GradientField gradient(const ScalarField2D& f) {
    GradientField out;
    out.v.assign(f.size(), Point{});
    out.quality.assign(f.size(), Stencil::undefined);
    for (int j = 0; j < f.n(); ++j)
        for (int i = 0; i < f.n(); ++i) {
            if (!f.readable(i, j)) continue;
            std::size_t k = f.index(i, j);
            Stencil qx = first_diff(f, i, j, {1, 0}, out.v[k].x);
            Stencil qy = first_diff(f, i, j, {0, 1}, out.v[k].y);
            out.quality[k] = combine(qx, qy);
        }
    return out;
}

HessianField hessian(const ScalarField2D& f) {
    HessianField out;
    out.v.assign(f.size(), Sym2{});
    out.quality.assign(f.size(), Stencil::undefined);
    for (int j = 0; j < f.n(); ++j)
        for (int i = 0; i < f.n(); ++i) {
            if (!f.readable(i, j)) continue;
            std::size_t k = f.index(i, j);
            Sym2& h = out.v[k];
            Stencil q = second_diff(f, i, j, {1, 0}, h.xx);
            q = combine(q, second_diff(f, i, j, {0, 1}, h.yy));
            q = combine(q, cross_diff(f, i, j, h.xy));
            out.quality[k] = q;
        }
    return out;
}

double max_gradient_norm(const ScalarField2D& g) {
    GradientField grad = gradient(g);
    double m = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k)
        if (g[k] > 0.0 && grad.quality[k] == Stencil::full) m = std::max(m, norm(grad.v[k]));
    return m;
}

LevelFrame level_frame(const GradientField& grad, double floor) {
    LevelFrame fr;
    const std::size_t m = grad.v.size();
    fr.nu.assign(m, Point{});
    fr.tau.assign(m, Point{});
    fr.defined.assign(m, 0);
    for (std::size_t k = 0; k < m; ++k) {
        if (grad.quality[k] == Stencil::undefined) continue;
        double len = norm(grad.v[k]);
        if (!(len >= floor)) continue;
        Point nu = (1.0 / len) * grad.v[k];
        fr.nu[k] = nu;
        fr.tau[k] = {-nu.y, nu.x};
        fr.defined[k] = 1;
    }
    return fr;
}

LevelFrame level_frame(const ScalarField2D& g, double floor) { return level_frame(gradient(g), floor); }

DirectionalSecond directional_second(const HessianField& hess, const LevelFrame& frame) {
    DirectionalSecond d;
    const std::size_t m = hess.v.size();
    d.nn.assign(m, 0.0);
    d.nt.assign(m, 0.0);
    d.tt.assign(m, 0.0);
    d.defined.assign(m, 0);
    for (std::size_t k = 0; k < m; ++k) {
        if (!frame.defined[k] || hess.quality[k] == Stencil::undefined) continue;
        d.nn[k] = quad_form(hess.v[k], frame.nu[k], frame.nu[k]);
        d.nt[k] = quad_form(hess.v[k], frame.nu[k], frame.tau[k]);
        d.tt[k] = quad_form(hess.v[k], frame.tau[k], frame.tau[k]);
        d.defined[k] = 1;
    }
    return d;
}

std::optional<QuadFit> local_quadratic_fit(const ScalarField2D& f, Point p, double radius,
                                           double min_value) {
    const GridSpec& s = f.spec();
    const double h = s.delta;
    int ic = static_cast<int>(std::lround((p.x - s.x0) / h));
    int jc = static_cast<int>(std::lround((p.y - s.y0) / h));
    int w = static_cast<int>(std::ceil(radius / h)) + 1;
    // Normal equations in coordinates scaled by the spacing.
    Eigen::Matrix<double, 6, 6> ata = Eigen::Matrix<double, 6, 6>::Zero();
    Eigen::Matrix<double, 6, 1> atb = Eigen::Matrix<double, 6, 1>::Zero();
    int used = 0;
    const double r2max = (radius / h) * (radius / h);
    for (int j = std::max(jc - w, 0); j <= std::min(jc + w, s.n - 1); ++j)
        for (int i = std::max(ic - w, 0); i <= std::min(ic + w, s.n - 1); ++i) {
            if (!f.readable(i, j)) continue;
            double v = f(i, j);
            if (v < min_value) continue;
            Point q = f.node(i, j);
            double dx = (q.x - p.x) / h, dy = (q.y - p.y) / h;
            double r2 = dx * dx + dy * dy;
            if (r2 >= r2max) continue;
            double wt = std::pow(1.0 - r2 / r2max, 4);
            Eigen::Matrix<double, 6, 1> row;
            row << 1.0, dx, dy, 0.5 * dx * dx, dx * dy, 0.5 * dy * dy;
            ata.noalias() += wt * row * row.transpose();
            atb.noalias() += wt * v * row;
            ++used;
        }
    if (used < 10) return std::nullopt;
    Eigen::LDLT<Eigen::Matrix<double, 6, 6>> ldlt(ata);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return std::nullopt;
    Eigen::Matrix<double, 6, 1> c = ldlt.solve(atb);
    if (!c.allFinite()) return std::nullopt;
    QuadFit fit;
    fit.value = c[0];
    fit.grad = {c[1] / h, c[2] / h};
    fit.hess = {c[3] / (h * h), c[4] / (h * h), c[5] / (h * h)};
    fit.used = used;
    return fit;
}

}  // namespace degma
