#include <cmath>
#include <cstdio>
#include <stdexcept>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <boost/math/interpolators/pchip.hpp>

#include "degma/calculus.hpp"
#include "degma/transforms.hpp"

namespace degma {

namespace {

Point vanishing_centroid(const ScalarField2D& g) {
    double sx = 0.0, sy = 0.0;
    int cnt = 0;
    for (int j = 0; j < g.n(); ++j)
        for (int i = 0; i < g.n(); ++i)
            if (g.kind(i, j) == NodeKind::interior && g(i, j) <= 0.0) {
                Point p = g.node(i, j);
                sx += p.x;
                sy += p.y;
                ++cnt;
            }
    if (cnt == 0) throw std::runtime_error("empty vanishing set");
    return {sx / cnt, sy / cnt};
}

}  // namespace

double default_patch_eta(const PressureSolution& sol) {
    return 10.0 * sol.g.delta() * std::max(1.0, max_gradient_norm(sol.g));
}

HodographPatch build_hodograph_patch(const PressureSolution& sol, Point P0, double eta, int K, int J) {
    if (!(eta > 0.0) || K < 2 || J < 2) throw std::invalid_argument("patch needs eta > 0 and K, J >= 2");
    const ScalarField2D& g = sol.g;
    const double h = g.delta();
    HodographPatch patch;
    patch.base = P0;
    patch.origin = sol.interface.size() ? sol.interface.center : vanishing_centroid(g);
    Point v = P0 - patch.origin;
    double L = norm(v);
    if (!(L > 0.0)) throw std::invalid_argument("base point coincides with the frame origin");
    patch.n0 = (1.0 / L) * v;
    patch.t0 = {-patch.n0.y, patch.n0.x};
    patch.angle = std::atan2(patch.n0.y, patch.n0.x);
    patch.eta = eta;
    patch.lat = {K, J, eta / K, 2.0 * eta / J, -eta};
    patch.h = std::make_shared<const ScalarField2D>(sol.h);

    const double eps0 = 2.0 * h * max_gradient_norm(g);
    // wide window: second differences along y amplify grid-scale noise in the level set
    const double radius = 12.0 * h, zmax = patch.lat.z(K + 1);
    const ConvexDomain* dom = g.domain().get();
    const PatchLattice& lat = patch.lat;
    patch.ext.assign(lat.ext_size(), 0.0);

    for (int j = -1; j <= J + 1; ++j) {
        const double y = lat.y(j);
        auto value = [&](double X) {
            Point p = patch.physical(X, y);
            if (dom && !dom->contains(p))
                throw std::runtime_error("patch escapes the domain; reduce eta");
            auto fit = local_quadratic_fit(g, p, radius, 0.5 * eps0);
            if (!fit) throw std::runtime_error("patch escapes the positivity set's neighbourhood; reduce eta");
            return fit->value;
        };
        const double step = 0.25 * h;
        double X = L;
        int guard = 0;
        while (value(X) >= 0.0) {
            X -= step;
            if (++guard > 400) throw std::runtime_error("sample line never reaches the vanishing set");
        }
        std::vector<double> zs, xs;
        guard = 0;
        for (;;) {
            double z = value(X);
            if (!zs.empty() && !(z > zs.back()))
                throw std::runtime_error("non-monotone g along sample line j=" + std::to_string(j) +
                                         " (y=" + std::to_string(y) + ")");
            zs.push_back(z);
            xs.push_back(X);
            if (z > zmax && zs.size() >= 4) break;
            X += step;
            if (++guard > 4000) throw std::runtime_error("sample line too long; eta too large");
        }
        boost::math::interpolators::pchip<std::vector<double>> inv(std::move(zs), std::move(xs));
        for (int k = 0; k <= K + 1; ++k) patch.ext[lat.ext_index(k, j)] = inv(lat.z(k));
    }

    patch.d = patch_derivatives(lat, patch.ext);
    patch.q.assign(lat.size(), 0.0);
    patch.H.assign(lat.size(), 0.0);
    for (int k = 0; k <= K; ++k)
        for (int j = 0; j <= J; ++j) {
            std::size_t n = lat.index(k, j);
            patch.q[n] = patch.ext[lat.ext_index(k, j)];
            patch.H[n] = sample_bilinear(sol.h, patch.physical(patch.q[n], lat.y(j)));
            if (!(patch.d.qz[n] > 0.0))
                throw std::runtime_error("q_z is not positive on the patch; lines do not cross level sets transversally");
        }
    return patch;
}

void write_patch_csv(const HodographPatch& patch, const std::string& path) {
    std::FILE* fp = std::fopen(path.c_str(), "w");
    if (!fp) throw std::runtime_error("cannot write " + path);
    std::fprintf(fp, "z,y,q,qz,qy,zqzz,sqzqzy,qyy,H\n");
    const PatchLattice& lat = patch.lat;
    for (int k = 0; k <= lat.K; ++k)
        for (int j = 0; j <= lat.J; ++j) {
            std::size_t n = lat.index(k, j);
            std::fprintf(fp, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", lat.z(k), lat.y(j),
                         patch.q[n], patch.d.qz[n], patch.d.qy[n], patch.d.zqzz[n], patch.d.sqzqzy[n],
                         patch.d.qyy[n], patch.H[n]);
        }
    std::fclose(fp);
}

namespace {

// C2 tensor-product spline of the extended lattice values in (sigma, y),
// reflected evenly across sigma = 0.
class LatticeSpline {
public:
    LatticeSpline(const PatchLattice& lat, const std::vector<double>& ext) : lat_(lat) {
        for (int k = 0; k <= lat.K + 1; ++k) {
            std::vector<double> row(lat.J + 3);
            for (int j = -1; j <= lat.J + 1; ++j) row[j + 1] = ext[lat.ext_index(k, j)];
            rows_.emplace_back(row.begin(), row.end(), lat.y(-1), lat.dy);
        }
    }

    double operator()(double z, double y) const {
        const int K1 = lat_.K + 1;
        std::vector<double> col(2 * K1 + 1);
        for (int k = 0; k <= K1; ++k) {
            double v = rows_[k](y);
            col[K1 + k] = v;
            col[K1 - k] = v;
        }
        // end slope from a quadratic in z through the last three rows, so q linear
        // or quadratic in z is reproduced exactly
        const double z0 = lat_.z(K1 - 2), z1 = lat_.z(K1 - 1), z2 = lat_.z(K1);
        const double f0 = col[2 * K1 - 2], f1 = col[2 * K1 - 1], f2 = col[2 * K1];
        double dfdz = f0 * (z2 - z1) / ((z0 - z1) * (z0 - z2)) + f1 * (z2 - z0) / ((z1 - z0) * (z1 - z2)) +
                      f2 * ((z2 - z0) + (z2 - z1)) / ((z2 - z0) * (z2 - z1));
        double slope = 2.0 * K1 * lat_.dsigma * dfdz;
        boost::math::interpolators::cardinal_cubic_b_spline<double> s(col.begin(), col.end(),
                                                                      -K1 * lat_.dsigma, lat_.dsigma, -slope, slope);
        return s(std::sqrt(std::max(z, 0.0)));
    }

private:
    PatchLattice lat_;
    std::vector<boost::math::interpolators::cardinal_cubic_b_spline<double>> rows_;
};

}  // namespace

DilatedPatch dilate_patch(const HodographPatch& patch, double r, double y_r, double mu, int m) {
    const PatchLattice& lat = patch.lat;
    if (!(r > 0.0) || !(mu > 0.0 && mu < 1.0) || m < 5) throw std::invalid_argument("invalid dilation parameters");
    const double zhi = lat.z(lat.K), ylo = lat.y(0), yhi = lat.y(lat.J);
    DilatedPatch dp;
    dp.r = r;
    dp.y_r = y_r;
    dp.mu = mu;
    dp.m = m;
    dp.step = 2.0 * mu / (m - 1);
    // A ghost ring one step outside the square keeps every disk node centred.
    const double reach = mu + dp.step;
    if (r * r * (1.0 - reach) < 0.0 || r * r * (1.0 + reach) > zhi || y_r - r * reach < ylo ||
        y_r + r * reach > yhi)
        throw std::runtime_error("dilated image escapes patch");

    LatticeSpline spline(lat, patch.ext);
    const int mg = m + 2;
    std::vector<double> v(static_cast<std::size_t>(mg) * mg);
    auto at = [&](int a, int b) -> double& { return v[static_cast<std::size_t>(b + 1) * mg + (a + 1)]; };
    for (int b = -1; b <= m; ++b)
        for (int a = -1; a <= m; ++a) {
            double z = dp.z(a), y = dp.y(b);
            at(a, b) = spline(r * r + r * r * z, y_r + r * y) / (r * r);
        }
    const std::size_t nn = static_cast<std::size_t>(m) * m;
    for (auto* f : {&dp.q, &dp.qz, &dp.qy, &dp.qzz, &dp.qzy, &dp.qyy, &dp.H}) f->assign(nn, 0.0);
    dp.in_disk.assign(nn, 0);
    const double s = dp.step;
    for (int b = 0; b < m; ++b)
        for (int a = 0; a < m; ++a) {
            std::size_t n = dp.index(a, b);
            double z = dp.z(a), y = dp.y(b);
            dp.in_disk[n] = z * z + y * y <= mu * mu * (1 + 1e-12);
            dp.q[n] = at(a, b);
            dp.qz[n] = (at(a + 1, b) - at(a - 1, b)) / (2 * s);
            dp.qy[n] = (at(a, b + 1) - at(a, b - 1)) / (2 * s);
            dp.qzz[n] = (at(a + 1, b) - 2 * at(a, b) + at(a - 1, b)) / (s * s);
            dp.qyy[n] = (at(a, b + 1) - 2 * at(a, b) + at(a, b - 1)) / (s * s);
            dp.qzy[n] = (at(a + 1, b + 1) - at(a + 1, b - 1) - at(a - 1, b + 1) + at(a - 1, b - 1)) / (4 * s * s);
            double yy = y_r + r * y;
            dp.H[n] = patch.h ? sample_bilinear(*patch.h, patch.physical(r * r * dp.q[n], yy)) : 0.0;
        }
    return dp;
}

std::vector<double> dilated_residual(const DilatedPatch& dp, const ExponentPack& pack) {
    std::vector<double> out;
    for (int b = 0; b < dp.m; ++b)
        for (int a = 0; a < dp.m; ++a) {
            std::size_t n = dp.index(a, b);
            if (!dp.in_disk[n]) continue;
            double zt = 1.0 + dp.z(a);
            double det = dp.qzz[n] * dp.qyy[n] - dp.qzy[n] * dp.qzy[n];
            out.push_back((-zt * det + pack.theta * dp.qz[n] * dp.qyy[n]) / std::pow(dp.qz[n], 4) + dp.H[n]);
        }
    return out;
}

}  // namespace degma
