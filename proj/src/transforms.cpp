#include "degma/transforms.hpp"

#include <cmath>
#include <stdexcept>

namespace degma {

ExponentPack ExponentPack::from_p(double p) {
    if (!(p > 0.0 && p < 2.0)) throw std::invalid_argument("exponent p must lie in (0, 2)");
    return {p, 3.0 / (2.0 - p), (1.0 + p) / (2.0 - p)};
}

bool ExponentPack::consistent() const {
    return q == 3.0 / (2.0 - p) && theta == (1.0 + p) / (2.0 - p);
}

double pressure_value(double f, const ExponentPack& pack) {
    if (f < 0.0) throw std::domain_error("negative density");
    return std::pow(pack.q, 2.0 / 3.0) * std::pow(f, 1.0 / pack.q);
}

double density_value(double g, const ExponentPack& pack) {
    if (g < 0.0) throw std::domain_error("negative pressure");
    return std::pow(std::pow(pack.q, -2.0 / 3.0) * g, pack.q);
}

namespace {

ScalarField2D map_field(const ScalarField2D& in, const char* what, double (*fn)(double, const ExponentPack&),
                        const ExponentPack& pack) {
    ScalarField2D out = in.filled(0.0);
    for (int j = 0; j < in.n(); ++j)
        for (int i = 0; i < in.n(); ++i) {
            if (!in.readable(i, j)) continue;
            double v = in(i, j);
            if (v < 0.0)
                throw std::domain_error(std::string("negative ") + what + " " + std::to_string(v) + " at node (" +
                                        std::to_string(i) + ", " + std::to_string(j) + ")");
            out(i, j) = fn(v, pack);
        }
    return out;
}

}  // namespace

ScalarField2D pressure_from_density(const ScalarField2D& f, const ExponentPack& pack) {
    return map_field(f, "density", pressure_value, pack);
}

ScalarField2D density_from_pressure(const ScalarField2D& g, const ExponentPack& pack) {
    return map_field(g, "pressure", density_value, pack);
}

double singular_distance(ZY a, ZY b) {
    if (a.z < 0.0 || b.z < 0.0) throw std::domain_error("singular distance needs z >= 0");
    return std::abs(std::sqrt(a.z) - std::sqrt(b.z)) + std::abs(a.y - b.y);
}

double holder_seminorm_s(const std::vector<ZY>& nodes, const std::vector<double>& u, double alpha,
                         double min_sep) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("Holder exponent must lie in (0, 1)");
    if (!(min_sep > 0.0)) throw std::invalid_argument("minimum separation must be positive");
    if (nodes.size() != u.size()) throw std::invalid_argument("node and value counts differ");
    double best = 0.0;
    std::size_t pairs = 0;
    for (std::size_t a = 0; a < nodes.size(); ++a)
        for (std::size_t b = a + 1; b < nodes.size(); ++b) {
            double s = singular_distance(nodes[a], nodes[b]);
            if (s < min_sep) continue;
            ++pairs;
            best = std::max(best, std::abs(u[a] - u[b]) / std::pow(s, alpha));
        }
    if (pairs < 2) throw std::invalid_argument("fewer than two admissible node pairs");
    return best;
}

std::vector<double> sample_on_lattice(const PatchLattice& lat, const std::function<double(double, double)>& u) {
    std::vector<double> ext(lat.ext_size());
    for (int k = 0; k <= lat.K + 1; ++k)
        for (int j = -1; j <= lat.J + 1; ++j) ext[lat.ext_index(k, j)] = u(lat.z(k), lat.y(j));
    return ext;
}

PatchDerivatives patch_derivatives(const PatchLattice& lat, const std::vector<double>& ext) {
    if (ext.size() != lat.ext_size()) throw std::invalid_argument("extended lattice size mismatch");
    auto E = [&](int k, int j) { return ext[lat.ext_index(std::abs(k), j)]; };
    const double ds = lat.dsigma, dy = lat.dy;
    PatchDerivatives d;
    const std::size_t m = lat.size();
    for (auto* v : {&d.qz, &d.qy, &d.zqzz, &d.sqzqzy, &d.qyy, &d.qzz, &d.qzy}) v->assign(m, 0.0);
    for (int k = 0; k <= lat.K; ++k)
        for (int j = 0; j <= lat.J; ++j) {
            std::size_t n = lat.index(k, j);
            double qs = (E(k + 1, j) - E(k - 1, j)) / (2 * ds);
            double qss = (E(k + 1, j) - 2 * E(k, j) + E(k - 1, j)) / (ds * ds);
            double qsy = (E(k + 1, j + 1) - E(k + 1, j - 1) - E(k - 1, j + 1) + E(k - 1, j - 1)) / (4 * ds * dy);
            d.qy[n] = (E(k, j + 1) - E(k, j - 1)) / (2 * dy);
            d.qyy[n] = (E(k, j + 1) - 2 * E(k, j) + E(k, j - 1)) / (dy * dy);
            if (k == 0) {
                d.qz[n] = 0.5 * qss;
                // q_zz = Q_ssss / 12 and q_zy = Q_ssy / 2 on the axis.
                d.qzz[n] = (2 * E(2, j) - 8 * E(1, j) + 6 * E(0, j)) / (12 * std::pow(ds, 4));
                double qss_p = 2 * (E(1, j + 1) - E(0, j + 1)) / (ds * ds);
                double qss_m = 2 * (E(1, j - 1) - E(0, j - 1)) / (ds * ds);
                d.qzy[n] = 0.5 * (qss_p - qss_m) / (2 * dy);
            } else {
                double s = lat.sigma(k);
                d.qz[n] = qs / (2 * s);
                d.zqzz[n] = 0.25 * (qss - qs / s);
                d.sqzqzy[n] = 0.5 * qsy;
                d.qzz[n] = d.zqzz[n] / (s * s);
                d.qzy[n] = qsy / (2 * s);
            }
        }
    return d;
}

std::vector<double> hodograph_operator(const PatchLattice& lat, const PatchDerivatives& d, const ExponentPack& pack) {
    std::vector<double> out(lat.size());
    for (std::size_t n = 0; n < out.size(); ++n) {
        double zdet = d.zqzz[n] * d.qyy[n] - d.sqzqzy[n] * d.sqzqzy[n];
        out[n] = (-zdet + pack.theta * d.qz[n] * d.qyy[n]) / std::pow(d.qz[n], 4);
    }
    return out;
}

std::vector<double> hodograph_residual(const HodographPatch& patch, const ExponentPack& pack) {
    std::vector<double> r = hodograph_operator(patch.lat, patch.d, pack);
    for (std::size_t n = 0; n < r.size(); ++n) r[n] += patch.H[n];
    return r;
}

}  // namespace degma
