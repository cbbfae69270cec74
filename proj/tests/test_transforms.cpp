#include <cmath>
#include <random>
#include <stdexcept>

#include "doctest.h"

#include "degma/calculus.hpp"
#include "degma/diagnostics.hpp"
#include "degma/radial.hpp"
#include "degma/solver.hpp"
#include "degma/transforms.hpp"

using namespace degma;

namespace {

// Exact radial pressure solution on the disk of radius 2 (p = 1, rho = 1, h = 1).
PressureSolution exact_radial(int n) {
    static RadialSolution rs = solve_radial(1.0, 1.0, 1.0, 2.0);
    PressureSolution sol;
    sol.pack = rs.pack();
    sol.f = radial_to_field(rs, ConvexDomain::disk({0, 0}, 2.0), n);
    sol.g = pressure_from_density(sol.f, sol.pack);
    sol.h = sol.f.filled(1.0);
    sol.interface = extract_interface(sol.g, sol.pack);
    return sol;
}

double sup_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace

TEST_CASE("exponent pack identities") {
    ExponentPack pk = ExponentPack::from_p(1.0);
    CHECK(pk.q == 3.0);
    CHECK(pk.theta == 2.0);
    for (int k = 1; k < 2000; ++k) {
        ExponentPack e = ExponentPack::from_p(k * 1e-3);
        CHECK(e.consistent());
        CHECK(e.theta == doctest::Approx(e.q - 1.0).epsilon(1e-12));
    }
    CHECK_THROWS(ExponentPack::from_p(0.0));
    CHECK_THROWS(ExponentPack::from_p(2.0));
}

TEST_CASE("pressure and density transforms") {
    ExponentPack p1 = ExponentPack::from_p(1.0);
    CHECK(pressure_value(1.0 / 18.0, p1) == doctest::Approx(std::cbrt(0.5)).epsilon(1e-14));
    CHECK(density_value(std::cbrt(0.5), p1) == doctest::Approx(1.0 / 18.0).epsilon(1e-14));
    CHECK(pressure_value(0.0, p1) == 0.0);
    CHECK(density_value(0.0, p1) == 0.0);
    ExponentPack ph = ExponentPack::from_p(0.5);
    CHECK(density_value(std::pow(2.0, 2.0 / 3.0), ph) == doctest::Approx(1.0).epsilon(1e-14));

    ScalarField2D f = make_grid(ConvexDomain::disk({0, 0}, 1.0), 33);
    for (int j = 0; j < f.n(); ++j)
        for (int i = 0; i < f.n(); ++i) {
            Point p = f.node(i, j);
            f(i, j) = std::max(0.0, p.x * p.x + p.y * p.y - 0.1);
        }
    ScalarField2D g = pressure_from_density(f, p1);
    ScalarField2D back = density_from_pressure(g, p1);
    for (std::size_t k = 0; k < f.size(); ++k) {
        if (f.kind(k) == NodeKind::exterior) continue;
        if (f[k] == 0.0) {
            CHECK(g[k] == 0.0);
            CHECK(back[k] == 0.0);
        } else {
            CHECK(std::abs(back[k] - f[k]) <= 1e-12 * f[k]);
        }
    }
    f(16, 16) = -1e-3;
    CHECK_THROWS_WITH(pressure_from_density(f, p1), doctest::Contains("(16, 16)"));
}

TEST_CASE("singular distance") {
    CHECK(singular_distance({1, 0}, {4, 1}) == doctest::Approx(2.0));
    CHECK(singular_distance({0.3, 0.2}, {0.3, 0.2}) == 0.0);
    CHECK(singular_distance({0, 0}, {0.25, 0}) == doctest::Approx(0.5));
    CHECK_THROWS(singular_distance({-1, 0}, {0, 0}));
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(0.0, 2.0);
    for (int k = 0; k < 10000; ++k) {
        ZY a{U(rng), U(rng)}, b{U(rng), U(rng)}, c{U(rng), U(rng)};
        double ab = singular_distance(a, b), ba = singular_distance(b, a);
        CHECK(ab == ba);
        CHECK(ab <= singular_distance(a, c) + singular_distance(c, b) + 1e-14);
    }
}

TEST_CASE("Hoelder seminorms in the singular distance") {
    std::vector<ZY> nodes;
    for (int k = 0; k <= 8; ++k)
        for (int j = 0; j <= 8; ++j) nodes.push_back({(k / 8.0) * (k / 8.0), j / 8.0});
    auto brute = [&](const std::vector<double>& u, double alpha, double min_sep) {
        double best = 0.0;
        for (std::size_t a = 0; a < nodes.size(); ++a)
            for (std::size_t b = a + 1; b < nodes.size(); ++b) {
                double s = singular_distance(nodes[a], nodes[b]);
                if (s < min_sep) continue;
                best = std::max(best, std::abs(u[a] - u[b]) / std::pow(s, alpha));
            }
        return best;
    };
    std::vector<double> c(nodes.size(), 3.0), sq, yv;
    for (const ZY& n : nodes) {
        sq.push_back(std::sqrt(n.z));
        yv.push_back(n.y);
    }
    CHECK(holder_seminorm_s(nodes, c, 0.5, 0.1) == 0.0);
    CHECK(holder_seminorm_s(nodes, sq, 0.3, 0.1) == doctest::Approx(brute(sq, 0.3, 0.1)).epsilon(1e-12));
    // u = sqrt z is 1-Lipschitz in s, so the seminorm is at most the largest s^(1 - alpha)
    CHECK(holder_seminorm_s(nodes, sq, 0.3, 0.1) <= std::pow(2.0, 0.7) + 1e-12);
    double hy = holder_seminorm_s(nodes, yv, 0.5, 0.1);
    CHECK(hy == doctest::Approx(brute(yv, 0.5, 0.1)).epsilon(1e-12));
    CHECK(hy == doctest::Approx(1.0).epsilon(1e-12));  // |dy| / s^(1/2) peaks at the full side
    CHECK_THROWS(holder_seminorm_s({{0, 0}}, {1.0}, 0.5, 0.1));
}

TEST_CASE("patch lattice differentiation is exact on low-order polynomials") {
    PatchLattice lat{10, 10, 0.02, 0.04, -0.2};
    std::vector<double> ext = sample_on_lattice(lat, [](double z, double y) { return 1.0 + 2.0 * z - 0.5 * y + 0.3 * y * y; });
    PatchDerivatives d = patch_derivatives(lat, ext);
    for (int k = 0; k <= lat.K; ++k)
        for (int j = 0; j <= lat.J; ++j) {
            std::size_t i = lat.index(k, j);
            CHECK(d.qz[i] == doctest::Approx(2.0).epsilon(1e-9));
            CHECK(d.qy[i] == doctest::Approx(-0.5 + 0.6 * lat.y(j)).epsilon(1e-9));
            CHECK(d.qyy[i] == doctest::Approx(0.6).epsilon(1e-9));
            CHECK(std::abs(d.zqzz[i]) < 1e-9);
            CHECK(std::abs(d.sqzqzy[i]) < 1e-9);
        }
}

TEST_CASE("planar pressure inverts to a linear patch") {
    const double a = 1.7;
    ConvexDomain sq = ConvexDomain::polygon({{-1, -1}, {1, -1}, {1, 1}, {-1, 1}});
    PressureSolution sol;
    sol.pack = ExponentPack::from_p(1.0);
    sol.g = make_grid(sq, 65);
    for (int j = 0; j < 65; ++j)
        for (int i = 0; i < 65; ++i) sol.g(i, j) = a * std::max(0.0, sol.g.node(i, j).x);
    sol.f = density_from_pressure(sol.g, sol.pack);
    sol.h = sol.g.filled(0.0);
    sol.interface.vertices = {{0.0, 0.0}};
    sol.interface.center = {-0.5, 0.0};
    HodographPatch patch = build_hodograph_patch(sol, {0.0, 0.0}, 0.2);
    for (int k = 0; k <= patch.lat.K; ++k)
        for (int j = 0; j <= patch.lat.J; ++j) {
            std::size_t i = patch.lat.index(k, j);
            // x measured from the frame origin at -0.5
            CHECK(patch.q[i] == doctest::Approx(0.5 + patch.lat.z(k) / a).epsilon(1e-9));
            CHECK(patch.d.qz[i] == doctest::Approx(1.0 / a).epsilon(1e-9));
            CHECK(std::abs(patch.d.qyy[i]) < 1e-9);
        }
    // flat case with H = 0: the residual vanishes
    CHECK(sup_abs(hodograph_residual(patch, sol.pack)) < 1e-8);
    DilatedPatch dp = dilate_patch(patch, 0.15, 0.0);
    for (std::size_t i = 0; i < dp.qz.size(); ++i)
        if (dp.in_disk[i]) CHECK(dp.qz[i] == doctest::Approx(1.0 / a).epsilon(1e-8));
}

TEST_CASE("radial hodograph patch") {
    PressureSolution sol = exact_radial(257);
    ExponentPack pk = sol.pack;
    Point P0{1.0, 0.0};
    HodographPatch patch = build_hodograph_patch(sol, P0, default_patch_eta(sol));
    const PatchLattice& L = patch.lat;
    std::size_t mid = L.index(0, L.J / 2);
    CHECK(patch.d.qz[mid] == doctest::Approx(std::cbrt(2.0)).epsilon(0.01));
    CHECK(norm(patch.physical(patch.q[mid], L.y(L.J / 2)) - P0) <= sol.g.delta());

    // g_x q_z = 1 at matched points, g_x from the profile
    RadialSolution rs = solve_radial(1.0, 1.0, 1.0, 2.0);
    for (int k = 2; k <= L.K; k += 4) {
        std::size_t i = L.index(k, L.J / 2);
        Point X = patch.physical(patch.q[i], L.y(L.J / 2));
        double r = norm(X), fv = rs.f_at(r), fp = rs.fprime_at(r);
        double gx = pressure_value(fv, pk) / (pk.q * fv) * fp * dot(X, patch.n0) / r;
        CHECK(gx * patch.d.qz[i] == doctest::Approx(1.0).epsilon(0.01));
    }

    // concavity of q up to 5 delta
    for (int k = 1; k < L.K; ++k)
        for (int j = 1; j < L.J; ++j) {
            std::size_t i = L.index(k, j);
            Sym2 Hq{patch.d.qzz[i], patch.d.qzy[i], patch.d.qyy[i]};
            CHECK(eigenvalues(Hq).second <= 5.0 * sol.g.delta());
        }

    // dilation: centre value and residual bound on the half disk
    int kr = L.K / 2, jr = L.J / 2;
    double r = std::sqrt(L.z(kr));
    DilatedPatch dp = dilate_patch(patch, r, L.y(jr));
    std::size_t c = dp.index(dp.m / 2, dp.m / 2);
    CHECK(dp.q[c] == doctest::Approx(patch.q[L.index(kr, jr)] / (r * r)).epsilon(1e-9));
    double src = sup_abs(hodograph_residual(patch, pk));
    double dil = sup_abs(dilated_residual(dp, pk));
    CHECK(dil <= 10.0 * src);
    CHECK_THROWS_WITH(dilate_patch(patch, 2.0 * patch.eta, 0.0), doctest::Contains("escapes"));
}

TEST_CASE("radial patch residual decreases under refinement") {
    auto residual = [](int n) {
        PressureSolution sol = exact_radial(n);
        HodographPatch patch = build_hodograph_patch(sol, {1.0, 0.0}, 0.25);
        return sup_abs(hodograph_residual(patch, sol.pack));
    };
    double coarse = residual(129), fine = residual(257);
    MESSAGE("patch residual n=129 ", coarse, " n=257 ", fine);
    CHECK(fine < coarse);
}

TEST_CASE("patch construction errors") {
    PressureSolution sol = exact_radial(129);
    CHECK_THROWS_WITH(build_hodograph_patch(sol, {1.0, 0.0}, 1.5), doctest::Contains("eta"));
    CHECK_THROWS(build_hodograph_patch(sol, {1.0, 0.0}, 0.0));
}
