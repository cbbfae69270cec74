#include <cmath>
#include <stdexcept>

#include "doctest.h"

#include "degma/calculus.hpp"
#include "degma/continuation.hpp"
#include "degma/diagnostics.hpp"
#include "degma/solver.hpp"
#include "degma/transforms.hpp"
#include "radial_case.hpp"

using namespace degma;
using degma::testing::RadialCase;
using degma::testing::make_radial_case;

namespace {

const RadialCase& coarse() {
    static RadialCase c = make_radial_case(129);
    return c;
}

const RadialCase& fine() {
    static RadialCase c = make_radial_case(257);
    return c;
}

}  // namespace

TEST_CASE("solve configuration validation") {
    SolveConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.tol = 0.0;
    CHECK_THROWS_WITH(cfg.validate(), doctest::Contains("solver.tol"));
    cfg = SolveConfig{};
    cfg.max_sweeps = 0;
    CHECK_THROWS_WITH(cfg.validate(), doctest::Contains("max_sweeps"));
    cfg = SolveConfig{};
    cfg.n = 8;
    CHECK_THROWS(cfg.validate());
}

TEST_CASE("radial data on the disk reproduces the profile") {
    const RadialCase& c = coarse();
    CHECK(c.sol.report.converged);
    double err = c.max_rel_error();
    MESSAGE("max relative error n=129: ", err);
    CHECK(err <= 0.03);
    for (std::size_t k = 0; k < c.sol.f.size(); ++k) {
        if (c.sol.f.kind(k) == NodeKind::exterior) continue;
        CHECK(c.sol.f[k] >= 0.0);
        if (c.sol.f[k] == 0.0) CHECK(c.sol.g[k] == 0.0);
    }
    const double d = c.sol.f.delta();
    CHECK(std::abs(c.sol.interface.mean_radius({0, 0}) - 1.0) <= 0.5 * d);
    for (Point v : c.sol.interface.vertices) CHECK(std::abs(norm(v) - 1.0) <= d);
}

TEST_CASE("discrete residual is small away from the interface") {
    const RadialCase& c = coarse();
    CHECK(c.sol.report.residual <= 1e-8);
    ScalarField2D f = c.sol.f;
    BoundaryData bd([phi = c.rs.f_outer()](Point) { return phi; }, c.dom, c.pk);
    CHECK(scheme_residual(bd, c.sol.h, c.pk, f) <= 1e-8);
}

TEST_CASE("midpoint convexity of the solution") {
    const RadialCase& c = coarse();
    GradientField G = gradient(c.sol.f);
    double gmax = 0.0;
    for (std::size_t k = 0; k < G.v.size(); ++k)
        if (G.quality[k] == Stencil::full) gmax = std::max(gmax, norm(G.v[k]));
    CHECK(midpoint_convexity_violations(c.sol.f, 10000, 3, 2.0 * c.sol.f.delta() * gmax) == 0);
}

TEST_CASE("larger boundary data shrinks the vanishing set") {
    const RadialCase& c = coarse();
    RadialCase big = make_radial_case(129, 2.0);
    REQUIRE(big.sol.report.converged);
    CHECK(vanishing_set_escapes(big.sol.f, c.sol.f).empty());
    int zeros_small = 0, zeros_big = 0;
    for (std::size_t k = 0; k < c.sol.f.size(); ++k) {
        if (c.sol.f.kind(k) != NodeKind::interior) continue;
        zeros_small += c.sol.f[k] == 0.0;
        zeros_big += big.sol.f[k] == 0.0;
    }
    CHECK(zeros_big < zeros_small);
}

TEST_CASE("forcing must be bounded away from zero") {
    const RadialCase& c = coarse();
    BoundaryData bd([](Point) { return 0.08; }, c.dom, c.pk);
    ScalarField2D h = make_grid(c.dom, 65).filled(1.0);
    h(32, 32) = 0.0;
    SolveConfig cfg;
    cfg.n = 65;
    CHECK_THROWS_WITH(solve_ma(c.dom, bd, h, c.pk, cfg), doctest::Contains("lambda < h < 1/lambda"));
    ScalarField2D wrong = make_grid(c.dom, 33).filled(1.0);
    CHECK_THROWS(solve_ma(c.dom, bd, wrong, c.pk, cfg));
}

TEST_CASE("a supersolution ceiling brackets the solve") {
    const RadialCase& c = coarse();
    Supersolution sup = build_supersolution(1.0, 1.0, c.dom, 129, 0.01);
    BoundaryData bd = sup.trace();
    SolveConfig cfg;
    cfg.n = 129;
    PressureSolution sol = solve_ma(c.dom, bd, sup.psi.filled(1.0), c.pk, cfg);
    REQUIRE(sol.report.converged);
    CHECK(vanishing_set_escapes(sup.psi, sol.f).empty());
    ScalarField2D gpsi = pressure_from_density(sup.psi, c.pk);
    ComparisonResult cmp = comparison_check(gpsi, sol.g, comparison_tolerance(gpsi));
    CHECK(cmp.hypotheses_ok);
    CHECK(cmp.pass);
}

TEST_CASE("interface geometry at n = 257") {
    const RadialCase& c = fine();
    REQUIRE(c.sol.report.converged);
    const Interface& I = c.sol.interface;
    REQUIRE(I.size() > 50);
    double kerr = 0.0, gerr = 0.0;
    for (std::size_t k = 0; k < I.size(); ++k) {
        kerr = std::max(kerr, std::abs(I.kappa[k] - 1.0));
        gerr = std::max(gerr, std::abs(I.gnu[k] / std::cbrt(0.5) - 1.0));
        CHECK(I.kappa[k] >= 0.0);
    }
    MESSAGE("kappa error ", kerr, ", slope error ", gerr);
    CHECK(kerr <= 0.05);
    CHECK(gerr <= 0.02);
    FreeBoundaryResidual fb = free_boundary_relation(I, c.sol.h, c.pk);
    CHECK(fb.sup <= 0.05);
}

TEST_CASE("refinement reduces the oracle error") {
    double e1 = coarse().max_rel_error(), e2 = fine().max_rel_error();
    MESSAGE("errors ", e1, " -> ", e2);
    CHECK(e1 / e2 >= 1.5);
}

TEST_CASE("free-boundary relation on a synthetic interface") {
    ExponentPack pk = ExponentPack::from_p(1.0);
    const double rho = 0.8, hv = 1.3;
    ScalarField2D h = make_grid(ConvexDomain::disk({0, 0}, 2.0), 65).filled(hv);
    Interface I;
    for (int k = 0; k < 64; ++k) {
        double a = 2.0 * M_PI * k / 64;
        I.vertices.push_back({rho * std::cos(a), rho * std::sin(a)});
        I.kappa.push_back(1.0 / rho);
        I.gnu.push_back(std::cbrt(hv * rho / pk.theta));
        I.kappa_geom.push_back(1.0 / rho);
    }
    FreeBoundaryResidual fb = free_boundary_relation(I, h, pk);
    CHECK(fb.sup < 1e-12);
    ScalarField2D h2 = h.filled(2.0 * hv);
    FreeBoundaryResidual fb2 = free_boundary_relation(I, h2, pk);
    for (std::size_t k = 0; k < I.size(); ++k) CHECK(fb2.residual[k] == doctest::Approx(fb.residual[k] - hv).epsilon(1e-12));
}

TEST_CASE("interface extraction errors") {
    ScalarField2D g = make_grid(ConvexDomain::disk({0, 0}, 1.0), 33).filled(1.0);
    CHECK_THROWS_WITH(extract_interface(g, ExponentPack::from_p(1.0)), doctest::Contains("empty vanishing set"));
}
