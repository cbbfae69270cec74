#include "degma/radial.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

#include <boost/math/interpolators/quintic_hermite.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>

#include "degma/transforms.hpp"

namespace degma {

namespace {

using State = std::array<double, 2>;
using Quintic = boost::math::interpolators::quintic_hermite<std::vector<double>>;

void check_params(double p, double rho, double h0) {
    if (!(p > 0.0 && p < 2.0)) throw std::invalid_argument("p must lie in (0, 2)");
    if (!(rho > 0.0)) throw std::invalid_argument("rho must be positive");
    if (!(h0 > 0.0)) throw std::invalid_argument("h0 must be positive");
}

struct Dense {
    Quintic f;
    Quintic fp;
};

}  // namespace

double leading_coefficient(double p, double rho, double h0) {
    check_params(p, rho, h0);
    double q = 3.0 / (2.0 - p);
    return std::pow(h0 * rho / (q * q * (q - 1.0)), 1.0 / (2.0 - p));
}

double series_correction(double p, double rho) {
    check_params(p, rho, 1.0);
    double q = 3.0 / (2.0 - p);
    return q * (q - 1.0) / ((6.0 * q - 4.0) * rho);
}

RadialSolution solve_radial(double p, double rho, double h0, double R, double tol) {
    check_params(p, rho, h0);
    if (!(R > rho)) throw std::invalid_argument("outer radius must exceed rho");
    if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
    RadialSolution sol;
    sol.p = p;
    sol.rho = rho;
    sol.h0 = h0;
    sol.R = R;
    sol.tol = tol;
    const double q = 3.0 / (2.0 - p);
    sol.A = leading_coefficient(p, rho, h0);
    const double c1 = series_correction(p, rho);
    const double eps = 1e-6 * rho;
    sol.launch = eps;

    State y{sol.A * std::pow(eps, q) * (1 + c1 * eps),
            sol.A * (q * std::pow(eps, q - 1) + c1 * (q + 1) * std::pow(eps, q))};
    if (!(y[1] > 0.0) || !std::isnormal(y[1])) throw std::runtime_error("f' underflow at the launch point");

    auto rhs = [&](const State& s, State& ds, double r) {
        ds[0] = s[1];
        ds[1] = r * h0 * std::pow(std::max(s[0], 0.0), p) / s[1];
    };
    namespace ode = boost::numeric::odeint;
    // Relative control only: f spans many decades between the launch and R.
    auto stepper = ode::make_controlled(1e-300, tol, ode::runge_kutta_dopri5<State>());
    std::vector<double> rs, fs, fps, fpps;
    auto observe = [&](const State& s, double r) {
        if (!rs.empty() && r <= rs.back()) return;
        rs.push_back(r);
        fs.push_back(s[0]);
        fps.push_back(s[1]);
        fpps.push_back(r * h0 * std::pow(std::max(s[0], 0.0), p) / s[1]);
    };
    double r0 = rho + eps;
    std::size_t steps = ode::integrate_adaptive(stepper, rhs, y, r0, R, eps * 1e-2, observe);
    if (steps > 2000000 || rs.empty() || std::abs(rs.back() - R) > 1e-12 * R)
        throw std::runtime_error("step-size collapse in radial integration");
    sol.r = rs;
    sol.f = fs;
    sol.fprime = fps;
    // Third derivative of f from differentiating f'' = r h0 f^p / f'.
    std::vector<double> f3(rs.size());
    for (std::size_t i = 0; i < rs.size(); ++i) {
        double f = fs[i], fp = fps[i], fpp = fpps[i];
        f3[i] = h0 * std::pow(f, p) / fp + rs[i] * h0 * p * std::pow(f, p - 1) - fpp * fpp / fp;
    }
    auto dense = std::make_shared<Dense>(Dense{Quintic(std::vector<double>(rs), std::vector<double>(fs),
                                                       std::vector<double>(fps), std::vector<double>(fpps)),
                                               Quintic(std::move(rs), std::move(fps), std::move(fpps),
                                                       std::move(f3))});
    sol.dense = dense;
    return sol;
}

double RadialSolution::f_at(double rr) const {
    double s = rr - rho;
    if (s <= 0.0) return 0.0;
    if (s < launch) {
        double q = 3.0 / (2.0 - p);
        return A * std::pow(s, q) * (1 + series_correction(p, rho) * s);
    }
    if (rr > R) throw std::out_of_range("radius beyond the profile");
    return static_cast<const Dense*>(dense.get())->f(rr);
}

double RadialSolution::fprime_at(double rr) const {
    double s = rr - rho;
    if (s <= 0.0) return 0.0;
    if (s < launch) {
        double q = 3.0 / (2.0 - p), c1 = series_correction(p, rho);
        return A * (q * std::pow(s, q - 1) + c1 * (q + 1) * std::pow(s, q));
    }
    if (rr > R) throw std::out_of_range("radius beyond the profile");
    return static_cast<const Dense*>(dense.get())->fp(rr);
}

double RadialSolution::exponent_fit(double s_lo, double s_hi) const {
    const int m = 41;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < m; ++i) {
        double ls = std::log(s_lo) + (std::log(s_hi) - std::log(s_lo)) * i / (m - 1);
        double lf = std::log(f_at(rho + std::exp(ls)));
        sx += ls;
        sy += lf;
        sxx += ls * ls;
        sxy += ls * lf;
    }
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

double RadialSolution::interface_slope_fit() const {
    ExponentPack pk = pack();
    // g' = q^(2/3) (1/q) f^(1/q - 1) f', fitted as a + b s over small s.
    const int m = 21;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < m; ++i) {
        double s = 1e-4 + (1e-2 - 1e-4) * i / (m - 1);
        double f = f_at(rho + s), fp = fprime_at(rho + s);
        double gp = std::pow(pk.q, 2.0 / 3.0) / pk.q * std::pow(f, 1.0 / pk.q - 1.0) * fp;
        sx += s;
        sy += gp;
        sxx += s * s;
        sxy += s * gp;
    }
    double b = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    return (sy - b * sx) / m;
}

RadialPressure radial_pressure(const RadialSolution& sol) {
    ExponentPack pk = sol.pack();
    RadialPressure out;
    out.g.reserve(sol.r.size());
    out.gprime.reserve(sol.r.size());
    for (std::size_t i = 0; i < sol.r.size(); ++i) {
        double f = sol.f[i];
        out.g.push_back(pressure_value(f, pk));
        out.gprime.push_back(std::pow(pk.q, 2.0 / 3.0) / pk.q * std::pow(f, 1.0 / pk.q - 1.0) * sol.fprime[i]);
    }
    out.gprime_interface = std::cbrt(sol.h0 * sol.rho / pk.theta);
    return out;
}

ScalarField2D radial_to_field(const RadialSolution& sol, const ConvexDomain& domain, int n) {
    if (domain.kind() != DomainKind::disk || norm(domain.center()) > 1e-14)
        throw std::invalid_argument("radial extension needs a disk centred at the origin");
    if (domain.semi_x() > sol.R * (1 + 1e-14)) throw std::invalid_argument("domain exceeds the profile radius");
    ScalarField2D out = make_grid(domain, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            if (out.readable(i, j)) out(i, j) = sol.f_at(std::min(norm(out.node(i, j)), sol.R));
    return out;
}

double radial_rho_for_boundary_value(double p, double h0, double R, double target, double tol) {
    if (!(target > 0.0)) throw std::invalid_argument("boundary value must be positive");
    auto F = [&](double rho) { return std::log(solve_radial(p, rho, h0, R, tol).f_outer() / target); };
    double lo = 1e-3 * R, hi = R * (1 - 1e-4);
    double flo = F(lo), fhi = F(hi);
    if (!(flo > 0.0 && fhi < 0.0)) throw std::runtime_error("boundary value outside the radial family");
    boost::uintmax_t it = 200;
    auto r = boost::math::tools::toms748_solve(F, lo, hi, flo, fhi, boost::math::tools::eps_tolerance<double>(40), it);
    return 0.5 * (r.first + r.second);
}

}  // namespace degma
