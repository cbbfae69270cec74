#pragma once

#include <memory>
#include <vector>

#include "degma/exponents.hpp"
#include "degma/field.hpp"

namespace degma {

// A = (h0 rho / (q^2 (q-1)))^(1/(2-p)), the balance of A (r - rho)^q in
// f'' f' / r = h0 f^p at leading order.
double leading_coefficient(double p, double rho, double h0);

// Next series term: f = A s^q (1 + c1 s + ...), s = r - rho.
double series_correction(double p, double rho);

struct RadialSolution {
    double p = 1.0, rho = 1.0, h0 = 1.0, R = 2.0, tol = 1e-10;
    double A = 0.0;
    double launch = 0.0;  // integration starts at rho + launch
    std::vector<double> r, f, fprime;

    ExponentPack pack() const { return ExponentPack::from_p(p); }
    // Profile at any r in [0, R]; zero for r <= rho, series below the launch.
    double f_at(double r) const;
    double fprime_at(double r) const;
    double f_outer() const { return f.back(); }

    // Local slope of log f against log(r - rho), least squares over
    // s in [s_lo, s_hi] at log-uniform sample points.
    double exponent_fit(double s_lo = 1e-3, double s_hi = 1e-1) const;
    // g'(rho+) extrapolated from the integrated profile on s in [1e-4, 1e-2].
    double interface_slope_fit() const;

    std::shared_ptr<const void> dense;  // interpolant state
};

RadialSolution solve_radial(double p, double rho, double h0, double R, double tol = 1e-10);

struct RadialPressure {
    std::vector<double> g, gprime;
    double gprime_interface = 0.0;  // closed form (h0 rho / theta)^(1/3)
};

RadialPressure radial_pressure(const RadialSolution& sol);

// Rotational extension to a disk centred at the origin with radius <= R.
ScalarField2D radial_to_field(const RadialSolution& sol, const ConvexDomain& domain, int n);

// Interface radius rho1 for which the profile reaches f(R) = target.
double radial_rho_for_boundary_value(double p, double h0, double R, double target, double tol = 1e-10);

}  // namespace degma
