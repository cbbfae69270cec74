#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "degma/field.hpp"

namespace degma {

struct Sym2 {
    double xx = 0.0, xy = 0.0, yy = 0.0;
    double det() const { return xx * yy - xy * xy; }
    double trace() const { return xx + yy; }
};

// Eigenvalues of a symmetric 2x2 matrix, ascending.
std::pair<double, double> eigenvalues(const Sym2& m);

// Per-node stencil quality.
enum class Stencil : std::uint8_t { undefined = 0, degraded = 1, full = 2 };

struct GradientField {
    std::vector<Point> v;
    std::vector<Stencil> quality;
};

struct HessianField {
    std::vector<Sym2> v;
    std::vector<Stencil> quality;
};

// Central differences in the interior; one-sided second order where only one
// side is readable, first order (flagged degraded) where only one neighbour is.
GradientField gradient(const ScalarField2D& f);
// Five/nine point differences; one-sided first order and quadrant cross
// differences are flagged degraded.
HessianField hessian(const ScalarField2D& f);

// Largest |Dg| over nodes with g > 0 and a full stencil.
double max_gradient_norm(const ScalarField2D& g);

struct LevelFrame {
    std::vector<Point> nu;
    std::vector<Point> tau;
    std::vector<std::uint8_t> defined;
};

LevelFrame level_frame(const GradientField& grad, double floor = 1e-6);
LevelFrame level_frame(const ScalarField2D& g, double floor = 1e-6);

struct DirectionalSecond {
    std::vector<double> nn, nt, tt;
    std::vector<std::uint8_t> defined;
};

DirectionalSecond directional_second(const HessianField& hess, const LevelFrame& frame);

// Frame components of one Hessian.
inline double quad_form(const Sym2& h, Point a, Point b) {
    return a.x * (h.xx * b.x + h.xy * b.y) + a.y * (h.xy * b.x + h.yy * b.y);
}

struct QuadFit {
    double value = 0.0;
    Point grad;
    Sym2 hess;
    int used = 0;
};

// Weighted least-squares quadratic through readable nodes within `radius` of p
// whose value is at least `min_value`. The weight (1 - r^2/radius^2)^4 vanishes
// smoothly at the cutoff, so the fit varies smoothly with p.
std::optional<QuadFit> local_quadratic_fit(const ScalarField2D& f, Point p, double radius,
                                           double min_value);

}  // namespace degma
