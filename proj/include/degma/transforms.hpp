#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "degma/exponents.hpp"
#include "degma/field.hpp"
#include "degma/solution.hpp"

namespace degma {

double pressure_value(double f, const ExponentPack& pack);
double density_value(double g, const ExponentPack& pack);

// g = q^(2/3) f^(1/q) on readable nodes; throws naming the first negative node.
ScalarField2D pressure_from_density(const ScalarField2D& f, const ExponentPack& pack);
// f = (q^(-2/3) g)^q on readable nodes.
ScalarField2D density_from_pressure(const ScalarField2D& g, const ExponentPack& pack);

// Points of the half plane z >= 0 carrying the metric dz^2/z + dy^2.
struct ZY {
    double z = 0.0;
    double y = 0.0;
};

double singular_distance(ZY a, ZY b);

// Lattice uniform in sigma = sqrt(z) and y. Box nodes are k = 0..K, j = 0..J;
// the extended lattice adds k = K+1 and j = -1, J+1 so every box node gets
// centred differences. Values below sigma = 0 follow by even reflection.
struct PatchLattice {
    int K = 10;
    int J = 10;
    double dsigma = 0.0;
    double dy = 0.0;
    double y_lo = 0.0;

    int ext_cols() const { return J + 3; }
    std::size_t ext_size() const { return static_cast<std::size_t>(K + 2) * (J + 3); }
    std::size_t ext_index(int k, int j) const { return static_cast<std::size_t>(k) * (J + 3) + (j + 1); }
    std::size_t size() const { return static_cast<std::size_t>(K + 1) * (J + 1); }
    std::size_t index(int k, int j) const { return static_cast<std::size_t>(k) * (J + 1) + j; }
    double sigma(int k) const { return k * dsigma; }
    double z(int k) const { return sigma(k) * sigma(k); }
    double y(int j) const { return y_lo + j * dy; }
};

// Derivatives on the box nodes in the weighted form used by the singular spaces.
struct PatchDerivatives {
    std::vector<double> qz, qy, zqzz, sqzqzy, qyy;
    std::vector<double> qzz, qzy;  // unweighted, for the direct linearization route
};

PatchDerivatives patch_derivatives(const PatchLattice& lat, const std::vector<double>& ext);

// Samples u(z, y) on the extended lattice.
std::vector<double> sample_on_lattice(const PatchLattice& lat, const std::function<double(double, double)>& u);

struct HodographPatch {
    Point base;     // interface point P0
    Point origin;   // frame origin; n0 = (P0 - origin) / |P0 - origin|
    Point n0, t0;
    double angle = 0.0;
    double eta = 0.0;
    PatchLattice lat;

    std::shared_ptr<const ScalarField2D> h;  // forcing, for H at arbitrary points
    std::vector<double> ext;                 // q on the extended lattice
    std::vector<double> q, H;
    PatchDerivatives d;

    Point physical(double x, double y) const { return origin + x * n0 + y * t0; }
    ZY node(int k, int j) const { return {lat.z(k), lat.y(j)}; }
};

// Inverts z = g along rotated lines near P0. Throws on a non-monotone line or
// when the box leaves the positivity set's neighbourhood inside the domain.
HodographPatch build_hodograph_patch(const PressureSolution& sol, Point P0, double eta, int K = 10, int J = 10);

// Default box half-width 10 * delta * max(1, max|Dg|).
double default_patch_eta(const PressureSolution& sol);

// Hodograph operator N(q) = (-z det D^2 q + theta q_z q_yy) / q_z^4.
std::vector<double> hodograph_operator(const PatchLattice& lat, const PatchDerivatives& d, const ExponentPack& pack);
// N(q) + H at every box node.
std::vector<double> hodograph_residual(const HodographPatch& patch, const ExponentPack& pack);

void write_patch_csv(const HodographPatch& patch, const std::string& path);

// q^r(z, y) = q(r^2 + r^2 z, y_r + r y) / r^2 on the disk z^2 + y^2 <= mu^2.
struct DilatedPatch {
    double r = 0.0, y_r = 0.0, mu = 0.5;
    int m = 0;  // nodes per axis on [-mu, mu]
    double step = 0.0;
    std::vector<double> q, qz, qy, qzz, qzy, qyy, H;
    std::vector<std::uint8_t> in_disk;
    std::size_t index(int a, int b) const { return static_cast<std::size_t>(b) * m + a; }
    double z(int a) const { return -mu + a * step; }
    double y(int b) const { return -mu + b * step; }
};

DilatedPatch dilate_patch(const HodographPatch& patch, double r, double y_r, double mu = 0.5, int m = 21);
// (-(1+z) det D^2 q^r + theta q^r_z q^r_yy)/(q^r_z)^4 + H^r on disk nodes.
std::vector<double> dilated_residual(const DilatedPatch& dp, const ExponentPack& pack);

// Largest |u(a) - u(b)| / s(a, b)^alpha over node pairs with s >= min_sep.
double holder_seminorm_s(const std::vector<ZY>& nodes, const std::vector<double>& u, double alpha, double min_sep);

}  // namespace degma
