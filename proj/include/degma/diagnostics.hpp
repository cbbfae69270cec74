#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "degma/field.hpp"
#include "degma/solution.hpp"
#include "degma/transforms.hpp"

namespace degma {

struct Range {
    double min = std::numeric_limits<double>::infinity();
    double max = -std::numeric_limits<double>::infinity();
    void add(double v) {
        min = std::min(min, v);
        max = std::max(max, v);
    }
    void merge(const Range& o) {
        min = std::min(min, o.min);
        max = std::max(max, o.max);
    }
    bool empty() const { return min > max; }
};

// P[g] = g det D^2 g + theta (g_y^2 g_xx - 2 g_x g_y g_xy + g_x^2 g_yy) at
// nodes with a full stencil; zero elsewhere.
ScalarField2D operator_P(const ScalarField2D& g, const ExponentPack& pack);

enum class Classification { supersolution, subsolution, solution, neither };
std::string to_string(Classification c);

struct ClassifyResult {
    Classification kind = Classification::neither;
    bool convex = true;
    double worst_above = 0.0;  // largest (P - h)/h over tested nodes and vertices
    double worst_below = 0.0;  // largest (h - P)/h
    std::vector<std::size_t> witnesses;        // grid nodes violating the reported side
    std::vector<std::size_t> vertex_witnesses;  // interface vertices
    std::vector<std::size_t> convexity_witnesses;
};

// Interior test on Omega(g) at least 3 delta from the free boundary; boundary
// test theta g_nu^3 kappa against h on the extracted interface.
ClassifyResult classify(const ScalarField2D& g, const ScalarField2D& h, const ExponentPack& pack, double tol);

struct ComparisonResult {
    bool hypotheses_ok = true;
    bool pass = true;
    double worst = 0.0;  // max of g2 - g1
    std::vector<std::size_t> boundary_violations;  // g2 > g1 + tol next to the boundary
    std::vector<std::size_t> support_violations;   // g2 > tol where g1 = 0
    std::vector<std::size_t> violations;           // g2 > g1 + tol
};

// g1 a supersolution, g2 a subsolution on the same grid.
ComparisonResult comparison_check(const ScalarField2D& g1, const ScalarField2D& g2, double tol);

struct PatchReport {
    Point base;
    double eta = 0.0;
    Range A_eig;
    Range b, b1;
    Range det_raw;
    double det_identity = 0.0;  // sup |q_z^4 det A - H| / H
    double b_identity = 0.0;    // sup |b - g_x (3h + g det D^2 g)| / |b|
    double b_axis = 0.0;        // sup on z = 0 of |b - 3 H / q_z| / b
    double residual = 0.0;      // sup |N(q) + H|
    std::array<double, 5> holder{};  // q_z, q_y, z q_zz, sqrt(z) q_zy, q_yy at alpha = 1/2
    bool positive = true;
    std::string error;
};

inline const std::array<const char*, 5> kHolderFields{"qz", "qy", "zqzz", "sqzqzy", "qyy"};

struct EstimateReport {
    bool empty = true;
    int nodes = 0;
    double band = 3.0;  // excluded distance from the interface, in grid spacings
    Range grad;        // |Dg| on Omega(g), interface values included
    Range M_eig;       // eigenvalues of the (nu, tau) matrix
    Range G;
    Range Q;
    double Z_min = std::numeric_limits<double>::infinity();
    Range Mf_eig;      // density-form echo of the same matrix
    double detM = 0.0;       // sup |det M - h| / h
    double fb = 0.0;         // sup |theta g_nu^3 kappa - h|
    Range kappa;
    int interface_vertices = 0;

    std::vector<PatchReport> patches;
    Range patch_A_eig, patch_b;
    double patch_det_identity = 0.0, patch_b_identity = 0.0;
    std::array<double, 5> holder_max{};
    bool patches_positive = true;
    int patch_failures = 0;
};

EstimateReport estimate_suite(const PressureSolution& sol, double band = 3.0);

// Patches at `count` interface vertices spread evenly along the polyline.
std::vector<HodographPatch> default_patches(const PressureSolution& sol, int count);

PatchReport patch_report(const PressureSolution& sol, const HodographPatch& patch);
void hodograph_suite(const PressureSolution& sol, const std::vector<HodographPatch>& patches, EstimateReport& rep);

// Linearized hodograph operator applied to a direction given on the extended
// lattice; `canonical` assembles it from (A, b) instead of the direct form.
std::vector<double> linearized_apply(const HodographPatch& patch, const ExponentPack& pack,
                                     const std::vector<double>& direction_ext);
std::vector<double> linearized_apply_canonical(const HodographPatch& patch, const ExponentPack& pack,
                                               const std::vector<double>& direction_ext);

struct LinearizationCheck {
    std::vector<double> eps;
    std::vector<std::vector<double>> errors;  // per direction, per eps
    std::vector<double> order;                // fitted slope per direction
};

LinearizationCheck linearization_check(const HodographPatch& patch, const ExponentPack& pack, std::uint64_t seed,
                                       int directions = 5, std::vector<double> eps = {1e-3, 1e-4, 1e-5});

// Complete report: grid estimates plus `patch_count` hodograph patches.
EstimateReport full_report(const PressureSolution& sol, int patch_count = 8);

}  // namespace degma
