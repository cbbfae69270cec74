#pragma once

#include <optional>
#include <vector>

#include "degma/field.hpp"
#include "degma/solution.hpp"

namespace degma {

enum class SourceMode { lagged, implicit };
enum class ConvexityMode { repair, none };

struct SolveConfig {
    int max_sweeps = 200;      // Newton steps plus smoothing passes per level
    double tol = 1e-10;        // sup of the update relative to sup f
    SourceMode source = SourceMode::lagged;
    ConvexityMode convexity = ConvexityMode::repair;
    int n = 129;
    bool nested = true;        // coarse-to-fine start when no initial guess is given
    int coarsest = 33;
    int presweeps = 4;         // nodewise sweeps after each prolongation
    double max_fallback_fraction = 0.05;

    void validate() const;
};

// Solves det D^2 f = h f^p with f = phi on the boundary; h lives on the target
// grid. `initial` (same grid) replaces the cold start.
PressureSolution solve_ma(const ConvexDomain& domain, const BoundaryData& boundary, const ScalarField2D& h,
                          const ExponentPack& pack, const SolveConfig& cfg,
                          const std::optional<ScalarField2D>& initial = std::nullopt);

// Sup of the discrete complementarity residual of f (density, on its own grid).
double scheme_residual(const BoundaryData& boundary, const ScalarField2D& h, const ExponentPack& pack,
                       const ScalarField2D& f);

// Cold start: the boundary pressure along rays from the centre, ramped from
// half the gauge outward and clipped at zero.
ScalarField2D cold_start(const ScalarField2D& grid, const BoundaryData& boundary, const ExponentPack& pack);

// Crossings of g = 2 delta max|Dg| pushed to g = 0 with a local quadratic
// level-set fit, ordered by angle about the vanishing set's centroid.
Interface extract_interface(const ScalarField2D& g, const ExponentPack& pack);

struct FreeBoundaryResidual {
    std::vector<double> residual;  // theta g_nu^3 kappa - h per vertex
    double sup = 0.0;
};

FreeBoundaryResidual free_boundary_relation(const Interface& iface, const ScalarField2D& h, const ExponentPack& pack);

}  // namespace degma
