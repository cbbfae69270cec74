#pragma once

#include <string>
#include <vector>

#include "degma/exponents.hpp"
#include "degma/field.hpp"

namespace degma {

// Free boundary as a closed polyline with per-vertex slope and curvature.
struct Interface {
    std::vector<Point> vertices;
    std::vector<double> kappa;       // g_tt / g_nu from the local level-set fit
    std::vector<double> gnu;         // normal pressure slope at the vertex
    std::vector<double> kappa_geom;  // circumscribed-circle estimate, for comparison
    Point center;                    // centroid of the vanishing set

    std::size_t size() const { return vertices.size(); }
    double mean_radius(Point about) const;
    // Distance from p to the polyline.
    double distance(Point p) const;
};

void write_interface_csv(const Interface& iface, const std::string& path);

struct LevelLog {
    int n = 0;
    int newton_steps = 0;
    int sweeps = 0;
    double residual = 0.0;
    double update = 0.0;
};

struct ConvergenceReport {
    bool converged = false;
    int sweeps = 0;          // smoothing and repair passes
    int newton_steps = 0;
    double residual = 0.0;   // sup of the complementarity residual on the final grid
    double update = 0.0;     // sup of the last update relative to sup f
    int fallbacks = 0;       // nodes where the convex root was unavailable
    int convexity_repairs = 0;
    std::vector<LevelLog> levels;
};

struct PressureSolution {
    ExponentPack pack;
    ScalarField2D f;
    ScalarField2D g;
    ScalarField2D h;
    Interface interface;
    ConvergenceReport report;

    bool positive(std::size_t k) const { return g[k] > 0.0; }
};

}  // namespace degma
