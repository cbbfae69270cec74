#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "degma/continuation.hpp"
#include "degma/field.hpp"
#include "degma/solver.hpp"

namespace degma {

inline constexpr int kConfigSchema = 1;

struct DomainSpec {
    DomainKind kind = DomainKind::disk;
    Point center;
    double radius = 2.0;
    double semi_x = 2.0, semi_y = 1.5;
    std::vector<Point> vertices;

    ConvexDomain build() const;
};

enum class BoundaryKind { constant, radial, table };

struct BoundarySpec {
    BoundaryKind kind = BoundaryKind::radial;
    double value = 1.0;  // constant
    double rho = 1.0;    // radial: trace of the oracle with this interface radius
    std::string table;   // CSV "angle,value", angle in radians about the domain center

    // Density data on the boundary; h0 and the domain's outer radius feed the oracle.
    BoundaryData build(const ConvexDomain& domain, const ExponentPack& pack, double h0) const;
};

struct RunConfig {
    int schema = kConfigSchema;
    std::string command;
    double p = 1.0;
    double h0 = 1.0;  // constant forcing
    DomainSpec domain;
    BoundarySpec boundary;
    SolveConfig solver;  // solver.n is the grid size

    // radial
    double rho = 1.0;
    double R = 2.0;
    double radial_tol = 1e-10;

    // continuation
    double lambda = 0.01;
    double delta0 = 0.1;
    double delta_min = 1e-3;
    int continuation_patches = 4;
    std::vector<double> checkpoints;
    std::string restart;  // checkpoint CSV; its JSON sidecar supplies t and delta

    // diagnose
    std::string input;  // solution CSV
    int patches = 8;
    double classify_tol = 0.05;

    std::string out = "out";
    std::uint64_t seed = 1;

    ContinuationConfig continuation() const;
};

// "section.key" -> value pairs applied on top of the file, in order.
using Overrides = std::vector<std::pair<std::string, std::string>>;

// INI file (may be empty: defaults only) plus overrides. Unknown keys, bad
// values and a wrong schema version raise std::invalid_argument naming the
// field.
RunConfig load_config(const std::string& path, const Overrides& overrides = {});
RunConfig parse_config_text(const std::string& text, const Overrides& overrides = {});

// The effective configuration as INI text, suitable for reruns.
std::string to_ini(const RunConfig& cfg);

}  // namespace degma
