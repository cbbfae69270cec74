#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "degma/exponents.hpp"
#include "degma/geometry.hpp"

namespace degma {

enum class NodeKind : std::uint8_t { exterior = 0, boundary = 1, interior = 2 };

// Square node lattice over a box: node (i, j) sits at (x0 + i*delta, y0 + j*delta).
struct GridSpec {
    int n = 0;
    double x0 = 0.0;
    double y0 = 0.0;
    double delta = 0.0;

    Point node(int i, int j) const { return {x0 + i * delta, y0 + j * delta}; }
    bool operator==(const GridSpec&) const = default;
};

class ScalarField2D {
public:
    ScalarField2D() = default;
    ScalarField2D(GridSpec spec, std::vector<NodeKind> mask,
                  std::shared_ptr<const ConvexDomain> domain = nullptr);

    const GridSpec& spec() const { return spec_; }
    int n() const { return spec_.n; }
    double delta() const { return spec_.delta; }
    std::size_t size() const { return values_.size(); }
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * spec_.n + i; }
    Point node(int i, int j) const { return spec_.node(i, j); }

    double& operator()(int i, int j) { return values_[index(i, j)]; }
    double operator()(int i, int j) const { return values_[index(i, j)]; }
    double& operator[](std::size_t k) { return values_[k]; }
    double operator[](std::size_t k) const { return values_[k]; }

    NodeKind kind(int i, int j) const { return mask_[index(i, j)]; }
    NodeKind kind(std::size_t k) const { return mask_[k]; }
    // Interior or boundary node, i.e. a node whose value may be read.
    bool readable(int i, int j) const {
        return i >= 0 && j >= 0 && i < spec_.n && j < spec_.n && kind(i, j) != NodeKind::exterior;
    }

    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }
    const std::vector<NodeKind>& mask() const { return mask_; }
    const std::shared_ptr<const ConvexDomain>& domain() const { return domain_; }

    // Same grid and mask, every value set to v.
    ScalarField2D filled(double v) const;

private:
    GridSpec spec_;
    std::vector<double> values_;
    std::vector<NodeKind> mask_;
    std::shared_ptr<const ConvexDomain> domain_;
};

// Grid over the square hull of the domain's bounding box, delta = width / (n - 1).
ScalarField2D make_grid(const ConvexDomain& domain, int n);

// Bilinear value at p from readable nodes; weights renormalized over the
// readable corners of the containing cell.
double sample_bilinear(const ScalarField2D& f, Point p);

// Rows "x,y,value,mask" in row-major order with 17 significant digits.
void write_field_csv(const ScalarField2D& f, const std::string& path);

// Dirichlet data f = phi on the boundary together with its pressure trace.
class BoundaryData {
public:
    using Fn = std::function<double(Point)>;

    BoundaryData(Fn phi, const ConvexDomain& domain, const ExponentPack& pack, int samples = 256);

    double density(Point p) const { return phi_(p); }
    double pressure(Point p) const;

    const std::vector<Point>& points() const { return points_; }
    const std::vector<double>& values() const { return values_; }
    const std::vector<double>& pressure_values() const { return pressure_; }
    const ExponentPack& pack() const { return pack_; }

private:
    Fn phi_;
    ExponentPack pack_;
    std::vector<Point> points_;
    std::vector<double> values_;
    std::vector<double> pressure_;
};

}  // namespace degma
