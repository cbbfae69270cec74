#include "degma/field.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "degma/transforms.hpp"

namespace degma {

ScalarField2D::ScalarField2D(GridSpec spec, std::vector<NodeKind> mask,
                             std::shared_ptr<const ConvexDomain> domain)
    : spec_(spec), values_(mask.size(), 0.0), mask_(std::move(mask)), domain_(std::move(domain)) {
    if (!(spec_.delta > 0.0)) throw std::invalid_argument("grid spacing must be positive");
    if (mask_.size() != static_cast<std::size_t>(spec_.n) * spec_.n)
        throw std::invalid_argument("mask size does not match grid");
}

ScalarField2D ScalarField2D::filled(double v) const {
    ScalarField2D out = *this;
    std::fill(out.values_.begin(), out.values_.end(), v);
    return out;
}

ScalarField2D make_grid(const ConvexDomain& domain, int n) {
    if (n < 16) throw std::invalid_argument("grid needs at least 16 nodes per axis");
    if (!(domain.area() > 0.0)) throw std::invalid_argument("degenerate domain: zero area");
    BBox b = domain.bbox();
    double w = std::max(b.hi.x - b.lo.x, b.hi.y - b.lo.y);
    double cx = 0.5 * (b.lo.x + b.hi.x), cy = 0.5 * (b.lo.y + b.hi.y);
    GridSpec spec{n, cx - 0.5 * w, cy - 0.5 * w, w / (n - 1)};
    std::vector<NodeKind> mask(static_cast<std::size_t>(n) * n);
    // Nodes within round-off of the boundary count as boundary nodes.
    const double tol = 1e-12;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            double g = domain.gauge(spec.node(i, j));
            NodeKind k = NodeKind::exterior;
            if (g < 1.0 - tol) k = NodeKind::interior;
            else if (g <= 1.0 + tol) k = NodeKind::boundary;
            mask[static_cast<std::size_t>(j) * n + i] = k;
        }
    return ScalarField2D(spec, std::move(mask), std::make_shared<ConvexDomain>(domain));
}

double sample_bilinear(const ScalarField2D& f, Point p) {
    const GridSpec& s = f.spec();
    double u = (p.x - s.x0) / s.delta, v = (p.y - s.y0) / s.delta;
    int i = static_cast<int>(std::floor(u)), j = static_cast<int>(std::floor(v));
    i = std::clamp(i, 0, s.n - 2);
    j = std::clamp(j, 0, s.n - 2);
    double a = std::clamp(u - i, 0.0, 1.0), b = std::clamp(v - j, 0.0, 1.0);
    double w[4] = {(1 - a) * (1 - b), a * (1 - b), (1 - a) * b, a * b};
    int di[4] = {0, 1, 0, 1}, dj[4] = {0, 0, 1, 1};
    double acc = 0.0, wsum = 0.0;
    for (int k = 0; k < 4; ++k) {
        if (!f.readable(i + di[k], j + dj[k])) continue;
        acc += w[k] * f(i + di[k], j + dj[k]);
        wsum += w[k];
    }
    if (wsum <= 0.0) {
        // Cell entirely outside: fall back to the nearest readable corner.
        for (int k = 0; k < 4; ++k)
            if (f.readable(i + di[k], j + dj[k])) return f(i + di[k], j + dj[k]);
        throw std::out_of_range("sample point has no readable neighbour");
    }
    return acc / wsum;
}

void write_field_csv(const ScalarField2D& f, const std::string& path) {
    std::FILE* fp = std::fopen(path.c_str(), "w");
    if (!fp) throw std::runtime_error("cannot write " + path);
    std::fprintf(fp, "x,y,value,mask\n");
    for (int j = 0; j < f.n(); ++j)
        for (int i = 0; i < f.n(); ++i) {
            Point p = f.node(i, j);
            std::fprintf(fp, "%.17g,%.17g,%.17g,%d\n", p.x, p.y, f(i, j), static_cast<int>(f.kind(i, j)));
        }
    std::fclose(fp);
}

BoundaryData::BoundaryData(Fn phi, const ConvexDomain& domain, const ExponentPack& pack, int samples)
    : phi_(std::move(phi)), pack_(pack), points_(domain.boundary_samples(samples)) {
    values_.reserve(points_.size());
    pressure_.reserve(points_.size());
    for (const Point& p : points_) {
        double v = phi_(p);
        if (!(v > 0.0) || !std::isfinite(v))
            throw std::invalid_argument("boundary data must be strictly positive (value " + std::to_string(v) +
                                        " at (" + std::to_string(p.x) + ", " + std::to_string(p.y) + "))");
        values_.push_back(v);
        pressure_.push_back(pressure_value(v, pack_));
    }
}

double BoundaryData::pressure(Point p) const { return pressure_value(phi_(p), pack_); }

}  // namespace degma
