#include "degma/geometry.hpp"

#include <algorithm>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <boost/math/tools/roots.hpp>

namespace degma {

std::string to_string(DomainKind k) {
    switch (k) {
        case DomainKind::disk: return "disk";
        case DomainKind::ellipse: return "ellipse";
        case DomainKind::polygon: return "polygon";
    }
    return "unknown";
}

ConvexDomain ConvexDomain::disk(Point center, double radius) {
    if (!(radius > 0.0)) throw std::invalid_argument("degenerate domain: disk radius must be positive");
    ConvexDomain d;
    d.kind_ = DomainKind::disk;
    d.center_ = center;
    d.ax_ = d.ay_ = radius;
    return d;
}

ConvexDomain ConvexDomain::ellipse(Point center, double semi_x, double semi_y) {
    if (!(semi_x > 0.0) || !(semi_y > 0.0))
        throw std::invalid_argument("degenerate domain: ellipse semi-axes must be positive");
    ConvexDomain d;
    d.kind_ = DomainKind::ellipse;
    d.center_ = center;
    d.ax_ = semi_x;
    d.ay_ = semi_y;
    return d;
}

ConvexDomain ConvexDomain::polygon(std::vector<Point> v) {
    if (v.size() < 3) throw std::invalid_argument("degenerate domain: polygon needs three vertices");
    const std::size_t m = v.size();
    double area2 = 0.0;
    for (std::size_t k = 0; k < m; ++k) area2 += cross(v[k], v[(k + 1) % m]);
    if (std::abs(area2) < 1e-14) throw std::invalid_argument("degenerate domain: zero area");
    if (area2 < 0) std::reverse(v.begin(), v.end());
    // Every turn must be strictly to the left.
    for (std::size_t k = 0; k < m; ++k) {
        Point e0 = v[(k + 1) % m] - v[k];
        Point e1 = v[(k + 2) % m] - v[(k + 1) % m];
        if (cross(e0, e1) <= 1e-14 * norm(e0) * norm(e1)) throw std::invalid_argument("not convex");
    }
    ConvexDomain d;
    d.kind_ = DomainKind::polygon;
    d.verts_ = std::move(v);
    // Area centroid.
    double a = 0.0, cx = 0.0, cy = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        const Point& p0 = d.verts_[k];
        const Point& p1 = d.verts_[(k + 1) % m];
        double c = cross(p0, p1);
        a += c;
        cx += (p0.x + p1.x) * c;
        cy += (p0.y + p1.y) * c;
    }
    d.center_ = {cx / (3.0 * a), cy / (3.0 * a)};
    return d;
}

double ConvexDomain::gauge(Point p) const {
    Point d = p - center_;
    if (kind_ != DomainKind::polygon) return std::hypot(d.x / ax_, d.y / ay_);
    double g = 0.0;
    const std::size_t m = verts_.size();
    for (std::size_t k = 0; k < m; ++k) {
        Point a = verts_[k] - center_;
        Point e = verts_[(k + 1) % m] - verts_[k];
        Point nrm{e.y, -e.x};  // outward for counter-clockwise order
        g = std::max(g, dot(nrm, d) / dot(nrm, a));
    }
    return g;
}

double ConvexDomain::exit_fraction(Point a, Point b) const {
    auto f = [&](double t) { return gauge(a + t * (b - a)) - 1.0; };
    double fa = f(0.0), fb = f(1.0);
    if (fa >= 0.0) return 0.0;
    if (fb <= 0.0) return 1.0;
    boost::uintmax_t it = 100;
    auto r = boost::math::tools::toms748_solve(f, 0.0, 1.0, fa, fb,
                                               boost::math::tools::eps_tolerance<double>(50), it);
    return 0.5 * (r.first + r.second);
}

Point ConvexDomain::radial_projection(Point p) const {
    Point d = p - center_;
    double g = gauge(p);
    if (g <= 0.0) return center_ + Point{ax_, 0.0};
    return center_ + (1.0 / g) * d;
}

BBox ConvexDomain::bbox() const {
    if (kind_ != DomainKind::polygon)
        return {{center_.x - ax_, center_.y - ay_}, {center_.x + ax_, center_.y + ay_}};
    BBox b{verts_[0], verts_[0]};
    for (const Point& v : verts_) {
        b.lo.x = std::min(b.lo.x, v.x);
        b.lo.y = std::min(b.lo.y, v.y);
        b.hi.x = std::max(b.hi.x, v.x);
        b.hi.y = std::max(b.hi.y, v.y);
    }
    return b;
}

double ConvexDomain::area() const {
    if (kind_ != DomainKind::polygon) return std::numbers::pi * ax_ * ay_;
    double a = 0.0;
    for (std::size_t k = 0; k < verts_.size(); ++k) a += cross(verts_[k], verts_[(k + 1) % verts_.size()]);
    return 0.5 * a;
}

std::vector<Point> ConvexDomain::boundary_samples(int m) const {
    std::vector<Point> out;
    out.reserve(m);
    if (kind_ != DomainKind::polygon) {
        for (int k = 0; k < m; ++k) {
            double t = 2.0 * std::numbers::pi * k / m;
            out.push_back({center_.x + ax_ * std::cos(t), center_.y + ay_ * std::sin(t)});
        }
        return out;
    }
    // Equal arclength spacing along the edges.
    const std::size_t nv = verts_.size();
    double perim = 0.0;
    for (std::size_t k = 0; k < nv; ++k) perim += norm(verts_[(k + 1) % nv] - verts_[k]);
    std::size_t edge = 0;
    double start = 0.0;
    for (int k = 0; k < m; ++k) {
        double s = perim * k / m;
        double len = norm(verts_[(edge + 1) % nv] - verts_[edge]);
        while (s > start + len && edge + 1 < nv) {
            start += len;
            ++edge;
            len = norm(verts_[(edge + 1) % nv] - verts_[edge]);
        }
        double t = len > 0 ? (s - start) / len : 0.0;
        out.push_back(verts_[edge] + t * (verts_[(edge + 1) % nv] - verts_[edge]));
    }
    return out;
}

double ConvexDomain::max_radius() const {
    if (kind_ == DomainKind::polygon) {
        double r = 0.0;
        for (const Point& v : verts_) r = std::max(r, norm(v));
        return r;
    }
    double r = 0.0;
    for (const Point& p : boundary_samples(4096)) r = std::max(r, norm(p));
    return r;
}

double ConvexDomain::min_radius() const {
    if (!contains({0.0, 0.0})) return 0.0;
    if (kind_ == DomainKind::disk) return ax_ - norm(center_);
    double r = std::numeric_limits<double>::infinity();
    if (kind_ == DomainKind::polygon) {
        const std::size_t m = verts_.size();
        for (std::size_t k = 0; k < m; ++k) {
            Point a = verts_[k], e = verts_[(k + 1) % m] - a;
            double t = std::clamp(-dot(a, e) / dot(e, e), 0.0, 1.0);
            r = std::min(r, norm(a + t * e));
        }
        return r;
    }
    for (const Point& p : boundary_samples(4096)) r = std::min(r, norm(p));
    return r;
}

}  // namespace degma
