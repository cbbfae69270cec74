#pragma once

#include <cmath>
#include <string>
#include <vector>

namespace degma {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point a) { return std::hypot(a.x, a.y); }

struct BBox {
    Point lo;
    Point hi;
};

enum class DomainKind { disk, ellipse, polygon };

std::string to_string(DomainKind k);

// A bounded convex planar domain. Membership and ray exits go through the
// Minkowski gauge about the center, which is convex for every kind.
class ConvexDomain {
public:
    static ConvexDomain disk(Point center, double radius);
    static ConvexDomain ellipse(Point center, double semi_x, double semi_y);
    // Vertices in either orientation; throws "not convex" on a reflex or
    // collinear vertex.
    static ConvexDomain polygon(std::vector<Point> vertices);

    DomainKind kind() const { return kind_; }
    Point center() const { return center_; }
    double semi_x() const { return ax_; }
    double semi_y() const { return ay_; }
    const std::vector<Point>& vertices() const { return verts_; }

    // 1 on the boundary, < 1 inside.
    double gauge(Point p) const;
    bool contains(Point p) const { return gauge(p) < 1.0; }

    // For a inside and b outside, the fraction t in (0, 1] with a + t(b - a)
    // on the boundary.
    double exit_fraction(Point a, Point b) const;
    // Boundary point on the ray from the center through p.
    Point radial_projection(Point p) const;

    BBox bbox() const;
    double area() const;
    std::vector<Point> boundary_samples(int m) const;

    // Largest and smallest distance from the origin to the boundary.
    double max_radius() const;
    double min_radius() const;
    bool inside_ball(double radius) const { return max_radius() <= radius; }

private:
    DomainKind kind_ = DomainKind::disk;
    Point center_;
    double ax_ = 1.0, ay_ = 1.0;
    std::vector<Point> verts_;  // counter-clockwise
};

}  // namespace degma
