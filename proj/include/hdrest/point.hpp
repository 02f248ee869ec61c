#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace hdrest {

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend constexpr Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
    friend constexpr bool operator==(Point a, Point b) = default;
};

inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
inline double norm2(Point a) { return a.x * a.x + a.y * a.y; }
inline double norm(Point a) { return std::sqrt(norm2(a)); }
inline double dist(Point a, Point b) { return norm(a - b); }
inline double dist2(Point a, Point b) { return norm2(a - b); }

inline bool lex_less(Point a, Point b) { return a.x < b.x || (a.x == b.x && a.y < b.y); }

/// Ordered sample of planar points. Coordinates must be finite.
using PointSet = std::vector<Point>;

struct BBox {
    double xmin = std::numeric_limits<double>::infinity();
    double ymin = std::numeric_limits<double>::infinity();
    double xmax = -std::numeric_limits<double>::infinity();
    double ymax = -std::numeric_limits<double>::infinity();

    void add(Point p) {
        xmin = std::fmin(xmin, p.x);
        ymin = std::fmin(ymin, p.y);
        xmax = std::fmax(xmax, p.x);
        ymax = std::fmax(ymax, p.y);
    }
    bool empty() const { return xmin > xmax; }
    double width() const { return xmax - xmin; }
    double height() const { return ymax - ymin; }
    double area() const { return width() * height(); }
    BBox padded(double pad) const { return {xmin - pad, ymin - pad, xmax + pad, ymax + pad}; }
    bool contains(Point p) const { return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax; }
};

inline BBox bounds(std::span<const Point> pts) {
    BBox b;
    for (const Point& p : pts) b.add(p);
    return b;
}

bool all_finite(std::span<const Point> pts);

}  // namespace hdrest
