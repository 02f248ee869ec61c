#pragma once
// Brute-force reference implementations used as test oracles. They share no
// code with the library beyond the Point type.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "hdrest/point.hpp"

namespace oracle {

using hdrest::Point;

inline double nearest_dist(const std::vector<Point>& a, Point c) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : a) best = std::min(best, std::hypot(p.x - c.x, p.y - c.y));
    return best;
}

inline bool circumcircle(Point a, Point b, Point c, Point& center, double& radius) {
    const double d = 2.0 * (a.x * (b.y - c.y) + b.x * (c.y - a.y) + c.x * (a.y - b.y));
    if (d == 0.0) return false;
    const double a2 = a.x * a.x + a.y * a.y, b2 = b.x * b.x + b.y * b.y, c2 = c.x * c.x + c.y * c.y;
    center = {(a2 * (b.y - c.y) + b2 * (c.y - a.y) + c2 * (a.y - b.y)) / d,
              (a2 * (c.x - b.x) + b2 * (a.x - c.x) + c2 * (b.x - a.x)) / d};
    radius = std::hypot(a.x - center.x, a.y - center.y);
    return true;
}

/// Largest value of d(c, A) over the closed disk |c - q| <= r, found by
/// enumerating every point where the maximum can be attained: Voronoi
/// vertices, Voronoi edges crossing the circle, and for each site the point
/// of the circle farthest from it.
class EmptyBall {
public:
    explicit EmptyBall(std::vector<Point> sites) : a_(std::move(sites)) {
        const std::size_t n = a_.size();
        const double tol = 1e-12;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                bool edge = false;
                for (std::size_t k = 0; k < n; ++k) {
                    if (k == i || k == j) continue;
                    Point c;
                    double rad;
                    if (!circumcircle(a_[i], a_[j], a_[k], c, rad)) continue;
                    if (nearest_dist(a_, c) >= rad * (1 - tol)) {
                        edge = true;
                        if (k > j) vertices_.push_back(c);
                    }
                }
                // pairs whose bisector carries a Voronoi edge; for collinear or
                // tiny inputs fall back to checking the segment midpoint
                const Point m{(a_[i].x + a_[j].x) / 2, (a_[i].y + a_[j].y) / 2};
                const double h = std::hypot(a_[i].x - m.x, a_[i].y - m.y);
                if (!edge && nearest_dist(a_, m) >= h * (1 - tol)) edge = true;
                if (edge) pairs_.push_back({i, j});
            }
    }

    double sup_distance(Point q, double r) const {
        double best = 0.0;
        auto consider = [&](Point c) { best = std::max(best, nearest_dist(a_, c)); };
        consider(q);
        for (const auto& v : vertices_)
            if (std::hypot(v.x - q.x, v.y - q.y) <= r) consider(v);
        for (const auto& p : a_) {
            const double dx = q.x - p.x, dy = q.y - p.y, l = std::hypot(dx, dy);
            if (l > 0) consider({q.x + r * dx / l, q.y + r * dy / l});
        }
        for (const auto& [i, j] : pairs_) {
            // bisector: m + t * u, u perpendicular to (a_j - a_i)
            const Point a = a_[i], b = a_[j];
            const Point m{(a.x + b.x) / 2, (a.y + b.y) / 2};
            const double ux = -(b.y - a.y), uy = b.x - a.x, ul = std::hypot(ux, uy);
            const Point u{ux / ul, uy / ul};
            const double wx = m.x - q.x, wy = m.y - q.y;
            const double bq = wx * u.x + wy * u.y;
            const double cq = wx * wx + wy * wy - r * r;
            const double disc = bq * bq - cq;
            if (disc < 0) continue;
            const double s = std::sqrt(disc);
            for (double t : {-bq - s, -bq + s}) {
                const Point c{m.x + t * u.x, m.y + t * u.y};
                const double da = std::hypot(c.x - a.x, c.y - a.y);
                if (nearest_dist(a_, c) >= da * (1 - 1e-12)) consider(c);
            }
        }
        return best;
    }

private:
    std::vector<Point> a_;
    std::vector<Point> vertices_;
    std::vector<std::pair<std::size_t, std::size_t>> pairs_;
};

inline bool in_convex_polygon_brute(const std::vector<Point>& pts, Point q) {
    // q is in the convex hull iff it is not strictly separated by a line
    // through two sample points with all samples on one side
    const std::size_t n = pts.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const Point a = pts[i], b = pts[j];
            const double cq = (b.x - a.x) * (q.y - a.y) - (b.y - a.y) * (q.x - a.x);
            if (cq >= 0) continue;
            bool all_left = true;
            for (const auto& p : pts)
                if ((b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x) < 0) {
                    all_left = false;
                    break;
                }
            if (all_left) return false;
        }
    return true;
}

inline double hausdorff_brute(const std::vector<Point>& a, const std::vector<Point>& c) {
    double h = 0.0;
    for (const auto& p : a) h = std::max(h, nearest_dist(c, p));
    for (const auto& p : c) h = std::max(h, nearest_dist(a, p));
    return h;
}

}  // namespace oracle
