// Sweep-hull Delaunay triangulation over a half-edge structure. Points are
// inserted in order of distance from the seed triangle's circumcentre, which
// keeps every new point outside the current hull; each insertion fans
// triangles over the visible hull edges and restores the empty-circle
// property by edge flips.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "hdrest/errors.hpp"
#include "hdrest/geometry.hpp"
#include "hdrest/predicates.hpp"

namespace hdrest::geometry {
namespace {

constexpr std::ptrdiff_t kNone = -1;

Point circumcenter(Point a, Point b, Point c) {
    const double bx = b.x - a.x, by = b.y - a.y;
    const double cx = c.x - a.x, cy = c.y - a.y;
    const double bl = bx * bx + by * by;
    const double cl = cx * cx + cy * cy;
    const double d = 0.5 / (bx * cy - by * cx);
    return {a.x + (cy * bl - by * cl) * d, a.y + (bx * cl - cx * bl) * d};
}

double circumradius2(Point a, Point b, Point c) {
    const double bx = b.x - a.x, by = b.y - a.y;
    const double cx = c.x - a.x, cy = c.y - a.y;
    const double bl = bx * bx + by * by;
    const double cl = cx * cx + cy * cy;
    const double den = bx * cy - by * cx;
    if (den == 0.0) return std::numeric_limits<double>::infinity();
    const double d = 0.5 / den;
    const double x = (cy * bl - by * cl) * d;
    const double y = (bx * cl - cx * bl) * d;
    return x * x + y * y;
}

// Monotone in the angle of (dx, dy); range [0, 1).
double pseudo_angle(double dx, double dy) {
    const double p = dx / (std::fabs(dx) + std::fabs(dy));
    return (dy > 0.0 ? 3.0 - p : 1.0 + p) / 4.0;
}

class Sweep {
public:
    explicit Sweep(const PointSet& pts) : p_(pts) {}

    void run();

    std::vector<std::size_t> triangles;
    std::vector<std::ptrdiff_t> halfedges;
    std::vector<std::size_t> hull;

private:
    static std::size_t next_he(std::size_t e) { return e % 3 == 2 ? e - 2 : e + 1; }

    std::size_t hash_key(Point q) const {
        const double a = pseudo_angle(q.x - center_.x, q.y - center_.y);
        return static_cast<std::size_t>(std::floor(a * static_cast<double>(hash_size_))) % hash_size_;
    }

    void link(std::ptrdiff_t a, std::ptrdiff_t b) {
        halfedges[static_cast<std::size_t>(a)] = b;
        if (b != kNone) halfedges[static_cast<std::size_t>(b)] = a;
    }

    std::size_t add_triangle(std::size_t i0, std::size_t i1, std::size_t i2, std::ptrdiff_t a,
                             std::ptrdiff_t b, std::ptrdiff_t c) {
        const std::size_t t = triangles.size();
        triangles.insert(triangles.end(), {i0, i1, i2});
        halfedges.insert(halfedges.end(), {kNone, kNone, kNone});
        link(static_cast<std::ptrdiff_t>(t), a);
        link(static_cast<std::ptrdiff_t>(t + 1), b);
        link(static_cast<std::ptrdiff_t>(t + 2), c);
        return t;
    }

    std::size_t legalize(std::size_t a);

    const PointSet& p_;
    Point center_;
    std::size_t hash_size_ = 1;
    std::size_t hull_start_ = 0;
    std::vector<std::size_t> hull_prev_, hull_next_, hull_tri_;
    std::vector<std::ptrdiff_t> hull_hash_;
    std::vector<std::size_t> edge_stack_;
};

std::size_t Sweep::legalize(std::size_t a) {
    std::size_t ar = 0;
    for (;;) {
        const std::ptrdiff_t bi = halfedges[a];
        const std::size_t a0 = a - a % 3;
        ar = a0 + (a + 2) % 3;
        if (bi == kNone) {
            if (edge_stack_.empty()) break;
            a = edge_stack_.back();
            edge_stack_.pop_back();
            continue;
        }
        const auto b = static_cast<std::size_t>(bi);
        const std::size_t b0 = b - b % 3;
        const std::size_t al = a0 + (a + 1) % 3;
        const std::size_t bl = b0 + (b + 2) % 3;
        const std::size_t p0 = triangles[ar];
        const std::size_t pr = triangles[a];
        const std::size_t pl = triangles[al];
        const std::size_t p1 = triangles[bl];

        if (incircle_sign_perturbed(p_[p0], p_[pr], p_[pl], p_[p1]) > 0) {
            triangles[a] = p1;
            triangles[b] = p0;
            const std::ptrdiff_t hbl = halfedges[bl];
            if (hbl == kNone) {
                // the flipped edge was on the hull; repoint the hull entry
                std::size_t e = hull_start_;
                do {
                    if (hull_tri_[e] == bl) {
                        hull_tri_[e] = a;
                        break;
                    }
                    e = hull_prev_[e];
                } while (e != hull_start_);
            }
            link(static_cast<std::ptrdiff_t>(a), hbl);
            link(static_cast<std::ptrdiff_t>(b), halfedges[ar]);
            link(static_cast<std::ptrdiff_t>(ar), static_cast<std::ptrdiff_t>(bl));
            edge_stack_.push_back(b0 + (b + 1) % 3);
        } else {
            if (edge_stack_.empty()) break;
            a = edge_stack_.back();
            edge_stack_.pop_back();
        }
    }
    return ar;
}

void Sweep::run() {
    const std::size_t n = p_.size();
    const BBox box = bounds(p_);
    const Point mid{(box.xmin + box.xmax) / 2, (box.ymin + box.ymax) / 2};

    std::size_t i0 = 0, i1 = 0, i2 = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        const double d = dist2(p_[i], mid);
        if (d < best) best = d, i0 = i;
    }
    best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        if (i == i0) continue;
        const double d = dist2(p_[i], p_[i0]);
        if (d < best) best = d, i1 = i;
    }
    best = std::numeric_limits<double>::infinity();
    bool found = false;
    for (std::size_t i = 0; i < n; ++i) {
        if (i == i0 || i == i1 || orient_sign(p_[i0], p_[i1], p_[i]) == 0) continue;
        const double r2 = circumradius2(p_[i0], p_[i1], p_[i]);
        if (!found || r2 < best) best = r2, i2 = i, found = true;
    }
    if (!found) throw DegenerateInput("delaunay: all points are collinear");
    if (orient_sign(p_[i0], p_[i1], p_[i2]) < 0) std::swap(i1, i2);

    center_ = circumcenter(p_[i0], p_[i1], p_[i2]);

    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) d2[i] = dist2(p_[i], center_);
    std::vector<std::size_t> ids(n);
    std::iota(ids.begin(), ids.end(), std::size_t{0});
    std::sort(ids.begin(), ids.end(), [&](std::size_t a, std::size_t b) {
        return d2[a] < d2[b] || (d2[a] == d2[b] && a < b);
    });

    hash_size_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::sqrt(double(n)))));
    hull_prev_.assign(n, 0);
    hull_next_.assign(n, 0);
    hull_tri_.assign(n, 0);
    hull_hash_.assign(hash_size_, kNone);

    hull_start_ = i0;
    hull_next_[i0] = hull_prev_[i2] = i1;
    hull_next_[i1] = hull_prev_[i0] = i2;
    hull_next_[i2] = hull_prev_[i1] = i0;
    hull_tri_[i0] = 0;
    hull_tri_[i1] = 1;
    hull_tri_[i2] = 2;
    hull_hash_[hash_key(p_[i0])] = static_cast<std::ptrdiff_t>(i0);
    hull_hash_[hash_key(p_[i1])] = static_cast<std::ptrdiff_t>(i1);
    hull_hash_[hash_key(p_[i2])] = static_cast<std::ptrdiff_t>(i2);

    const std::size_t max_tri = n < 3 ? 1 : 2 * n - 5;
    triangles.reserve(3 * max_tri);
    halfedges.reserve(3 * max_tri);
    add_triangle(i0, i1, i2, kNone, kNone, kNone);

    // visible: q lies strictly right of the counter-clockwise hull edge (u, v)
    auto visible = [&](std::size_t u, std::size_t v, Point q) { return orient_sign(p_[u], p_[v], q) < 0; };

    for (std::size_t i : ids) {
        if (i == i0 || i == i1 || i == i2) continue;
        const Point q = p_[i];

        std::size_t start = 0;
        const std::size_t key = hash_key(q);
        for (std::size_t j = 0; j < hash_size_; ++j) {
            const std::ptrdiff_t s = hull_hash_[(key + j) % hash_size_];
            if (s != kNone && hull_next_[static_cast<std::size_t>(s)] != static_cast<std::size_t>(s)) {
                start = static_cast<std::size_t>(s);
                break;
            }
        }
        start = hull_prev_[start];
        std::size_t e = start;
        bool ok = true;
        while (!visible(e, hull_next_[e], q)) {
            e = hull_next_[e];
            if (e == start) {
                ok = false;
                break;
            }
        }
        // Unreachable for distinct points in exact arithmetic: the sort order
        // keeps each new point outside the hull built so far.
        if (!ok) throw Error("delaunay: point ordering violated the sweep invariant");

        std::size_t t = add_triangle(e, i, hull_next_[e], kNone, kNone,
                                     static_cast<std::ptrdiff_t>(hull_tri_[e]));
        hull_tri_[i] = legalize(t + 2);
        hull_tri_[e] = t;

        std::size_t nx = hull_next_[e];
        for (std::size_t qn = hull_next_[nx]; visible(nx, qn, q); qn = hull_next_[nx]) {
            t = add_triangle(nx, i, qn, static_cast<std::ptrdiff_t>(hull_tri_[i]), kNone,
                             static_cast<std::ptrdiff_t>(hull_tri_[nx]));
            hull_tri_[i] = legalize(t + 2);
            hull_next_[nx] = nx;  // removed
            nx = qn;
        }
        if (e == start) {
            for (std::size_t qp = hull_prev_[e]; visible(qp, e, q); qp = hull_prev_[e]) {
                t = add_triangle(qp, i, e, kNone, static_cast<std::ptrdiff_t>(hull_tri_[e]),
                                 static_cast<std::ptrdiff_t>(hull_tri_[qp]));
                legalize(t + 2);
                hull_tri_[qp] = t;
                hull_next_[e] = e;  // removed
                e = qp;
            }
        }

        hull_start_ = hull_prev_[i] = e;
        hull_next_[e] = hull_prev_[nx] = i;
        hull_next_[i] = nx;
        hull_hash_[hash_key(q)] = static_cast<std::ptrdiff_t>(i);
        hull_hash_[hash_key(p_[e])] = static_cast<std::ptrdiff_t>(e);
    }

    std::size_t e = hull_start_;
    do {
        hull.push_back(e);
        e = hull_next_[e];
    } while (e != hull_start_);
}

}  // namespace

Dedup deduplicate(std::span<const Point> points) {
    Dedup out;
    out.site_of.resize(points.size());
    struct Hash {
        std::size_t operator()(const Point& p) const {
            // +0.0 and -0.0 compare equal, so normalise before hashing
            const double x = p.x == 0.0 ? 0.0 : p.x;
            const double y = p.y == 0.0 ? 0.0 : p.y;
            return std::hash<double>{}(x) * 1000003u ^ std::hash<double>{}(y);
        }
    };
    std::unordered_map<Point, std::size_t, Hash> seen;
    seen.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        auto [it, inserted] = seen.emplace(points[i], out.sites.size());
        if (inserted)
            out.sites.push_back(points[i]);
        else
            out.had_duplicates = true;
        out.site_of[i] = it->second;
    }
    return out;
}

Triangulation delaunay(std::span<const Point> points) {
    if (!all_finite(points)) throw InvalidArgument("delaunay: non-finite coordinate");
    Dedup dd = deduplicate(points);
    if (dd.sites.size() < 3) throw DegenerateInput("delaunay: fewer than three distinct points");

    Triangulation tri;
    tri.vertices = std::move(dd.sites);
    Sweep sweep(tri.vertices);
    sweep.run();

    const std::size_t nt = sweep.triangles.size() / 3;
    tri.triangles.resize(nt);
    tri.adjacent.resize(nt);
    tri.circumcenters.resize(nt);
    tri.circumradii.resize(nt);
    for (std::size_t t = 0; t < nt; ++t) {
        for (int k = 0; k < 3; ++k) {
            tri.triangles[t][k] = sweep.triangles[3 * t + k];
            const std::ptrdiff_t h = sweep.halfedges[3 * t + k];
            tri.adjacent[t][k] = h == kNone ? kNone : h / 3;
        }
        const Point a = tri.vertices[tri.triangles[t][0]];
        const Point b = tri.vertices[tri.triangles[t][1]];
        const Point c = tri.vertices[tri.triangles[t][2]];
        tri.circumcenters[t] = circumcenter(a, b, c);
        tri.circumradii[t] = std::sqrt(circumradius2(a, b, c));
    }
    tri.hull = std::move(sweep.hull);
    return tri;
}

std::vector<std::vector<std::size_t>> Triangulation::vertex_neighbors() const {
    std::vector<std::vector<std::size_t>> nb(vertices.size());
    for (const auto& t : triangles)
        for (int k = 0; k < 3; ++k) {
            nb[t[k]].push_back(t[(k + 1) % 3]);
            nb[t[k]].push_back(t[(k + 2) % 3]);
        }
    for (auto& v : nb) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    }
    return nb;
}

}  // namespace hdrest::geometry
