#include "hdrest/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "hdrest/errors.hpp"
#include "hdrest/predicates.hpp"

namespace hdrest::geometry {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_2pi(double a) {
    a = std::fmod(a, kTwoPi);
    if (a < 0) a += kTwoPi;
    return a >= kTwoPi ? 0.0 : a;
}

double angle_of(Point v) { return std::atan2(v.y, v.x); }

Point on_circle(Point c, double r, double theta) { return {c.x + r * std::cos(theta), c.y + r * std::sin(theta)}; }

struct UnionFind {
    std::vector<std::size_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), std::size_t{0}); }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

double segment_distance(Point q, Point a, Point b) {
    const Point ab = b - a;
    const double l2 = norm2(ab);
    if (l2 == 0.0) return dist(q, a);
    const double t = std::clamp(dot(q - a, ab) / l2, 0.0, 1.0);
    return dist(q, a + t * ab);
}

}  // namespace

double Arc::sweep() const {
    return clockwise ? wrap_2pi(theta_start - theta_end) : wrap_2pi(theta_end - theta_start);
}

Point Arc::at(double t) const {
    if (t <= 0.0) return on_circle(center, radius, theta_start);
    if (t >= 1.0) return on_circle(center, radius, theta_end);
    const double s = sweep() * t;
    return on_circle(center, radius, clockwise ? theta_start - s : theta_start + s);
}

std::vector<Point> convex_hull(std::span<const Point> points) {
    std::vector<Point> p(points.begin(), points.end());
    std::sort(p.begin(), p.end(), lex_less);
    p.erase(std::unique(p.begin(), p.end()), p.end());
    if (p.size() < 3) return p;
    std::vector<Point> h(2 * p.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        while (k >= 2 && orient_sign(h[k - 2], h[k - 1], p[i]) <= 0) --k;
        h[k++] = p[i];
    }
    for (std::size_t i = p.size() - 1, lo = k + 1; i-- > 0;) {
        while (k >= lo && orient_sign(h[k - 2], h[k - 1], p[i]) <= 0) --k;
        h[k++] = p[i];
    }
    h.resize(k - 1);
    return h;
}

double diameter(std::span<const Point> points) {
    if (points.empty()) throw InvalidArgument("diameter: empty point set");
    const std::vector<Point> h = convex_hull(points);
    const std::size_t m = h.size();
    if (m == 1) return 0.0;
    double best = 0.0;
    if (m <= 4096) {
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = i + 1; j < m; ++j) best = std::max(best, dist(h[i], h[j]));
        return best;
    }
    // rotating calipers
    std::size_t j = 1;
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t ni = (i + 1) % m;
        const Point e = h[ni] - h[i];
        while (std::fabs(cross(e, h[(j + 1) % m] - h[i])) > std::fabs(cross(e, h[j] - h[i]))) j = (j + 1) % m;
        best = std::max({best, dist(h[i], h[j]), dist(h[ni], h[j])});
    }
    return best;
}

RConvexHull::RConvexHull(std::span<const Point> points, double radius) : radius_(radius) {
    if (points.empty()) throw InvalidArgument("r_convex_hull: empty point set");
    if (!all_finite(points)) throw InvalidArgument("r_convex_hull: non-finite coordinate");
    if (!(radius > 0.0)) throw InvalidArgument("r_convex_hull: radius must be positive");
    Dedup dd = deduplicate(points);
    sites_ = std::move(dd.sites);
    site_of_ = std::move(dd.site_of);
    if (sites_.size() >= 3) {
        try {
            tri_ = std::make_shared<const Triangulation>(delaunay(sites_));
        } catch (const DegenerateInput&) {
            degenerate_ = true;
        }
    } else {
        degenerate_ = true;
    }
    init();
}

RConvexHull::RConvexHull(std::shared_ptr<const Triangulation> tri, double radius)
    : radius_(radius), tri_(std::move(tri)) {
    if (!tri_) throw InvalidArgument("r_convex_hull: null triangulation");
    if (!(radius > 0.0)) throw InvalidArgument("r_convex_hull: radius must be positive");
    sites_ = tri_->vertices;
    site_of_.resize(sites_.size());
    std::iota(site_of_.begin(), site_of_.end(), std::size_t{0});
    init();
}

void RConvexHull::init() {
    tree_ = KdTree(sites_);
    if (tri_)
        for (std::size_t t = 0; t < tri_->triangles.size(); ++t)
            if (tri_->circumradii[t] <= radius_ + kEps) kept_.push_back(tri_->triangles[t]);

    if (is_convex()) {
        build_convex();
        return;
    }

    std::vector<std::vector<std::size_t>> neighbors;
    if (tri_) {
        neighbors = tri_->vertex_neighbors();
    } else {
        // collinear (or at most two) sites: neighbours are consecutive along the line
        neighbors.resize(sites_.size());
        std::vector<std::size_t> order(sites_.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](auto a, auto b) { return lex_less(sites_[a], sites_[b]); });
        for (std::size_t i = 0; i + 1 < order.size(); ++i) {
            neighbors[order[i]].push_back(order[i + 1]);
            neighbors[order[i + 1]].push_back(order[i]);
        }
    }
    build_finite(neighbors);
    build_arc_grid();
    build_components_finite(neighbors);
    build_loops_finite();
}

void RConvexHull::build_convex() {
    convex_ = convex_hull(sites_);
    component_count_ = 1;
    site_label_.assign(sites_.size(), 0);
    if (convex_.size() < 2) return;
    BoundaryLoop loop;
    for (std::size_t i = 0; i < convex_.size(); ++i) {
        loop.pieces.push_back(Segment{convex_[i], convex_[(i + 1) % convex_.size()]});
        loop.sites.push_back(0);
    }
    // site indices of the hull vertices
    for (std::size_t i = 0; i < convex_.size(); ++i) loop.sites[i] = tree_.nearest(convex_[i]).index;
    loops_.push_back(std::move(loop));
}

void RConvexHull::build_finite(const std::vector<std::vector<std::size_t>>& neighbors) {
    const double r = radius_;
    std::vector<std::pair<double, double>> cover;
    for (std::size_t a = 0; a < sites_.size(); ++a) {
        cover.clear();
        for (std::size_t b : neighbors[a]) {
            const double d = dist(sites_[a], sites_[b]);
            if (d >= 2.0 * r) continue;
            const double theta = wrap_2pi(angle_of(sites_[b] - sites_[a]));
            const double w = std::acos(d / (2.0 * r));
            const double s = wrap_2pi(theta - w);
            const double e = s + 2.0 * w;
            if (e > kTwoPi) {
                cover.emplace_back(s, kTwoPi);
                cover.emplace_back(0.0, e - kTwoPi);
            } else {
                cover.emplace_back(s, e);
            }
        }
        auto push = [&](double start, double sweep) {
            ExposedArc arc{a, start, sweep, on_circle(sites_[a], r, start), on_circle(sites_[a], r, start + sweep)};
            exposed_.push_back(arc);
        };
        if (cover.empty()) {
            push(0.0, kTwoPi);
            continue;
        }
        std::sort(cover.begin(), cover.end());
        // merge the open covering intervals; gaps between them are exposed
        std::vector<std::pair<double, double>> merged;
        for (const auto& iv : cover) {
            if (!merged.empty() && iv.first < merged.back().second)
                merged.back().second = std::max(merged.back().second, iv.second);
            else
                merged.push_back(iv);
        }
        if (merged.size() == 1 && merged[0].first <= 0.0 && merged[0].second >= kTwoPi) continue;
        for (std::size_t i = 0; i + 1 < merged.size(); ++i)
            push(merged[i].second, merged[i + 1].first - merged[i].second);
        // gap across angle zero
        const double tail = merged.back().second;
        const double head = merged.front().first;
        if (tail < kTwoPi || head > 0.0) push(wrap_2pi(tail), head + kTwoPi - tail);
    }
}

// A path that starts at a site stays in C_r iff it keeps distance >= r from
// every exposed arc: leaving the disk union means crossing one of them.
namespace {

struct PathArc {
    Point o;
    double start, sweep;  // counter-clockwise
    Point p0, p1;
};

bool in_range(const PathArc& a, Point v) { return wrap_2pi(angle_of(v) - a.start) <= a.sweep; }

double point_arc(Point q, const PathArc& a, double r) {
    if (in_range(a, q - a.o)) return std::fabs(dist(q, a.o) - r);
    return std::min(dist(q, a.p0), dist(q, a.p1));
}

double segment_arc(Point p, Point q, const PathArc& a, double r) {
    double m = std::min({point_arc(p, a, r), point_arc(q, a, r), segment_distance(a.p0, p, q),
                         segment_distance(a.p1, p, q)});
    const Point d = q - p;
    const double l2 = norm2(d);
    if (l2 == 0.0) return m;
    const double t = dot(a.o - p, d) / l2;
    if (t > 0.0 && t < 1.0) {
        const Point f = p + t * d;
        const double h = dist(f, a.o);
        if (h > 0.0) {
            const Point u = (1.0 / h) * (f - a.o);
            if (in_range(a, u)) m = std::min(m, std::fabs(h - r));
            if (in_range(a, -1.0 * u)) m = std::min(m, h + r);
        }
        if (h < r) {
            const double w = std::sqrt((r * r - h * h) / l2);
            for (double s : {t - w, t + w})
                if (s >= 0.0 && s <= 1.0 && in_range(a, p + s * d - a.o)) return 0.0;
        }
    }
    return m;
}

double arc_arc(const PathArc& a, const PathArc& b, double r) {
    double m = std::min({point_arc(a.p0, b, r), point_arc(a.p1, b, r), point_arc(b.p0, a, r), point_arc(b.p1, a, r)});
    const double d = dist(a.o, b.o);
    if (d == 0.0) return m;
    const Point u = (1.0 / d) * (b.o - a.o);
    for (double sa : {1.0, -1.0})
        for (double sb : {1.0, -1.0})
            if (in_range(a, sa * u) && in_range(b, sb * u))
                m = std::min(m, dist(a.o + (sa * r) * u, b.o + (sb * r) * u));
    if (d < 2.0 * r) {
        const Point mid = 0.5 * (a.o + b.o);
        const double h = std::sqrt(r * r - d * d / 4.0);
        for (double s : {1.0, -1.0}) {
            const Point x = mid + (s * h) * Point{-u.y, u.x};
            if (in_range(a, x - a.o) && in_range(b, x - b.o)) return 0.0;
        }
    }
    return m;
}

}  // namespace

void RConvexHull::build_components_finite(const std::vector<std::vector<std::size_t>>& neighbors) {
    const std::size_t n = sites_.size();
    const double r = radius_;
    const double limit = r - kEps;

    std::vector<PathArc> exposed;
    exposed.reserve(exposed_.size());
    for (const auto& e : exposed_) exposed.push_back({sites_[e.site], e.start, e.sweep, e.p0, e.p1});

    // exposed arcs that can come within r of anything in the box
    std::vector<std::size_t> stamp(exposed.size(), 0), cand;
    std::size_t tick = 0;
    auto gather = [&](BBox box) {
        cand.clear();
        ++tick;
        if (cell_start_.empty()) {
            for (std::size_t i = 0; i < exposed.size(); ++i) cand.push_back(i);
            return;
        }
        auto cell = [&](double v, double v0, std::size_t cnt) {
            return static_cast<std::size_t>(std::clamp(std::floor((v - v0) / cell_), 0.0, double(cnt - 1)));
        };
        const std::size_t x0 = cell(box.xmin, grid_x0_, grid_nx_), x1 = cell(box.xmax, grid_x0_, grid_nx_);
        const std::size_t y0 = cell(box.ymin, grid_y0_, grid_ny_), y1 = cell(box.ymax, grid_y0_, grid_ny_);
        for (std::size_t y = y0; y <= y1; ++y)
            for (std::size_t x = x0; x <= x1; ++x) {
                const std::size_t c = y * grid_nx_ + x;
                for (std::size_t k = cell_start_[c]; k < cell_start_[c + 1]; ++k) {
                    const std::size_t i = cell_items_[k];
                    if (stamp[i] != tick) stamp[i] = tick, cand.push_back(i);
                }
            }
    };

    auto segment_clear = [&](Point a, Point b) {
        gather(BBox{std::min(a.x, b.x), std::min(a.y, b.y), std::max(a.x, b.x), std::max(a.y, b.y)});
        for (std::size_t i : cand)
            if (segment_arc(a, b, exposed[i], r) < limit) return false;
        return true;
    };
    auto arc_clear = [&](const PathArc& path) {
        gather(BBox{path.o.x - r, path.o.y - r, path.o.x + r, path.o.y + r});
        for (std::size_t i : cand)
            if (arc_arc(path, exposed[i], r) < limit) return false;
        return true;
    };

    UnionFind uf(n);
    std::vector<char> linked(n, 0);
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b : neighbors[a]) {
            if (b <= a) continue;
            const Point pa = sites_[a], pb = sites_[b];
            const double len = dist(pa, pb);
            if (len >= 2.0 * r) continue;
            bool joined = segment_clear(pa, pb);
            // the two radius-r arcs through a and b
            const Point ab = pb - pa;
            const Point nrm{-ab.y / len, ab.x / len};
            const double h = std::sqrt(std::max(0.0, r * r - len * len / 4.0));
            for (double side : {1.0, -1.0}) {
                if (joined) break;
                const Point c = 0.5 * (pa + pb) + (side * h) * nrm;
                // the minor arc, stored counter-clockwise
                const double ta = angle_of(pa - c), tb = angle_of(pb - c);
                const double fwd = wrap_2pi(tb - ta);
                PathArc path = fwd <= std::numbers::pi ? PathArc{c, wrap_2pi(ta), fwd, pa, pb}
                                                       : PathArc{c, wrap_2pi(tb), kTwoPi - fwd, pb, pa};
                joined = arc_clear(path);
            }
            if (joined) {
                uf.unite(a, b);
                linked[a] = linked[b] = 1;
            }
        }
    }
    site_label_.assign(n, 0);
    std::vector<std::size_t> label_of_root(n, n);
    component_count_ = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t root = uf.find(i);
        if (label_of_root[root] == n) label_of_root[root] = component_count_++;
        site_label_[i] = label_of_root[root];
        if (!linked[i]) isolated_.push_back(i);
    }
}

void RConvexHull::build_loops_finite() {
    if (!tri_ || kept_.empty()) return;
    const auto& T = *tri_;
    std::vector<char> keep(T.triangles.size(), 0);
    for (std::size_t t = 0; t < T.triangles.size(); ++t) keep[t] = T.circumradii[t] <= radius_ + kEps;

    struct Edge {
        std::size_t u, v;
    };
    std::vector<Edge> edges;
    std::vector<std::vector<std::size_t>> out(sites_.size());
    for (std::size_t t = 0; t < T.triangles.size(); ++t) {
        if (!keep[t]) continue;
        for (int k = 0; k < 3; ++k) {
            const std::ptrdiff_t adj = T.adjacent[t][k];
            if (adj >= 0 && keep[static_cast<std::size_t>(adj)]) continue;
            out[T.triangles[t][k]].push_back(edges.size());
            edges.push_back({T.triangles[t][k], T.triangles[t][(k + 1) % 3]});
        }
    }

    auto ccw_angle = [](Point from, Point to) { return wrap_2pi(angle_of(to) - angle_of(from)); };

    std::vector<char> used(edges.size(), 0);
    for (std::size_t e0 = 0; e0 < edges.size(); ++e0) {
        if (used[e0]) continue;
        std::vector<std::size_t> chain;
        std::size_t e = e0;
        while (true) {
            used[e] = 1;
            chain.push_back(e);
            const std::size_t v = edges[e].v;
            const Point back = sites_[edges[e].u] - sites_[v];
            std::size_t pick = out[v].front();
            if (out[v].size() > 1) {
                // at a pinch vertex follow the edge just clockwise of the incoming one
                double best = kTwoPi + 1;
                for (std::size_t c : out[v]) {
                    const double ang = ccw_angle(sites_[edges[c].v] - sites_[v], back);
                    if (ang < best) best = ang, pick = c;
                }
            }
            if (pick == e0 || used[pick]) break;
            e = pick;
        }

        BoundaryLoop loop;
        double area2 = 0.0;
        for (std::size_t id : chain) {
            const Point a = sites_[edges[id].u], b = sites_[edges[id].v];
            area2 += cross(a, b);
            const Point ab = b - a;
            const double len = norm(ab);
            const Point nrm{-ab.y / len, ab.x / len};  // toward the region
            const double h = std::sqrt(std::max(0.0, radius_ * radius_ - len * len / 4.0));
            const Point c = 0.5 * (a + b) - h * nrm;
            loop.pieces.push_back(Arc{c, radius_, angle_of(a - c), angle_of(b - c), true});
            loop.sites.push_back(edges[id].u);
        }
        loop.is_hole = area2 < 0.0;
        loops_.push_back(std::move(loop));
    }
}

void RConvexHull::build_arc_grid() {
    if (exposed_.size() <= 64) return;
    const BBox box = bounds(sites_).padded(2.0 * radius_);
    const double extent = std::max(box.width(), box.height());
    cell_ = std::max(radius_, extent / 256.0);
    grid_x0_ = box.xmin;
    grid_y0_ = box.ymin;
    grid_nx_ = static_cast<std::size_t>(box.width() / cell_) + 1;
    grid_ny_ = static_cast<std::size_t>(box.height() / cell_) + 1;

    auto cell_range = [&](const ExposedArc& arc, std::size_t& x0, std::size_t& x1, std::size_t& y0, std::size_t& y1) {
        const Point a = sites_[arc.site];
        auto clampi = [](double v, std::size_t n) {
            return static_cast<std::size_t>(std::clamp(v, 0.0, static_cast<double>(n - 1)));
        };
        x0 = clampi(std::floor((a.x - 2 * radius_ - grid_x0_) / cell_), grid_nx_);
        x1 = clampi(std::floor((a.x + 2 * radius_ - grid_x0_) / cell_), grid_nx_);
        y0 = clampi(std::floor((a.y - 2 * radius_ - grid_y0_) / cell_), grid_ny_);
        y1 = clampi(std::floor((a.y + 2 * radius_ - grid_y0_) / cell_), grid_ny_);
    };

    std::vector<std::size_t> count(grid_nx_ * grid_ny_ + 1, 0);
    std::size_t x0, x1, y0, y1;
    for (const auto& arc : exposed_) {
        cell_range(arc, x0, x1, y0, y1);
        for (std::size_t y = y0; y <= y1; ++y)
            for (std::size_t x = x0; x <= x1; ++x) ++count[y * grid_nx_ + x + 1];
    }
    std::partial_sum(count.begin(), count.end(), count.begin());
    cell_start_ = count;
    cell_items_.resize(count.back());
    for (std::size_t i = 0; i < exposed_.size(); ++i) {
        cell_range(exposed_[i], x0, x1, y0, y1);
        for (std::size_t y = y0; y <= y1; ++y)
            for (std::size_t x = x0; x <= x1; ++x) cell_items_[count[y * grid_nx_ + x]++] = i;
    }
}

double RConvexHull::distance_to_exposed(Point q, const ExposedArc& arc) const {
    const Point a = sites_[arc.site];
    const double rel = wrap_2pi(angle_of(q - a) - arc.start);
    if (rel <= arc.sweep) return std::fabs(dist(q, a) - radius_);
    return std::min(dist(q, arc.p0), dist(q, arc.p1));
}

bool RConvexHull::contains(Point q, ContainsMethod method) const {
    if (is_convex()) return contains_convex(q);
    return method == ContainsMethod::Exact ? contains_exact(q) : contains_sampled(q);
}

bool RConvexHull::contains_convex(Point q) const {
    const std::size_t m = convex_.size();
    if (m == 1) return dist(q, convex_[0]) <= kEps;
    if (m == 2) return segment_distance(q, convex_[0], convex_[1]) <= kEps;
    bool inside = true;
    for (std::size_t i = 0; i < m && inside; ++i) {
        const Point a = convex_[i], b = convex_[(i + 1) % m];
        if (cross(b - a, q - a) < 0.0) inside = false;
    }
    if (inside) return true;
    for (std::size_t i = 0; i < m; ++i)
        if (segment_distance(q, convex_[i], convex_[(i + 1) % m]) <= kEps) return true;
    return false;
}

bool RConvexHull::contains_exact(Point q) const {
    const double d = tree_.nearest(q).distance;
    if (d <= kEps) return true;
    if (d >= radius_) return false;
    const double limit = radius_ - kEps;
    if (cell_start_.empty()) {
        for (const auto& arc : exposed_)
            if (distance_to_exposed(q, arc) < limit) return false;
        return true;
    }
    const double fx = std::floor((q.x - grid_x0_) / cell_);
    const double fy = std::floor((q.y - grid_y0_) / cell_);
    if (fx < 0 || fy < 0 || fx >= double(grid_nx_) || fy >= double(grid_ny_)) return true;
    const std::size_t c = static_cast<std::size_t>(fy) * grid_nx_ + static_cast<std::size_t>(fx);
    for (std::size_t k = cell_start_[c]; k < cell_start_[c + 1]; ++k)
        if (distance_to_exposed(q, exposed_[cell_items_[k]]) < limit) return false;
    return true;
}

bool RConvexHull::contains_sampled(Point q) const {
    const double d = tree_.nearest(q).distance;
    if (d <= kEps) return true;
    if (d >= radius_) return false;
    constexpr int kAngles = 720, kRadii = 64;
    for (int j = 1; j < kRadii; ++j) {
        const double rho = radius_ * j / kRadii;
        for (int k = 0; k < kAngles; ++k) {
            const Point c = on_circle(q, rho, kTwoPi * k / kAngles);
            if (tree_.nearest(c).distance >= radius_) return false;
        }
    }
    return true;
}

std::vector<std::size_t> RConvexHull::point_labels() const {
    std::vector<std::size_t> out(site_of_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = site_label_[site_of_[i]];
    return out;
}

PointSet RConvexHull::boundary_sample(double spacing) const {
    if (!(spacing > 0.0)) throw InvalidArgument("boundary_sample: spacing must be positive");
    PointSet out;
    if (is_convex() && convex_.size() == 1) return convex_;
    for (const auto& loop : loops_) {
        for (const auto& piece : loop.pieces) {
            double len;
            if (const auto* arc = std::get_if<Arc>(&piece))
                len = arc->radius * arc->sweep();
            else {
                const auto& s = std::get<Segment>(piece);
                len = dist(s.a, s.b);
            }
            const auto k = static_cast<std::size_t>(std::max(1.0, std::ceil(len / spacing)));
            for (std::size_t j = 0; j <= k; ++j) {
                const double t = static_cast<double>(j) / static_cast<double>(k);
                Point p;
                if (const auto* arc = std::get_if<Arc>(&piece))
                    p = arc->at(t);
                else {
                    const auto& s = std::get<Segment>(piece);
                    p = j == k ? s.b : s.a + t * (s.b - s.a);
                }
                if (contains(p)) out.push_back(p);
            }
        }
    }
    for (std::size_t i : isolated_) out.push_back(sites_[i]);
    return out;
}

ComponentLabels hull_components(const RConvexHull& hull) {
    return {hull.component_count(), hull.point_labels()};
}

}  // namespace hdrest::geometry
