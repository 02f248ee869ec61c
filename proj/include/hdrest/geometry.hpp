#pragma once

#include <array>
#include <cstddef>
#include <limits>
#include <memory>
#include <span>
#include <variant>
#include <vector>

#include "hdrest/kdtree.hpp"
#include "hdrest/point.hpp"

namespace hdrest::geometry {

/// Tolerance (input units) for all membership comparisons; ties count as inside.
inline constexpr double kEps = 1e-9;
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Distinct sites of a point set plus the mapping from every input index to
/// its site. Sites keep first-occurrence order.
struct Dedup {
    PointSet sites;
    std::vector<std::size_t> site_of;
    bool had_duplicates = false;
};
Dedup deduplicate(std::span<const Point> points);

struct Triangulation {
    PointSet vertices;  // distinct sites
    std::vector<std::array<std::size_t, 3>> triangles;  // counter-clockwise
    /// adjacent[t][k] is the triangle across edge (triangles[t][k], triangles[t][k+1 mod 3]), or -1.
    std::vector<std::array<std::ptrdiff_t, 3>> adjacent;
    std::vector<Point> circumcenters;
    std::vector<double> circumradii;
    std::vector<std::size_t> hull;  // counter-clockwise convex hull loop of vertex indices

    /// Sorted Delaunay neighbours of each vertex.
    std::vector<std::vector<std::size_t>> vertex_neighbors() const;
};

/// Delaunay triangulation of the distinct points (duplicates are removed first).
/// Throws DegenerateInput for fewer than three distinct points or collinear input.
Triangulation delaunay(std::span<const Point> points);

/// Counter-clockwise convex hull of distinct points, collinear boundary points
/// dropped. One or two vertices for degenerate input.
std::vector<Point> convex_hull(std::span<const Point> points);

/// Largest pairwise distance; 0 for a single point.
double diameter(std::span<const Point> points);

/// Circular arc of an r-convex hull boundary. The arc runs from angle
/// theta_start to theta_end about its centre; `clockwise` gives the direction
/// of travel. Angles are radians, counter-clockwise from +x.
struct Arc {
    Point center;
    double radius;
    double theta_start;
    double theta_end;
    bool clockwise;

    double sweep() const;  // unsigned angular length in [0, 2pi)
    Point at(double t) const;  // t in [0, 1] along the direction of travel
    Point start() const { return at(0.0); }
    Point end() const { return at(1.0); }
};

struct Segment {
    Point a, b;
};

using BoundaryPiece = std::variant<Arc, Segment>;

/// Closed boundary loop; the region lies to the left of the direction of travel,
/// so outer loops run counter-clockwise and holes clockwise.
struct BoundaryLoop {
    std::vector<BoundaryPiece> pieces;
    std::vector<std::size_t> sites;  // site index at the start of each piece
    bool is_hole = false;
};

enum class ContainsMethod {
    Exact,    // distance to the exposed boundary of the union of radius-r disks
    Sampled,  // 720 angular x 64 radial candidate ball centres
};

/// The r-convex hull C_r(A): intersection of the complements of all open
/// radius-r balls that miss A. r = +infinity yields the convex hull.
///
/// Membership is decided through the set E = {c : d(c, A) >= r} of admissible
/// ball centres: q is outside iff d(q, E) < r. For q inside the union of the
/// open disks B_r(a), d(q, E) is the distance to the exposed arcs of that
/// union, and each site only needs its Delaunay neighbours to find which parts
/// of its circle are exposed.
class RConvexHull {
public:
    RConvexHull(std::span<const Point> points, double radius);
    /// Reuses an existing triangulation; the source points are its vertices.
    RConvexHull(std::shared_ptr<const Triangulation> tri, double radius);

    double radius() const { return radius_; }
    bool is_convex() const { return radius_ == kInfinity; }
    const PointSet& sites() const { return sites_; }
    std::size_t source_size() const { return site_of_.size(); }

    bool contains(Point q, ContainsMethod method = ContainsMethod::Exact) const;

    /// Number of connected components (>= 1).
    std::size_t component_count() const { return component_count_; }
    /// Component label per source point (input order).
    std::vector<std::size_t> point_labels() const;
    /// Component label per distinct site.
    const std::vector<std::size_t>& site_labels() const { return site_label_; }

    /// Delaunay triangles with circumradius <= r; empty for degenerate input.
    const std::vector<std::array<std::size_t, 3>>& kept_triangles() const { return kept_; }

    const std::vector<BoundaryLoop>& loops() const { return loops_; }
    /// Sites with no kept triangle (singleton components) under finite r.
    const std::vector<std::size_t>& isolated_sites() const { return isolated_; }

    /// Points along every boundary piece at arc-length steps <= spacing, with
    /// all piece endpoints included; points on pieces cut away by other balls
    /// are dropped. A hull that is a single point returns that point.
    PointSet boundary_sample(double spacing) const;

private:
    struct ExposedArc {
        std::size_t site;
        double start;  // counter-clockwise from start, length `sweep`
        double sweep;
        Point p0, p1;  // endpoints
    };

    void init();
    void build_finite(const std::vector<std::vector<std::size_t>>& neighbors);
    void build_convex();
    void build_components_finite(const std::vector<std::vector<std::size_t>>& neighbors);
    void build_loops_finite();
    void build_arc_grid();
    bool contains_exact(Point q) const;
    bool contains_sampled(Point q) const;
    bool contains_convex(Point q) const;
    double distance_to_exposed(Point q, const ExposedArc& arc) const;

    double radius_;
    PointSet sites_;
    std::vector<std::size_t> site_of_;
    KdTree tree_;
    bool degenerate_ = false;  // fewer than three sites or collinear
    std::shared_ptr<const Triangulation> tri_;
    std::vector<std::array<std::size_t, 3>> kept_;
    std::vector<ExposedArc> exposed_;
    std::vector<std::size_t> site_label_;
    std::size_t component_count_ = 0;
    std::vector<BoundaryLoop> loops_;
    std::vector<std::size_t> isolated_;
    std::vector<Point> convex_;  // convex hull polygon when r is infinite

    // uniform grid over exposed arcs, each registered in the cells it can influence
    double grid_x0_ = 0, grid_y0_ = 0, cell_ = 1;
    std::size_t grid_nx_ = 0, grid_ny_ = 0;
    std::vector<std::size_t> cell_start_;
    std::vector<std::size_t> cell_items_;
};

/// Component count and per-source-point labels.
struct ComponentLabels {
    std::size_t count;
    std::vector<std::size_t> labels;
};
ComponentLabels hull_components(const RConvexHull& hull);

}  // namespace hdrest::geometry
