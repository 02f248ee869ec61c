#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hdrest/density.hpp"
#include "hdrest/point.hpp"

namespace hdrest::contour {

/// Closed polygons bounding the superlevel set {v >= level} of a gridded
/// field. Each loop is stored without repeating its first vertex and has the
/// region on its left: outer boundaries are counter-clockwise, holes
/// clockwise. Values outside the grid count as below the level, so every
/// loop closes.
class ContourSet {
public:
    ContourSet() = default;
    /// Polygon set from explicit loops (closing vertex not repeated). Outer
    /// loops must run counter-clockwise and holes clockwise.
    static ContourSet from_loops(std::vector<std::vector<Point>> loops, double level = 0.0);

    double level() const { return level_; }
    const std::vector<std::vector<Point>>& loops() const { return loops_; }
    std::vector<double> loop_areas() const;  // signed

    /// Outer loops, one per connected component of the region.
    std::size_t component_count() const;
    double area() const;
    bool empty() const { return loops_.empty(); }

    /// Even-odd point-in-polygon test over all loops.
    bool contains(Point q) const;

    /// Vertices plus interpolated points so that consecutive samples along
    /// each loop are at most `spacing` apart.
    PointSet boundary_sample(double spacing) const;

private:
    friend ContourSet marching_squares(const density::GridSpec&, std::span<const double>, double);

    void build_index();

    double level_ = 0.0;
    std::vector<std::vector<Point>> loops_;
    // segments bucketed by horizontal band of the padded grid
    double y0_ = 0.0, dy_ = 1.0;
    std::size_t bands_ = 0;
    std::vector<std::size_t> band_start_;
    std::vector<std::pair<Point, Point>> segments_;
};

/// Marching squares with saddle cells resolved by the cell-centre average.
ContourSet marching_squares(const density::GridSpec& grid, std::span<const double> values, double level);

inline ContourSet marching_squares(const density::DensityField& f, double level) {
    return marching_squares(f.grid, f.values, level);
}

}  // namespace hdrest::contour
