#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hdrest/point.hpp"

namespace hdrest {

/// Static 2-d tree over a point set for nearest-neighbour and radius queries.
/// Distances are computed as sqrt(dx*dx + dy*dy), matching dist().
class KdTree {
public:
    KdTree() = default;
    explicit KdTree(std::span<const Point> pts);

    bool empty() const { return pts_.empty(); }
    std::size_t size() const { return pts_.size(); }

    struct Hit {
        std::size_t index;
        double distance;
    };

    /// Nearest point; tree must be nonempty.
    Hit nearest(Point q) const;

    /// Nearest point other than `exclude` (an index into the original set).
    Hit nearest_excluding(Point q, std::size_t exclude) const;

    /// Indices of all points with |p - q| <= radius.
    void within(Point q, double radius, std::vector<std::size_t>& out) const;

private:
    struct Node {
        std::size_t begin, end;  // range in order_
        int axis;
        double split;
        int left = -1, right = -1;
        BBox box;
    };

    int build(std::size_t begin, std::size_t end);
    void nearest_rec(int node, Point q, std::size_t exclude, Hit& best, double& best2) const;

    std::vector<Point> pts_;
    std::vector<std::size_t> order_;
    std::vector<Node> nodes_;
    static constexpr std::size_t kLeaf = 12;
};

}  // namespace hdrest
