#include "hdrest/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace hdrest {

bool all_finite(std::span<const Point> pts) {
    return std::all_of(pts.begin(), pts.end(),
                       [](Point p) { return std::isfinite(p.x) && std::isfinite(p.y); });
}

KdTree::KdTree(std::span<const Point> pts) : pts_(pts.begin(), pts.end()), order_(pts.size()) {
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    if (!pts_.empty()) {
        nodes_.reserve(2 * pts_.size() / kLeaf + 2);
        build(0, pts_.size());
    }
}

int KdTree::build(std::size_t begin, std::size_t end) {
    BBox box;
    for (std::size_t i = begin; i < end; ++i) box.add(pts_[order_[i]]);
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back({begin, end, 0, 0.0, -1, -1, box});
    if (end - begin <= kLeaf) return id;

    const int axis = box.width() >= box.height() ? 0 : 1;
    const std::size_t mid = begin + (end - begin) / 2;
    auto key = [&](std::size_t i) { return axis == 0 ? pts_[i].x : pts_[i].y; };
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
    nodes_[id].axis = axis;
    nodes_[id].split = key(order_[mid]);
    const int l = build(begin, mid);
    const int r = build(mid, end);
    nodes_[id].left = l;
    nodes_[id].right = r;
    return id;
}

namespace {
double box_dist2(const BBox& b, Point q) {
    const double dx = std::max({b.xmin - q.x, 0.0, q.x - b.xmax});
    const double dy = std::max({b.ymin - q.y, 0.0, q.y - b.ymax});
    return dx * dx + dy * dy;
}
}  // namespace

void KdTree::nearest_rec(int node, Point q, std::size_t exclude, Hit& best, double& best2) const {
    const Node& nd = nodes_[node];
    if (box_dist2(nd.box, q) > best2) return;
    if (nd.left < 0) {
        for (std::size_t i = nd.begin; i < nd.end; ++i) {
            const std::size_t idx = order_[i];
            if (idx == exclude) continue;
            const double d2 = dist2(pts_[idx], q);
            if (d2 < best2 || (d2 == best2 && idx < best.index)) {
                best2 = d2;
                best.index = idx;
            }
        }
        return;
    }
    const double coord = nd.axis == 0 ? q.x : q.y;
    const int first = coord < nd.split ? nd.left : nd.right;
    const int second = first == nd.left ? nd.right : nd.left;
    nearest_rec(first, q, exclude, best, best2);
    nearest_rec(second, q, exclude, best, best2);
}

KdTree::Hit KdTree::nearest(Point q) const {
    return nearest_excluding(q, std::numeric_limits<std::size_t>::max());
}

KdTree::Hit KdTree::nearest_excluding(Point q, std::size_t exclude) const {
    Hit best{std::numeric_limits<std::size_t>::max(), std::numeric_limits<double>::infinity()};
    double best2 = std::numeric_limits<double>::infinity();
    if (!nodes_.empty()) nearest_rec(0, q, exclude, best, best2);
    if (best.index != std::numeric_limits<std::size_t>::max())
        best.distance = dist(pts_[best.index], q);
    return best;
}

void KdTree::within(Point q, double radius, std::vector<std::size_t>& out) const {
    out.clear();
    if (nodes_.empty()) return;
    const double r2 = radius * radius;
    std::vector<int> stack{0};
    while (!stack.empty()) {
        const Node& nd = nodes_[stack.back()];
        stack.pop_back();
        if (box_dist2(nd.box, q) > r2) continue;
        if (nd.left < 0) {
            for (std::size_t i = nd.begin; i < nd.end; ++i)
                if (dist2(pts_[order_[i]], q) <= r2) out.push_back(order_[i]);
            continue;
        }
        stack.push_back(nd.left);
        stack.push_back(nd.right);
    }
}

}  // namespace hdrest
