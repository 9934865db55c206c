#pragma once

#include "gmd/core.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <vector>

namespace gmd {

// 3D KD-tree over a fixed set of points. Built once, then immutable; all
// queries are const and safe to run concurrently.
class KdTree {
public:
    KdTree() = default;

    explicit KdTree(const std::vector<Vec3>& points) { build(points); }

    void build(const std::vector<Vec3>& points) {
        points_ = points;
        order_.resize(points_.size());
        for (int i = 0; i < static_cast<int>(order_.size()); ++i) order_[i] = i;
        nodes_.clear();
        if (!points_.empty()) {
            nodes_.reserve(2 * points_.size() / kLeafSize + 2);
            root_ = build_node(0, static_cast<int>(points_.size()));
        }
    }

    std::size_t size() const { return points_.size(); }

    // Indices with ||p_i - center|| < radius (strict), sorted ascending.
    std::vector<int> radius_indices(const Vec3& center, double radius) const {
        std::vector<int> out;
        if (nodes_.empty() || radius <= 0.0) return out;
        radius_recurse(root_, center, radius * radius, out);
        std::sort(out.begin(), out.end());
        return out;
    }

    // k nearest neighbors ordered by (distance, index). The query point itself
    // is included when it is a member of the indexed set.
    std::vector<int> k_nearest(const Vec3& center, int k) const {
        std::vector<int> out;
        if (nodes_.empty() || k <= 0) return out;
        // max-heap of (squared distance, index)
        std::priority_queue<std::pair<double, int>> heap;
        knn_recurse(root_, center, k, heap);
        out.resize(heap.size());
        for (int i = static_cast<int>(heap.size()) - 1; i >= 0; --i) {
            out[i] = heap.top().second;
            heap.pop();
        }
        return out;
    }

    int nearest(const Vec3& center) const {
        auto v = k_nearest(center, 1);
        return v.empty() ? -1 : v[0];
    }

    // Nearest neighbor excluding a given index (for resolution, Eq.-19 style).
    int nearest_other(const Vec3& center, int exclude) const {
        auto v = k_nearest(center, 2);
        for (int idx : v)
            if (idx != exclude) return idx;
        return -1;
    }

private:
    static constexpr int kLeafSize = 16;

    struct Node {
        int left = -1, right = -1;
        int begin = 0, end = 0;  // leaf range into order_
        int axis = 0;
        double split = 0.0;
    };

    int build_node(int begin, int end) {
        Node node;
        node.begin = begin;
        node.end = end;
        if (end - begin <= kLeafSize) {
            nodes_.push_back(node);
            return static_cast<int>(nodes_.size()) - 1;
        }
        Vec3 lo = points_[order_[begin]], hi = lo;
        for (int i = begin + 1; i < end; ++i) {
            lo = lo.cwiseMin(points_[order_[i]]);
            hi = hi.cwiseMax(points_[order_[i]]);
        }
        int axis = 0;
        (hi - lo).maxCoeff(&axis);
        const int mid = (begin + end) / 2;
        std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                         [&](int a, int b) {
                             const double ca = points_[a][axis], cb = points_[b][axis];
                             return ca < cb || (ca == cb && a < b);
                         });
        node.axis = axis;
        node.split = points_[order_[mid]][axis];
        const int self = static_cast<int>(nodes_.size());
        nodes_.push_back(node);
        const int left = build_node(begin, mid);
        const int right = build_node(mid, end);
        nodes_[self].left = left;
        nodes_[self].right = right;
        return self;
    }

    void radius_recurse(int id, const Vec3& c, double r2, std::vector<int>& out) const {
        const Node& n = nodes_[id];
        if (n.left < 0) {
            for (int i = n.begin; i < n.end; ++i) {
                const int idx = order_[i];
                if ((points_[idx] - c).squaredNorm() < r2) out.push_back(idx);
            }
            return;
        }
        const double d = c[n.axis] - n.split;
        if (d < 0) {
            radius_recurse(n.left, c, r2, out);
            if (d * d < r2) radius_recurse(n.right, c, r2, out);
        } else {
            radius_recurse(n.right, c, r2, out);
            if (d * d <= r2) radius_recurse(n.left, c, r2, out);
        }
    }

    void knn_recurse(int id, const Vec3& c, int k,
                     std::priority_queue<std::pair<double, int>>& heap) const {
        const Node& n = nodes_[id];
        if (n.left < 0) {
            for (int i = n.begin; i < n.end; ++i) {
                const int idx = order_[i];
                const double d2 = (points_[idx] - c).squaredNorm();
                if (static_cast<int>(heap.size()) < k) {
                    heap.emplace(d2, idx);
                } else if (d2 < heap.top().first ||
                           (d2 == heap.top().first && idx < heap.top().second)) {
                    heap.pop();
                    heap.emplace(d2, idx);
                }
            }
            return;
        }
        const double d = c[n.axis] - n.split;
        const int near = d < 0 ? n.left : n.right;
        const int far = d < 0 ? n.right : n.left;
        knn_recurse(near, c, k, heap);
        if (static_cast<int>(heap.size()) < k || d * d <= heap.top().first)
            knn_recurse(far, c, k, heap);
    }

    std::vector<Vec3> points_;
    std::vector<int> order_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

}  // namespace gmd
