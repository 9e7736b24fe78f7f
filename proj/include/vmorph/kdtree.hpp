#ifndef VMORPH_KDTREE_HPP
#define VMORPH_KDTREE_HPP

#include <algorithm>
#include <array>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "vmorph/mesh.hpp"

namespace vmorph {

struct Neighbor {
  Index index;
  double squared_distance;
};

/// Static k-d tree over 3D points with exact nearest-neighbour queries.
///
/// Equidistant candidates resolve to the lowest point index, so results are
/// identical to an exhaustive scan that keeps the first minimum.
class KdTree {
 public:
  static constexpr std::size_t kLeafSize = 12;

  KdTree() = default;

  explicit KdTree(std::span<const Vec3> points) : points_(points.begin(), points.end()) {
    order_.resize(points_.size());
    std::iota(order_.begin(), order_.end(), Index{0});
    if (!points_.empty()) {
      nodes_.reserve(2 * points_.size() / kLeafSize + 2);
      build(0, points_.size());
    }
  }

  std::size_t size() const noexcept { return points_.size(); }
  const std::vector<Vec3>& points() const noexcept { return points_; }

  Neighbor nearest(const Vec3& q) const {
    Neighbor best{static_cast<Index>(-1), std::numeric_limits<double>::infinity()};
    if (!points_.empty()) search(q, best);
    return best;
  }

  /// Exact nearest neighbour, seeded with a candidate (typically the previous
  /// answer for a nearby query) to tighten pruning from the start.
  Neighbor nearest(const Vec3& q, Index hint) const {
    Neighbor best{hint, squared_distance(q, points_[hint])};
    search(q, best);
    return best;
  }

  /// `k` nearest points ordered by (distance, index).
  std::vector<Neighbor> knn(const Vec3& q, std::size_t k) const {
    k = std::min(k, points_.size());
    std::vector<Neighbor> heap;
    heap.reserve(k + 1);
    if (k == 0) return heap;
    knn_search(q, k, heap);
    std::sort(heap.begin(), heap.end(), closer);
    return heap;
  }

 private:
  struct Node {
    std::size_t begin, end;  // range in order_ (leaf)
    int dim = -1;            // -1 for leaf
    double split = 0.0;
    std::size_t left = 0, right = 0;
    std::array<double, 3> lo{}, hi{};
  };

  static bool closer(const Neighbor& a, const Neighbor& b) {
    return a.squared_distance < b.squared_distance ||
           (a.squared_distance == b.squared_distance && a.index < b.index);
  }

  std::size_t build(std::size_t begin, std::size_t end) {
    Node node;
    node.begin = begin;
    node.end = end;
    node.lo.fill(std::numeric_limits<double>::infinity());
    node.hi.fill(-std::numeric_limits<double>::infinity());
    for (std::size_t i = begin; i < end; ++i)
      for (int d = 0; d < 3; ++d) {
        node.lo[d] = std::min(node.lo[d], points_[order_[i]][d]);
        node.hi[d] = std::max(node.hi[d], points_[order_[i]][d]);
      }
    const std::size_t id = nodes_.size();
    nodes_.push_back(node);
    if (end - begin <= kLeafSize) return id;

    int dim = 0;
    double extent = -1.0;
    for (int d = 0; d < 3; ++d)
      if (node.hi[d] - node.lo[d] > extent) {
        extent = node.hi[d] - node.lo[d];
        dim = d;
      }
    if (extent <= 0.0) return id;  // all points coincide
    const std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin), order_.begin() + static_cast<std::ptrdiff_t>(mid),
                     order_.begin() + static_cast<std::ptrdiff_t>(end), [&](Index a, Index b) {
                       const double pa = points_[a][dim], pb = points_[b][dim];
                       return pa < pb || (pa == pb && a < b);
                     });
    const double split = points_[order_[mid]][dim];
    const std::size_t l = build(begin, mid);
    const std::size_t r = build(mid, end);
    nodes_[id].dim = dim;
    nodes_[id].split = split;
    nodes_[id].left = l;
    nodes_[id].right = r;
    return id;
  }

  static double box_distance(const Node& n, const Vec3& q) {
    double d2 = 0.0;
    for (int d = 0; d < 3; ++d) {
      double e = 0.0;
      if (q[d] < n.lo[d]) e = n.lo[d] - q[d];
      else if (q[d] > n.hi[d]) e = q[d] - n.hi[d];
      d2 += e * e;
    }
    return d2;
  }

  void search(const Vec3& q, Neighbor& best) const {
    std::size_t stack[128];
    std::size_t top = 0;
    stack[top++] = 0;
    while (top) {
      const Node& n = nodes_[stack[--top]];
      // Boxes at exactly the current best distance may still hold a
      // lower-index tie, so only strictly farther boxes are pruned.
      if (box_distance(n, q) > best.squared_distance) continue;
      if (n.dim < 0) {
        for (std::size_t i = n.begin; i < n.end; ++i) {
          const Index idx = order_[i];
          const double d2 = squared_distance(q, points_[idx]);
          if (d2 < best.squared_distance || (d2 == best.squared_distance && idx < best.index))
            best = {idx, d2};
        }
        continue;
      }
      const bool go_left = q[n.dim] < n.split;
      stack[top++] = go_left ? n.right : n.left;
      stack[top++] = go_left ? n.left : n.right;
    }
  }

  void knn_search(const Vec3& q, std::size_t k, std::vector<Neighbor>& heap) const {
    auto worst = [&]() {
      return heap.size() < k ? std::numeric_limits<double>::infinity() : heap.front().squared_distance;
    };
    std::size_t stack[128];
    std::size_t top = 0;
    stack[top++] = 0;
    while (top) {
      const Node& n = nodes_[stack[--top]];
      if (box_distance(n, q) > worst()) continue;
      if (n.dim < 0) {
        for (std::size_t i = n.begin; i < n.end; ++i) {
          const Neighbor c{order_[i], squared_distance(q, points_[order_[i]])};
          if (heap.size() < k) {
            heap.push_back(c);
            std::push_heap(heap.begin(), heap.end(), closer);
          } else if (closer(c, heap.front())) {
            std::pop_heap(heap.begin(), heap.end(), closer);
            heap.back() = c;
            std::push_heap(heap.begin(), heap.end(), closer);
          }
        }
        continue;
      }
      const bool go_left = q[n.dim] < n.split;
      stack[top++] = go_left ? n.right : n.left;
      stack[top++] = go_left ? n.left : n.right;
    }
  }

  std::vector<Vec3> points_;
  std::vector<Index> order_;
  std::vector<Node> nodes_;
};

/// Nearest vertex index for every query.
inline std::vector<Index> nearest_indices(const KdTree& tree, std::span<const Vec3> queries) {
  std::vector<Index> out(queries.size());
  for (std::size_t i = 0; i < queries.size(); ++i) out[i] = tree.nearest(queries[i]).index;
  return out;
}

}  // namespace vmorph

#endif  // VMORPH_KDTREE_HPP
