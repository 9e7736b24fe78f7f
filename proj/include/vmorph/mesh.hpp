#ifndef VMORPH_MESH_HPP
#define VMORPH_MESH_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "vmorph/error.hpp"

namespace vmorph {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Index = std::uint32_t;
using Face = std::array<Index, 3>;

/// Squared Euclidean distance, evaluated in a fixed operation order so every
/// caller (tree search, brute force, metric sums) sees bit-identical values.
inline double squared_distance(const Vec3& a, const Vec3& b) {
  const double dx = a.x() - b.x();
  const double dy = a.y() - b.y();
  const double dz = a.z() - b.z();
  return dx * dx + dy * dy + dz * dz;
}

inline double distance(const Vec3& a, const Vec3& b) { return std::sqrt(squared_distance(a, b)); }

inline bool is_finite(const Vec3& v) {
  return std::isfinite(v.x()) && std::isfinite(v.y()) && std::isfinite(v.z());
}

/// Bare vertex set (mm).
class PointCloud {
 public:
  PointCloud() = default;
  explicit PointCloud(std::vector<Vec3> points) : points_(std::move(points)) {
    if (points_.empty()) throw InputError("point cloud is empty");
    for (std::size_t i = 0; i < points_.size(); ++i)
      if (!is_finite(points_[i]))
        throw InputError("point " + std::to_string(i) + " has a non-finite coordinate");
  }

  const std::vector<Vec3>& points() const noexcept { return points_; }
  std::span<const Vec3> span() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }
  const Vec3& operator[](std::size_t i) const { return points_[i]; }

 private:
  std::vector<Vec3> points_;
};

/// Undirected edge between vertices `a < b`.
struct Edge {
  Index a;
  Index b;
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

inline Edge make_edge(Index u, Index v) { return u < v ? Edge{u, v} : Edge{v, u}; }

/// Compressed adjacency of the face-edge graph with Euclidean weights.
class EdgeGraph {
 public:
  EdgeGraph() = default;

  EdgeGraph(std::span<const Vec3> vertices, std::span<const Face> faces) {
    std::vector<Edge> half;
    half.reserve(faces.size() * 3);
    for (const Face& f : faces)
      for (int k = 0; k < 3; ++k) half.push_back(make_edge(f[k], f[(k + 1) % 3]));
    std::sort(half.begin(), half.end());

    for (std::size_t i = 0; i < half.size();) {
      std::size_t j = i;
      while (j < half.size() && half[j] == half[i]) ++j;
      edges_.push_back(half[i]);
      face_count_.push_back(static_cast<std::uint32_t>(j - i));
      i = j;
    }

    struct Entry {
      Index from, to, id;
    };
    std::vector<Entry> entries;
    entries.reserve(edges_.size() * 2);
    for (std::size_t id = 0; id < edges_.size(); ++id) {
      entries.push_back({edges_[id].a, edges_[id].b, static_cast<Index>(id)});
      entries.push_back({edges_[id].b, edges_[id].a, static_cast<Index>(id)});
    }
    std::sort(entries.begin(), entries.end(), [](const Entry& x, const Entry& y) {
      return x.from != y.from ? x.from < y.from : x.to < y.to;
    });
    offsets_.assign(vertices.size() + 1, 0);
    neighbors_.reserve(entries.size());
    edge_ids_.reserve(entries.size());
    weights_.reserve(entries.size());
    for (const Entry& e : entries) {
      ++offsets_[e.from + 1];
      neighbors_.push_back(e.to);
      edge_ids_.push_back(e.id);
      weights_.push_back(distance(vertices[e.from], vertices[e.to]));
    }
    std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
  }

  std::size_t vertex_count() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  std::span<const Index> neighbors(Index v) const {
    return {neighbors_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
  }
  std::span<const double> weights(Index v) const {
    return {weights_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
  }
  std::span<const Index> incident_edges(Index v) const {
    return {edge_ids_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
  }

  /// Number of faces sharing edge `id` (1 = boundary, > 2 = non-manifold).
  std::uint32_t face_count(std::size_t id) const { return face_count_[id]; }

  bool adjacent(Index u, Index v) const { return find_edge(u, v) >= 0; }

  /// Edge id or -1.
  long find_edge(Index u, Index v) const {
    auto n = neighbors(u);
    auto it = std::lower_bound(n.begin(), n.end(), v);
    if (it == n.end() || *it != v) return -1;
    return static_cast<long>(edge_ids_[offsets_[u] + static_cast<std::size_t>(it - n.begin())]);
  }

 private:
  std::vector<Edge> edges_;
  std::vector<std::uint32_t> face_count_;
  std::vector<std::size_t> offsets_;
  std::vector<Index> neighbors_;
  std::vector<Index> edge_ids_;
  std::vector<double> weights_;
};

/// Indexed triangle surface (mm). Immutable once built; the edge graph is
/// derived at construction.
class TriangleMesh {
 public:
  TriangleMesh() = default;

  TriangleMesh(std::vector<Vec3> vertices, std::vector<Face> faces)
      : vertices_(std::move(vertices)), faces_(std::move(faces)) {
    for (std::size_t i = 0; i < vertices_.size(); ++i)
      if (!is_finite(vertices_[i]))
        throw InputError("vertex " + std::to_string(i) + " has a non-finite coordinate");
    std::vector<std::size_t> bad;
    const auto n = vertices_.size();
    for (std::size_t i = 0; i < faces_.size(); ++i) {
      const Face& f = faces_[i];
      if (f[0] >= n || f[1] >= n || f[2] >= n || f[0] == f[1] || f[1] == f[2] || f[0] == f[2])
        bad.push_back(i);
    }
    if (!bad.empty()) throw DegenerateFaceError(std::move(bad));
    graph_ = EdgeGraph(vertices_, faces_);
  }

  const std::vector<Vec3>& vertices() const noexcept { return vertices_; }
  const std::vector<Face>& faces() const noexcept { return faces_; }
  const EdgeGraph& graph() const noexcept { return graph_; }
  std::size_t vertex_count() const noexcept { return vertices_.size(); }
  std::size_t face_count() const noexcept { return faces_.size(); }
  bool empty() const noexcept { return vertices_.empty(); }

  PointCloud cloud() const { return PointCloud(vertices_); }

  std::size_t non_manifold_edge_count() const {
    std::size_t c = 0;
    for (std::size_t e = 0; e < graph_.edge_count(); ++e) c += graph_.face_count(e) > 2;
    return c;
  }

  std::size_t boundary_edge_count() const {
    std::size_t c = 0;
    for (std::size_t e = 0; e < graph_.edge_count(); ++e) c += graph_.face_count(e) == 1;
    return c;
  }

 private:
  std::vector<Vec3> vertices_;
  std::vector<Face> faces_;
  EdgeGraph graph_;
};

/// Set of vertex indices to exclude or select; kept sorted and unique.
class VertexMask {
 public:
  VertexMask() = default;
  explicit VertexMask(std::vector<Index> indices) : indices_(std::move(indices)) {
    std::sort(indices_.begin(), indices_.end());
    indices_.erase(std::unique(indices_.begin(), indices_.end()), indices_.end());
  }

  const std::vector<Index>& indices() const noexcept { return indices_; }
  bool empty() const noexcept { return indices_.empty(); }
  std::size_t size() const noexcept { return indices_.size(); }
  bool contains(Index v) const { return std::binary_search(indices_.begin(), indices_.end(), v); }

  void validate(std::size_t vertex_count) const {
    if (!indices_.empty() && indices_.back() >= vertex_count)
      throw InputError("mask index " + std::to_string(indices_.back()) + " out of range for " +
                       std::to_string(vertex_count) + " vertices");
  }

  std::vector<char> flags(std::size_t vertex_count) const {
    validate(vertex_count);
    std::vector<char> f(vertex_count, 0);
    for (Index i : indices_) f[i] = 1;
    return f;
  }

 private:
  std::vector<Index> indices_;
};

/// Returns a mesh with every vertex mapped through `fn`; topology unchanged.
template <class Fn>
TriangleMesh transform_vertices(const TriangleMesh& mesh, Fn&& fn) {
  std::vector<Vec3> v;
  v.reserve(mesh.vertex_count());
  for (const Vec3& p : mesh.vertices()) v.push_back(fn(p));
  return TriangleMesh(std::move(v), mesh.faces());
}

/// Uniform scale about the origin (the loaders' scale hint).
inline TriangleMesh scaled(const TriangleMesh& mesh, double factor) {
  if (factor == 1.0) return mesh;
  return transform_vertices(mesh, [factor](const Vec3& p) { return Vec3(p * factor); });
}

inline double mean_edge_length(const TriangleMesh& mesh) {
  const auto& g = mesh.graph();
  if (g.edge_count() == 0) throw InputError("mesh has no edges");
  double sum = 0.0;
  for (const Edge& e : g.edges()) sum += distance(mesh.vertices()[e.a], mesh.vertices()[e.b]);
  return sum / static_cast<double>(g.edge_count());
}

/// Sub-mesh on the vertices flagged in `keep`: vertices keep their relative
/// order, faces are kept when all three corners are kept. `old_index` receives
/// the source index of every new vertex.
inline TriangleMesh submesh(const TriangleMesh& mesh, const std::vector<char>& keep,
                            std::vector<Index>* old_index = nullptr) {
  std::vector<Index> remap(mesh.vertex_count(), static_cast<Index>(-1));
  std::vector<Vec3> verts;
  std::vector<Index> origin;
  for (Index v = 0; v < mesh.vertex_count(); ++v)
    if (keep[v]) {
      remap[v] = static_cast<Index>(verts.size());
      verts.push_back(mesh.vertices()[v]);
      origin.push_back(v);
    }
  std::vector<Face> faces;
  for (const Face& f : mesh.faces())
    if (keep[f[0]] && keep[f[1]] && keep[f[2]]) faces.push_back({remap[f[0]], remap[f[1]], remap[f[2]]});
  if (old_index) *old_index = std::move(origin);
  return TriangleMesh(std::move(verts), std::move(faces));
}

/// Merges vertices closer than `tolerance` (mm). The lowest index of each
/// cluster survives; faces that collapse are dropped.
inline TriangleMesh weld(const TriangleMesh& mesh, double tolerance = 1e-6) {
  const auto& v = mesh.vertices();
  std::vector<Index> order(v.size());
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    if (v[a].x() != v[b].x()) return v[a].x() < v[b].x();
    return a < b;
  });
  std::vector<Index> rep(v.size());
  std::iota(rep.begin(), rep.end(), Index{0});
  const double tol2 = tolerance * tolerance;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const Index a = order[i];
    for (std::size_t j = i + 1; j < order.size() && v[order[j]].x() - v[a].x() <= tolerance; ++j) {
      const Index b = order[j];
      if (squared_distance(v[a], v[b]) <= tol2) {
        Index ra = rep[a], rb = rep[b];
        while (rep[ra] != ra) ra = rep[ra];
        while (rep[rb] != rb) rb = rep[rb];
        if (ra != rb) rep[std::max(ra, rb)] = std::min(ra, rb);
      }
    }
  }
  for (Index i = 0; i < rep.size(); ++i) {
    Index r = rep[i];
    while (rep[r] != r) r = rep[r];
    rep[i] = r;
  }
  std::vector<Index> remap(v.size(), static_cast<Index>(-1));
  std::vector<Vec3> verts;
  for (Index i = 0; i < v.size(); ++i)
    if (rep[i] == i) {
      remap[i] = static_cast<Index>(verts.size());
      verts.push_back(v[i]);
    }
  std::vector<Face> faces;
  for (const Face& f : mesh.faces()) {
    Face g{remap[rep[f[0]]], remap[rep[f[1]]], remap[rep[f[2]]]};
    if (g[0] != g[1] && g[1] != g[2] && g[0] != g[2]) faces.push_back(g);
  }
  return TriangleMesh(std::move(verts), std::move(faces));
}

}  // namespace vmorph

#endif  // VMORPH_MESH_HPP
