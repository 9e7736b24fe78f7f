#ifndef VMORPH_GRAPH_HPP
#define VMORPH_GRAPH_HPP

#include <algorithm>
#include <functional>
#include <limits>
#include <queue>
#include <vector>

#include "vmorph/error.hpp"
#include "vmorph/mesh.hpp"

namespace vmorph {

/// Maximal connected vertex sets of the edge graph after deleting `removed`.
/// Components are sorted by size (descending), ties by smallest member; each
/// component lists its vertices in ascending order.
inline std::vector<std::vector<Index>> connected_components(const TriangleMesh& mesh,
                                                            const VertexMask& removed = {}) {
  const auto n = mesh.vertex_count();
  std::vector<char> gone = removed.flags(n);
  std::vector<char> seen(n, 0);
  std::vector<std::vector<Index>> comps;
  std::vector<Index> stack;
  for (Index s = 0; s < n; ++s) {
    if (gone[s] || seen[s]) continue;
    std::vector<Index> comp;
    stack.push_back(s);
    seen[s] = 1;
    while (!stack.empty()) {
      const Index v = stack.back();
      stack.pop_back();
      comp.push_back(v);
      for (Index w : mesh.graph().neighbors(v))
        if (!gone[w] && !seen[w]) {
          seen[w] = 1;
          stack.push_back(w);
        }
    }
    std::sort(comp.begin(), comp.end());
    comps.push_back(std::move(comp));
  }
  std::stable_sort(comps.begin(), comps.end(),
                   [](const auto& a, const auto& b) { return a.size() > b.size(); });
  return comps;
}

/// Single-source Dijkstra over Euclidean edge lengths. Vertices flagged in
/// `blocked` are never entered. Returns distances; `parent` receives the
/// predecessor tree (-1 for unreached/source).
inline std::vector<double> dijkstra(const TriangleMesh& mesh, Index source, std::vector<long>* parent = nullptr,
                                    const std::vector<char>* blocked = nullptr, long stop_at = -1) {
  const auto n = mesh.vertex_count();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(n, inf);
  std::vector<long> par(n, -1);
  using Item = std::pair<double, Index>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[source] = 0.0;
  pq.push({0.0, source});
  while (!pq.empty()) {
    auto [d, v] = pq.top();
    pq.pop();
    if (d > dist[v]) continue;
    if (static_cast<long>(v) == stop_at) break;
    auto nb = mesh.graph().neighbors(v);
    auto w = mesh.graph().weights(v);
    for (std::size_t k = 0; k < nb.size(); ++k) {
      const Index u = nb[k];
      if (blocked && (*blocked)[u]) continue;
      const double nd = d + w[k];
      if (nd < dist[u]) {
        dist[u] = nd;
        par[u] = static_cast<long>(v);
        pq.push({nd, u});
      }
    }
  }
  if (parent) *parent = std::move(par);
  return dist;
}

/// Vertex path minimizing summed Euclidean edge length; endpoints included.
inline std::vector<Index> shortest_path(const TriangleMesh& mesh, Index from, Index to) {
  const auto n = mesh.vertex_count();
  if (from >= n || to >= n) throw InputError("shortest_path: vertex index out of range");
  if (from == to) return {from};
  std::vector<long> parent;
  const auto dist = dijkstra(mesh, from, &parent, nullptr, static_cast<long>(to));
  if (!std::isfinite(dist[to]))
    throw DisconnectedError("vertices " + std::to_string(from) + " and " + std::to_string(to) +
                            " are not connected");
  std::vector<Index> path;
  for (long v = static_cast<long>(to); v != -1; v = parent[static_cast<std::size_t>(v)])
    path.push_back(static_cast<Index>(v));
  std::reverse(path.begin(), path.end());
  return path;
}

inline double path_length(const TriangleMesh& mesh, const std::vector<Index>& path) {
  double len = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) len += distance(mesh.vertices()[path[i - 1]], mesh.vertices()[path[i]]);
  return len;
}

}  // namespace vmorph

#endif  // VMORPH_GRAPH_HPP
