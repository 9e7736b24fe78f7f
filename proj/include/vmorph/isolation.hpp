#ifndef VMORPH_ISOLATION_HPP
#define VMORPH_ISOLATION_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "vmorph/error.hpp"
#include "vmorph/graph.hpp"
#include "vmorph/kdtree.hpp"
#include "vmorph/mesh.hpp"
#include "vmorph/slicing.hpp"

namespace vmorph {

enum class PlateSide { sound_board, back };

inline SurfaceSide surface_of(PlateSide side) {
  return side == PlateSide::sound_board ? SurfaceSide::upper : SurfaceSide::lower;
}

inline std::string to_string(PlateSide s) { return s == PlateSide::sound_board ? "sound_board" : "back"; }

enum class ContourSource { nearest_neighbour, inserted_intermediate };

/// Cyclic loop of mesh vertices; consecutive entries (and last/first) are
/// adjacent in the edge graph.
struct ClosedContour {
  std::vector<Index> vertex_indices;
  std::vector<ContourSource> source;

  std::size_t size() const noexcept { return vertex_indices.size(); }
};

/// An isolated sound board or back. `mesh` holds the inner component plus
/// the contour ring; `contour` indexes into `mesh`.
struct PlateMesh {
  TriangleMesh mesh;
  std::vector<Index> contour;
  PlateSide side = PlateSide::sound_board;
  /// Source-mesh index of every vertex of `mesh` (empty when loaded from file).
  std::vector<Index> source_index;
  /// Vertices of `mesh` that belong to the inner component (not the contour).
  std::size_t inner_vertex_count = 0;

  std::vector<Vec3> contour_points() const {
    std::vector<Vec3> out;
    out.reserve(contour.size());
    for (Index i : contour) out.push_back(mesh.vertices()[i]);
    return out;
  }
};

/// Step 2: nearest mesh vertex for every point, duplicates dropped keeping the
/// first occurrence. Equidistant vertices resolve to the lowest index.
inline std::vector<Index> map_to_vertices(const TriangleMesh& mesh, std::span<const Vec3> points) {
  if (mesh.empty()) throw InputError("map_to_vertices: mesh is empty");
  const KdTree tree(mesh.vertices());
  std::vector<Index> out;
  std::vector<char> seen(mesh.vertex_count(), 0);
  for (const Vec3& p : points) {
    const Index v = tree.nearest(p).index;
    if (!seen[v]) {
      seen[v] = 1;
      out.push_back(v);
    }
  }
  return out;
}

inline double tour_length(std::span<const Vec3> pts, const std::vector<std::size_t>& tour) {
  double len = 0.0;
  for (std::size_t i = 0; i < tour.size(); ++i) len += distance(pts[tour[i]], pts[tour[(i + 1) % tour.size()]]);
  return len;
}

namespace detail {

/// Held-Karp dynamic programme; exact for the small anchor sets it is used on.
inline std::vector<std::size_t> exact_tour(std::span<const Vec3> pts) {
  const std::size_t n = pts.size();
  const std::size_t full = std::size_t{1} << (n - 1);
  const double inf = std::numeric_limits<double>::infinity();
  // dp[mask][j]: shortest path from node 0 visiting mask (over nodes 1..n-1), ending at j.
  std::vector<double> dp(full * n, inf);
  std::vector<std::uint8_t> prev(full * n, 0);
  for (std::size_t j = 1; j < n; ++j) dp[(std::size_t{1} << (j - 1)) * n + j] = distance(pts[0], pts[j]);
  for (std::size_t mask = 1; mask < full; ++mask)
    for (std::size_t j = 1; j < n; ++j) {
      if (!(mask & (std::size_t{1} << (j - 1)))) continue;
      const double cur = dp[mask * n + j];
      if (cur == inf) continue;
      for (std::size_t k = 1; k < n; ++k) {
        const std::size_t bit = std::size_t{1} << (k - 1);
        if (mask & bit) continue;
        const double cand = cur + distance(pts[j], pts[k]);
        double& slot = dp[(mask | bit) * n + k];
        if (cand < slot) {
          slot = cand;
          prev[(mask | bit) * n + k] = static_cast<std::uint8_t>(j);
        }
      }
    }
  std::size_t mask = full - 1, last = 1;
  double best = inf;
  for (std::size_t j = 1; j < n; ++j) {
    const double c = dp[mask * n + j] + distance(pts[j], pts[0]);
    if (c < best) {
      best = c;
      last = j;
    }
  }
  std::vector<std::size_t> rev;
  while (last != 0) {
    rev.push_back(last);
    const std::size_t p = prev[mask * n + last];
    mask &= ~(std::size_t{1} << (last - 1));
    last = p;
  }
  std::vector<std::size_t> tour{0};
  tour.insert(tour.end(), rev.rbegin(), rev.rend());
  return tour;
}

inline std::vector<std::size_t> heuristic_tour(std::span<const Vec3> pts) {
  const std::size_t n = pts.size();
  std::vector<std::size_t> tour{0};
  std::vector<char> used(n, 0);
  used[0] = 1;
  for (std::size_t step = 1; step < n; ++step) {
    const Vec3& cur = pts[tour.back()];
    std::size_t best = n;
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j)
      if (!used[j]) {
        const double d = squared_distance(cur, pts[j]);
        if (d < bd) {
          bd = d;
          best = j;
        }
      }
    used[best] = 1;
    tour.push_back(best);
  }
  // 2-opt, first improvement, bounded by 10 N^2 move evaluations.
  const std::size_t budget = 10 * n * n;
  std::size_t evals = 0;
  bool improved = true;
  while (improved && evals < budget) {
    improved = false;
    for (std::size_t i = 0; i + 1 < n && evals < budget; ++i)
      for (std::size_t j = i + 2; j < n && evals < budget; ++j) {
        if (i == 0 && j == n - 1) continue;
        ++evals;
        const Vec3& a = pts[tour[i]];
        const Vec3& b = pts[tour[i + 1]];
        const Vec3& c = pts[tour[j]];
        const Vec3& d = pts[tour[(j + 1) % n]];
        const double delta = distance(a, c) + distance(b, d) - distance(a, b) - distance(c, d);
        if (delta < -1e-12) {
          std::reverse(tour.begin() + static_cast<std::ptrdiff_t>(i + 1), tour.begin() + static_cast<std::ptrdiff_t>(j + 1));
          improved = true;
        }
      }
  }
  return tour;
}

}  // namespace detail

/// Step 3a: cyclic visiting order of the anchors approximately minimizing the
/// Euclidean tour. Starts from the anchor with the lowest vertex index.
inline std::vector<Index> order_loop(const TriangleMesh& mesh, std::vector<Index> anchors) {
  if (anchors.size() < 3) throw InputError("order_loop needs at least 3 anchors");
  std::sort(anchors.begin(), anchors.end());
  anchors.erase(std::unique(anchors.begin(), anchors.end()), anchors.end());
  if (anchors.size() < 3) throw InputError("order_loop needs at least 3 distinct anchors");
  std::vector<Vec3> pts;
  for (Index a : anchors) pts.push_back(mesh.vertices().at(a));
  const auto tour = anchors.size() <= 12 ? detail::exact_tour(pts) : detail::heuristic_tour(pts);
  std::vector<Index> out;
  out.reserve(tour.size());
  for (std::size_t i : tour) out.push_back(anchors[i]);
  return out;
}

/// Step 3b: joins consecutive anchors by shortest mesh paths. Immediate
/// back-and-forth (v, w, v) pairs are collapsed; other repeated vertices are
/// reported as warnings.
inline ClosedContour close_contour(const TriangleMesh& mesh, const std::vector<Index>& ordered,
                                   Diagnostics* diag = nullptr) {
  if (ordered.size() < 2) throw InputError("close_contour needs at least 2 anchors");
  struct Item {
    Index v;
    ContourSource src;
  };
  std::vector<Item> seq;
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    const Index a = ordered[i], b = ordered[(i + 1) % ordered.size()];
    std::vector<Index> path;
    try {
      path = shortest_path(mesh, a, b);
    } catch (const DisconnectedError&) {
      throw DisconnectedError("anchors " + std::to_string(a) + " and " + std::to_string(b) +
                              " lie in different components");
    }
    seq.push_back({a, ContourSource::nearest_neighbour});
    for (std::size_t k = 1; k + 1 < path.size(); ++k) seq.push_back({path[k], ContourSource::inserted_intermediate});
  }

  std::vector<Item> st;
  for (const Item& it : seq) {
    if (!st.empty() && st.back().v == it.v) continue;
    if (st.size() >= 2 && st[st.size() - 2].v == it.v) {
      st.pop_back();
      continue;
    }
    st.push_back(it);
  }
  for (bool changed = true; changed && st.size() >= 3;) {
    changed = false;
    const std::size_t n = st.size();
    if (st.back().v == st.front().v) {
      st.pop_back();
      changed = true;
    } else if (st[n - 1].v == st[1].v) {  // (v, w, v) across the seam with w = st[0]
      st.erase(st.begin());
      st.pop_back();
      changed = true;
    } else if (st[n - 2].v == st[0].v) {  // (v, w, v) with w = st[n-1]
      st.pop_back();
      st.pop_back();
      changed = true;
    }
  }
  if (st.size() < 3) throw ContractError("contour collapsed to fewer than 3 vertices");

  ClosedContour c;
  for (const Item& it : st) {
    c.vertex_indices.push_back(it.v);
    c.source.push_back(it.src);
  }
  std::vector<Index> sorted = c.vertex_indices;
  std::sort(sorted.begin(), sorted.end());
  const auto repeats = static_cast<std::size_t>(sorted.end() - std::unique(sorted.begin(), sorted.end()));
  if (repeats > 0) warn(diag, "contour revisits " + std::to_string(repeats) + " vertices");
  return c;
}

/// Vertex with extremal height for the plate side (max z for the sound
/// board, min z for the back), skipping `excluded`; lowest index on ties.
inline Index apex_vertex(const TriangleMesh& mesh, PlateSide side, const std::vector<char>& excluded) {
  const double sign = side == PlateSide::sound_board ? 1.0 : -1.0;
  long best = -1;
  for (Index v = 0; v < mesh.vertex_count(); ++v) {
    if (excluded[v]) continue;
    if (best < 0 || sign * mesh.vertices()[v].z() > sign * mesh.vertices()[static_cast<std::size_t>(best)].z())
      best = static_cast<long>(v);
  }
  if (best < 0) throw FragmentationError("no vertex remains after removing the contour");
  return static_cast<Index>(best);
}

/// Step 4: removes the contour (and `removed`, e.g. a sound-hole mask) from
/// the graph and keeps the component holding the plate apex. The contour ring
/// is re-attached to the kept component in the returned plate.
inline PlateMesh extract_inner(const TriangleMesh& mesh, const ClosedContour& contour, PlateSide side,
                               const VertexMask& removed = {}) {
  const auto n = mesh.vertex_count();
  std::vector<Index> cut = contour.vertex_indices;
  cut.insert(cut.end(), removed.indices().begin(), removed.indices().end());
  const VertexMask cut_mask(cut);
  cut_mask.validate(n);
  const std::vector<char> gone = cut_mask.flags(n);

  const auto comps = connected_components(mesh, cut_mask);
  const Index apex = apex_vertex(mesh, side, gone);
  const std::vector<Index>* inner = nullptr;
  for (const auto& c : comps)
    if (std::binary_search(c.begin(), c.end(), apex)) inner = &c;
  const std::size_t remaining = n - cut_mask.size();
  if (inner == nullptr || 2 * inner->size() < remaining)
    throw FragmentationError("inner component holds " + std::to_string(inner ? inner->size() : 0) + " of " +
                             std::to_string(remaining) + " remaining vertices; the contour did not isolate the plate");

  std::vector<char> in_inner(n, 0), on_contour(n, 0);
  for (Index v : *inner) in_inner[v] = 1;
  for (Index v : contour.vertex_indices) on_contour[v] = 1;

  std::vector<Index> remap(n, static_cast<Index>(-1));
  PlateMesh plate;
  plate.side = side;
  std::vector<Vec3> verts;
  for (Index v = 0; v < n; ++v)
    if (in_inner[v] || on_contour[v]) {
      remap[v] = static_cast<Index>(verts.size());
      verts.push_back(mesh.vertices()[v]);
      plate.source_index.push_back(v);
    }
  std::vector<Face> faces;
  for (const Face& f : mesh.faces()) {
    const bool kept = (in_inner[f[0]] || on_contour[f[0]]) && (in_inner[f[1]] || on_contour[f[1]]) &&
                      (in_inner[f[2]] || on_contour[f[2]]);
    const bool touches_inner = in_inner[f[0]] || in_inner[f[1]] || in_inner[f[2]];
    if (kept && touches_inner) faces.push_back({remap[f[0]], remap[f[1]], remap[f[2]]});
  }
  plate.mesh = TriangleMesh(std::move(verts), std::move(faces));
  for (Index v : contour.vertex_indices) plate.contour.push_back(remap[v]);
  plate.inner_vertex_count = inner->size();
  return plate;
}

struct IsolationParams {
  double spacing = 1.0;
  bool cut_x = true;  ///< sections orthogonal to x
  bool cut_y = true;  ///< sections orthogonal to y
  std::vector<ExtraPointInterval> x_intervals;  ///< extra points for x-sections (neck region)
  std::vector<ExtraPointInterval> y_intervals;
  VertexMask removed;  ///< e.g. sound holes; excluded from the inner mesh
};

struct IsolationResult {
  PlateMesh plate;
  ClosedContour contour;  ///< indices into the input mesh
  std::vector<Vec3> extreme_points;
  std::vector<Index> anchors;  ///< nearest vertices in TSP order
};

/// Contour isolation of one plate from a PCA-oriented, roughly delineated
/// mesh that overhangs the ribs.
inline IsolationResult isolate_plate(const TriangleMesh& mesh, PlateSide side, const IsolationParams& params = {},
                                     Diagnostics* diag = nullptr) {
  if (!params.cut_x && !params.cut_y) throw InputError("isolate_plate: no section axis selected");
  IsolationResult r;
  ExtremePointOptions opt;
  opt.spacing = params.spacing;
  opt.side = surface_of(side);
  if (params.cut_x) {
    opt.intervals = params.x_intervals;
    auto p = extreme_points(mesh, Axis::x, opt, diag);
    r.extreme_points.insert(r.extreme_points.end(), p.begin(), p.end());
  }
  if (params.cut_y) {
    opt.intervals = params.y_intervals;
    auto p = extreme_points(mesh, Axis::y, opt, diag);
    r.extreme_points.insert(r.extreme_points.end(), p.begin(), p.end());
  }
  const auto mapped = map_to_vertices(mesh, r.extreme_points);
  r.anchors = order_loop(mesh, mapped);
  r.contour = close_contour(mesh, r.anchors, diag);
  r.plate = extract_inner(mesh, r.contour, side, params.removed);
  return r;
}

/// Rough delineation of one plate from a closed, oriented body: faces whose
/// three corners lie on the requested side of `z = split`. `old_index`
/// receives the body index of every kept vertex.
inline TriangleMesh rough_plate(const TriangleMesh& body, PlateSide side, double split = 0.0,
                                std::vector<Index>* old_index = nullptr) {
  std::vector<char> keep(body.vertex_count());
  for (Index v = 0; v < body.vertex_count(); ++v) {
    const double z = body.vertices()[v].z();
    keep[v] = side == PlateSide::sound_board ? z >= split : z <= split;
  }
  std::vector<Index> first, second;
  TriangleMesh part = submesh(body, keep, &first);
  // Drop vertices no face references.
  std::vector<char> used(part.vertex_count(), 0);
  for (const Face& f : part.faces())
    for (Index v : f) used[v] = 1;
  TriangleMesh out = submesh(part, used, &second);
  if (old_index) {
    old_index->clear();
    for (Index v : second) old_index->push_back(first[v]);
  }
  return out;
}

}  // namespace vmorph

#endif  // VMORPH_ISOLATION_HPP
