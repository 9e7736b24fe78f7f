#ifndef VMORPH_SLICING_HPP
#define VMORPH_SLICING_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "vmorph/error.hpp"
#include "vmorph/mesh.hpp"

namespace vmorph {

/// Plane {q : normal . q = offset}.
struct SectionPlane {
  Vec3 normal = Vec3::UnitZ();
  double offset = 0.0;

  static SectionPlane make(const Vec3& normal, double offset) {
    const double len = normal.norm();
    if (!(len > 0.0) || !std::isfinite(len)) throw InputError("section plane normal must be non-zero");
    return {normal / len, offset / len};
  }
  static SectionPlane through(const Vec3& normal, const Vec3& point) {
    const Vec3 n = normal.normalized();
    return {n, n.dot(point)};
  }
  double signed_distance(const Vec3& p) const { return normal.dot(p) - offset; }
};

struct SectionPolyline {
  std::vector<Vec3> points;
  bool closed = false;
  /// Mesh edge each point was cut from; `a == b` marks a vertex lying in the plane.
  std::vector<Edge> source_edges;

  double length() const {
    double len = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i) len += distance(points[i - 1], points[i]);
    if (closed && points.size() > 2) len += distance(points.back(), points.front());
    return len;
  }
};

namespace detail {

constexpr double kOnPlaneTolerance = 1e-12;
constexpr double kOnPlaneNudge = 1e-9;
constexpr double kDistinctPoints = 1e-9;

inline void drop_repeated_points(SectionPolyline& pl) {
  std::vector<Vec3> pts;
  std::vector<Edge> src;
  for (std::size_t i = 0; i < pl.points.size(); ++i) {
    if (!pts.empty() && distance(pts.back(), pl.points[i]) <= kDistinctPoints) continue;
    pts.push_back(pl.points[i]);
    src.push_back(pl.source_edges[i]);
  }
  if (pl.closed)
    while (pts.size() > 1 && distance(pts.back(), pts.front()) <= kDistinctPoints) {
      pts.pop_back();
      src.pop_back();
    }
  pl.points = std::move(pts);
  pl.source_edges = std::move(src);
}

/// Chains undirected segments (pairs of node keys) into maximal paths.
/// Segments are consumed in index order so output is deterministic.
template <class Key>
std::vector<std::pair<std::vector<Key>, bool>> chain_segments(const std::vector<std::array<Key, 2>>& segs) {
  std::unordered_map<Key, std::vector<std::size_t>> at;
  for (std::size_t s = 0; s < segs.size(); ++s) {
    at[segs[s][0]].push_back(s);
    at[segs[s][1]].push_back(s);
  }
  std::vector<char> used(segs.size(), 0);
  auto next_segment = [&](Key k) -> long {
    for (std::size_t s : at[k])
      if (!used[s]) return static_cast<long>(s);
    return -1;
  };
  std::vector<std::pair<std::vector<Key>, bool>> out;
  for (std::size_t s0 = 0; s0 < segs.size(); ++s0) {
    if (used[s0]) continue;
    used[s0] = 1;
    std::vector<Key> fwd{segs[s0][0], segs[s0][1]};
    bool closed = false;
    for (;;) {
      const Key cur = fwd.back();
      const long s = next_segment(cur);
      if (s < 0) break;
      used[static_cast<std::size_t>(s)] = 1;
      const auto& sg = segs[static_cast<std::size_t>(s)];
      const Key nxt = sg[0] == cur ? sg[1] : sg[0];
      if (nxt == fwd.front()) {
        closed = true;
        break;
      }
      fwd.push_back(nxt);
    }
    if (!closed) {
      std::vector<Key> back;
      for (;;) {
        const Key cur = back.empty() ? fwd.front() : back.back();
        const long s = next_segment(cur);
        if (s < 0) break;
        used[static_cast<std::size_t>(s)] = 1;
        const auto& sg = segs[static_cast<std::size_t>(s)];
        back.push_back(sg[0] == cur ? sg[1] : sg[0]);
      }
      if (!back.empty()) {
        std::reverse(back.begin(), back.end());
        back.insert(back.end(), fwd.begin(), fwd.end());
        fwd = std::move(back);
      }
    }
    out.emplace_back(std::move(fwd), closed);
  }
  return out;
}

}  // namespace detail

/// Intersection of a mesh with a plane, one polyline per connected curve.
///
/// Vertices within 1e-12 mm of the plane are nudged by +1e-9 mm along the
/// normal before cutting. Mesh-boundary edges of faces lying entirely in the
/// plane are reported as well, so a flat patch sliced at its own height yields
/// its outline.
inline std::vector<SectionPolyline> cross_section(const TriangleMesh& mesh, const SectionPlane& plane) {
  const auto& V = mesh.vertices();
  const auto& g = mesh.graph();
  std::vector<double> d(V.size());
  std::vector<char> on_plane(V.size(), 0);
  for (std::size_t i = 0; i < V.size(); ++i) {
    d[i] = plane.signed_distance(V[i]);
    if (std::abs(d[i]) <= detail::kOnPlaneTolerance) {
      on_plane[i] = 1;
      d[i] = detail::kOnPlaneNudge;
    }
  }

  auto cut_point = [&](const Edge& e) -> Vec3 {
    if (e.a == e.b) return V[e.a];
    const double t = d[e.a] / (d[e.a] - d[e.b]);
    Vec3 p = V[e.a] + t * (V[e.b] - V[e.a]);
    return p - plane.signed_distance(p) * plane.normal;
  };

  std::vector<std::array<Index, 2>> segs;  // keyed by edge id
  std::vector<std::array<Index, 2>> flat;  // keyed by vertex id
  for (const Face& f : mesh.faces()) {
    if (on_plane[f[0]] && on_plane[f[1]] && on_plane[f[2]]) {
      for (int k = 0; k < 3; ++k) {
        const Index a = f[k], b = f[(k + 1) % 3];
        const long id = g.find_edge(a, b);
        if (g.face_count(static_cast<std::size_t>(id)) == 1) flat.push_back({a, b});
      }
      continue;
    }
    Index crossing[2];
    int nc = 0;
    for (int k = 0; k < 3; ++k) {
      const Index a = f[k], b = f[(k + 1) % 3];
      if ((d[a] > 0) != (d[b] > 0)) crossing[nc++] = static_cast<Index>(g.find_edge(a, b));
    }
    if (nc == 2) segs.push_back({crossing[0], crossing[1]});
  }

  std::vector<SectionPolyline> out;
  for (auto& [keys, closed] : detail::chain_segments(segs)) {
    SectionPolyline pl;
    pl.closed = closed;
    for (Index id : keys) {
      pl.source_edges.push_back(g.edges()[id]);
      pl.points.push_back(cut_point(g.edges()[id]));
    }
    detail::drop_repeated_points(pl);
    if (pl.points.size() >= 2) out.push_back(std::move(pl));
  }
  for (auto& [keys, closed] : detail::chain_segments(flat)) {
    SectionPolyline pl;
    pl.closed = closed;
    for (Index v : keys) {
      pl.source_edges.push_back({v, v});
      pl.points.push_back(V[v] - plane.signed_distance(V[v]) * plane.normal);
    }
    detail::drop_repeated_points(pl);
    if (pl.points.size() >= 2) out.push_back(std::move(pl));
  }
  return out;
}

enum class Axis { x = 0, y = 1 };

enum class SurfaceSide { upper, lower };

/// Range along the cut axis where more than two extreme points are kept per
/// section (e.g. around a removed neck).
struct ExtraPointInterval {
  double min = 0.0;
  double max = 0.0;
  int count = 4;
};

struct ExtremePointOptions {
  double spacing = 1.0;
  SurfaceSide side = SurfaceSide::upper;
  std::vector<ExtraPointInterval> intervals;
  /// Points closer than this along the horizontal axis tie. Wide enough for
  /// meshes stored in single precision (about 1e-5 mm at 100 mm).
  double tie_tolerance = 1e-4;
};

/// Section offsets every `spacing` strictly inside [lo, hi]; the mid-plane if
/// the extent is narrower than one spacing.
inline std::vector<double> section_offsets(double lo, double hi, double spacing, Diagnostics* diag = nullptr) {
  if (!(spacing > 0.0)) throw InputError("section spacing must be positive");
  std::vector<double> out;
  const long first = static_cast<long>(std::ceil(lo / spacing));
  const long last = static_cast<long>(std::floor(hi / spacing));
  for (long k = first; k <= last; ++k) {
    const double o = static_cast<double>(k) * spacing;
    if (o > lo && o < hi) out.push_back(o);
  }
  if (out.empty() && hi > lo) {
    warn(diag, "section spacing exceeds mesh extent; using the mid-plane only");
    out.push_back(0.5 * (lo + hi));
  }
  return out;
}

/// Outermost section points along the in-plane horizontal axis for vertical
/// sections orthogonal to `axis`. Ties prefer the point nearest the
/// requested surface side.
inline std::vector<Vec3> extreme_points(const TriangleMesh& mesh, Axis axis, const ExtremePointOptions& opt,
                                        Diagnostics* diag = nullptr) {
  const int cut = static_cast<int>(axis);
  const int along = 1 - cut;
  if (mesh.empty()) return {};
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const Vec3& p : mesh.vertices()) {
    lo = std::min(lo, p[cut]);
    hi = std::max(hi, p[cut]);
  }
  const double zsign = opt.side == SurfaceSide::upper ? 1.0 : -1.0;
  std::vector<Vec3> out;
  Vec3 normal = Vec3::Zero();
  normal[cut] = 1.0;
  for (double o : section_offsets(lo, hi, opt.spacing, diag)) {
    std::vector<Vec3> pts;
    for (const auto& pl : cross_section(mesh, SectionPlane{normal, o}))
      pts.insert(pts.end(), pl.points.begin(), pl.points.end());
    if (pts.empty()) {
      warn(diag, "empty section at offset " + std::to_string(o) + " skipped");
      continue;
    }
    int count = 2;
    for (const auto& iv : opt.intervals)
      if (o >= iv.min && o <= iv.max) count = std::max(count, iv.count);

    // Low end: smallest `along`, ties to the side, then to the exact extreme.
    // High end likewise.
    auto low_first = [&](const Vec3& a, const Vec3& b) {
      if (std::abs(a[along] - b[along]) > opt.tie_tolerance) return a[along] < b[along];
      if (std::abs(a.z() - b.z()) > opt.tie_tolerance) return zsign * a.z() > zsign * b.z();
      return a[along] < b[along];
    };
    auto high_first = [&](const Vec3& a, const Vec3& b) {
      if (std::abs(a[along] - b[along]) > opt.tie_tolerance) return a[along] > b[along];
      if (std::abs(a.z() - b.z()) > opt.tie_tolerance) return zsign * a.z() > zsign * b.z();
      return a[along] > b[along];
    };
    if (count <= 2) {
      out.push_back(*std::min_element(pts.begin(), pts.end(), low_first));
      out.push_back(*std::min_element(pts.begin(), pts.end(), high_first));
    } else {
      const std::size_t nlow = static_cast<std::size_t>((count + 1) / 2);
      const std::size_t nhigh = static_cast<std::size_t>(count / 2);
      std::vector<Vec3> a = pts, b = pts;
      std::sort(a.begin(), a.end(), low_first);
      std::sort(b.begin(), b.end(), high_first);
      std::vector<Vec3> picked;
      auto add = [&](const Vec3& p) {
        for (const Vec3& q : picked)
          if (distance(p, q) <= 1e-9) return;
        picked.push_back(p);
      };
      for (std::size_t i = 0; i < nlow && i < a.size(); ++i) add(a[i]);
      for (std::size_t i = 0; i < nhigh && i < b.size(); ++i) add(b[i]);
      out.insert(out.end(), picked.begin(), picked.end());
    }
  }
  return out;
}

}  // namespace vmorph

#endif  // VMORPH_SLICING_HPP
