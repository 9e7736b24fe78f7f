#ifndef VMORPH_DECIMATION_HPP
#define VMORPH_DECIMATION_HPP

#include <algorithm>
#include <cmath>
#include <queue>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vmorph/error.hpp"
#include "vmorph/mesh.hpp"

namespace vmorph {

using Quadric = Eigen::Matrix4d;

namespace detail {

inline Quadric plane_quadric(const Vec3& n, double d) {
  const Eigen::Vector4d p(n.x(), n.y(), n.z(), d);
  return p * p.transpose();
}

inline double quadric_cost(const Quadric& q, const Vec3& v) {
  const Eigen::Vector4d h(v.x(), v.y(), v.z(), 1.0);
  return std::max(0.0, h.dot(q * h));
}

class Decimator {
 public:
  explicit Decimator(const TriangleMesh& mesh)
      : pos_(mesh.vertices()), faces_(mesh.faces()), alive_(faces_.size(), 1), vfaces_(pos_.size()),
        q_(pos_.size(), Quadric::Zero()), stamp_(pos_.size(), 0), removed_(pos_.size(), 0) {
    for (std::size_t f = 0; f < faces_.size(); ++f)
      for (Index v : faces_[f]) vfaces_[v].push_back(static_cast<Index>(f));
    for (const Face& f : faces_) {
      const Vec3 n = face_normal(f);
      if (n.norm() == 0.0) continue;
      const Vec3 u = n.normalized();
      const Quadric k = plane_quadric(u, -u.dot(pos_[f[0]]));
      for (Index v : f) q_[v] += k;
    }
    // Boundary edges: a plane through the edge, perpendicular to its face.
    const auto& g = mesh.graph();
    for (std::size_t e = 0; e < g.edge_count(); ++e) {
      if (g.face_count(e) != 1) continue;
      const Edge ed = g.edges()[e];
      const Index f = shared_faces(ed.a, ed.b).front();
      const Vec3 n = face_normal(faces_[f]);
      const Vec3 dir = pos_[ed.b] - pos_[ed.a];
      Vec3 m = dir.cross(n);
      if (m.norm() == 0.0) continue;
      m.normalize();
      const Quadric k = plane_quadric(m, -m.dot(pos_[ed.a]));
      q_[ed.a] += k;
      q_[ed.b] += k;
    }
    face_count_ = faces_.size();
    for (const Edge& e : g.edges()) push(e.a, e.b);
  }

  std::size_t face_count() const { return face_count_; }

  /// Contracts the cheapest valid edge; false when none is left.
  bool step() {
    while (!heap_.empty()) {
      const Candidate c = heap_.top();
      heap_.pop();
      if (removed_[c.u] || removed_[c.v] || stamp_[c.u] != c.su || stamp_[c.v] != c.sv) continue;
      if (!contractible(c.u, c.v, c.target)) continue;
      contract(c.u, c.v, c.target);
      return true;
    }
    return false;
  }

  TriangleMesh result() const {
    std::vector<Index> remap(pos_.size(), static_cast<Index>(-1));
    std::vector<Vec3> verts;
    std::vector<char> used(pos_.size(), 0);
    for (std::size_t f = 0; f < faces_.size(); ++f)
      if (alive_[f])
        for (Index v : faces_[f]) used[v] = 1;
    for (Index v = 0; v < pos_.size(); ++v)
      if (used[v]) {
        remap[v] = static_cast<Index>(verts.size());
        verts.push_back(pos_[v]);
      }
    std::vector<Face> faces;
    for (std::size_t f = 0; f < faces_.size(); ++f)
      if (alive_[f]) faces.push_back({remap[faces_[f][0]], remap[faces_[f][1]], remap[faces_[f][2]]});
    return TriangleMesh(std::move(verts), std::move(faces));
  }

 private:
  struct Candidate {
    double cost;
    Index u, v;
    unsigned su, sv;
    Vec3 target;
    bool operator>(const Candidate& o) const {
      if (cost != o.cost) return cost > o.cost;
      if (u != o.u) return u > o.u;
      return v > o.v;
    }
  };

  Vec3 face_normal(const Face& f) const { return (pos_[f[1]] - pos_[f[0]]).cross(pos_[f[2]] - pos_[f[0]]); }

  std::vector<Index> shared_faces(Index a, Index b) const {
    std::vector<Index> out;
    for (Index f : vfaces_[a])
      if (alive_[f] && (faces_[f][0] == b || faces_[f][1] == b || faces_[f][2] == b)) out.push_back(f);
    return out;
  }

  std::vector<Index> neighbours(Index a) const {
    std::vector<Index> out;
    for (Index f : vfaces_[a])
      if (alive_[f])
        for (Index w : faces_[f])
          if (w != a) out.push_back(w);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  bool on_boundary(Index a) const {
    for (Index w : neighbours(a))
      if (shared_faces(a, w).size() == 1) return true;
    return false;
  }

  void push(Index a, Index b) {
    if (a > b) std::swap(a, b);
    const Quadric q = q_[a] + q_[b];
    const Eigen::Matrix3d m = q.topLeftCorner<3, 3>();
    Vec3 target;
    double cost;
    const Eigen::JacobiSVD<Eigen::Matrix3d> svd(m);
    const auto sv = svd.singularValues();
    if (sv[2] > 0.0 && sv[0] / sv[2] < 1e7) {
      target = m.ldlt().solve(-q.topRightCorner<3, 1>());
      cost = quadric_cost(q, target);
    } else {
      const Vec3 cand[3] = {pos_[a], pos_[b], 0.5 * (pos_[a] + pos_[b])};
      target = cand[0];
      cost = quadric_cost(q, cand[0]);
      for (int k = 1; k < 3; ++k) {
        const double c = quadric_cost(q, cand[k]);
        if (c < cost) {
          cost = c;
          target = cand[k];
        }
      }
    }
    heap_.push({cost, a, b, stamp_[a], stamp_[b], target});
  }

  bool contractible(Index u, Index v, const Vec3& target) const {
    const auto shared = shared_faces(u, v);
    if (shared.empty()) return false;
    // Link condition: common neighbours are exactly the opposite corners.
    const auto nu = neighbours(u), nv = neighbours(v);
    std::vector<Index> common;
    std::set_intersection(nu.begin(), nu.end(), nv.begin(), nv.end(), std::back_inserter(common));
    if (common.size() != shared.size()) return false;
    if (shared.size() == 2 && on_boundary(u) && on_boundary(v)) return false;
    if (shared.size() == 1 && nu.size() + nv.size() <= 4) return false;  // last triangle of a strip
    // Reject normal flips and slivers in the faces that move.
    for (Index a : {u, v})
      for (Index f : vfaces_[a]) {
        if (!alive_[f]) continue;
        const Face& fc = faces_[f];
        if (std::find(fc.begin(), fc.end(), a == u ? v : u) != fc.end()) continue;
        const Vec3 before = face_normal(fc);
        std::array<Vec3, 3> p{pos_[fc[0]], pos_[fc[1]], pos_[fc[2]]};
        for (int k = 0; k < 3; ++k)
          if (fc[k] == a) p[k] = target;
        const Vec3 after = (p[1] - p[0]).cross(p[2] - p[0]);
        if (after.dot(before) <= 1e-3 * before.norm() * after.norm()) return false;
      }
    return true;
  }

  void contract(Index u, Index v, const Vec3& target) {
    for (Index f : vfaces_[v]) {
      if (!alive_[f]) continue;
      Face& fc = faces_[f];
      if (std::find(fc.begin(), fc.end(), u) != fc.end()) {
        alive_[f] = 0;
        --face_count_;
        continue;
      }
      for (Index& w : fc)
        if (w == v) w = u;
      vfaces_[u].push_back(f);
    }
    vfaces_[v].clear();
    std::vector<Index> keep;
    for (Index f : vfaces_[u])
      if (alive_[f]) keep.push_back(f);
    std::sort(keep.begin(), keep.end());
    keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
    vfaces_[u] = std::move(keep);
    pos_[u] = target;
    q_[u] += q_[v];
    removed_[v] = 1;
    ++stamp_[u];
    for (Index w : neighbours(u)) push(u, w);
  }

  std::vector<Vec3> pos_;
  std::vector<Face> faces_;
  std::vector<char> alive_;
  std::vector<std::vector<Index>> vfaces_;
  std::vector<Quadric> q_;
  std::vector<unsigned> stamp_;
  std::vector<char> removed_;
  std::size_t face_count_ = 0;
  std::priority_queue<Candidate, std::vector<Candidate>, std::greater<>> heap_;
};

}  // namespace detail

/// Quadric edge-collapse decimation down to at most `target_faces` faces.
inline TriangleMesh decimate(const TriangleMesh& mesh, std::size_t target_faces) {
  if (target_faces >= mesh.face_count()) return mesh;
  detail::Decimator d(mesh);
  while (d.face_count() > target_faces)
    if (!d.step())
      throw TopologicalLockError("no contractible edge left at " + std::to_string(d.face_count()) +
                                 " faces (target " + std::to_string(target_faces) + ")");
  return d.result();
}

}  // namespace vmorph

#endif  // VMORPH_DECIMATION_HPP
