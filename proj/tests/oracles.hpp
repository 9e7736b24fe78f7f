#ifndef VMORPH_TESTS_ORACLES_HPP
#define VMORPH_TESTS_ORACLES_HPP

// Brute-force reference implementations. Deliberately naive: they share no
// code with the library beyond the data types.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numeric>
#include <queue>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "vmorph/mesh.hpp"

namespace oracle {

using vmorph::Index;
using vmorph::Vec3;

inline double sq(const Vec3& a, const Vec3& b) {
  const double dx = a.x() - b.x(), dy = a.y() - b.y(), dz = a.z() - b.z();
  return dx * dx + dy * dy + dz * dz;
}

/// Linear-scan nearest neighbour; ties go to the lowest index.
inline std::size_t nearest(std::span<const Vec3> p, const Vec3& q) {
  std::size_t best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < p.size(); ++j) {
    const double d = sq(p[j], q);
    if (d < bd) {
      bd = d;
      best = j;
    }
  }
  return best;
}

/// Exhaustive mean NN distance, summed in reference order.
inline double mean_nn_distance(std::span<const Vec3> s, std::span<const Vec3> p) {
  double sum = 0.0;
  for (const Vec3& q : s) sum += std::sqrt(sq(p[nearest(p, q)], q));
  return sum / static_cast<double>(s.size());
}

inline double mean_nn_sq(std::span<const Vec3> s, std::span<const Vec3> p) {
  double sum = 0.0;
  for (const Vec3& q : s) sum += sq(p[nearest(p, q)], q);
  return sum / static_cast<double>(s.size());
}

/// Components by breadth-first search over an explicit adjacency list built
/// from the faces.
inline std::vector<std::vector<Index>> components(const vmorph::TriangleMesh& m, const std::vector<char>& removed) {
  const std::size_t n = m.vertex_count();
  std::vector<std::vector<Index>> adj(n);
  for (const auto& f : m.faces())
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        if (a != b) adj[f[static_cast<std::size_t>(a)]].push_back(f[static_cast<std::size_t>(b)]);
  std::vector<int> label(n, -1);
  std::vector<std::vector<Index>> out;
  for (Index s = 0; s < n; ++s) {
    if (removed[s] || label[s] >= 0) continue;
    std::vector<Index> comp;
    std::queue<Index> q;
    q.push(s);
    label[s] = static_cast<int>(out.size());
    while (!q.empty()) {
      const Index v = q.front();
      q.pop();
      comp.push_back(v);
      for (Index w : adj[v])
        if (!removed[w] && label[w] < 0) {
          label[w] = label[s];
          q.push(w);
        }
    }
    std::sort(comp.begin(), comp.end());
    out.push_back(std::move(comp));
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// All-pairs shortest path lengths by Floyd-Warshall over face edges.
inline std::vector<std::vector<double>> all_pairs(const vmorph::TriangleMesh& m) {
  const std::size_t n = m.vertex_count();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> d(n, std::vector<double>(n, inf));
  for (std::size_t i = 0; i < n; ++i) d[i][i] = 0.0;
  for (const auto& f : m.faces())
    for (int a = 0; a < 3; ++a) {
      const Index u = f[static_cast<std::size_t>(a)], v = f[static_cast<std::size_t>((a + 1) % 3)];
      const double w = std::sqrt(sq(m.vertices()[u], m.vertices()[v]));
      d[u][v] = std::min(d[u][v], w);
      d[v][u] = std::min(d[v][u], w);
    }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
  return d;
}

inline double cycle_length(std::span<const Vec3> pts, const std::vector<std::size_t>& order) {
  double len = 0.0;
  for (std::size_t i = 0; i < order.size(); ++i)
    len += std::sqrt(sq(pts[order[i]], pts[order[(i + 1) % order.size()]]));
  return len;
}

/// Optimal closed tour by enumerating all permutations with point 0 fixed.
inline double optimal_tour_length(std::span<const Vec3> pts) {
  std::vector<std::size_t> perm(pts.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  double best = std::numeric_limits<double>::infinity();
  do {
    best = std::min(best, cycle_length(pts, perm));
  } while (std::next_permutation(perm.begin() + 1, perm.end()));
  return best;
}

inline std::vector<Vec3> random_cloud(std::size_t n, std::uint64_t seed, double extent = 10.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-extent, extent);
  std::vector<Vec3> pts(n);
  for (Vec3& p : pts) p = Vec3(u(rng), u(rng), u(rng));
  return pts;
}

/// Closed unit cube [0,1]^3, outward winding.
inline vmorph::TriangleMesh unit_cube() {
  std::vector<Vec3> v;
  for (int i = 0; i < 8; ++i) v.emplace_back(i & 1, (i >> 1) & 1, (i >> 2) & 1);
  std::vector<vmorph::Face> f{{0, 2, 1}, {1, 2, 3}, {4, 5, 6}, {5, 7, 6}, {0, 1, 4}, {1, 5, 4},
                              {2, 6, 3}, {3, 6, 7}, {0, 4, 2}, {2, 4, 6}, {1, 3, 5}, {3, 7, 5}};
  return vmorph::TriangleMesh(std::move(v), std::move(f));
}

/// Unique scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("vmorph_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace oracle

#endif  // VMORPH_TESTS_ORACLES_HPP
