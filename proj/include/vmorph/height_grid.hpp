#ifndef VMORPH_HEIGHT_GRID_HPP
#define VMORPH_HEIGHT_GRID_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "vmorph/error.hpp"
#include "vmorph/mesh.hpp"
#include "vmorph/slicing.hpp"

namespace vmorph {

/// Node layout of a horizontal grid: node (i, j) sits at
/// (x0 + i * spacing, y0 + j * spacing).
struct GridSpec {
  double x0 = 0.0;
  double y0 = 0.0;
  double spacing = 1.0;
  std::size_t nx = 0;
  std::size_t ny = 0;

  bool operator==(const GridSpec&) const = default;
  double x(std::size_t i) const { return x0 + static_cast<double>(i) * spacing; }
  double y(std::size_t j) const { return y0 + static_cast<double>(j) * spacing; }
  std::size_t size() const { return nx * ny; }
};

/// Grid aligned to multiples of `spacing` covering the horizontal extent of
/// every mesh given.
inline GridSpec grid_covering(std::initializer_list<const TriangleMesh*> meshes, double spacing) {
  if (!(spacing > 0.0)) throw InputError("grid spacing must be positive");
  double lx = std::numeric_limits<double>::infinity(), ly = lx, hx = -lx, hy = -lx;
  for (const TriangleMesh* m : meshes)
    for (const Vec3& p : m->vertices()) {
      lx = std::min(lx, p.x());
      ly = std::min(ly, p.y());
      hx = std::max(hx, p.x());
      hy = std::max(hy, p.y());
    }
  GridSpec g;
  g.spacing = spacing;
  if (!(lx <= hx)) return g;
  const double i0 = std::ceil(lx / spacing), i1 = std::floor(hx / spacing);
  const double j0 = std::ceil(ly / spacing), j1 = std::floor(hy / spacing);
  g.x0 = i0 * spacing;
  g.y0 = j0 * spacing;
  g.nx = i1 >= i0 ? static_cast<std::size_t>(i1 - i0) + 1 : 0;
  g.ny = j1 >= j0 ? static_cast<std::size_t>(j1 - j0) + 1 : 0;
  return g;
}

/// Surface heights on a grid; NaN marks nodes with no vertical intersection.
struct HeightGrid {
  GridSpec spec;
  std::vector<double> values;  ///< row-major in j (y), then i (x)

  HeightGrid() = default;
  explicit HeightGrid(const GridSpec& s)
      : spec(s), values(s.size(), std::numeric_limits<double>::quiet_NaN()) {}

  double& at(std::size_t i, std::size_t j) { return values[j * spec.nx + i]; }
  double at(std::size_t i, std::size_t j) const { return values[j * spec.nx + i]; }
  bool valid(std::size_t k) const { return !std::isnan(values[k]); }
  std::size_t valid_count() const {
    return static_cast<std::size_t>(std::count_if(values.begin(), values.end(), [](double v) { return !std::isnan(v); }));
  }
};

/// Heights where a vertical line through each node meets the mesh: the face's
/// plane evaluated at the node. Multiple hits keep the largest z for the upper
/// side and the smallest for the lower side.
inline HeightGrid interpolate_grid(const TriangleMesh& mesh, const GridSpec& spec, SurfaceSide side) {
  if (!(spec.spacing > 0.0)) throw InputError("grid spacing must be positive");
  HeightGrid g(spec);
  if (spec.size() == 0) return g;
  const auto& V = mesh.vertices();
  const bool upper = side == SurfaceSide::upper;
  for (const Face& f : mesh.faces()) {
    const Vec3 &a = V[f[0]], &b = V[f[1]], &c = V[f[2]];
    const double det = (b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y());
    if (std::abs(det) <= 1e-14) continue;  // vertical face
    const double lx = std::min({a.x(), b.x(), c.x()}), hx = std::max({a.x(), b.x(), c.x()});
    const double ly = std::min({a.y(), b.y(), c.y()}), hy = std::max({a.y(), b.y(), c.y()});
    const double fi0 = std::ceil((lx - spec.x0) / spec.spacing - 1e-9), fi1 = std::floor((hx - spec.x0) / spec.spacing + 1e-9);
    const double fj0 = std::ceil((ly - spec.y0) / spec.spacing - 1e-9), fj1 = std::floor((hy - spec.y0) / spec.spacing + 1e-9);
    if (fi1 < 0 || fj1 < 0 || fi0 >= static_cast<double>(spec.nx) || fj0 >= static_cast<double>(spec.ny)) continue;
    const std::size_t i0 = static_cast<std::size_t>(std::max(0.0, fi0));
    const std::size_t j0 = static_cast<std::size_t>(std::max(0.0, fj0));
    const std::size_t i1 = std::min(spec.nx - 1, static_cast<std::size_t>(std::max(0.0, fi1)));
    const std::size_t j1 = std::min(spec.ny - 1, static_cast<std::size_t>(std::max(0.0, fj1)));
    const double tol = 1e-12 * std::abs(det);
    for (std::size_t j = j0; j <= j1; ++j)
      for (std::size_t i = i0; i <= i1; ++i) {
        const double x = spec.x(i), y = spec.y(j);
        // Barycentric weights scaled by det.
        const double wb = (x - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (y - a.y());
        const double wc = (b.x() - a.x()) * (y - a.y()) - (x - a.x()) * (b.y() - a.y());
        const double wa = det - wb - wc;
        const double s = det > 0 ? 1.0 : -1.0;
        if (s * wa < -tol || s * wb < -tol || s * wc < -tol) continue;
        const double z = (wa * a.z() + wb * b.z() + wc * c.z()) / det;
        double& slot = g.at(i, j);
        if (std::isnan(slot) || (upper ? z > slot : z < slot)) slot = z;
      }
  }
  return g;
}

/// Convenience overload on the mesh's own aligned grid.
inline HeightGrid interpolate_grid(const TriangleMesh& mesh, double spacing, SurfaceSide side) {
  return interpolate_grid(mesh, grid_covering({&mesh}, spacing), side);
}

struct GridDifferenceStats {
  double max = 0.0;
  double mean = 0.0;
  double median = 0.0;
  double stddev = 0.0;
  std::size_t count = 0;
};

inline void require_same_grid(const HeightGrid& a, const HeightGrid& b) {
  if (!(a.spec == b.spec)) throw GridMismatchError("height grids differ in origin, spacing or size");
}

/// Statistics of |a - b| over nodes valid in both grids (population stddev).
inline GridDifferenceStats grid_difference_stats(const HeightGrid& a, const HeightGrid& b) {
  require_same_grid(a, b);
  std::vector<double> d;
  for (std::size_t k = 0; k < a.values.size(); ++k)
    if (a.valid(k) && b.valid(k)) d.push_back(std::abs(a.values[k] - b.values[k]));
  GridDifferenceStats s;
  s.count = d.size();
  if (d.empty()) return s;
  double sum = 0.0;
  for (double v : d) {
    sum += v;
    s.max = std::max(s.max, v);
  }
  s.mean = sum / static_cast<double>(d.size());
  double ss = 0.0;
  for (double v : d) ss += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(ss / static_cast<double>(d.size()));
  std::sort(d.begin(), d.end());
  const std::size_t m = d.size() / 2;
  s.median = d.size() % 2 ? d[m] : 0.5 * (d[m - 1] + d[m]);
  return s;
}

/// CSV matrix, one row per y, `nan` for invalid nodes.
inline std::string encode_grid_csv(const HeightGrid& g) {
  std::string out;
  for (std::size_t j = 0; j < g.spec.ny; ++j) {
    for (std::size_t i = 0; i < g.spec.nx; ++i) {
      if (i) out += ',';
      const double v = g.at(i, j);
      if (std::isnan(v)) {
        out += "nan";
      } else {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.9g", v);
        out += buf;
      }
    }
    out += '\n';
  }
  return out;
}

}  // namespace vmorph

#endif  // VMORPH_HEIGHT_GRID_HPP
