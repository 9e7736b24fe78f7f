#ifndef VMORPH_SYNTHETIC_HPP
#define VMORPH_SYNTHETIC_HPP

// Synthetic surfaces with known geometry: plates with a violin-like outline,
// skirts standing in for ribs, closed bodies, domes, spheres and planes.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <numeric>
#include <random>
#include <vector>

#include "vmorph/isolation.hpp"
#include "vmorph/mesh.hpp"

namespace vmorph::synthetic {

using HeightFn = std::function<double(double x, double y)>;
/// Boundary distance from the origin along direction `alpha` (radians).
using RadiusFn = std::function<double(double alpha)>;

/// Triangulates a stack of closed rings. Ring k may hold a single point (an
/// apex). Consecutive rings are zipped by angular fraction, every ring
/// starting at fraction 0 and running counter-clockwise.
inline TriangleMesh ring_mesh(const std::vector<std::vector<Vec3>>& rings, std::vector<std::vector<Index>>* ids = nullptr) {
  std::vector<Vec3> verts;
  std::vector<std::vector<Index>> idx;
  for (const auto& r : rings) {
    std::vector<Index> ri;
    for (const Vec3& p : r) {
      ri.push_back(static_cast<Index>(verts.size()));
      verts.push_back(p);
    }
    idx.push_back(std::move(ri));
  }
  std::vector<Face> faces;
  for (std::size_t k = 0; k + 1 < idx.size(); ++k) {
    const auto& a = idx[k];
    const auto& b = idx[k + 1];
    const std::size_t na = a.size(), nb = b.size();
    if (na == 1 && nb == 1) continue;
    if (na == 1) {
      for (std::size_t j = 0; j < nb; ++j) faces.push_back({a[0], b[j], b[(j + 1) % nb]});
      continue;
    }
    if (nb == 1) {
      for (std::size_t i = 0; i < na; ++i) faces.push_back({a[i], b[0], a[(i + 1) % na]});
      continue;
    }
    std::size_t i = 0, j = 0;
    while (i < na || j < nb) {
      const double fa = static_cast<double>(i + 1) / static_cast<double>(na);
      const double fb = static_cast<double>(j + 1) / static_cast<double>(nb);
      if (j >= nb || (i < na && fa < fb)) {
        faces.push_back({a[i % na], b[j % nb], a[(i + 1) % na]});
        ++i;
      } else {
        faces.push_back({a[i % na], b[j % nb], b[(j + 1) % nb]});
        ++j;
      }
    }
  }
  if (ids) *ids = std::move(idx);
  return TriangleMesh(std::move(verts), std::move(faces));
}

// ------------------------------------------------------------------ outlines

/// Violin-like outline: an ellipse (semi-axes a along x, b along y) pinched
/// at the waist around the y axis.
struct ViolinOutline {
  double a = 175.0;
  double b = 105.0;
  double pinch = 0.28;

  double operator()(double alpha) const {
    const double c = std::cos(alpha), s = std::sin(alpha);
    const double r = 1.0 / std::sqrt((c / a) * (c / a) + (s / b) * (s / b));
    return r * (1.0 - pinch * std::exp(-(c / 0.3) * (c / 0.3)));
  }
};

struct CircleOutline {
  double r = 100.0;
  double operator()(double) const { return r; }
};

/// Boundary radius of a star-shaped region given by an inside test, by
/// bisection along the ray.
inline double boundary_radius(const std::function<bool(double, double)>& inside, double alpha, double r_max) {
  double lo = 0.0, hi = r_max;
  const double c = std::cos(alpha), s = std::sin(alpha);
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (inside(mid * c, mid * s)) lo = mid;
    else hi = mid;
  }
  return lo;
}

// -------------------------------------------------------------------- plates

struct PlateSpec {
  RadiusFn outline = ViolinOutline{};
  HeightFn height = [](double, double) { return 0.0; };
  std::size_t rings = 60;      ///< radial rings between centre and rim
  std::size_t rim_points = 600;
};

inline double angle_of(std::size_t k, std::size_t n) {
  return 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
}

/// Rings of a plate: centre point, then rings at fractions j / rings of the
/// outline, the last one the rim. Inner rings get proportionally fewer points.
inline std::vector<std::vector<Vec3>> plate_rings(const PlateSpec& s) {
  std::vector<std::vector<Vec3>> rings;
  rings.push_back({Vec3(0.0, 0.0, s.height(0.0, 0.0))});
  for (std::size_t j = 1; j <= s.rings; ++j) {
    const double rho = static_cast<double>(j) / static_cast<double>(s.rings);
    const std::size_t n = std::max<std::size_t>(6, static_cast<std::size_t>(std::lround(rho * s.rim_points)));
    std::vector<Vec3> ring;
    for (std::size_t k = 0; k < n; ++k) {
      const double al = angle_of(k, n);
      const double r = rho * s.outline(al);
      const double x = r * std::cos(al), y = r * std::sin(al);
      ring.push_back({x, y, s.height(x, y)});
    }
    rings.push_back(std::move(ring));
  }
  return rings;
}

/// A plate surface whose contour is its rim ring.
inline PlateMesh make_plate(const PlateSpec& s, PlateSide side = PlateSide::sound_board) {
  std::vector<std::vector<Index>> ids;
  PlateMesh p;
  p.mesh = ring_mesh(plate_rings(s), &ids);
  p.contour = ids.back();
  p.side = side;
  p.source_index.resize(p.mesh.vertex_count());
  std::iota(p.source_index.begin(), p.source_index.end(), Index{0});
  p.inner_vertex_count = p.mesh.vertex_count() - p.contour.size();
  return p;
}

/// Mirror image in the plane z = 0 (face winding reversed).
inline TriangleMesh mirrored_z(const TriangleMesh& m) {
  std::vector<Vec3> v = m.vertices();
  for (Vec3& p : v) p.z() = -p.z();
  std::vector<Face> f = m.faces();
  for (Face& t : f) std::swap(t[1], t[2]);
  return TriangleMesh(std::move(v), std::move(f));
}

inline PlateMesh mirrored_plate(const PlateMesh& p) {
  PlateMesh out = p;
  out.mesh = mirrored_z(p.mesh);
  out.side = p.side == PlateSide::sound_board ? PlateSide::back : PlateSide::sound_board;
  return out;
}

/// Arching profile: `height` at the centre, flat and at `base` on the rim.
struct Arch {
  RadiusFn outline = ViolinOutline{};
  double base = 0.0;
  double height = 15.0;
  /// Optional groove running at `groove_offset` mm inside the rim.
  double groove_depth = 0.0;
  double groove_offset = 8.0;
  double groove_width = 3.0;

  double operator()(double x, double y) const {
    const double r = std::hypot(x, y);
    const double rim = outline(std::atan2(y, x));
    const double rho = std::min(1.0, r / rim);
    const double u = 1.0 - rho * rho;
    double z = base + height * u * u;
    if (groove_depth != 0.0) {
      const double d = (rim - r - groove_offset) / groove_width;
      z -= groove_depth * std::exp(-d * d);
    }
    return z;
  }
};

// -------------------------------------------------------- skirts and bodies

struct SkirtedPlate {
  TriangleMesh mesh;
  std::vector<char> plate_label;  ///< 1 for plate vertices (centre .. rim)
  std::vector<Index> rim;
};

/// Plate with an overhanging edge and a rib-like skirt below it: the rim
/// ring, an edge ring 3 mm lower, an inset ring and the skirt descending
/// `depth` mm. Every plate vertex is labelled.
inline SkirtedPlate make_skirted_plate(const PlateSpec& s, double depth = 15.0, double inset = 2.0) {
  auto rings = plate_rings(s);
  std::vector<std::vector<Index>> ids;
  const std::size_t plate_rings_n = rings.size();
  const auto rim = rings.back();
  auto shifted = [&](double dz, double in) {
    std::vector<Vec3> r;
    for (const Vec3& p : rim) {
      Vec3 h(p.x(), p.y(), 0.0);
      const double len = h.norm();
      const Vec3 q = h * ((len - in) / len);
      r.push_back({q.x(), q.y(), p.z() + dz});
    }
    return r;
  };
  rings.push_back(shifted(-3.0, 0.0));
  rings.push_back(shifted(-3.0, inset));
  const int steps = 4;
  for (int k = 1; k <= steps; ++k) rings.push_back(shifted(-3.0 - (depth - 3.0) * k / steps, inset));
  SkirtedPlate out;
  out.mesh = ring_mesh(rings, &ids);
  out.plate_label.assign(out.mesh.vertex_count(), 0);
  for (std::size_t r = 0; r < plate_rings_n; ++r)
    for (Index v : ids[r]) out.plate_label[v] = 1;
  out.rim = ids[plate_rings_n - 1];
  return out;
}

struct Body {
  TriangleMesh mesh;
  std::vector<char> top_label;     ///< sound-board plate vertices
  std::vector<char> bottom_label;  ///< back plate vertices
  std::vector<Index> top_rim, bottom_rim;
};

/// Closed body: a plate on top, its mirror image below, joined by an inset
/// rib wall behind an overhanging edge. `top` heights should be positive at
/// the rim.
inline Body make_body(const PlateSpec& top, double inset = 2.0, int rib_steps = 8) {
  auto upper = plate_rings(top);
  const auto rim = upper.back();
  auto ring_at = [&](double z, double in) {
    std::vector<Vec3> r;
    for (const Vec3& p : rim) {
      Vec3 h(p.x(), p.y(), 0.0);
      const double len = h.norm();
      const Vec3 q = h * ((len - in) / len);
      r.push_back({q.x(), q.y(), z});
    }
    return r;
  };
  const double z_rim = rim.front().z();
  const double z_edge = z_rim - 3.0;
  std::vector<std::vector<Vec3>> rings = upper;
  const std::size_t n_upper = rings.size();
  rings.push_back(ring_at(z_edge, 0.0));
  rings.push_back(ring_at(z_edge, inset));
  for (int k = 1; k < rib_steps; ++k) rings.push_back(ring_at(z_edge - 2.0 * z_edge * k / rib_steps, inset));
  rings.push_back(ring_at(-z_edge, inset));
  rings.push_back(ring_at(-z_edge, 0.0));
  const std::size_t first_lower = rings.size();
  for (std::size_t r = n_upper; r-- > 0;) {
    std::vector<Vec3> ring = upper[r];
    for (Vec3& p : ring) p.z() = -p.z();
    rings.push_back(std::move(ring));
  }
  std::vector<std::vector<Index>> ids;
  Body b;
  b.mesh = ring_mesh(rings, &ids);
  b.top_label.assign(b.mesh.vertex_count(), 0);
  b.bottom_label.assign(b.mesh.vertex_count(), 0);
  for (std::size_t r = 0; r < n_upper; ++r)
    for (Index v : ids[r]) b.top_label[v] = 1;
  for (std::size_t r = first_lower; r < rings.size(); ++r)
    for (Index v : ids[r]) b.bottom_label[v] = 1;
  b.top_rim = ids[n_upper - 1];
  b.bottom_rim = ids[first_lower];
  return b;
}

// ------------------------------------------------------------ other shapes

/// Upper hemisphere of radius r centred at the origin, apex first.
inline TriangleMesh make_hemisphere(double r, std::size_t rings = 40, std::size_t rim_points = 160) {
  std::vector<std::vector<Vec3>> st{{Vec3(0, 0, r)}};
  for (std::size_t j = 1; j <= rings; ++j) {
    const double th = 0.5 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(rings);
    const std::size_t n = std::max<std::size_t>(6, static_cast<std::size_t>(std::lround(rim_points * std::sin(th))));
    std::vector<Vec3> ring;
    for (std::size_t k = 0; k < n; ++k) {
      const double al = angle_of(k, n);
      ring.push_back({r * std::sin(th) * std::cos(al), r * std::sin(th) * std::sin(al), r * std::cos(th)});
    }
    st.push_back(std::move(ring));
  }
  return ring_mesh(st);
}

/// Closed sphere from latitude rings.
inline TriangleMesh make_sphere(double r, std::size_t rings = 60, std::size_t equator_points = 120) {
  std::vector<std::vector<Vec3>> st{{Vec3(0, 0, r)}};
  for (std::size_t j = 1; j < rings; ++j) {
    const double th = std::numbers::pi * static_cast<double>(j) / static_cast<double>(rings);
    const std::size_t n =
        std::max<std::size_t>(6, static_cast<std::size_t>(std::lround(equator_points * std::sin(th))));
    std::vector<Vec3> ring;
    for (std::size_t k = 0; k < n; ++k) {
      const double al = angle_of(k, n);
      ring.push_back({r * std::sin(th) * std::cos(al), r * std::sin(th) * std::sin(al), r * std::cos(th)});
    }
    st.push_back(std::move(ring));
  }
  st.push_back({Vec3(0, 0, -r)});
  return ring_mesh(st);
}

/// Regular nx x ny vertex grid with spacing h, heights from `z`.
inline TriangleMesh make_grid(std::size_t nx, std::size_t ny, double h, const HeightFn& z,
                              double x0 = 0.0, double y0 = 0.0) {
  std::vector<Vec3> v;
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      const double x = x0 + h * static_cast<double>(i), y = y0 + h * static_cast<double>(j);
      v.push_back({x, y, z(x, y)});
    }
  std::vector<Face> f;
  for (std::size_t j = 0; j + 1 < ny; ++j)
    for (std::size_t i = 0; i + 1 < nx; ++i) {
      const auto a = static_cast<Index>(j * nx + i);
      const auto b = a + 1;
      const auto c = static_cast<Index>(a + nx);
      const auto d = c + 1;
      f.push_back({a, b, d});
      f.push_back({a, d, c});
    }
  return TriangleMesh(std::move(v), std::move(f));
}

/// Random points on a plate surface: directions uniform in angle, radius
/// fraction sqrt-distributed (uniform over a disc).
inline std::vector<Vec3> sample_plate(const RadiusFn& outline, const HeightFn& height, std::size_t n,
                                      std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Vec3> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double al = 2.0 * std::numbers::pi * u(rng);
    const double r = std::sqrt(u(rng)) * outline(al);
    const double x = r * std::cos(al), y = r * std::sin(al);
    pts.push_back({x, y, height(x, y)});
  }
  return pts;
}

inline std::vector<Vec3> add_noise(std::vector<Vec3> pts, double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, sigma);
  for (Vec3& p : pts) p += Vec3(g(rng), g(rng), g(rng));
  return pts;
}

/// The plate with a central strip of width `w` along the x axis removed and
/// the halves rejoined. Points of the reduced plate map back by
/// y -> y + w/2 sign(y).
struct Reduction {
  RadiusFn outline;
  HeightFn height;
  double w = 5.0;

  double original_y(double y) const { return y + 0.5 * w * (y >= 0 ? 1.0 : -1.0); }

  PlateSpec reduced(const PlateSpec& base) const {
    PlateSpec s = base;
    const RadiusFn out = outline;
    const double half = 0.5 * w;
    auto inside = [out, half](double x, double y) {
      const double yo = y + half * (y >= 0 ? 1.0 : -1.0);
      return std::hypot(x, yo) <= out(std::atan2(yo, x));
    };
    double r_max = 0.0;
    for (int k = 0; k < 720; ++k) r_max = std::max(r_max, out(angle_of(static_cast<std::size_t>(k), 720)));
    s.outline = [inside, r_max](double alpha) { return boundary_radius(inside, alpha, 2.0 * r_max); };
    const HeightFn h = height;
    s.height = [h, half](double x, double y) { return h(x, y + half * (y >= 0 ? 1.0 : -1.0)); };
    return s;
  }
};

}  // namespace vmorph::synthetic

#endif  // VMORPH_SYNTHETIC_HPP
