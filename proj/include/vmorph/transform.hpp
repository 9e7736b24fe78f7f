#ifndef VMORPH_TRANSFORM_HPP
#define VMORPH_TRANSFORM_HPP

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "vmorph/error.hpp"
#include "vmorph/mesh.hpp"

namespace vmorph {

inline double deg2rad(double d) { return d * (std::numbers::pi / 180.0); }
inline double rad2deg(double r) { return r * (180.0 / std::numbers::pi); }

/// Elementary rotations in the sign convention of the similarity model
/// (x -> [1 0 0; 0 c s; 0 -s c] etc.).
inline Mat3 rotation_x(double rad) {
  const double c = std::cos(rad), s = std::sin(rad);
  Mat3 m;
  m << 1, 0, 0, 0, c, s, 0, -s, c;
  return m;
}
inline Mat3 rotation_y(double rad) {
  const double c = std::cos(rad), s = std::sin(rad);
  Mat3 m;
  m << c, 0, -s, 0, 1, 0, s, 0, c;
  return m;
}
inline Mat3 rotation_z(double rad) {
  const double c = std::cos(rad), s = std::sin(rad);
  Mat3 m;
  m << c, s, 0, -s, c, 0, 0, 0, 1;
  return m;
}

/// Angles (degrees) such that `rotation_from_angles(angles) == m` for a
/// proper rotation `m`; theta2 is taken in [-90, 90].
inline Vec3 angles_from_rotation(const Mat3& m) {
  const double s2 = std::clamp(m(2, 0), -1.0, 1.0);
  return {rad2deg(std::atan2(-m(2, 1), m(2, 2))), rad2deg(std::asin(s2)), rad2deg(std::atan2(-m(1, 0), m(0, 0)))};
}

/// p' = K (R p + X) with R = Rz(theta3) Ry(theta2) Rx(theta1). Angles in
/// degrees, translation in mm. Note the scale multiplies the translated point.
struct SimilarityTransform {
  Vec3 translation = Vec3::Zero();
  Vec3 angles = Vec3::Zero();
  double scale = 1.0;

  static SimilarityTransform identity() { return {}; }

  Mat3 rotation() const {
    return rotation_z(deg2rad(angles[2])) * rotation_y(deg2rad(angles[1])) * rotation_x(deg2rad(angles[0]));
  }

  void validate() const {
    if (!(scale > 0.0) || !std::isfinite(scale)) throw InputError("similarity scale must be positive");
    if (!is_finite(translation) || !is_finite(angles)) throw InputError("similarity parameters must be finite");
  }

  /// Inverse map q -> p, again in (X, theta, K) form: K' = 1/K, R' = R^T,
  /// X' = -K R^T X.
  SimilarityTransform inverse() const {
    const Mat3 rt = rotation().transpose();
    return {-scale * (rt * translation), angles_from_rotation(rt), 1.0 / scale};
  }
};

/// Precomputed form for applying one transform to many points.
class AffineMap {
 public:
  explicit AffineMap(const SimilarityTransform& t)
      : a_(t.scale * t.rotation()), b_(t.scale * t.translation) {}
  AffineMap(const Mat3& a, const Vec3& b) : a_(a), b_(b) {}

  Vec3 operator()(const Vec3& p) const { return a_ * p + b_; }
  const Mat3& linear() const noexcept { return a_; }
  const Vec3& offset() const noexcept { return b_; }

  /// Exact algebraic inverse of a similarity map (A = K R).
  static AffineMap inverse_of(const SimilarityTransform& t) {
    const Mat3 rt = t.rotation().transpose();
    return {rt / t.scale, -(rt * t.translation)};
  }

 private:
  Mat3 a_;
  Vec3 b_;
};

inline Vec3 apply(const SimilarityTransform& t, const Vec3& p) { return t.scale * (t.rotation() * p + t.translation); }

inline std::vector<Vec3> apply(const SimilarityTransform& t, std::span<const Vec3> cloud) {
  t.validate();
  const AffineMap map(t);
  std::vector<Vec3> out;
  out.reserve(cloud.size());
  for (const Vec3& p : cloud) out.push_back(map(p));
  return out;
}

inline PointCloud apply(const SimilarityTransform& t, const PointCloud& cloud) {
  return PointCloud(vmorph::apply(t, cloud.span()));
}

inline TriangleMesh apply(const SimilarityTransform& t, const TriangleMesh& mesh) {
  t.validate();
  const AffineMap map(t);
  return transform_vertices(mesh, map);
}

/// Composition `a` after `b`: apply(compose(a, b), p) == apply(a, apply(b, p)).
inline SimilarityTransform compose(const SimilarityTransform& a, const SimilarityTransform& b) {
  const Mat3 ra = a.rotation();
  const Mat3 r = ra * b.rotation();
  return {ra * b.translation + a.translation / b.scale, angles_from_rotation(r), a.scale * b.scale};
}

}  // namespace vmorph

#endif  // VMORPH_TRANSFORM_HPP
