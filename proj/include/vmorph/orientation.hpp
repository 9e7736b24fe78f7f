#ifndef VMORPH_ORIENTATION_HPP
#define VMORPH_ORIENTATION_HPP

#include <array>
#include <cmath>
#include <limits>
#include <span>

#include <Eigen/Eigenvalues>

#include "vmorph/error.hpp"
#include "vmorph/mesh.hpp"

namespace vmorph {

/// Centroid and principal axes (columns of `axes`, descending variance).
struct PrincipalFrame {
  Vec3 centroid = Vec3::Zero();
  Mat3 axes = Mat3::Identity();
  Vec3 variances = Vec3::Zero();

  Vec3 axis(int k) const { return axes.col(k); }
};

/// Population (1/N) covariance about the centroid.
inline Mat3 covariance(std::span<const Vec3> points, Vec3* centroid_out = nullptr) {
  Vec3 c = Vec3::Zero();
  for (const Vec3& p : points) c += p;
  c /= static_cast<double>(points.size());
  Mat3 cov = Mat3::Zero();
  for (const Vec3& p : points) {
    const Vec3 d = p - c;
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(points.size());
  if (centroid_out) *centroid_out = c;
  return cov;
}

namespace detail {

/// Flips `v` so that `v[k] >= 0`; near-zero components defer to the first
/// non-negligible coordinate.
inline Vec3 sign_fix(Vec3 v, int k) {
  if (std::abs(v[k]) > 1e-9) return v[k] < 0 ? Vec3(-v) : v;
  for (int d = 0; d < 3; ++d)
    if (std::abs(v[d]) > 1e-9) return v[d] < 0 ? Vec3(-v) : v;
  return v;
}

}  // namespace detail

/// PCA frame of a point set. Axis 1 and 2 are signed towards world x and y,
/// axis 3 completes a right-handed basis.
inline PrincipalFrame principal_frame(std::span<const Vec3> points) {
  if (points.size() < 4) throw RankDeficiencyError("principal_frame needs at least 4 points");
  PrincipalFrame f;
  const Mat3 cov = covariance(points, &f.centroid);
  Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
  if (eig.info() != Eigen::Success) throw RankDeficiencyError("covariance eigen-decomposition failed");
  // Eigen returns ascending eigenvalues.
  const Vec3 lambda(eig.eigenvalues()[2], eig.eigenvalues()[1], eig.eigenvalues()[0]);
  const double tol = 1e-12 * std::max(lambda[0], std::numeric_limits<double>::min());
  if (lambda[2] <= tol) throw RankDeficiencyError("points are coplanar (zero variance axis)");
  if (lambda[0] - lambda[1] <= tol || lambda[1] - lambda[2] <= tol)
    throw RankDeficiencyError("repeated covariance eigenvalue; principal axes are not unique");
  const Vec3 a1 = detail::sign_fix(eig.eigenvectors().col(2), 0);
  const Vec3 a2 = detail::sign_fix(eig.eigenvectors().col(1), 1);
  f.axes.col(0) = a1;
  f.axes.col(1) = a2;
  f.axes.col(2) = a1.cross(a2).normalized();
  f.variances = lambda;
  return f;
}

inline PrincipalFrame principal_frame(const PointCloud& cloud) { return principal_frame(cloud.span()); }

/// Expresses `p` in the frame: longest axis -> x, shortest -> z, centroid at origin.
inline Vec3 to_frame(const PrincipalFrame& frame, const Vec3& p) { return frame.axes.transpose() * (p - frame.centroid); }

inline TriangleMesh orient_to_frame(const TriangleMesh& mesh, const PrincipalFrame& frame) {
  return transform_vertices(mesh, [&](const Vec3& p) { return to_frame(frame, p); });
}

}  // namespace vmorph

#endif  // VMORPH_ORIENTATION_HPP
