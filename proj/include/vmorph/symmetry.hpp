#ifndef VMORPH_SYMMETRY_HPP
#define VMORPH_SYMMETRY_HPP

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "vmorph/error.hpp"
#include "vmorph/height_grid.hpp"
#include "vmorph/isolation.hpp"
#include "vmorph/mesh.hpp"
#include "vmorph/orientation.hpp"
#include "vmorph/transform.hpp"

namespace vmorph {

enum class PlaneSource { two_meshes, two_contours, two_contours_masked };

inline std::string to_string(PlaneSource s) {
  switch (s) {
    case PlaneSource::two_meshes: return "two_meshes";
    case PlaneSource::two_contours: return "two_contours";
    case PlaneSource::two_contours_masked: return "two_contours_masked";
  }
  return "?";
}

inline PlaneSource parse_plane_source(std::string_view s) {
  if (s == "two_meshes") return PlaneSource::two_meshes;
  if (s == "two_contours") return PlaneSource::two_contours;
  if (s == "two_contours_masked") return PlaneSource::two_contours_masked;
  throw InputError("unknown plane configuration '" + std::string(s) + "'");
}

/// Plane {q : normal . q = offset} with unit normal in the +z hemisphere.
struct FittedPlane {
  Vec3 normal = Vec3::UnitZ();
  double offset = 0.0;
  double rms = 0.0;  ///< RMS orthogonal residual (mm)
  PlaneSource source = PlaneSource::two_meshes;

  /// Angle between the plane and the horizontal, degrees.
  double tilt_degrees() const { return rad2deg(std::acos(std::clamp(normal.z(), -1.0, 1.0))); }
};

/// Total-least-squares plane: normal along the smallest-variance direction.
inline FittedPlane fit_plane_orthogonal(std::span<const Vec3> points) {
  if (points.size() < 3) throw CollinearityError("plane fit needs at least 3 points");
  Vec3 c;
  const Mat3 cov = covariance(points, &c);
  Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
  const Vec3 ev = eig.eigenvalues();
  if (!(ev[2] > 0.0) || ev[1] <= 1e-12 * ev[2]) throw CollinearityError("points are collinear; plane is undefined");
  FittedPlane f;
  f.normal = detail::sign_fix(eig.eigenvectors().col(0).normalized(), 2);
  f.offset = f.normal.dot(c);
  double ss = 0.0;
  for (const Vec3& p : points) {
    const double r = f.normal.dot(p) - f.offset;
    ss += r * r;
  }
  f.rms = std::sqrt(ss / static_cast<double>(points.size()));
  return f;
}

/// Plane bisecting the acute angle between two roughly horizontal planes:
/// the locus where the signed distances to both planes cancel, i.e.
/// (n1 + n2) . q = o1 + o2, normalized.
inline FittedPlane average_symmetry_plane(const FittedPlane& upper, const FittedPlane& lower) {
  const double cos45 = std::sqrt(0.5);
  Vec3 n1 = upper.normal, n2 = lower.normal;
  double o1 = upper.offset, o2 = lower.offset;
  if (n1.z() < 0) {
    n1 = -n1;
    o1 = -o1;
  }
  if (n2.z() < 0) {
    n2 = -n2;
    o2 = -o2;
  }
  if (n1.z() < cos45 || n2.z() < cos45)
    throw NonAcuteError("plate planes must lie within 45 degrees of the horizontal");
  const Vec3 sum = n1 + n2;
  const double len = sum.norm();
  FittedPlane f;
  f.normal = sum / len;
  f.offset = (o1 + o2) / len;
  f.rms = 0.5 * (upper.rms + lower.rms);
  f.source = upper.source;
  return f;
}

/// Points used for the plane fit of one plate under a configuration. `mask`
/// lists plate-mesh vertices to drop from the contour (raised parts).
inline std::vector<Vec3> plane_fit_points(const PlateMesh& plate, PlaneSource source, const VertexMask& mask = {}) {
  std::vector<Vec3> pts;
  const auto& V = plate.mesh.vertices();
  if (source == PlaneSource::two_meshes) return V;
  mask.validate(plate.mesh.vertex_count());
  for (Index v : plate.contour)
    if (source == PlaneSource::two_contours || !mask.contains(v)) pts.push_back(V[v]);
  return pts;
}

inline FittedPlane fit_plate_plane(const PlateMesh& plate, PlaneSource source, const VertexMask& mask = {}) {
  FittedPlane f = fit_plane_orthogonal(plane_fit_points(plate, source, mask));
  f.source = source;
  return f;
}

/// Smallest rotation taking unit `n` to +z.
inline Mat3 rotation_to_z(const Vec3& n) {
  const Vec3 z = Vec3::UnitZ();
  const Vec3 axis = n.cross(z);
  const double s = axis.norm(), c = n.dot(z);
  if (s < 1e-15) return c > 0 ? Mat3::Identity() : Mat3(Eigen::AngleAxisd(std::numbers::pi, Vec3::UnitX()));
  return Eigen::AngleAxisd(std::atan2(s, c), axis / s).toRotationMatrix();
}

struct SymmetryFrame {
  Mat3 rotation = Mat3::Identity();  ///< horizontalizes the average plane
  double z_bar = 0.0;                ///< mean midpoint height after rotation (mm)
  std::size_t n_g = 0;               ///< jointly valid grid nodes
  FittedPlane upper, lower, average;  ///< in the input frame

  /// Input coordinates -> symmetry coordinates (average plane horizontal,
  /// mean midpoint at z = 0).
  Vec3 operator()(const Vec3& p) const { return rotation * p - z_bar * Vec3::UnitZ(); }
  TriangleMesh apply(const TriangleMesh& m) const { return transform_vertices(m, *this); }
};

struct SymmetryResult {
  SymmetryFrame frame;
  PlateMesh sound_board;  ///< in symmetry coordinates
  PlateMesh back;
  HeightGrid sb_grid;  ///< upper surface of the sound board, rotated, before the z_bar shift
  HeightGrid b_grid;   ///< lower surface of the back, same grid
};

inline PlateMesh transform_plate(const PlateMesh& plate, const SymmetryFrame& f) {
  PlateMesh out = plate;
  out.mesh = f.apply(plate.mesh);
  return out;
}

/// Average plane of symmetry of two co-registered plates and the offset
/// z_bar of the mean grid midpoint.
inline SymmetryResult build_symmetry_frame(const PlateMesh& sound_board, const PlateMesh& back,
                                           PlaneSource source = PlaneSource::two_contours_masked,
                                           const VertexMask& sb_mask = {}, const VertexMask& back_mask = {},
                                           double spacing = 1.0) {
  SymmetryResult r;
  SymmetryFrame& f = r.frame;
  f.upper = fit_plate_plane(sound_board, source, sb_mask);
  f.lower = fit_plate_plane(back, source, back_mask);
  f.average = average_symmetry_plane(f.upper, f.lower);
  f.rotation = rotation_to_z(f.average.normal);

  const auto rot = [&](const Vec3& p) { return Vec3(f.rotation * p); };
  const TriangleMesh sb = transform_vertices(sound_board.mesh, rot);
  const TriangleMesh bk = transform_vertices(back.mesh, rot);
  const GridSpec spec = grid_covering({&sb, &bk}, spacing);
  r.sb_grid = interpolate_grid(sb, spec, SurfaceSide::upper);
  r.b_grid = interpolate_grid(bk, spec, SurfaceSide::lower);
  double sum = 0.0;
  for (std::size_t k = 0; k < spec.size(); ++k)
    if (r.sb_grid.valid(k) && r.b_grid.valid(k)) {
      sum += 0.5 * (r.sb_grid.values[k] + r.b_grid.values[k]);
      ++f.n_g;
    }
  if (f.n_g < 100)
    throw InsufficientOverlapError("only " + std::to_string(f.n_g) + " grid nodes are valid on both plates (need 100)");
  f.z_bar = sum / static_cast<double>(f.n_g);
  r.sound_board = transform_plate(sound_board, f);
  r.back = transform_plate(back, f);
  return r;
}

struct PlaneAngleRow {
  PlaneSource source;
  double angle_degrees;  ///< average plane vs horizontal
  FittedPlane average;
};

/// Average-plane tilt under each fitting configuration.
inline std::vector<PlaneAngleRow> configuration_angles(const PlateMesh& sound_board, const PlateMesh& back,
                                                       const VertexMask& sb_mask = {},
                                                       const VertexMask& back_mask = {}) {
  std::vector<PlaneAngleRow> rows;
  for (PlaneSource s : {PlaneSource::two_meshes, PlaneSource::two_contours, PlaneSource::two_contours_masked}) {
    const FittedPlane avg =
        average_symmetry_plane(fit_plate_plane(sound_board, s, sb_mask), fit_plate_plane(back, s, back_mask));
    rows.push_back({s, avg.tilt_degrees(), avg});
  }
  return rows;
}

}  // namespace vmorph

#endif  // VMORPH_SYMMETRY_HPP
