#ifndef VMORPH_MORPHOLOGY_HPP
#define VMORPH_MORPHOLOGY_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vmorph/error.hpp"
#include "vmorph/height_grid.hpp"
#include "vmorph/isolation.hpp"
#include "vmorph/mesh.hpp"
#include "vmorph/slicing.hpp"
#include "vmorph/spline.hpp"

namespace vmorph {

// ---------------------------------------------------------------- contour lines

struct ContourLevel {
  double z = 0.0;
  std::vector<SectionPolyline> polylines;
};

/// Horizontal sections of a plate in symmetry coordinates. Levels are stored
/// in increasing z; the back's levels are negative.
struct ContourLineSet {
  PlateSide side = PlateSide::sound_board;
  double spacing = 2.0;
  double base = 0.0;
  std::vector<ContourLevel> levels;
};

struct ContourOptions {
  double spacing = 2.0;
  double range = 24.0;  ///< levels extend this far from the base level
  /// First level; by default the lattice level (multiple of spacing) closest
  /// to the symmetry plane that still meets the plate.
  std::optional<double> base;
};

inline ContourLineSet contour_lines(const TriangleMesh& plate, PlateSide side, const ContourOptions& opt = {},
                                    Diagnostics* diag = nullptr) {
  if (!(opt.spacing > 0.0)) throw InputError("contour spacing must be positive");
  ContourLineSet set;
  set.side = side;
  set.spacing = opt.spacing;
  if (plate.empty()) return set;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const Vec3& p : plate.vertices()) {
    lo = std::min(lo, p.z());
    hi = std::max(hi, p.z());
  }
  const bool up = side == PlateSide::sound_board;
  const double dir = up ? 1.0 : -1.0;
  set.base = opt.base ? *opt.base
                      : (up ? std::ceil(lo / opt.spacing) * opt.spacing : std::floor(hi / opt.spacing) * opt.spacing);
  if (hi - lo < opt.spacing) warn(diag, "plate spans less than one contour spacing");
  const auto steps = static_cast<long>(std::floor(opt.range / opt.spacing + 1e-9));
  for (long k = 0; k <= steps; ++k) {
    const double z = set.base + dir * static_cast<double>(k) * opt.spacing;
    auto polys = cross_section(plate, SectionPlane{Vec3::UnitZ(), z});
    if (polys.empty()) continue;
    set.levels.push_back({z, std::move(polys)});
  }
  std::sort(set.levels.begin(), set.levels.end(), [](const auto& a, const auto& b) { return a.z < b.z; });
  if (set.levels.empty()) warn(diag, "no contour level meets the plate");
  return set;
}

// -------------------------------------------------------------- asymmetry field

struct AsymmetryStats {
  std::size_t count = 0;
  std::size_t violations = 0;  ///< jointly valid nodes with sb <= z_bar or b >= z_bar
  double min = 0.0, max = 0.0, mean = 0.0, mean_abs = 0.0, max_abs = 0.0;
};

struct AsymmetryField {
  HeightGrid a;         ///< a_i = (sb_i - z_bar) - |b_i - z_bar|
  HeightGrid midpoint;  ///< 2 (z_i - z_bar), same nodes
  AsymmetryStats stats;
  double bin_width = 0.25;
  std::vector<std::size_t> histogram;  ///< counts of |a_i| per bin
};

inline AsymmetryField asymmetry_field(const HeightGrid& sb, const HeightGrid& b, double z_bar,
                                      Diagnostics* diag = nullptr, double bin_width = 0.25) {
  require_same_grid(sb, b);
  AsymmetryField f;
  f.a = HeightGrid(sb.spec);
  f.midpoint = HeightGrid(sb.spec);
  f.bin_width = bin_width;
  AsymmetryStats& s = f.stats;
  double sum = 0.0, sum_abs = 0.0;
  for (std::size_t k = 0; k < sb.values.size(); ++k) {
    if (!sb.valid(k) || !b.valid(k)) continue;
    const double up = sb.values[k] - z_bar;
    const double down = b.values[k] - z_bar;
    if (!(up > 0.0) || !(down < 0.0)) {
      ++s.violations;
      continue;
    }
    const double a = up - std::abs(down);
    const double zi = 0.5 * (sb.values[k] + b.values[k]);
    f.a.values[k] = a;
    f.midpoint.values[k] = 2.0 * (zi - z_bar);
    if (s.count == 0) s.min = s.max = a;
    s.min = std::min(s.min, a);
    s.max = std::max(s.max, a);
    s.max_abs = std::max(s.max_abs, std::abs(a));
    sum += a;
    sum_abs += std::abs(a);
    ++s.count;
    const auto bin = static_cast<std::size_t>(std::abs(a) / bin_width);
    if (f.histogram.size() <= bin) f.histogram.resize(bin + 1, 0);
    ++f.histogram[bin];
  }
  if (s.count) {
    s.mean = sum / static_cast<double>(s.count);
    s.mean_abs = sum_abs / static_cast<double>(s.count);
  }
  if (s.violations)
    warn(diag, std::to_string(s.violations) + " grid nodes have the sound board below or the back above the "
                                              "symmetry plane; excluded from the asymmetry field");
  return f;
}

// ---------------------------------------------------------------- channel trace

struct ChannelOptions {
  std::size_t stations = 400;
  double window = 15.0;      ///< inward search distance from the tangent point (mm)
  double smoothing_rms = 0.5;  ///< max RMS deviation of the smoothed trace (mm)
  /// Minima closer than this to either window end count as "at the edge";
  /// 0 selects half the mean edge length of the plate.
  double edge_tolerance = 0.0;
};

struct ChannelStation {
  double arc_length = 0.0;  ///< along the contour spline
  Vec3 tangent_point;
  Vec3 inward;     ///< horizontal unit vector into the plate
  Vec3 minimum;    ///< section point of extremal height in the window
  double offset = 0.0;  ///< horizontal distance from tangent point to minimum (channel-to-contour distance)
  bool at_window_edge = false;
  bool ambiguous = false;  ///< centroid and orientation rules disagree on the inward side
};

struct ChannelTrace {
  std::vector<ChannelStation> stations;
  std::vector<Vec3> smoothed;  ///< one per station
  double lambda = 0.0;
  double smoothing_rms = 0.0;
  std::size_t requested = 0;
  std::size_t skipped = 0;
  bool no_channel = false;
  double contour_length = 0.0;
};

namespace detail {

/// Signed area of the horizontal projection (positive: counter-clockwise).
inline double signed_area_xy(std::span<const Vec3> loop) {
  double a = 0.0;
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const Vec3& p = loop[i];
    const Vec3& q = loop[(i + 1) % loop.size()];
    a += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * a;
}

}  // namespace detail

/// Channel of minima near the plate contour. `plate` is in symmetry
/// coordinates; `contour` is the ordered closed contour of the plate.
inline ChannelTrace channel_of_minima(const TriangleMesh& plate, std::span<const Vec3> contour, PlateSide side,
                                      const ChannelOptions& opt = {}, Diagnostics* diag = nullptr) {
  if (opt.stations < 3) throw InputError("channel extraction needs at least 3 stations");
  if (!(opt.window > 0.0)) throw InputError("channel window must be positive");
  const ClosedSpline spline(contour);
  const double edge_tol = opt.edge_tolerance > 0.0 ? opt.edge_tolerance : 0.5 * mean_edge_length(plate);
  const double orient = detail::signed_area_xy(contour) >= 0.0 ? 1.0 : -1.0;
  Vec3 centroid = Vec3::Zero();
  for (const Vec3& p : plate.vertices()) centroid += p;
  centroid /= static_cast<double>(plate.vertex_count());
  const double zsign = side == PlateSide::sound_board ? 1.0 : -1.0;

  ChannelTrace tr;
  tr.requested = opt.stations;
  tr.contour_length = spline.length();
  std::size_t at_edge = 0;
  for (std::size_t k = 0; k < opt.stations; ++k) {
    ChannelStation st;
    st.arc_length = spline.length() * static_cast<double>(k) / static_cast<double>(opt.stations);
    const double t = spline.parameter_at_arc_length(st.arc_length);
    st.tangent_point = spline(t);
    Vec3 tan = spline.derivative(t);
    tan.z() = 0.0;
    if (tan.norm() == 0.0) {
      ++tr.skipped;
      warn(diag, "station " + std::to_string(k) + ": vertical tangent, skipped");
      continue;
    }
    tan.normalize();
    // Counter-clockwise loops have the interior on the left of the tangent.
    st.inward = orient * Vec3(-tan.y(), tan.x(), 0.0);
    Vec3 to_c = centroid - st.tangent_point;
    to_c.z() = 0.0;
    st.ambiguous = to_c.dot(st.inward) < 0.0;

    std::vector<Vec3> pts;
    for (const auto& pl : cross_section(plate, SectionPlane::through(tan, st.tangent_point)))
      pts.insert(pts.end(), pl.points.begin(), pl.points.end());
    bool found = false;
    double best_h = 0.0;
    for (const Vec3& p : pts) {
      Vec3 d = p - st.tangent_point;
      d.z() = 0.0;
      const double r = d.dot(st.inward);
      // Stay on the contour's side of the section: the plane also meets the
      // plate across its whole width.
      if (r < -edge_tol || r > opt.window) continue;
      const double h = zsign * p.z();
      if (!found || h < best_h) {
        found = true;
        best_h = h;
        st.minimum = p;
        st.offset = std::max(0.0, r);
      }
    }
    if (!found) {
      ++tr.skipped;
      warn(diag, "station " + std::to_string(k) + ": no section point in the search window, skipped");
      continue;
    }
    st.at_window_edge = st.offset <= edge_tol || st.offset >= opt.window - edge_tol;
    at_edge += st.at_window_edge;
    tr.stations.push_back(st);
  }
  if (tr.stations.empty()) {
    tr.no_channel = true;
    return tr;
  }
  tr.no_channel = 2 * at_edge > tr.stations.size();
  if (tr.no_channel) warn(diag, "more than half of the minima sit at the window edge; no channel detected");
  std::vector<Vec3> raw;
  for (const auto& st : tr.stations) raw.push_back(st.minimum);
  auto sm = smooth_within(raw, opt.smoothing_rms);
  tr.smoothed = std::move(sm.points);
  tr.lambda = sm.lambda;
  tr.smoothing_rms = sm.rms;
  return tr;
}

inline ChannelTrace channel_of_minima(const PlateMesh& plate, const ChannelOptions& opt = {},
                                      Diagnostics* diag = nullptr) {
  return channel_of_minima(plate.mesh, plate.contour_points(), plate.side, opt, diag);
}

}  // namespace vmorph

#endif  // VMORPH_MORPHOLOGY_HPP
