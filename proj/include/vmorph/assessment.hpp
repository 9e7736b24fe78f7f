#ifndef VMORPH_ASSESSMENT_HPP
#define VMORPH_ASSESSMENT_HPP

#include <cmath>
#include <span>
#include <vector>

#include "vmorph/error.hpp"
#include "vmorph/isolation.hpp"
#include "vmorph/kdtree.hpp"
#include "vmorph/mesh.hpp"
#include "vmorph/registration.hpp"

namespace vmorph {

struct ErrorDistribution {
  std::vector<double> distances;  ///< per reference point (mm)
  std::vector<Vec3> positions;    ///< reference points, for heat maps
  double mean = 0.0;
  double threshold = 2.0;
  double fraction_above = 0.0;
  double bin_width = 0.1;
  std::vector<std::size_t> histogram;

  double fraction_above_threshold(double t) const {
    std::size_t c = 0;
    for (double d : distances) c += d > t;
    return distances.empty() ? 0.0 : static_cast<double>(c) / static_cast<double>(distances.size());
  }
};

/// Nearest-neighbour distance from every reference point s_i into `p`.
inline ErrorDistribution error_distribution(std::span<const Vec3> s, std::span<const Vec3> p, double threshold = 2.0,
                                            double bin_width = 0.1) {
  if (s.empty() || p.empty()) throw InputError("error_distribution: empty cloud");
  if (!(bin_width > 0.0)) throw InputError("histogram bin width must be positive");
  const KdTree tree(p);
  ErrorDistribution e;
  e.threshold = threshold;
  e.bin_width = bin_width;
  e.positions.assign(s.begin(), s.end());
  e.distances.reserve(s.size());
  double sum = 0.0;
  for (const Vec3& q : s) {
    const double d = std::sqrt(tree.nearest(q).squared_distance);
    e.distances.push_back(d);
    sum += d;
    const auto bin = static_cast<std::size_t>(d / bin_width);
    if (e.histogram.size() <= bin) e.histogram.resize(bin + 1, 0);
    ++e.histogram[bin];
  }
  e.mean = sum / static_cast<double>(s.size());
  e.fraction_above = e.fraction_above_threshold(threshold);
  return e;
}

/// Heuristic floor on D between independent samplings: a third of the mean
/// edge length.
inline double sampling_floor(const TriangleMesh& mesh) { return mean_edge_length(mesh) / 3.0; }

struct CrossComparison {
  RegistrationReport registration;
  ErrorDistribution distribution;
};

/// Registers plate `b` onto plate `a` without a scale parameter, after
/// applying fixed per-plate scales (about the origin).
inline CrossComparison cross_compare(const TriangleMesh& a, const TriangleMesh& b, double scale_a = 1.0,
                                     double scale_b = 1.0, double threshold = 2.0) {
  const TriangleMesh sa = scaled(a, scale_a);
  const TriangleMesh sb = scaled(b, scale_b);
  RegistrationOptions opt;
  opt.metric = Metric::point_to_point;
  opt.allow_scale = false;
  CrossComparison c;
  const auto init = moment_alignment(sa.vertices(), sb.vertices(), false);
  c.registration = register_clouds(sa.vertices(), sb.vertices(), opt, init);
  const auto moved = vmorph::apply(c.registration.transform, std::span<const Vec3>(sb.vertices()));
  c.distribution = error_distribution(sa.vertices(), moved, threshold);
  return c;
}

}  // namespace vmorph

#endif  // VMORPH_ASSESSMENT_HPP
