#ifndef VMORPH_REGISTRATION_HPP
#define VMORPH_REGISTRATION_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vmorph/error.hpp"
#include "vmorph/kdtree.hpp"
#include "vmorph/mesh.hpp"
#include "vmorph/orientation.hpp"
#include "vmorph/powell.hpp"
#include "vmorph/transform.hpp"

namespace vmorph {

/// Per-point unit normals of a reference cloud.
using NormalField = std::vector<Vec3>;

enum class Metric { point_to_point, point_to_point_sq, point_to_plane_sq };

inline std::string to_string(Metric m) {
  switch (m) {
    case Metric::point_to_point: return "point_to_point";
    case Metric::point_to_point_sq: return "point_to_point_sq";
    case Metric::point_to_plane_sq: return "point_to_plane_sq";
  }
  return "?";
}

inline Metric parse_metric(std::string_view s) {
  if (s == "point_to_point" || s == "D") return Metric::point_to_point;
  if (s == "point_to_point_sq" || s == "D2") return Metric::point_to_point_sq;
  if (s == "point_to_plane_sq" || s == "D2_plane") return Metric::point_to_plane_sq;
  throw InputError("unknown metric '" + std::string(s) + "'");
}

namespace detail {

inline void require_normals(std::span<const Vec3> s, const NormalField* normals) {
  if (normals == nullptr) throw MissingNormalError("point-to-plane metric needs reference normals");
  if (normals->size() != s.size())
    throw MissingNormalError("normal field has " + std::to_string(normals->size()) + " entries for " +
                             std::to_string(s.size()) + " reference points");
}

/// Sums of |d|, |d|^2 and (d.n)^2 over the reference points, accumulated in
/// index order.
struct ResidualSums {
  double abs = 0.0;
  double sq = 0.0;
  double plane = 0.0;
  std::size_t n = 0;
};

inline ResidualSums residual_sums(std::span<const Vec3> s, std::span<const Vec3> p_hat,
                                  std::span<const Index> nn, const NormalField* normals) {
  ResidualSums r;
  r.n = s.size();
  for (std::size_t i = 0; i < s.size(); ++i) {
    const Vec3& q = p_hat[nn[i]];
    const double d2 = squared_distance(s[i], q);
    r.abs += std::sqrt(d2);
    r.sq += d2;
    if (normals) {
      const Vec3 d = s[i] - q;
      const double t = d.dot((*normals)[i]);
      r.plane += t * t;
    }
  }
  return r;
}

}  // namespace detail

/// D: mean distance from each reference point s_i to its nearest p_j.
inline double point_to_point(std::span<const Vec3> s, std::span<const Vec3> p) {
  if (s.empty() || p.empty()) throw InputError("point_to_point: empty cloud");
  const KdTree tree(p);
  double sum = 0.0;
  for (const Vec3& q : s) sum += std::sqrt(tree.nearest(q).squared_distance);
  return sum / static_cast<double>(s.size());
}

/// D^2: mean squared nearest-neighbour distance.
inline double point_to_point_sq(std::span<const Vec3> s, std::span<const Vec3> p) {
  if (s.empty() || p.empty()) throw InputError("point_to_point_sq: empty cloud");
  const KdTree tree(p);
  double sum = 0.0;
  for (const Vec3& q : s) sum += tree.nearest(q).squared_distance;
  return sum / static_cast<double>(s.size());
}

/// D^2_plane: mean squared projection of the nearest-neighbour offset onto
/// the reference normal.
inline double point_to_plane_sq(std::span<const Vec3> s, std::span<const Vec3> p, const NormalField& normals) {
  if (s.empty() || p.empty()) throw InputError("point_to_plane_sq: empty cloud");
  detail::require_normals(s, &normals);
  const KdTree tree(p);
  double sum = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const Vec3 d = s[i] - tree.points()[tree.nearest(s[i]).index];
    const double t = d.dot(normals[i]);
    sum += t * t;
  }
  return sum / static_cast<double>(s.size());
}

/// Normals from the smallest-eigenvalue eigenvector of each point's k-nearest
/// neighbourhood (the point itself included). Normals start in the +z
/// hemisphere, then each is flipped to agree with the majority of its
/// neighbours.
inline NormalField estimate_normals(std::span<const Vec3> cloud, std::size_t k = 10, Diagnostics* diag = nullptr) {
  if (k < 3) throw InputError("normal estimation needs k >= 3");
  if (cloud.size() <= k) throw InputError("normal estimation needs more than k points");
  const KdTree tree(cloud);
  NormalField normals(cloud.size());
  std::vector<std::vector<Index>> hood(cloud.size());
  std::size_t degenerate = 0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto nb = tree.knn(cloud[i], k);
    std::vector<Vec3> pts;
    pts.reserve(nb.size());
    for (const Neighbor& n : nb) {
      pts.push_back(cloud[n.index]);
      hood[i].push_back(n.index);
    }
    const Mat3 cov = covariance(pts);
    Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
    const Vec3 ev = eig.eigenvalues();
    if (!(ev[2] > 0.0) || ev[1] <= 1e-12 * ev[2]) {
      ++degenerate;
      normals[i] = Vec3::UnitZ();
      continue;
    }
    Vec3 n = eig.eigenvectors().col(0).normalized();
    if (n.z() < 0.0 || (n.z() == 0.0 && detail::sign_fix(n, 2) != n)) n = -n;
    normals[i] = n;
  }
  if (degenerate > 0)
    warn(diag, std::to_string(degenerate) + " points have collinear neighbourhoods; normal set to +z");
  const NormalField seeded = normals;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    int agree = 0, disagree = 0;
    for (Index j : hood[i]) {
      if (j == i) continue;
      const double d = seeded[i].dot(seeded[j]);
      if (d > 0) ++agree;
      else if (d < 0) ++disagree;
    }
    if (disagree > agree) normals[i] = -seeded[i];
  }
  return normals;
}

struct MetricValues {
  double d = 0.0;         ///< D (mm)
  double rms = 0.0;       ///< sqrt(D^2) (mm)
  double rms_plane = std::numeric_limits<double>::quiet_NaN();  ///< sqrt(D^2_plane) (mm)
};

/// All metrics for `p` mapped by `t`, computed directly (transform p, index
/// it, query every s_i).
inline MetricValues evaluate_metrics(std::span<const Vec3> s, std::span<const Vec3> p, const SimilarityTransform& t,
                                     const NormalField* normals = nullptr) {
  if (s.empty() || p.empty()) throw InputError("evaluate_metrics: empty cloud");
  if (normals) detail::require_normals(s, normals);
  const auto p_hat = vmorph::apply(t, p);
  const KdTree tree(p_hat);
  std::vector<Index> nn(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) nn[i] = tree.nearest(s[i]).index;
  const auto r = detail::residual_sums(s, p_hat, nn, normals);
  const double n = static_cast<double>(r.n);
  MetricValues m;
  m.d = r.abs / n;
  m.rms = std::sqrt(r.sq / n);
  if (normals) m.rms_plane = std::sqrt(r.plane / n);
  return m;
}

struct RegistrationOptions {
  Metric metric = Metric::point_to_point;
  bool allow_scale = true;
  double ftol = 1e-5;
  std::size_t max_sweeps = 200;
};

struct RegistrationReport {
  std::string method;  ///< optimized metric or ICP variant
  SimilarityTransform transform;
  MetricValues metrics;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  bool converged = false;
  std::vector<double> history;
};

/// Objective evaluator for the Powell search. The spatial index is built once
/// on the moving cloud; each evaluation maps the reference points through the
/// inverse transform and queries them there. Similarity maps scale all
/// distances by K, so the nearest neighbour is the same as querying s_i among
/// the transformed p. The previous answer seeds each query.
class RegistrationObjective {
 public:
  RegistrationObjective(std::span<const Vec3> s, std::span<const Vec3> p, Metric metric, const NormalField* normals)
      : s_(s), p_(p), metric_(metric), normals_(normals), tree_(p), hint_(s.size(), 0) {
    if (s.empty() || p.empty()) throw InputError("registration: empty cloud");
    if (metric == Metric::point_to_plane_sq) detail::require_normals(s, normals);
    for (std::size_t i = 0; i < s.size(); ++i) hint_[i] = tree_.nearest(s[i]).index;
  }

  double operator()(const SimilarityTransform& t) {
    const AffineMap inv = AffineMap::inverse_of(t);
    const AffineMap fwd(t);
    double sum = 0.0;
    for (std::size_t i = 0; i < s_.size(); ++i) {
      const Index j = tree_.nearest(inv(s_[i]), hint_[i]).index;
      hint_[i] = j;
      const Vec3 d = s_[i] - fwd(p_[j]);
      switch (metric_) {
        case Metric::point_to_point: sum += std::sqrt(d.x() * d.x() + d.y() * d.y() + d.z() * d.z()); break;
        case Metric::point_to_point_sq: sum += d.x() * d.x() + d.y() * d.y() + d.z() * d.z(); break;
        case Metric::point_to_plane_sq: {
          const double q = d.dot((*normals_)[i]);
          sum += q * q;
          break;
        }
      }
    }
    return sum / static_cast<double>(s_.size());
  }

 private:
  std::span<const Vec3> s_, p_;
  Metric metric_;
  const NormalField* normals_;
  KdTree tree_;
  std::vector<Index> hint_;
};

namespace detail {

// Search variables: X in mm, angles in degrees, K in hundredths.
constexpr double kScaleUnit = 100.0;

inline Eigen::VectorXd pack(const SimilarityTransform& t, bool allow_scale) {
  Eigen::VectorXd u(allow_scale ? 7 : 6);
  u.head<3>() = t.translation;
  u.segment<3>(3) = t.angles;
  if (allow_scale) u[6] = t.scale * kScaleUnit;
  return u;
}

inline SimilarityTransform unpack(const Eigen::VectorXd& u, double frozen_scale) {
  SimilarityTransform t;
  t.translation = u.head<3>();
  t.angles = u.segment<3>(3);
  t.scale = u.size() == 7 ? u[6] / kScaleUnit : frozen_scale;
  return t;
}

inline void check_metric_order(const MetricValues& m) {
  constexpr double slack = 1e-12;
  if (m.d > m.rms + slack) throw ContractError("metric inequality D <= sqrt(D^2) violated");
  if (std::isfinite(m.rms_plane) && m.rms_plane > m.rms + slack)
    throw ContractError("metric inequality sqrt(D^2_plane) <= sqrt(D^2) violated");
}

}  // namespace detail

/// Similarity transform of `p` minimizing the chosen metric against the
/// reference `s`, by Powell's method from `init`.
inline RegistrationReport register_clouds(std::span<const Vec3> s, std::span<const Vec3> p,
                                          const RegistrationOptions& opt = {},
                                          const SimilarityTransform& init = SimilarityTransform::identity(),
                                          const NormalField* normals = nullptr) {
  init.validate();
  RegistrationObjective objective(s, p, opt.metric, normals);
  const double frozen = init.scale;
  auto f = [&](const Eigen::VectorXd& u) {
    const SimilarityTransform t = detail::unpack(u, frozen);
    if (!(t.scale > 0.0)) return std::numeric_limits<double>::infinity();
    return objective(t);
  };
  PowellOptions po;
  po.ftol = opt.ftol;
  po.max_sweeps = opt.max_sweeps;
  po.reset_every = 3 * 7;
  const PowellResult pr = powell_minimize(f, detail::pack(init, opt.allow_scale), po);

  RegistrationReport rep;
  rep.method = to_string(opt.metric);
  rep.transform = detail::unpack(pr.x, frozen);
  rep.metrics = evaluate_metrics(s, p, rep.transform, normals);
  rep.iterations = pr.sweeps;
  rep.evaluations = pr.evaluations;
  rep.converged = pr.converged;
  rep.history = pr.history;
  detail::check_metric_order(rep.metrics);
  return rep;
}

/// Starting transform from centroids, PCA axes and (optionally) the ratio of
/// RMS radii. Falls back to no rotation when either frame is not unique.
inline SimilarityTransform moment_alignment(std::span<const Vec3> s, std::span<const Vec3> p, bool allow_scale) {
  Vec3 cs, cp;
  const Mat3 ss = covariance(s, &cs);
  const Mat3 sp = covariance(p, &cp);
  SimilarityTransform t;
  t.scale = allow_scale ? std::sqrt(ss.trace() / sp.trace()) : 1.0;
  Mat3 r = Mat3::Identity();
  try {
    r = principal_frame(s).axes * principal_frame(p).axes.transpose();
  } catch (const RankDeficiencyError&) {
  }
  t.angles = angles_from_rotation(r);
  t.translation = cs / t.scale - t.rotation() * cp;
  return t;
}

struct IcpOptions {
  std::size_t sample = 10000;
  std::uint64_t seed = 0;
  std::size_t max_iterations = 100;
  double tolerance = 1e-9;  ///< stop when the update is below this (rad / mm)
};

/// Point-to-plane ICP with a fixed scale: rigid updates solved in closed form
/// from the linearized objective over a seeded random sample of the reference
/// points.
inline RegistrationReport icp_point_to_plane(std::span<const Vec3> s, std::span<const Vec3> p,
                                             const NormalField& normals, double fixed_scale,
                                             const SimilarityTransform& init_in = SimilarityTransform::identity(),
                                             const IcpOptions& opt = {}) {
  detail::require_normals(s, &normals);
  SimilarityTransform init = init_in;
  init.scale = fixed_scale;
  init.validate();

  std::vector<std::size_t> idx(s.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (opt.sample < s.size()) {
    std::mt19937_64 rng(opt.seed);
    for (std::size_t i = 0; i < opt.sample; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, s.size() - 1);
      std::swap(idx[i], idx[pick(rng)]);
    }
    idx.resize(opt.sample);
    std::sort(idx.begin(), idx.end());
  }

  const KdTree tree(p);
  Mat3 rot = init.rotation();
  Vec3 x = init.translation;
  const double k = fixed_scale;
  std::vector<Index> hint(idx.size());
  {
    const AffineMap inv = AffineMap::inverse_of(init);
    for (std::size_t i = 0; i < idx.size(); ++i) hint[i] = tree.nearest(inv(s[idx[i]])).index;
  }
  RegistrationReport rep;
  rep.method = "icp_point_to_plane";
  for (std::size_t it = 1; it <= opt.max_iterations; ++it) {
    rep.iterations = it;
    const AffineMap fwd(k * rot, k * x);
    const AffineMap inv(rot.transpose() / k, -(rot.transpose() * x));
    Eigen::Matrix<double, 6, 6> ata = Eigen::Matrix<double, 6, 6>::Zero();
    Eigen::Matrix<double, 6, 1> atb = Eigen::Matrix<double, 6, 1>::Zero();
    double err = 0.0;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const Vec3& si = s[idx[i]];
      const Index j = tree.nearest(inv(si), hint[i]).index;
      hint[i] = j;
      const Vec3 q = fwd(p[j]);
      const Vec3& n = normals[idx[i]];
      Eigen::Matrix<double, 6, 1> row;
      row.head<3>() = q.cross(n);
      row.tail<3>() = n;
      const double b = (si - q).dot(n);
      ata += row * row.transpose();
      atb += row * b;
      err += b * b;
    }
    rep.history.push_back(err / static_cast<double>(idx.size()));
    const Eigen::Matrix<double, 6, 1> delta = ata.ldlt().solve(atb);
    if (!delta.allFinite()) break;
    const Vec3 w = delta.head<3>();
    const Vec3 tv = delta.tail<3>();
    const double angle = w.norm();
    // Active rotation by w; the model's matrices act on coordinates, so the
    // update multiplies on the left.
    const Mat3 rd = angle > 0 ? Mat3(Eigen::AngleAxisd(angle, w / angle).toRotationMatrix()) : Mat3::Identity();
    rot = rd * rot;
    x = rd * x + tv / k;
    if (angle < opt.tolerance && tv.norm() < opt.tolerance) {
      rep.converged = true;
      break;
    }
  }
  rep.transform.angles = angles_from_rotation(rot);
  rep.transform.translation = x;
  rep.transform.scale = k;
  rep.metrics = evaluate_metrics(s, p, rep.transform, &normals);
  detail::check_metric_order(rep.metrics);
  return rep;
}

}  // namespace vmorph

#endif  // VMORPH_REGISTRATION_HPP
