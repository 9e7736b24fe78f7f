#ifndef VMORPH_SPLINE_HPP
#define VMORPH_SPLINE_HPP

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Sparse>

#include "vmorph/error.hpp"
#include "vmorph/mesh.hpp"

namespace vmorph {

/// Solves the cyclic tridiagonal system
///   a[i] x[i-1] + b[i] x[i] + c[i] x[i+1] = r[i]   (indices mod n)
/// by the Sherman-Morrison correction of the Thomas algorithm. n >= 3.
inline std::vector<double> solve_cyclic_tridiagonal(std::vector<double> a, std::vector<double> b,
                                                    std::vector<double> c, std::vector<double> r) {
  const std::size_t n = b.size();
  auto thomas = [n](const std::vector<double>& a, std::vector<double> b, const std::vector<double>& c,
                    std::vector<double> d) {
    for (std::size_t i = 1; i < n; ++i) {
      const double m = a[i] / b[i - 1];
      b[i] -= m * c[i - 1];
      d[i] -= m * d[i - 1];
    }
    std::vector<double> x(n);
    x[n - 1] = d[n - 1] / b[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = (d[i] - c[i] * x[i + 1]) / b[i];
    return x;
  };
  const double alpha = c[n - 1];  // corner (n-1, 0)
  const double beta = a[0];       // corner (0, n-1)
  const double gamma = -b[0];
  std::vector<double> bb = b;
  bb[0] = b[0] - gamma;
  bb[n - 1] = b[n - 1] - alpha * beta / gamma;
  a[0] = 0.0;
  c[n - 1] = 0.0;
  const auto x = thomas(a, bb, c, r);
  std::vector<double> u(n, 0.0);
  u[0] = gamma;
  u[n - 1] = alpha;
  const auto z = thomas(a, bb, c, u);
  const double fact = (x[0] + beta * x[n - 1] / gamma) / (1.0 + z[0] + beta * z[n - 1] / gamma);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] - fact * z[i];
  return out;
}

/// Interpolating periodic cubic spline through a closed point sequence,
/// parameterized by cumulative chord length.
class ClosedSpline {
 public:
  ClosedSpline() = default;

  explicit ClosedSpline(std::span<const Vec3> pts) {
    std::vector<Vec3> p;
    for (const Vec3& q : pts)
      if (p.empty() || distance(p.back(), q) > 1e-12) p.push_back(q);
    while (p.size() > 1 && distance(p.back(), p.front()) <= 1e-12) p.pop_back();
    if (p.size() < 3) throw InputError("closed spline needs at least 3 distinct points");
    pts_ = std::move(p);
    const std::size_t n = pts_.size();
    t_.resize(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) t_[i + 1] = t_[i] + distance(pts_[i], pts_[(i + 1) % n]);
    std::vector<double> h(n);
    for (std::size_t i = 0; i < n; ++i) h[i] = t_[i + 1] - t_[i];
    m_.assign(n, Vec3::Zero());
    for (int d = 0; d < 3; ++d) {
      std::vector<double> a(n), b(n), c(n), r(n);
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t ip = (i + 1) % n, im = (i + n - 1) % n;
        a[i] = h[im];
        b[i] = 2.0 * (h[im] + h[i]);
        c[i] = h[i];
        r[i] = 6.0 * ((pts_[ip][d] - pts_[i][d]) / h[i] - (pts_[i][d] - pts_[im][d]) / h[im]);
      }
      const auto sol = solve_cyclic_tridiagonal(a, b, c, r);
      for (std::size_t i = 0; i < n; ++i) m_[i][d] = sol[i];
    }
    build_arc_table();
  }

  /// Parameter period (closed chord length).
  double period() const { return t_.back(); }
  /// Arc length of the closed curve.
  double length() const { return arc_.back(); }
  const std::vector<Vec3>& knots() const { return pts_; }
  /// Parameter value of knot i.
  double knot_parameter(std::size_t i) const { return t_[i]; }

  Vec3 operator()(double t) const { return eval(t, 0); }
  Vec3 derivative(double t) const { return eval(t, 1); }

  /// Parameter at arc length `s` along the curve from knot 0.
  double parameter_at_arc_length(double s) const {
    const double L = length();
    s = std::fmod(s, L);
    if (s < 0) s += L;
    const auto it = std::upper_bound(arc_.begin(), arc_.end(), s);
    const std::size_t k = std::clamp<std::size_t>(static_cast<std::size_t>(it - arc_.begin()), 1, arc_.size() - 1);
    const double s0 = arc_[k - 1], s1 = arc_[k];
    const double u = s1 > s0 ? (s - s0) / (s1 - s0) : 0.0;
    return arc_t_[k - 1] + u * (arc_t_[k] - arc_t_[k - 1]);
  }

 private:
  static constexpr int kArcSamples = 32;

  Vec3 eval(double t, int order) const {
    const double T = period();
    t = std::fmod(t, T);
    if (t < 0) t += T;
    const std::size_t n = pts_.size();
    std::size_t i = static_cast<std::size_t>(std::upper_bound(t_.begin(), t_.end(), t) - t_.begin());
    i = std::clamp<std::size_t>(i, 1, n) - 1;
    const double h = t_[i + 1] - t_[i];
    const double A = (t_[i + 1] - t) / h, B = (t - t_[i]) / h;
    const Vec3& y0 = pts_[i];
    const Vec3& y1 = pts_[(i + 1) % n];
    const Vec3& m0 = m_[i];
    const Vec3& m1 = m_[(i + 1) % n];
    if (order == 0)
      return A * y0 + B * y1 + ((A * A * A - A) * m0 + (B * B * B - B) * m1) * (h * h / 6.0);
    return (y1 - y0) / h - (3.0 * A * A - 1.0) / 6.0 * h * m0 + (3.0 * B * B - 1.0) / 6.0 * h * m1;
  }

  void build_arc_table() {
    const std::size_t n = pts_.size();
    arc_.assign(1, 0.0);
    arc_t_.assign(1, 0.0);
    Vec3 prev = pts_[0];
    for (std::size_t i = 0; i < n; ++i)
      for (int k = 1; k <= kArcSamples; ++k) {
        const double t = t_[i] + (t_[i + 1] - t_[i]) * k / kArcSamples;
        const Vec3 q = k == kArcSamples ? pts_[(i + 1) % n] : eval(t, 0);
        arc_.push_back(arc_.back() + distance(prev, q));
        arc_t_.push_back(t);
        prev = q;
      }
  }

  std::vector<Vec3> pts_;
  std::vector<double> t_;
  std::vector<Vec3> m_;
  std::vector<double> arc_, arc_t_;
};

/// Periodic Whittaker smoother: minimizes |z - y|^2 + lambda |D2 z|^2 with
/// cyclic second differences, per coordinate.
inline std::vector<Vec3> whittaker_periodic(std::span<const Vec3> y, double lambda) {
  const auto n = static_cast<int>(y.size());
  if (n < 3 || lambda <= 0.0) return {y.begin(), y.end()};
  std::vector<Eigen::Triplet<double>> trip;
  // (I + lambda D^T D): D^T D for cyclic second differences is the cyclic
  // pentadiagonal stencil (1, -4, 6, -4, 1).
  const double st[5] = {1, -4, 6, -4, 1};
  for (int i = 0; i < n; ++i) {
    for (int k = -2; k <= 2; ++k) trip.emplace_back(i, ((i + k) % n + n) % n, lambda * st[k + 2]);
    trip.emplace_back(i, i, 1.0);
  }
  Eigen::SparseMatrix<double> A(n, n);
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(A);
  Eigen::MatrixXd rhs(n, 3);
  for (int i = 0; i < n; ++i) rhs.row(i) = y[static_cast<std::size_t>(i)].transpose();
  const Eigen::MatrixXd z = solver.solve(rhs);
  std::vector<Vec3> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = z.row(i).transpose();
  return out;
}

inline double rms_deviation(std::span<const Vec3> a, std::span<const Vec3> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += squared_distance(a[i], b[i]);
  return a.empty() ? 0.0 : std::sqrt(s / static_cast<double>(a.size()));
}

struct SmoothingResult {
  std::vector<Vec3> points;
  double lambda = 0.0;
  double rms = 0.0;
};

/// Strongest periodic smoothing whose RMS deviation from `y` stays within
/// `max_rms` (bisection on log lambda).
inline SmoothingResult smooth_within(std::span<const Vec3> y, double max_rms) {
  SmoothingResult best{{y.begin(), y.end()}, 0.0, 0.0};
  if (y.size() < 5) return best;
  double lo = -6.0, hi = 12.0;  // log10 lambda
  {
    auto z = whittaker_periodic(y, std::pow(10.0, hi));
    if (rms_deviation(z, y) <= max_rms) return {std::move(z), std::pow(10.0, hi), rms_deviation(z, y)};
  }
  for (int it = 0; it < 40; ++it) {
    const double mid = 0.5 * (lo + hi);
    auto z = whittaker_periodic(y, std::pow(10.0, mid));
    const double r = rms_deviation(z, y);
    if (r <= max_rms) {
      lo = mid;
      best = {std::move(z), std::pow(10.0, mid), r};
    } else {
      hi = mid;
    }
  }
  return best;
}

}  // namespace vmorph

#endif  // VMORPH_SPLINE_HPP
