#ifndef VMORPH_POWELL_HPP
#define VMORPH_POWELL_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace vmorph {

struct PowellOptions {
  double ftol = 1e-5;             ///< relative objective improvement per sweep
  std::size_t max_sweeps = 200;
  std::size_t reset_every = 0;    ///< 0: reset to the coordinate basis every 3n sweeps
  double line_tol = 1e-4;         ///< Brent relative tolerance along a direction
  double initial_step = 1.0;      ///< first bracketing step (in the scaled variables)
};

struct PowellResult {
  Eigen::VectorXd x;
  double f = 0.0;
  std::size_t sweeps = 0;
  std::size_t evaluations = 0;
  bool converged = false;
  /// Objective at the end of each sweep; non-increasing.
  std::vector<double> history;
};

namespace detail {

using Objective1D = std::function<double(double)>;

/// Golden-section bracketing of a minimum starting from [0, step].
inline void bracket(const Objective1D& f, double& ax, double& bx, double& cx, double& fa, double& fb, double& fc) {
  constexpr double gold = 1.618034, glimit = 100.0, tiny = 1e-20;
  fa = f(ax);
  fb = f(bx);
  if (fb > fa) {
    std::swap(ax, bx);
    std::swap(fa, fb);
  }
  cx = bx + gold * (bx - ax);
  fc = f(cx);
  while (fb > fc) {
    const double r = (bx - ax) * (fb - fc);
    const double q = (bx - cx) * (fb - fa);
    const double denom = 2.0 * std::copysign(std::max(std::abs(q - r), tiny), q - r);
    double u = bx - ((bx - cx) * q - (bx - ax) * r) / denom;
    const double ulim = bx + glimit * (cx - bx);
    double fu;
    if ((bx - u) * (u - cx) > 0.0) {
      fu = f(u);
      if (fu < fc) {
        ax = bx;
        bx = u;
        fa = fb;
        fb = fu;
        return;
      }
      if (fu > fb) {
        cx = u;
        fc = fu;
        return;
      }
      u = cx + gold * (cx - bx);
      fu = f(u);
    } else if ((cx - u) * (u - ulim) > 0.0) {
      fu = f(u);
      if (fu < fc) {
        bx = cx;
        cx = u;
        u = cx + gold * (cx - bx);
        fb = fc;
        fc = fu;
        fu = f(u);
      }
    } else if ((u - ulim) * (ulim - cx) >= 0.0) {
      u = ulim;
      fu = f(u);
    } else {
      u = cx + gold * (cx - bx);
      fu = f(u);
    }
    ax = bx;
    bx = cx;
    cx = u;
    fa = fb;
    fb = fc;
    fc = fu;
  }
}

/// Brent's parabolic-interpolation minimizer on a bracket (ax, bx, cx).
inline std::pair<double, double> brent(const Objective1D& f, double ax, double bx, double cx, double fbx, double tol) {
  constexpr int itmax = 100;
  constexpr double cgold = 0.3819660, zeps = 1e-12;
  double a = std::min(ax, cx), b = std::max(ax, cx);
  double x = bx, w = bx, v = bx;
  double fx = fbx, fw = fbx, fv = fbx;
  double d = 0.0, e = 0.0;
  for (int it = 0; it < itmax; ++it) {
    const double xm = 0.5 * (a + b);
    const double tol1 = tol * std::abs(x) + zeps;
    const double tol2 = 2.0 * tol1;
    if (std::abs(x - xm) <= tol2 - 0.5 * (b - a)) break;
    if (std::abs(e) > tol1) {
      double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::abs(q);
      const double etemp = e;
      e = d;
      if (std::abs(p) >= std::abs(0.5 * q * etemp) || p <= q * (a - x) || p >= q * (b - x)) {
        e = x >= xm ? a - x : b - x;
        d = cgold * e;
      } else {
        d = p / q;
        const double u = x + d;
        if (u - a < tol2 || b - u < tol2) d = std::copysign(tol1, xm - x);
      }
    } else {
      e = x >= xm ? a - x : b - x;
      d = cgold * e;
    }
    const double u = std::abs(d) >= tol1 ? x + d : x + std::copysign(tol1, d);
    const double fu = f(u);
    if (fu <= fx) {
      if (u >= x) a = x;
      else b = x;
      v = w;
      w = x;
      x = u;
      fv = fw;
      fw = fx;
      fx = fu;
    } else {
      if (u < x) a = u;
      else b = u;
      if (fu <= fw || w == x) {
        v = w;
        w = u;
        fv = fw;
        fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u;
        fv = fu;
      }
    }
  }
  return {x, fx};
}

}  // namespace detail

/// Powell's conjugate-direction method with Brent line searches. Terminates
/// when a full sweep improves the objective by less than `ftol` relative.
inline PowellResult powell_minimize(const std::function<double(const Eigen::VectorXd&)>& f, Eigen::VectorXd x0,
                                    const PowellOptions& opt = {}) {
  const auto n = x0.size();
  PowellResult res;
  std::size_t evals = 0;
  auto fe = [&](const Eigen::VectorXd& x) {
    ++evals;
    return f(x);
  };
  Eigen::MatrixXd dirs = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd x = std::move(x0);
  double fx = fe(x);
  res.history.push_back(fx);
  const std::size_t reset = opt.reset_every ? opt.reset_every : 3 * static_cast<std::size_t>(n);

  // Line minimization from x along dir; the objective value never increases.
  auto line_min = [&](Eigen::VectorXd& pt, const Eigen::VectorXd& dir, double& fpt) {
    const Eigen::VectorXd base = pt;
    const double fbase = fpt;
    detail::Objective1D g = [&](double t) { return t == 0.0 ? fbase : fe(base + t * dir); };
    double ax = 0.0, bx = opt.initial_step, cx, fa, fb, fc;
    detail::bracket(g, ax, bx, cx, fa, fb, fc);
    auto [t, ft] = detail::brent(g, ax, bx, cx, fb, opt.line_tol);
    if (ft < fbase) {
      pt = base + t * dir;
      fpt = ft;
    }
  };

  for (std::size_t sweep = 1; sweep <= opt.max_sweeps; ++sweep) {
    res.sweeps = sweep;
    if (sweep > 1 && (sweep - 1) % reset == 0) dirs = Eigen::MatrixXd::Identity(n, n);
    const Eigen::VectorXd x_start = x;
    const double f_start = fx;
    Eigen::Index ibig = 0;
    double del = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double before = fx;
      line_min(x, dirs.col(i), fx);
      if (before - fx > del) {
        del = before - fx;
        ibig = i;
      }
    }
    res.history.push_back(fx);
    if (2.0 * (f_start - fx) <= opt.ftol * (std::abs(f_start) + std::abs(fx)) + 1e-20) {
      res.converged = true;
      break;
    }
    // Try replacing the direction of largest decrease by the sweep's net move.
    const Eigen::VectorXd xt = 2.0 * x - x_start;
    const Eigen::VectorXd xi = x - x_start;
    const double ft = fe(xt);
    if (ft < f_start) {
      const double a = f_start - fx - del;
      const double b = f_start - ft;
      const double t = 2.0 * (f_start - 2.0 * fx + ft) * a * a - del * b * b;
      if (t < 0.0 && xi.norm() > 0.0) {
        line_min(x, xi, fx);
        res.history.back() = fx;
        dirs.col(ibig) = dirs.col(n - 1);
        dirs.col(n - 1) = xi;
      }
    }
  }
  res.x = std::move(x);
  res.f = fx;
  res.evaluations = evals;
  return res;
}

}  // namespace vmorph

#endif  // VMORPH_POWELL_HPP
