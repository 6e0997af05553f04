#pragma once

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "otb/domain.hpp"
#include "otb/errors.hpp"
#include "otb/kernels.hpp"
#include "otb/numerics.hpp"
#include "otb/rng.hpp"

namespace otb {

// A discretely observed path: times[k] is the clock of row k of points.
struct Path {
  std::vector<double> times;
  Mat points;  // (#times) x d

  void validate() const {
    if (times.empty() || static_cast<Eigen::Index>(times.size()) != points.rows())
      throw Error("path: times/points size mismatch");
    if (times.front() != 0.0) throw Error("path: times must start at 0");
    for (std::size_t k = 1; k < times.size(); ++k)
      if (!(times[k] > times[k - 1])) throw Error("path: times must increase strictly");
  }
};

/*
 * One-sided reflection at 0 of a scalar path:
 *   g(t) = f(t) - min(0, min_{s<=t} f(s)).
 * Exact on the grid: the running minimum is taken over the observed points.
 */
inline Path skorokhod_map_halfline(const Path& f) {
  f.validate();
  if (f.points.cols() != 1) throw DimensionMismatchError("skorokhod_map_halfline: 1-D only");
  Path g = f;
  double runmin = 0.0;
  for (Eigen::Index k = 0; k < f.points.rows(); ++k) {
    runmin = std::min(runmin, f.points(k, 0));
    g.points(k, 0) = f.points(k, 0) - runmin;
  }
  return g;
}

// Triangle-wave fold of a scalar onto [lo, hi].
inline double fold_interval(double x, double lo, double hi) {
  const double len = hi - lo;
  double z = std::fmod(x - lo, 2.0 * len);
  if (z < 0.0) z += 2.0 * len;
  if (z > len) z = 2.0 * len - z;
  return lo + z;
}

inline Vec fold_box(const Vec& x, const Domain& box) {
  if (box.kind() != DomainKind::box) throw Error("fold_box: domain is not a box");
  if (x.size() != box.dim()) throw DimensionMismatchError("fold_box: dimension mismatch");
  Vec out(x.size());
  for (int k = 0; k < box.dim(); ++k)
    out[k] = fold_interval(x[k], box.lower()[k], box.upper()[k]);
  return out;
}

/*
 * Discrete reflection into a convex domain by stepwise projection:
 *   g_0 = proj(f_0),   g_{k+1} = proj(g_k + (f_{k+1} - f_k)).
 * On the half-line this recursion reproduces skorokhod_map_halfline exactly.
 */
inline Path skorokhod_map_convex(const Path& f, const Domain& dom) {
  f.validate();
  if (f.points.cols() != dom.dim())
    throw DimensionMismatchError("skorokhod_map_convex: dimension mismatch");
  Path g = f;
  Vec cur = dom.project(f.points.row(0).transpose());
  g.points.row(0) = cur.transpose();
  for (Eigen::Index k = 1; k < f.points.rows(); ++k) {
    Vec step = (f.points.row(k) - f.points.row(k - 1)).transpose();
    cur = dom.project(cur + step);
    g.points.row(k) = cur.transpose();
  }
  return g;
}

enum class ReflectionScheme { automatic, fold, projection };

struct SdeConfig {
  double eta = 1.0;  // diffusion scale; 0 switches the noise off
  std::function<Vec(double, const Vec&)> drift;        // null: driftless
  Vec x0;                                              // fixed start
  std::function<Vec(RngStream&)> x0_sampler;           // optional initial law
  int n_steps = 1000;
  std::uint64_t seed = 0;
  ReflectionScheme scheme = ReflectionScheme::automatic;

  void validate(int dim) const {
    if (!(eta >= 0.0)) throw Error("sde: eta must be >= 0");
    if (n_steps < 1) throw Error("sde: n_steps must be >= 1");
    if (!x0_sampler && x0.size() != dim)
      throw DimensionMismatchError("sde: x0 dimension mismatch");
  }
};

/*
 * Endpoint sample of the reflected diffusion dX = b dt + sqrt(eta) dW with
 * normal reflection.  Driftless boxes use the per-step fold, which is exact
 * in law for Brownian increments; every other case uses the projection
 * recursion (weak error O(sqrt(dt))).  Path i draws only from stream i, so
 * the output is a pure function of (seed, n_paths, n_steps).
 */
inline Mat simulate_reflected_endpoints(const Domain& dom, const SdeConfig& cfg,
                                        int n_paths, double t_end) {
  cfg.validate(dom.dim());
  if (n_paths < 1) throw Error("simulate: n_paths must be >= 1");
  if (!(t_end > 0.0)) throw Error("simulate: t_end must be positive");
  const int d = dom.dim();
  const double dt = t_end / cfg.n_steps;
  const double sig = std::sqrt(cfg.eta * dt);
  const bool fold_ok = (dom.kind() == DomainKind::box) && !cfg.drift;
  const bool use_fold = (cfg.scheme == ReflectionScheme::automatic)
                            ? fold_ok
                            : cfg.scheme == ReflectionScheme::fold;
  if (use_fold && !fold_ok)
    throw Error("simulate: fold sampling needs a box domain and no drift");

  Mat out(n_paths, d);
  Vec x(d), z(d);
  for (int p = 0; p < n_paths; ++p) {
    RngStream rs(cfg.seed, static_cast<std::uint64_t>(p));
    x = cfg.x0_sampler ? cfg.x0_sampler(rs) : cfg.x0;
    if (static_cast<int>(x.size()) != d)
      throw DimensionMismatchError("simulate: sampled x0 dimension mismatch");
    if (!dom.contains(x)) throw Error("simulate: x0 outside the domain");
    if (use_fold) {
      for (int k = 0; k < cfg.n_steps; ++k)
        for (int c = 0; c < d; ++c)
          x[c] = fold_interval(x[c] + sig * rs.normal(), dom.lower()[c],
                               dom.upper()[c]);
    } else {
      double t = 0.0;
      for (int k = 0; k < cfg.n_steps; ++k) {
        for (int c = 0; c < d; ++c) z[c] = sig * rs.normal();
        if (cfg.drift) z += dt * cfg.drift(t, x);
        x = dom.project(x + z);
        t += dt;
      }
    }
    out.row(p) = x.transpose();
  }
  return out;
}

namespace detail {

// One conditioned step of the unit-interval bridge: sample z with density
// q(dt, u, z) q(t_rem, z, v) / q(dt + t_rem, u, v) by inverse CDF on a grid.
inline double bridge_step_unit(double eta, double u, double v, double dt,
                               double t_rem, RngStream& rng, double quad_tol,
                               double series_tol) {
  const double lden = log_interval_density(dt + t_rem, eta, u, v, series_tol);
  if (lden < std::log(1e-300))
    throw KernelUnderflowError("bridge: pinning density underflowed");
  const double sig = std::sqrt(eta * std::min(dt, t_rem));
  int n = std::max(2001, static_cast<int>(std::ceil(24.0 / sig)));
  if (n > 100001) throw NumericalError("bridge: time step too small for quadrature");
  if (n % 2 == 0) ++n;

  // fixed truncation level valid across the grid (worst case = farthest z)
  const int n1 = std::max(interval_truncation(eta * dt, u, u < 0.5 ? 1.0 : 0.0,
                                              series_tol),
                          interval_truncation(eta * t_rem, v, v < 0.5 ? 1.0 : 0.0,
                                              series_tol));
  const double h = 1.0 / (n - 1);
  std::vector<double> logr(static_cast<std::size_t>(n));
  double lmax = -kInf;
  for (int i = 0; i < n; ++i) {
    const double zi = i * h;
    const double l = log_interval_series(eta * dt, u, zi, n1) +
                     log_interval_series(eta * t_rem, zi, v, n1) - lden;
    logr[static_cast<std::size_t>(i)] = l;
    lmax = std::max(lmax, l);
  }
  std::vector<double> r(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    r[static_cast<std::size_t>(i)] = std::exp(logr[static_cast<std::size_t>(i)] - lmax);

  // Simpson check that the conditional density integrates to one
  double simp = r[0] + r[static_cast<std::size_t>(n - 1)];
  for (int i = 1; i < n - 1; ++i)
    simp += r[static_cast<std::size_t>(i)] * (i % 2 == 1 ? 4.0 : 2.0);
  simp *= h / 3.0;
  const double total = simp * std::exp(lmax);
  if (std::fabs(total - 1.0) > quad_tol)
    throw NumericalError("bridge: conditional density failed normalization check");

  // trapezoid CDF + linear inversion
  std::vector<double> cdf(static_cast<std::size_t>(n), 0.0);
  for (int i = 1; i < n; ++i)
    cdf[static_cast<std::size_t>(i)] =
        cdf[static_cast<std::size_t>(i - 1)] +
        0.5 * h * (r[static_cast<std::size_t>(i - 1)] + r[static_cast<std::size_t>(i)]);
  const double mass = cdf.back();
  const double target = rng.uniform01() * mass;
  auto it = std::lower_bound(cdf.begin(), cdf.end(), target);
  if (it == cdf.begin()) return 0.0;
  const auto hi_idx = static_cast<std::size_t>(it - cdf.begin());
  const double c0 = cdf[hi_idx - 1], c1 = cdf[hi_idx];
  const double w = (c1 > c0) ? (target - c0) / (c1 - c0) : 0.5;
  return (static_cast<double>(hi_idx - 1) + w) * h;
}

}  // namespace detail

/*
 * Reflected Brownian bridge on a box between pinned endpoints x (t=0) and y
 * (t=1), sampled at the given interior times by sequential conditioning.
 * Coordinates are independent, each handled on the rescaled unit interval.
 */
inline Path sample_rbm_bridge(const Domain& box, double eta, const Vec& x,
                              const Vec& y, const std::vector<double>& times,
                              RngStream& rng, double quad_tol = 1e-6,
                              double series_tol = 1e-14) {
  if (box.kind() != DomainKind::box) throw Error("bridge: domain must be a box");
  if (!(eta > 0.0)) throw Error("bridge: eta must be positive");
  if (x.size() != box.dim() || y.size() != box.dim())
    throw DimensionMismatchError("bridge: endpoint dimension mismatch");
  if (!box.contains(x) || !box.contains(y))
    throw Error("bridge: endpoints must lie in the box");
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!(times[k] > 0.0 && times[k] < 1.0))
      throw Error("bridge: sample times must lie strictly inside (0,1)");
    if (k > 0 && !(times[k] > times[k - 1]))
      throw Error("bridge: sample times must increase strictly");
  }

  const int d = box.dim();
  const auto m = static_cast<Eigen::Index>(times.size());
  Path out;
  out.times.reserve(static_cast<std::size_t>(m) + 2);
  out.times.push_back(0.0);
  for (double t : times) out.times.push_back(t);
  out.times.push_back(1.0);
  out.points.resize(m + 2, d);
  out.points.row(0) = x.transpose();
  out.points.row(m + 1) = y.transpose();

  for (int c = 0; c < d; ++c) {
    const double lo = box.lower()[c];
    const double len = box.upper()[c] - lo;
    const double eta_u = eta / (len * len);
    double u = (x[c] - lo) / len;
    const double v = (y[c] - lo) / len;
    double t_cur = 0.0;
    for (Eigen::Index k = 0; k < m; ++k) {
      const double t_next = times[static_cast<std::size_t>(k)];
      u = detail::bridge_step_unit(eta_u, u, v, t_next - t_cur, 1.0 - t_next, rng,
                                   quad_tol, series_tol);
      out.points(k + 1, c) = lo + len * u;
      t_cur = t_next;
    }
  }
  return out;
}

}  // namespace otb
