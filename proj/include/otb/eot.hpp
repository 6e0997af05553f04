#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "otb/errors.hpp"
#include "otb/kernels.hpp"
#include "otb/measure.hpp"
#include "otb/numerics.hpp"

namespace otb {

struct CostMatrix {
  Mat values;          // n x m
  std::string source;  // provenance tag for reports

  void check_shape(int n, int m) const {
    if (values.rows() != n || values.cols() != m)
      throw DimensionMismatchError("cost: shape disagrees with marginals");
  }
};

inline CostMatrix build_cost(const CostFamily& fam, double eta,
                             const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  if (mu.dim() != nu.dim()) throw DimensionMismatchError("build_cost: dim mismatch");
  CostMatrix c;
  c.values.resize(mu.size(), nu.size());
  for (int i = 0; i < mu.size(); ++i)
    for (int j = 0; j < nu.size(); ++j)
      c.values(i, j) =
          fam.cost(eta, mu.points.row(i).transpose(), nu.points.row(j).transpose());
  c.source = fam.id();
  return c;
}

inline CostMatrix build_cost(
    const std::function<double(const Vec&, const Vec&)>& f,
    const DiscreteMeasure& mu, const DiscreteMeasure& nu,
    std::string source = "custom") {
  CostMatrix c;
  c.values.resize(mu.size(), nu.size());
  for (int i = 0; i < mu.size(); ++i)
    for (int j = 0; j < nu.size(); ++j)
      c.values(i, j) = f(mu.points.row(i).transpose(), nu.points.row(j).transpose());
  c.source = std::move(source);
  return c;
}

inline CostMatrix quadratic_cost(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  return build_cost(
      [](const Vec& a, const Vec& b) { return 0.5 * (a - b).squaredNorm(); }, mu, nu,
      "quadratic");
}

/*
 * Entropic plan in Gibbs form: plan(i,j) = mu_i nu_j exp((u_i + v_j - c_ij)/eta).
 * The log-plan is the primary representation; the linear plan may underflow
 * for tiny eta and is provided for convenience.
 */
struct Coupling {
  Mat plan;
  Mat log_plan;
  Vec u, v;
  double eta = 0.0;
  long iterations = 0;
  double marginal_error = kInf;
  bool converged = false;
};

struct SinkhornOptions {
  double tol = 1e-9;
  long max_iter = 1000000;
  Vec u0, v0;  // optional warm start (empty = zeros)
};

/*
 * Log-domain Sinkhorn.  Each half-step is a soft (c,eta)-transform evaluated
 * with max-shifted log-sum-exp; the plan always stays in Gibbs form so the
 * scheduling only moves the dual pair (u, v).  Non-convergence inside
 * max_iter is reported through the flag, not an exception.
 */
inline Coupling sinkhorn(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                         const CostMatrix& cost, double eta,
                         const SinkhornOptions& opt = {}) {
  if (!(eta > 0.0)) throw Error("sinkhorn: eta must be positive");
  if (!(opt.tol > 0.0)) throw Error("sinkhorn: tol must be positive");
  const int n = mu.size(), m = nu.size();
  cost.check_shape(n, m);

  Vec logmu(n), lognu(m);
  for (int i = 0; i < n; ++i) logmu[i] = std::log(mu.weights[i]);
  for (int j = 0; j < m; ++j) lognu[j] = std::log(nu.weights[j]);

  Vec u = (opt.u0.size() == n) ? opt.u0 : Vec::Zero(n);
  Vec v = (opt.v0.size() == m) ? opt.v0 : Vec::Zero(m);

  Coupling out;
  out.eta = eta;
  std::vector<double> buf(static_cast<std::size_t>(std::max(n, m)));
  Mat lp(n, m);

  auto rebuild_log_plan = [&]() {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j)
        lp(i, j) = (u[i] + v[j] - cost.values(i, j)) / eta + logmu[i] + lognu[j];
  };

  long it = 0;
  double err = kInf;
  for (it = 1; it <= opt.max_iter; ++it) {
    // u-step: rows become exact
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < m; ++j)
        buf[static_cast<std::size_t>(j)] =
            (v[j] - cost.values(i, j)) / eta + lognu[j];
      u[i] = -eta * log_sum_exp(buf.data(), static_cast<std::size_t>(m));
    }
    // v-step: columns become exact
    for (int j = 0; j < m; ++j) {
      for (int i = 0; i < n; ++i)
        buf[static_cast<std::size_t>(i)] =
            (u[i] - cost.values(i, j)) / eta + logmu[i];
      v[j] = -eta * log_sum_exp(buf.data(), static_cast<std::size_t>(n));
    }
    rebuild_log_plan();
    err = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < m; ++j) buf[static_cast<std::size_t>(j)] = lp(i, j);
      err = std::max(err, std::fabs(std::exp(log_sum_exp(
                              buf.data(), static_cast<std::size_t>(m))) -
                          mu.weights[i]));
    }
    for (int j = 0; j < m; ++j) {
      for (int i = 0; i < n; ++i) buf[static_cast<std::size_t>(i)] = lp(i, j);
      err = std::max(err, std::fabs(std::exp(log_sum_exp(
                              buf.data(), static_cast<std::size_t>(n))) -
                          nu.weights[j]));
    }
    if (err < opt.tol) break;
  }
  rebuild_log_plan();
  out.u = u;
  out.v = v;
  out.log_plan = lp;
  out.plan = lp.array().exp().matrix();
  out.iterations = std::min(it, opt.max_iter);
  out.marginal_error = err;
  out.converged = err < opt.tol;
  return out;
}

// log of the plan density d(plan)/d(mu x nu) at entry (i,j)
inline double log_plan_density(const Coupling& cpl, const CostMatrix& cost, int i,
                               int j) {
  return (cpl.u[i] + cpl.v[j] - cost.values(i, j)) / cpl.eta;
}

/*
 * Cycle residual of the invariance satisfied by entropic plans:
 *   sum_i log rho(x_i, y_i) + (1/eta) sum_i [c(x_i,y_i) - c(x_i,y_{i+1})]
 *     - sum_i log rho(x_i, y_{i+1}),
 * where rho is the plan density and y_{k+1} = y_1.  In Gibbs form this
 * telescopes to zero, so the returned magnitude measures only arithmetic
 * noise plus any marginal-constraint slack baked into the duals.
 */
inline double cyclical_invariance_residual(
    const Coupling& cpl, const CostMatrix& cost,
    const std::vector<std::pair<int, int>>& tuple) {
  if (tuple.size() < 2) throw Error("cyclical residual: tuple needs k >= 2");
  const double log_floor = std::log(std::numeric_limits<double>::min());
  double s_diag = 0.0, s_shift = 0.0, s_cost = 0.0;
  const auto k = tuple.size();
  for (std::size_t a = 0; a < k; ++a) {
    const auto [i, j] = tuple[a];
    const int j_next = tuple[(a + 1) % k].second;
    const double ld = log_plan_density(cpl, cost, i, j);
    const double ls = log_plan_density(cpl, cost, i, j_next);
    if (ld < log_floor || ls < log_floor)
      throw ZeroEntryError("cyclical residual: plan density underflows on tuple");
    s_diag += ld;
    s_shift += ls;
    s_cost += cost.values(i, j) - cost.values(i, j_next);
  }
  return std::fabs(s_diag + s_cost / cpl.eta - s_shift);
}

// <c, plan> + eta * KL(plan || mu x nu), evaluated from the Gibbs form.
inline double transport_objective(const DiscreteMeasure& mu,
                                  const DiscreteMeasure& nu, const CostMatrix& cost,
                                  const Coupling& cpl) {
  double lin = 0.0, ent = 0.0;
  for (int i = 0; i < mu.size(); ++i)
    for (int j = 0; j < nu.size(); ++j) {
      const double p = cpl.plan(i, j);
      lin += cost.values(i, j) * p;
      ent += p * log_plan_density(cpl, cost, i, j);
    }
  return lin + cpl.eta * ent;
}

/*
 * Warm-started solves along a descending eta ladder; the duals of each level
 * initialize the next.  The cost matrix is rebuilt from the family at every
 * eta.
 */
inline std::vector<Coupling> plan_family(const DiscreteMeasure& mu,
                                         const DiscreteMeasure& nu,
                                         const CostFamily& fam,
                                         const std::vector<double>& etas,
                                         const SinkhornOptions& base_opt = {}) {
  if (etas.empty()) throw Error("plan_family: empty eta ladder");
  for (std::size_t k = 1; k < etas.size(); ++k)
    if (!(etas[k] < etas[k - 1]))
      throw Error("plan_family: etas must be strictly decreasing");
  std::vector<Coupling> out;
  out.reserve(etas.size());
  SinkhornOptions opt = base_opt;
  for (double eta : etas) {
    CostMatrix c = build_cost(fam, eta, mu, nu);
    Coupling cpl = sinkhorn(mu, nu, c, eta, opt);
    opt.u0 = cpl.u;
    opt.v0 = cpl.v;
    out.push_back(std::move(cpl));
  }
  return out;
}

}  // namespace otb
