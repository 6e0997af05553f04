#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "otb/eot.hpp"
#include "otb/errors.hpp"
#include "otb/measure.hpp"
#include "otb/numerics.hpp"

namespace otb {

struct SupportSet {
  std::vector<std::pair<int, int>> pairs;  // row-major order
  std::vector<int> x0, y0;                 // sorted index projections
  double tol = 0.0;                        // absolute mass threshold used

  bool in_x0(int i) const { return std::binary_search(x0.begin(), x0.end(), i); }
  bool in_y0(int j) const { return std::binary_search(y0.begin(), y0.end(), j); }
};

inline SupportSet support_set(const Mat& plan, double rel_tol = 1e-12) {
  const double top = plan.maxCoeff();
  if (!(top > 0.0)) throw Error("support_set: plan has no positive mass");
  SupportSet s;
  s.tol = rel_tol * top;
  for (int i = 0; i < plan.rows(); ++i)
    for (int j = 0; j < plan.cols(); ++j)
      if (plan(i, j) > s.tol) {
        s.pairs.emplace_back(i, j);
        s.x0.push_back(i);
        s.y0.push_back(j);
      }
  auto dedupe = [](std::vector<int>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  dedupe(s.x0);
  dedupe(s.y0);
  return s;
}

struct OtSolution {
  Mat plan;
  double value = 0.0;
  double eta = 0.0;  // unregularized problem marker
  SupportSet support;
};

namespace detail {

// Row-major accumulation; exact-zero terms do not perturb the partial sums,
// so two routines visiting the same nonzeros in the same order agree bitwise.
inline double plan_value(const Mat& plan, const Mat& cost) {
  double v = 0.0;
  for (int i = 0; i < plan.rows(); ++i)
    for (int j = 0; j < plan.cols(); ++j) v += plan(i, j) * cost(i, j);
  return v;
}

}  // namespace detail

/*
 * Exhaustive minimum over assignments for equal-size uniform marginals.
 * Permutations are visited in lexicographic order and ties keep the first
 * optimum, so the result is deterministic.
 */
inline OtSolution ot_bruteforce_permutations(const DiscreteMeasure& mu,
                                             const DiscreteMeasure& nu,
                                             const CostMatrix& cost) {
  const int n = mu.size();
  if (nu.size() != n)
    throw Error("permutation oracle: marginals must have equal size");
  if (n > 8) throw SizeLimitError("permutation oracle: n must be <= 8");
  if (!mu.is_uniform() || !nu.is_uniform())
    throw Error("permutation oracle: marginals must be uniform");
  cost.check_shape(n, n);

  const double w = mu.weights[0];
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> best_perm = perm;
  double best = kInf;
  do {
    double v = 0.0;
    for (int i = 0; i < n; ++i) v += w * cost.values(i, perm[static_cast<std::size_t>(i)]);
    if (v < best) {
      best = v;
      best_perm = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  OtSolution sol;
  sol.plan = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) sol.plan(i, best_perm[static_cast<std::size_t>(i)]) = w;
  sol.value = best;
  sol.support = support_set(sol.plan);
  return sol;
}

namespace detail {

struct SimplexState {
  int n = 0, m = 0;
  std::vector<char> basis;   // n*m flags
  std::vector<double> flow;  // n*m values, meaningful on basis arcs

  int id(int i, int j) const { return i * m + j; }
};

// Flows implied by a spanning-tree basis, recovered by peeling leaves; every
// value is a plain difference of marginal weights, with no solver roundoff.
inline void strip_flows(SimplexState& st, const Vec& a, const Vec& b) {
  const int n = st.n, m = st.m;
  std::vector<double> res(static_cast<std::size_t>(n + m));
  for (int i = 0; i < n; ++i) res[static_cast<std::size_t>(i)] = a[i];
  for (int j = 0; j < m; ++j) res[static_cast<std::size_t>(n + j)] = b[j];
  std::vector<int> deg(static_cast<std::size_t>(n + m), 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
      if (st.basis[static_cast<std::size_t>(st.id(i, j))]) {
        ++deg[static_cast<std::size_t>(i)];
        ++deg[static_cast<std::size_t>(n + j)];
      }
  std::vector<char> arc_done(static_cast<std::size_t>(n * m), 0);
  std::vector<int> stack;
  for (int v = 0; v < n + m; ++v)
    if (deg[static_cast<std::size_t>(v)] == 1) stack.push_back(v);
  int processed = 0;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    if (deg[static_cast<std::size_t>(v)] != 1) continue;
    int oi = -1, oj = -1;
    if (v < n) {
      for (int j = 0; j < m; ++j)
        if (st.basis[static_cast<std::size_t>(st.id(v, j))] &&
            !arc_done[static_cast<std::size_t>(st.id(v, j))]) {
          oi = v;
          oj = j;
          break;
        }
    } else {
      for (int i = 0; i < n; ++i)
        if (st.basis[static_cast<std::size_t>(st.id(i, v - n))] &&
            !arc_done[static_cast<std::size_t>(st.id(i, v - n))]) {
          oi = i;
          oj = v - n;
          break;
        }
    }
    if (oi < 0) continue;
    const double f = res[static_cast<std::size_t>(v)];
    st.flow[static_cast<std::size_t>(st.id(oi, oj))] = f;
    arc_done[static_cast<std::size_t>(st.id(oi, oj))] = 1;
    ++processed;
    res[static_cast<std::size_t>(v)] = 0.0;
    const int other = (v < n) ? n + oj : oi;
    res[static_cast<std::size_t>(other)] -= f;
    --deg[static_cast<std::size_t>(v)];
    --deg[static_cast<std::size_t>(other)];
    if (deg[static_cast<std::size_t>(other)] == 1) stack.push_back(other);
  }
  if (processed != n + m - 1)
    throw NumericalError("transport simplex: basis is not a spanning tree");
}

}  // namespace detail

/*
 * Transportation simplex with a north-west-corner start.  The entering arc is
 * the row-major first one with negative reduced cost and the leaving arc is
 * the row-major first minimizer of the ratio test (smallest-index pivoting,
 * which cannot cycle), so the optimal basis is reproducible.
 */
inline OtSolution ot_transport_simplex(const DiscreteMeasure& mu,
                                       const DiscreteMeasure& nu,
                                       const CostMatrix& cost) {
  const int n = mu.size(), m = nu.size();
  if (static_cast<long>(n) * m > 10000)
    throw SizeLimitError("transport simplex: instance exceeds 10^4 cells");
  cost.check_shape(n, m);

  detail::SimplexState st;
  st.n = n;
  st.m = m;
  st.basis.assign(static_cast<std::size_t>(n * m), 0);
  st.flow.assign(static_cast<std::size_t>(n * m), 0.0);

  {  // north-west corner basis: n+m-1 arcs tracing a staircase
    Vec a = mu.weights, b = nu.weights;
    int i = 0, j = 0;
    while (true) {
      st.basis[static_cast<std::size_t>(st.id(i, j))] = 1;
      const double t = std::min(a[i], b[j]);
      a[i] -= t;
      b[j] -= t;
      if (i == n - 1 && j == m - 1) break;
      if (a[i] == 0.0 && i < n - 1)
        ++i;
      else
        ++j;
    }
  }
  detail::strip_flows(st, mu.weights, nu.weights);

  const double scale = cost.values.cwiseAbs().maxCoeff();
  const double tol_piv = 1e-12 * (1.0 + scale);
  std::vector<double> u(static_cast<std::size_t>(n)), v(static_cast<std::size_t>(m));
  std::vector<int> parent(static_cast<std::size_t>(n + m));
  std::vector<char> seen(static_cast<std::size_t>(n + m));

  const long max_pivots = 200000;
  for (long pivot = 0;; ++pivot) {
    if (pivot >= max_pivots)
      throw NumericalError("transport simplex: pivot limit exceeded");

    // tree potentials: u_i + v_j = c_ij on basis arcs
    std::fill(seen.begin(), seen.end(), 0);
    std::vector<int> queue{0};
    seen[0] = 1;
    u[0] = 0.0;
    while (!queue.empty()) {
      const int node = queue.back();
      queue.pop_back();
      if (node < n) {
        for (int j = 0; j < m; ++j)
          if (st.basis[static_cast<std::size_t>(st.id(node, j))] &&
              !seen[static_cast<std::size_t>(n + j)]) {
            v[static_cast<std::size_t>(j)] =
                cost.values(node, j) - u[static_cast<std::size_t>(node)];
            seen[static_cast<std::size_t>(n + j)] = 1;
            queue.push_back(n + j);
          }
      } else {
        const int j = node - n;
        for (int i = 0; i < n; ++i)
          if (st.basis[static_cast<std::size_t>(st.id(i, j))] &&
              !seen[static_cast<std::size_t>(i)]) {
            u[static_cast<std::size_t>(i)] =
                cost.values(i, j) - v[static_cast<std::size_t>(j)];
            seen[static_cast<std::size_t>(i)] = 1;
            queue.push_back(i);
          }
      }
    }

    int ei = -1, ej = -1;
    for (int i = 0; i < n && ei < 0; ++i)
      for (int j = 0; j < m; ++j)
        if (!st.basis[static_cast<std::size_t>(st.id(i, j))] &&
            cost.values(i, j) - u[static_cast<std::size_t>(i)] -
                    v[static_cast<std::size_t>(j)] <
                -tol_piv) {
          ei = i;
          ej = j;
          break;
        }
    if (ei < 0) break;  // all reduced costs nonnegative

    // unique tree path from x_ei to y_ej; arcs at odd depth carry -theta
    std::fill(seen.begin(), seen.end(), 0);
    std::fill(parent.begin(), parent.end(), -1);
    std::vector<int> bfs{ei};
    seen[static_cast<std::size_t>(ei)] = 1;
    for (std::size_t h = 0; h < bfs.size(); ++h) {
      const int node = bfs[h];
      if (node < n) {
        for (int j = 0; j < m; ++j)
          if (st.basis[static_cast<std::size_t>(st.id(node, j))] &&
              !seen[static_cast<std::size_t>(n + j)]) {
            seen[static_cast<std::size_t>(n + j)] = 1;
            parent[static_cast<std::size_t>(n + j)] = node;
            bfs.push_back(n + j);
          }
      } else {
        const int j = node - n;
        for (int i = 0; i < n; ++i)
          if (st.basis[static_cast<std::size_t>(st.id(i, j))] &&
              !seen[static_cast<std::size_t>(i)]) {
            seen[static_cast<std::size_t>(i)] = 1;
            parent[static_cast<std::size_t>(i)] = n + j;
            bfs.push_back(i);
          }
      }
    }
    if (!seen[static_cast<std::size_t>(n + ej)])
      throw NumericalError("transport simplex: basis tree is disconnected");

    std::vector<std::pair<int, int>> minus_arcs;
    for (int node = n + ej; parent[static_cast<std::size_t>(node)] >= 0;) {
      const int par = parent[static_cast<std::size_t>(node)];
      const int ai = (node < n) ? node : par;
      const int aj = (node < n) ? par - n : node - n;
      if (node >= n) minus_arcs.emplace_back(ai, aj);  // arc into a y-node: -theta
      node = par;
    }
    double theta = kInf;
    for (const auto& [ai, aj] : minus_arcs)
      theta = std::min(theta, st.flow[static_cast<std::size_t>(st.id(ai, aj))]);
    std::pair<int, int> leave{-1, -1};
    for (const auto& arc : minus_arcs)
      if (st.flow[static_cast<std::size_t>(st.id(arc.first, arc.second))] == theta)
        if (leave.first < 0 || arc < leave) leave = arc;
    if (leave.first < 0)
      throw NumericalError("transport simplex: ratio test found no leaving arc");

    st.basis[static_cast<std::size_t>(st.id(leave.first, leave.second))] = 0;
    st.basis[static_cast<std::size_t>(st.id(ei, ej))] = 1;
    detail::strip_flows(st, mu.weights, nu.weights);
  }

  OtSolution sol;
  sol.plan = Mat::Zero(n, m);
  double value = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
      if (st.basis[static_cast<std::size_t>(st.id(i, j))]) {
        const double f = st.flow[static_cast<std::size_t>(st.id(i, j))];
        sol.plan(i, j) = f;
        value += f * cost.values(i, j);
      }
  sol.value = value;
  sol.support = support_set(sol.plan);
  return sol;
}

inline OtSolution exact_ot(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                           const CostMatrix& cost) {
  if (static_cast<long>(mu.size()) * nu.size() > 10000)
    throw SizeLimitError("exact_ot: instance exceeds 10^4 cells");
  if (mu.size() == nu.size() && mu.size() <= 8 && mu.is_uniform() && nu.is_uniform())
    return ot_bruteforce_permutations(mu, nu, cost);
  return ot_transport_simplex(mu, nu, cost);
}

struct DualPotentials {
  Vec psi;    // on x0 indices; NaN elsewhere
  Vec psi_c;  // on y0 indices; NaN elsewhere
  int components = 0;
  std::vector<int> anchors;     // smallest x index per component
  std::vector<double> shifts;   // per-component additive completion
  bool shifted = false;
  double dual_value = 0.0;
  double max_violation = 0.0;   // max of -psi_i + psi_c_j - c_ij over x0 x y0
};

/*
 * Complementary-slackness potentials: equality on every support pair, psi = 0
 * anchored at the smallest x index of each connected component of the support
 * graph.  When the graph is disconnected the zero anchors may violate
 * feasibility on cross-component pairs; in that case each component is moved
 * by a constant (both psi and psi_c together, which keeps support equalities
 * and the dual value intact) chosen by shortest paths on the tightest
 * cross-component slack.  Inconsistent support equalities or a negative slack
 * cycle mean the plan was not optimal.
 */
inline DualPotentials kantorovich_potentials(const OtSolution& sol,
                                             const CostMatrix& cost) {
  const int n = static_cast<int>(sol.plan.rows());
  const int m = static_cast<int>(sol.plan.cols());
  cost.check_shape(n, m);
  const auto& supp = sol.support;
  if (supp.pairs.empty()) throw Error("potentials: empty support");

  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n + m));
  for (const auto& [i, j] : supp.pairs) {
    adj[static_cast<std::size_t>(i)].push_back(n + j);
    adj[static_cast<std::size_t>(n + j)].push_back(i);
  }

  DualPotentials d;
  d.psi = Vec::Constant(n, kNaN);
  d.psi_c = Vec::Constant(m, kNaN);
  std::vector<int> comp(static_cast<std::size_t>(n + m), -1);
  const double eq_tol = 1e-9;

  for (int start : supp.x0) {
    if (comp[static_cast<std::size_t>(start)] >= 0) continue;
    const int c_id = d.components++;
    d.anchors.push_back(start);
    comp[static_cast<std::size_t>(start)] = c_id;
    d.psi[start] = 0.0;
    std::vector<int> queue{start};
    for (std::size_t h = 0; h < queue.size(); ++h) {
      const int node = queue[h];
      for (int nb : adj[static_cast<std::size_t>(node)]) {
        const int i = (node < n) ? node : nb;
        const int j = (node < n) ? nb - n : node - n;
        const double want = (node < n) ? cost.values(i, j) + d.psi[i]
                                       : d.psi_c[j] - cost.values(i, j);
        double& slot = (node < n) ? d.psi_c[j] : d.psi[i];
        if (comp[static_cast<std::size_t>(nb)] < 0) {
          comp[static_cast<std::size_t>(nb)] = c_id;
          slot = want;
          queue.push_back(nb);
        } else if (std::fabs(slot - want) > eq_tol * (1.0 + std::fabs(slot))) {
          throw Error("potentials: support equalities are inconsistent; "
                      "the plan is not an exact optimum");
        }
      }
    }
  }
  d.shifts.assign(static_cast<std::size_t>(d.components), 0.0);

  auto violation = [&]() {
    double worst = -kInf;
    for (int i : supp.x0)
      for (int j : supp.y0)
        worst = std::max(worst, -d.psi[i] + d.psi_c[j] - cost.values(i, j));
    return worst;
  };

  if (d.components > 1 && violation() > eq_tol) {
    // tightest slack between components: s_B - s_A <= w(A,B)
    const int p = d.components;
    Mat w = Mat::Constant(p, p, kInf);
    for (int i : supp.x0)
      for (int j : supp.y0) {
        const int a = comp[static_cast<std::size_t>(i)];
        const int b = comp[static_cast<std::size_t>(n + j)];
        if (a == b) continue;
        w(a, b) = std::min(w(a, b), cost.values(i, j) + d.psi[i] - d.psi_c[j]);
      }
    std::vector<double> dist(static_cast<std::size_t>(p), kInf);
    dist[0] = 0.0;  // component holding the smallest support x index
    for (int round = 0; round < p; ++round) {
      bool changed = false;
      for (int a = 0; a < p; ++a)
        for (int b = 0; b < p; ++b)
          if (std::isfinite(w(a, b)) && std::isfinite(dist[static_cast<std::size_t>(a)]) &&
              dist[static_cast<std::size_t>(a)] + w(a, b) <
                  dist[static_cast<std::size_t>(b)] - 1e-15) {
            dist[static_cast<std::size_t>(b)] =
                dist[static_cast<std::size_t>(a)] + w(a, b);
            changed = true;
          }
      if (round == p - 1 && changed) {
        std::ostringstream os;
        os << "potentials: no feasible completion across " << p
           << " support components (anchors";
        for (int a : d.anchors) os << ' ' << a;
        os << "); the plan is not an exact optimum";
        throw Error(os.str());
      }
      if (!changed) break;
    }
    for (int c = 0; c < p; ++c)
      if (!std::isfinite(dist[static_cast<std::size_t>(c)]))
        throw Error("potentials: support component unreachable in slack graph");
    for (int i : supp.x0) d.psi[i] += dist[static_cast<std::size_t>(comp[static_cast<std::size_t>(i)])];
    for (int j : supp.y0)
      d.psi_c[j] += dist[static_cast<std::size_t>(comp[static_cast<std::size_t>(n + j)])];
    for (int c = 0; c < p; ++c) {
      d.shifts[static_cast<std::size_t>(c)] = dist[static_cast<std::size_t>(c)];
      if (dist[static_cast<std::size_t>(c)] != 0.0) d.shifted = true;
    }
  }

  d.max_violation = violation();
  if (d.max_violation > eq_tol)
    throw Error("potentials: completion left an infeasible pair");

  double dual = 0.0;
  for (int j : supp.y0) dual += d.psi_c[j] * sol.plan.col(j).sum();
  for (int i : supp.x0) dual -= d.psi[i] * sol.plan.row(i).sum();
  d.dual_value = dual;
  if (std::fabs(dual - sol.value) > 1e-9 * (1.0 + std::fabs(sol.value)))
    throw NumericalError("potentials: dual value does not match the optimum");
  return d;
}

// pointwise largest cost-plus-psi over the x support
inline Vec c_transform(const Vec& psi, const Mat& cost,
                       const std::vector<int>& x_support) {
  if (x_support.empty()) throw Error("c_transform: empty x support");
  for (int i : x_support)
    if (!std::isfinite(psi[i]))
      throw Error("c_transform: psi must be finite on the x support");
  Vec out(cost.cols());
  for (int j = 0; j < cost.cols(); ++j) {
    double best = -kInf;
    for (int i : x_support) best = std::max(best, cost(i, j) + psi[i]);
    out[j] = best;
  }
  return out;
}

inline Vec c_transform(const Vec& psi, const Mat& cost) {
  std::vector<int> all(static_cast<std::size_t>(cost.rows()));
  std::iota(all.begin(), all.end(), 0);
  return c_transform(psi, cost, all);
}

// lower envelope partner of c_transform; recovers psi on x0 from psi_c
inline Vec c_transform_inverse(const Vec& psi_c, const Mat& cost,
                               const std::vector<int>& y_support) {
  if (y_support.empty()) throw Error("c_transform_inverse: empty y support");
  Vec out(cost.rows());
  for (int i = 0; i < cost.rows(); ++i) {
    double best = kInf;
    for (int j : y_support) best = std::min(best, psi_c[j] - cost(i, j));
    out[i] = best;
  }
  return out;
}

inline double rate_dual(int i, int j, const CostMatrix& cost,
                        const DualPotentials& duals, const SupportSet& supp) {
  if (!supp.in_x0(i) || !supp.in_y0(j))
    throw RegionError("rate function: pair lies outside the support projections");
  return cost.values(i, j) - (-duals.psi[i] + duals.psi_c[j]);
}

// +infinity off the support projections instead of an error
inline double rate_dual_extended(int i, int j, const CostMatrix& cost,
                                 const DualPotentials& duals,
                                 const SupportSet& supp) {
  if (!supp.in_x0(i) || !supp.in_y0(j)) return kInf;
  return rate_dual(i, j, cost, duals, supp);
}

struct EnumResult {
  double value = 0.0;
  std::vector<std::pair<int, int>> tuple;  // first entry is the query pair
};

namespace detail {

inline void check_enum_args(int k_max, std::size_t g) {
  if (k_max < 2 || k_max > 4) throw Error("cycle enumeration: k_max must be 2, 3 or 4");
  if (g == 0) throw Error("cycle enumeration: empty support");
  if (std::pow(static_cast<double>(g), k_max - 1) > 1e6)
    throw SizeLimitError("cycle enumeration: |support|^(k_max-1) exceeds 10^6");
}

}  // namespace detail

/*
 * Best improvement over cycles that start at the query pair and continue
 * through k-1 support pairs, each handing its target to the predecessor:
 *   sum_i c(x_i, y_i) - c(x_i, y_{i+1}),  y_{k+1} = y_1.
 * This lower-bounds the dual rate value and is nondecreasing in k_max.
 */
inline EnumResult rate_enum(int qi, int qj, const CostMatrix& cost,
                            const SupportSet& supp, int k_max) {
  const auto& pr = supp.pairs;
  detail::check_enum_args(k_max, pr.size());
  if (qi < 0 || qi >= cost.values.rows() || qj < 0 || qj >= cost.values.cols())
    throw DimensionMismatchError("rate_enum: query indices out of range");
  const int g = static_cast<int>(pr.size());

  double best = -kInf;
  std::vector<int> best_digits;
  for (int k = 2; k <= k_max; ++k) {
    std::vector<int> dg(static_cast<std::size_t>(k - 1), 0);
    while (true) {
      double s = cost.values(qi, qj) - cost.values(qi, pr[static_cast<std::size_t>(dg[0])].second);
      for (int a = 0; a + 1 < k - 1; ++a) {
        const auto& cur = pr[static_cast<std::size_t>(dg[static_cast<std::size_t>(a)])];
        const auto& nxt = pr[static_cast<std::size_t>(dg[static_cast<std::size_t>(a + 1)])];
        s += cost.values(cur.first, cur.second) - cost.values(cur.first, nxt.second);
      }
      const auto& last = pr[static_cast<std::size_t>(dg.back())];
      s += cost.values(last.first, last.second) - cost.values(last.first, qj);
      if (s > best) {
        best = s;
        best_digits = dg;
      }
      int pos = k - 2;
      while (pos >= 0 && dg[static_cast<std::size_t>(pos)] == g - 1) {
        dg[static_cast<std::size_t>(pos)] = 0;
        --pos;
      }
      if (pos < 0) break;
      ++dg[static_cast<std::size_t>(pos)];
    }
  }
  EnumResult r;
  r.value = best;
  r.tuple.emplace_back(qi, qj);
  for (int x : best_digits) r.tuple.push_back(pr[static_cast<std::size_t>(x)]);
  return r;
}

/*
 * Cross-check variant: the hand-off is a full permutation of the targets
 * rather than the cyclic shift.  Fixed points cancel and any permutation
 * splits into cycles, so at equal k the two variants agree on supports of
 * exact optima.
 */
inline EnumResult rate_enum_permutations(int qi, int qj, const CostMatrix& cost,
                                         const SupportSet& supp, int k_max) {
  const auto& pr = supp.pairs;
  detail::check_enum_args(k_max, pr.size());
  const int g = static_cast<int>(pr.size());

  double best = -kInf;
  std::vector<std::pair<int, int>> best_tuple;
  for (int k = 2; k <= k_max; ++k) {
    std::vector<int> dg(static_cast<std::size_t>(k - 1), 0);
    std::vector<int> xs(static_cast<std::size_t>(k)), ys(static_cast<std::size_t>(k));
    while (true) {
      xs[0] = qi;
      ys[0] = qj;
      for (int a = 0; a < k - 1; ++a) {
        xs[static_cast<std::size_t>(a + 1)] = pr[static_cast<std::size_t>(dg[static_cast<std::size_t>(a)])].first;
        ys[static_cast<std::size_t>(a + 1)] = pr[static_cast<std::size_t>(dg[static_cast<std::size_t>(a)])].second;
      }
      double diag = 0.0;
      for (int a = 0; a < k; ++a)
        diag += cost.values(xs[static_cast<std::size_t>(a)], ys[static_cast<std::size_t>(a)]);
      std::vector<int> sigma(static_cast<std::size_t>(k));
      std::iota(sigma.begin(), sigma.end(), 0);
      double best_assign = kInf;
      do {
        double t = 0.0;
        for (int a = 0; a < k; ++a)
          t += cost.values(xs[static_cast<std::size_t>(a)],
                           ys[static_cast<std::size_t>(sigma[static_cast<std::size_t>(a)])]);
        best_assign = std::min(best_assign, t);
      } while (std::next_permutation(sigma.begin(), sigma.end()));
      if (diag - best_assign > best) {
        best = diag - best_assign;
        best_tuple.clear();
        for (int a = 0; a < k; ++a)
          best_tuple.emplace_back(xs[static_cast<std::size_t>(a)], ys[static_cast<std::size_t>(a)]);
      }
      int pos = k - 2;
      while (pos >= 0 && dg[static_cast<std::size_t>(pos)] == g - 1) {
        dg[static_cast<std::size_t>(pos)] = 0;
        --pos;
      }
      if (pos < 0) break;
      ++dg[static_cast<std::size_t>(pos)];
    }
  }
  EnumResult r;
  r.value = best;
  r.tuple = best_tuple;
  return r;
}

/*
 * Largest cyclic improvement available inside the support itself; up to
 * rotation every cycle is enumerated once by forcing the first slot to hold
 * the smallest participating pair index.  Exact optima give a nonpositive
 * improvement, reported as a max against the degenerate zero cycle.
 */
inline EnumResult monotonicity_gap(const SupportSet& supp, const CostMatrix& cost,
                                   int k_max) {
  const auto& pr = supp.pairs;
  detail::check_enum_args(k_max, pr.size());
  const int g = static_cast<int>(pr.size());
  double work = 0.0;
  for (int k = 2; k <= k_max; ++k)
    work += static_cast<double>(g) * std::pow(static_cast<double>(g), k - 1);
  if (work > 2e7)
    throw SizeLimitError("monotonicity gap: support too large for cycle enumeration");

  EnumResult r;
  r.value = 0.0;
  r.tuple = {pr[0], pr[0]};  // degenerate cycle
  std::vector<int> idx;
  for (int k = 2; k <= k_max; ++k) {
    for (int first = 0; first < g; ++first) {
      std::vector<int> dg(static_cast<std::size_t>(k - 1), first);
      while (true) {
        idx.assign(1, first);
        for (int a = 0; a < k - 1; ++a) idx.push_back(dg[static_cast<std::size_t>(a)]);
        double s = 0.0;
        for (int a = 0; a < k; ++a) {
          const auto& cur = pr[static_cast<std::size_t>(idx[static_cast<std::size_t>(a)])];
          const auto& nxt = pr[static_cast<std::size_t>(idx[static_cast<std::size_t>((a + 1) % k)])];
          s += cost.values(cur.first, cur.second) - cost.values(cur.first, nxt.second);
        }
        if (s > r.value) {
          r.value = s;
          r.tuple.clear();
          for (int a = 0; a < k; ++a)
            r.tuple.push_back(pr[static_cast<std::size_t>(idx[static_cast<std::size_t>(a)])]);
        }
        int pos = k - 2;
        while (pos >= 0 && dg[static_cast<std::size_t>(pos)] == g - 1) {
          dg[static_cast<std::size_t>(pos)] = first;
          --pos;
        }
        if (pos < 0) break;
        ++dg[static_cast<std::size_t>(pos)];
      }
    }
  }
  return r;
}

struct RateReport {
  Mat i_dual;     // +inf off the support projections
  Mat i_enum_k2;
  Mat i_enum_k3;
};

inline RateReport rate_report(const CostMatrix& cost, const SupportSet& supp,
                              const DualPotentials& duals) {
  const int n = static_cast<int>(cost.values.rows());
  const int m = static_cast<int>(cost.values.cols());
  RateReport rep;
  rep.i_dual.resize(n, m);
  rep.i_enum_k2.resize(n, m);
  rep.i_enum_k3.resize(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) {
      rep.i_dual(i, j) = rate_dual_extended(i, j, cost, duals, supp);
      rep.i_enum_k2(i, j) = rate_enum(i, j, cost, supp, 2).value;
      rep.i_enum_k3(i, j) = rate_enum(i, j, cost, supp, 3).value;
    }
  return rep;
}

struct IndexSet {
  std::string id;
  std::vector<std::pair<int, int>> pairs;
};

struct LdpRow {
  double eta = 0.0;
  std::string set_id;
  double eta_log_prob = 0.0;  // eta * log(plan mass of the set)
  double neg_inf_rate = 0.0;  // -inf over the set of the rate values
  double gap = 0.0;
  bool zero_mass = false;
};

struct LdpTable {
  std::vector<LdpRow> rows;  // grouped by set, eta descending
  std::vector<std::pair<std::string, double>> extrapolated;  // per set
};

/*
 * eta * log plan-mass per (eta, set) row against the rate-function target,
 * with a linear-in-eta extrapolation through the two smallest eta values.
 */
inline LdpTable ldp_table(const std::vector<Coupling>& plans, const Mat& rate,
                          const std::vector<IndexSet>& sets) {
  if (plans.empty()) throw Error("ldp_table: no plans");
  if (sets.empty()) throw Error("ldp_table: no index sets");
  for (std::size_t k = 0; k < plans.size(); ++k) {
    if (!plans[k].converged) throw Error("ldp_table: plan did not converge");
    if (k > 0 && !(plans[k].eta < plans[k - 1].eta))
      throw Error("ldp_table: plans must have strictly decreasing eta");
  }
  LdpTable tab;
  std::vector<double> exps;
  for (const auto& set : sets) {
    if (set.pairs.empty()) throw Error("ldp_table: empty index set");
    double inf_rate = kInf;
    for (const auto& [i, j] : set.pairs) inf_rate = std::min(inf_rate, rate(i, j));
    std::vector<std::pair<double, double>> finite_rows;  // (eta, value)
    for (const auto& cpl : plans) {
      LdpRow row;
      row.eta = cpl.eta;
      row.set_id = set.id;
      exps.clear();
      for (const auto& [i, j] : set.pairs) exps.push_back(cpl.log_plan(i, j));
      const double lse = log_sum_exp(exps.data(), exps.size());
      row.zero_mass = !(lse > -kInf);
      row.eta_log_prob = row.zero_mass ? -kInf : cpl.eta * lse;
      row.neg_inf_rate = -inf_rate;
      row.gap = (row.zero_mass || !std::isfinite(row.neg_inf_rate))
                    ? kInf
                    : std::fabs(row.eta_log_prob - row.neg_inf_rate);
      if (!row.zero_mass) finite_rows.emplace_back(row.eta, row.eta_log_prob);
      tab.rows.push_back(std::move(row));
    }
    double extrap = kNaN;
    if (finite_rows.size() >= 2) {
      const auto [e1, v1] = finite_rows[finite_rows.size() - 2];
      const auto [e2, v2] = finite_rows[finite_rows.size() - 1];
      extrap = (e1 * v2 - e2 * v1) / (e1 - e2);
    }
    tab.extrapolated.emplace_back(set.id, extrap);
  }
  return tab;
}

}  // namespace otb
