#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "otb/errors.hpp"
#include "otb/numerics.hpp"

namespace otb {

/*
 * Equal-width histogram of scalar samples against a reference density.
 * Cell probabilities come from adaptive quadrature of the density, the
 * per-cell z-scores use the exact binomial standard deviation, and the
 * chi-square statistic sums over all cells (callers pick cell counts so
 * expected counts stay well away from zero).
 */
struct HistogramReport {
  std::vector<long> counts;
  std::vector<double> expected;
  std::vector<double> standardized;
  double max_abs_standardized = 0.0;
  double chi_square = 0.0;
  double total_probability = 0.0;  // quadrature mass over the range
  long n_samples = 0;
};

inline HistogramReport compare_histogram(
    const std::vector<double>& samples, double lo, double hi, int n_cells,
    const std::function<double(double)>& density, double quad_tol = 1e-10) {
  if (n_cells < 1) throw Error("histogram: need at least one cell");
  if (!(hi > lo)) throw Error("histogram: range must have positive length");
  if (samples.empty()) throw Error("histogram: no samples");

  HistogramReport rep;
  rep.n_samples = static_cast<long>(samples.size());
  rep.counts.assign(static_cast<std::size_t>(n_cells), 0);
  const double width = (hi - lo) / n_cells;
  for (double s : samples) {
    if (s < lo - 1e-12 || s > hi + 1e-12)
      throw Error("histogram: sample outside range");
    int k = static_cast<int>((s - lo) / width);
    if (k < 0) k = 0;
    if (k >= n_cells) k = n_cells - 1;
    ++rep.counts[static_cast<std::size_t>(k)];
  }

  rep.expected.resize(static_cast<std::size_t>(n_cells));
  rep.standardized.resize(static_cast<std::size_t>(n_cells));
  const double n = static_cast<double>(rep.n_samples);
  for (int k = 0; k < n_cells; ++k) {
    const double a = lo + k * width;
    const double b = (k == n_cells - 1) ? hi : lo + (k + 1) * width;
    const double p = adaptive_simpson(density, a, b, quad_tol);
    rep.total_probability += p;
    const double e = n * p;
    rep.expected[static_cast<std::size_t>(k)] = e;
    const double sd = std::sqrt(std::max(n * p * (1.0 - p), 0.0));
    const double diff = static_cast<double>(rep.counts[static_cast<std::size_t>(k)]) - e;
    rep.standardized[static_cast<std::size_t>(k)] =
        (sd > 0.0) ? diff / sd : (diff == 0.0 ? 0.0 : kInf);
    rep.max_abs_standardized = std::max(
        rep.max_abs_standardized, std::fabs(rep.standardized[static_cast<std::size_t>(k)]));
    if (e > 0.0) rep.chi_square += diff * diff / e;
  }
  return rep;
}

inline double sample_mean(const std::vector<double>& xs) {
  if (xs.empty()) throw Error("sample_mean: empty sample");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

inline double sample_variance(const std::vector<double>& xs) {
  if (xs.size() < 2) throw Error("sample_variance: need at least two values");
  const double m = sample_mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size() - 1);
}

}  // namespace otb
