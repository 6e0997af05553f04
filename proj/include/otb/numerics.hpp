#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "otb/errors.hpp"

namespace otb {

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// max-shifted log(sum exp(a_i)); tolerates -inf entries.
inline double log_sum_exp(const double* a, std::size_t n) {
  double m = -kInf;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, a[i]);
  if (m == -kInf) return -kInf;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::exp(a[i] - m);
  return m + std::log(s);
}

inline double log_sum_exp(const std::vector<double>& a) {
  return log_sum_exp(a.data(), a.size());
}

inline std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  if (n == 1) {
    out[0] = a;
    return out;
  }
  for (int i = 0; i < n; ++i)
    out[static_cast<std::size_t>(i)] = a + (b - a) * i / (n - 1);
  out.back() = b;
  return out;
}

// Standard normal upper tail and its logarithm (stable for large z).
inline double norm_sf(double z) {
  return 0.5 * std::erfc(z * 0.7071067811865475244008443621048490);
}

inline double log_norm_sf(double z) {
  if (z < 30.0) {
    double s = norm_sf(z);
    if (s > 0.0) return std::log(s);
  }
  // asymptotic expansion of log(phi(z)/z * (1 - 1/z^2 + 3/z^4 - ...))
  double z2 = z * z;
  return -0.5 * z2 - std::log(z) - 0.5 * std::log(2.0 * kPi) +
         std::log1p(-1.0 / z2 + 3.0 / (z2 * z2));
}

namespace detail {

inline double simpson_panel(const std::function<double(double)>& f, double a,
                            double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_simpson_rec(const std::function<double(double)>& f,
                                   double a, double b, double fa, double fm,
                                   double fb, double whole, double tol,
                                   int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = simpson_panel(f, a, m, fa, flm, fm);
  double right = simpson_panel(f, m, b, fm, frm, fb);
  double delta = left + right - whole;
  if (depth <= 0) throw NumericalError("adaptive quadrature: depth exhausted");
  if (std::fabs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

inline double adaptive_simpson(const std::function<double(double)>& f, double a,
                               double b, double tol = 1e-10, int max_depth = 40) {
  double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  double whole = detail::simpson_panel(f, a, b, fa, fm, fb);
  return detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

// Composite Simpson on a fixed odd-sized grid (n points, n-1 even intervals).
inline double fixed_simpson(const std::function<double(double)>& f, double a,
                            double b, int n) {
  if (n < 3 || n % 2 == 0) throw NumericalError("fixed_simpson: n must be odd >= 3");
  double h = (b - a) / (n - 1);
  double s = f(a) + f(b);
  for (int i = 1; i < n - 1; ++i) s += f(a + h * i) * (i % 2 == 1 ? 4.0 : 2.0);
  return s * h / 3.0;
}

}  // namespace otb
