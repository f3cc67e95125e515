#pragma once

// Shared numerical helpers for the test suites: adaptive Simpson quadrature,
// the one-sample Kolmogorov-Smirnov statistic, and the Kolmogorov tail
// probability for the associated p-value.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace testutil {

inline double simpson_rec(const std::function<double(double)>& f, double a,
                          double b, double fa, double fm, double fb,
                          double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol) {
    return left + right + (left + right - whole) / 15.0;
  }
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

/// Adaptive Simpson integral of f over [a, b]. The interval is pre-split
/// into fixed panels so narrow features between the initial sample points
/// cannot fool the refinement criterion.
inline double integrate(const std::function<double(double)>& f, double a,
                        double b, double tol = 1e-12, int depth = 30) {
  const int panels = 16;
  const double h = (b - a) / panels;
  double total = 0.0;
  for (int k = 0; k < panels; ++k) {
    const double lo = a + k * h;
    const double hi = lo + h;
    const double fa = f(lo);
    const double fb = f(hi);
    const double fm = f(0.5 * (lo + hi));
    const double whole = h / 6.0 * (fa + 4.0 * fm + fb);
    total += simpson_rec(f, lo, hi, fa, fm, fb, whole, tol / panels, depth);
  }
  return total;
}

/// One-sample KS statistic against the CDF `F`; `x` is modified (sorted).
inline double ks_statistic(std::vector<double>& x,
                           const std::function<double(double)>& F) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double u = F(x[i]);
    d = std::max(d, std::abs(u - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - u));
  }
  return d;
}

/// Kolmogorov tail probability: P(D_n > d) for sample size n (asymptotic,
/// with the standard n-dependent correction).
inline double ks_pvalue(double d, std::size_t n) {
  const double sn = std::sqrt(static_cast<double>(n));
  const double t = (sn + 0.12 + 0.11 / sn) * d;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term =
        2.0 * std::pow(-1.0, k - 1) * std::exp(-2.0 * k * k * t * t);
    sum += term;
    if (std::abs(term) < 1e-14) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

}  // namespace testutil
