#pragma once

#include "bbm/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace bbm {

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Cached n-point rule, 1 <= n <= 128. Nodes come from the Golub-Welsch
/// eigenproblem and are polished by Newton steps on P_n.
const GaussRule& gauss_legendre(int n);

template <class F>
double integrate_gl(F&& f, double a, double b, int n) {
  const GaussRule& rule = gauss_legendre(n);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (b + a);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return half * sum;
}

namespace detail {
template <class F>
double adaptive_step(F& f, double a, double b, double whole, double tol, int n, int depth) {
  const double m = 0.5 * (a + b);
  const double left = integrate_gl(f, a, m, n);
  const double right = integrate_gl(f, m, b, n);
  const double refined = left + right;
  if (depth <= 0 || std::abs(refined - whole) <= tol) return refined;
  return adaptive_step(f, a, m, left, 0.5 * tol, n, depth - 1) +
         adaptive_step(f, m, b, right, 0.5 * tol, n, depth - 1);
}
}  // namespace detail

/// Adaptive bisection with a fixed Gauss-Legendre order per panel.
template <class F>
double integrate_adaptive(F&& f, double a, double b, double rel_tol = 1e-13, int n = 10,
                          int max_depth = 40) {
  if (!(b > a)) return 0.0;
  const double whole = integrate_gl(f, a, b, n);
  const double tol = std::max(rel_tol * std::abs(whole), 1e-300);
  return detail::adaptive_step(f, a, b, whole, tol, n, max_depth);
}

struct RadialOptions {
  int order = 10;
  /// Outer/inner radius ratio of the geometric panels.
  double panel_ratio = 4.0;
  int max_graded_panels = 120;
  /// Graded panels stop once they contribute less than this fraction.
  double tail_tol = 1e-14;
  /// Consecutive panel ratios that agree to this relative precision are
  /// treated as an exact geometric series and summed in closed form.
  double geometric_tol = 1e-9;
  /// Graded panels stop at this radius and the rest is closed with the last
  /// panel ratio. Keeps x +- u from rounding back to x.
  double min_radius = 0.0;
};

/// Integrates f over (lo, hi) for integrands that may carry an integrable
/// power singularity at u = 0. Breakpoints mark kinks or jumps of f; every
/// segment is split into geometric panels of bounded ratio. When lo == 0 the
/// first segment is graded towards the origin and its tail is closed by a
/// geometric series once the panel contributions settle into one.
template <class F>
double integrate_radial(F&& f, double lo, double hi, std::vector<double> breaks,
                        const RadialOptions& opt = {}) {
  if (!(hi > lo)) return 0.0;
  breaks.push_back(lo);
  breaks.push_back(hi);
  std::sort(breaks.begin(), breaks.end());
  std::vector<double> pts;
  pts.reserve(breaks.size());
  for (double b : breaks) {
    if (b < lo || b > hi || !std::isfinite(b)) continue;
    if (!pts.empty() && b - pts.back() <= 1e-14 * std::max(1.0, std::abs(b))) continue;
    pts.push_back(b);
  }
  if (pts.back() < hi) pts.push_back(hi);

  double total = 0.0;
  for (std::size_t s = 0; s + 1 < pts.size(); ++s) {
    double a = pts[s];
    const double b = pts[s + 1];
    if (a <= 0.0) continue;
    // Geometric panels from a towards b.
    while (a < b) {
      const double next = std::min(b, a * opt.panel_ratio);
      total += integrate_gl(f, a, next, opt.order);
      a = next;
    }
  }

  if (pts.front() > 0.0 || pts.size() < 2) return total;

  // Graded panels on (0, pts[1]].
  double upper = pts[1];
  double prev = 0.0;
  double prev_ratio = std::numeric_limits<double>::quiet_NaN();
  int zero_run = 0;
  double graded = 0.0;
  for (int j = 0; j < opt.max_graded_panels; ++j) {
    const double lower = upper / opt.panel_ratio;
    if (lower < opt.min_radius && j >= 2) {
      if (std::isfinite(prev_ratio) && prev_ratio > 0.0 && prev_ratio < 1.0)
        graded += prev * prev_ratio / (1.0 - prev_ratio);
      break;
    }
    const double c = integrate_gl(f, lower, upper, opt.order);
    graded += c;
    upper = lower;
    if (c == 0.0) {
      if (++zero_run >= 3) break;
      prev = 0.0;
      prev_ratio = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    zero_run = 0;
    const double running = std::abs(total + graded);
    if (std::abs(c) <= opt.tail_tol * running) break;
    if (prev != 0.0) {
      const double q = c / prev;
      if (j >= 4 && q > 0.0 && q < 1.0 && std::isfinite(prev_ratio) &&
          std::abs(q - prev_ratio) <= opt.geometric_tol * q) {
        graded += c * q / (1.0 - q);
        break;
      }
      prev_ratio = q;
    }
    prev = c;
    if (j + 1 == opt.max_graded_panels) {
      const double q = std::isfinite(prev_ratio) ? prev_ratio : 0.0;
      if (q >= 1.0) throw std::runtime_error("integrate_radial: integrand not integrable at 0");
      if (q > 0.0) graded += c * q / (1.0 - q);
    }
  }
  return total + graded;
}

/// 1D composite Gauss-Legendre nodes over [lo, hi]: the interval is cut at the
/// given breakpoints and every piece is split into panels no wider than
/// max_panel.
struct Node1D {
  double x;
  double w;
};
std::vector<Node1D> composite_rule(double lo, double hi, std::vector<double> breaks,
                                   double max_panel, int order);

}  // namespace bbm
