#include "bbm/extrapolate.hpp"

#include "bbm/core.hpp"

#include <algorithm>
#include <cmath>

namespace bbm {

LinearFit fit_linear(const std::vector<double>& t, const std::vector<double>& y,
                     const std::vector<double>& w) {
  const std::size_t n = t.size();
  if (n < 2 || y.size() != n) throw InputError("fit_linear: need at least two points");
  Eigen::MatrixXd a(n, 2);
  Eigen::VectorXd rhs(n);
  Eigen::VectorXd sw(n);
  for (std::size_t i = 0; i < n; ++i) {
    sw[i] = w.empty() ? 1.0 : std::sqrt(w[i]);
    a(i, 0) = sw[i];
    a(i, 1) = sw[i] * t[i];
    rhs[i] = sw[i] * y[i];
  }
  const Eigen::Vector2d coef = a.colPivHouseholderQr().solve(rhs);
  LinearFit fit;
  fit.a = coef[0];
  fit.b = coef[1];
  fit.rss = (a * coef - rhs).squaredNorm();
  const Eigen::Matrix2d cov = (a.transpose() * a).inverse();
  // Input-error part (meaningful when w = 1/error^2) plus residual scatter.
  double var = w.empty() ? 0.0 : cov(0, 0);
  if (n > 2) var += fit.rss / static_cast<double>(n - 2) * cov(0, 0);
  fit.a_se = std::sqrt(std::max(0.0, var));
  return fit;
}

namespace {

LinearFit fit_power(const std::vector<ExtrapolationSample>& s, double gamma,
                    const std::vector<double>& w, double shift) {
  std::vector<double> t;
  std::vector<double> y;
  for (const auto& p : s) {
    t.push_back(std::pow(p.delta, gamma));
    y.push_back(p.value - shift);
  }
  return fit_linear(t, y, w);
}

}  // namespace

Extrapolation extrapolate(std::vector<ExtrapolationSample> samples, ExtrapolationModel model) {
  const std::size_t need = model == ExtrapolationModel::linear ? 3 : 4;
  if (samples.size() < need)
    throw InputError("extrapolate: " + std::to_string(samples.size()) + " samples, need " +
                     std::to_string(need));
  std::sort(samples.begin(), samples.end(),
            [](const auto& a, const auto& b) { return a.delta > b.delta; });
  bool weighted = true;
  for (const auto& p : samples)
    if (!(p.error > 0.0)) weighted = false;
  std::vector<double> w;
  if (weighted)
    for (const auto& p : samples) w.push_back(1.0 / (p.error * p.error));

  // Fitting deviations from the first value keeps constant data exact.
  const double shift = samples.front().value;
  double gamma = 1.0;
  if (model == ExtrapolationModel::free_gamma) {
    auto rss = [&](double g) { return fit_power(samples, g, w, shift).rss; };
    double best = 1.0;
    double best_rss = rss(1.0);
    for (double g = 0.05; g <= 4.0 + 1e-12; g += 0.05) {
      const double r = rss(g);
      if (r < best_rss) {
        best_rss = r;
        best = g;
      }
    }
    double lo = std::max(0.02, best - 0.05);
    double hi = best + 0.05;
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 60; ++it) {
      const double m1 = hi - phi * (hi - lo);
      const double m2 = lo + phi * (hi - lo);
      if (rss(m1) < rss(m2))
        hi = m2;
      else
        lo = m1;
    }
    gamma = 0.5 * (lo + hi);
  }
  const LinearFit fit = fit_power(samples, gamma, w, shift);
  Extrapolation out;
  out.limit = fit.a + shift;
  out.slope = fit.b;
  out.gamma = gamma;
  out.uncertainty = fit.a_se;
  out.residual = fit.rss;
  out.smallest_delta_value = samples.back().value;
  return out;
}

}  // namespace bbm
