#include "bbm/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <array>
#include <memory>
#include <mutex>

namespace bbm {

namespace {

GaussRule build_rule(int n) {
  // Golub-Welsch: the Jacobi matrix of the Legendre recurrence has the nodes
  // as eigenvalues and the squared first eigenvector components as weights/2.
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double beta = k / std::sqrt(4.0 * k * k - 1.0);
    jacobi(k, k - 1) = beta;
    jacobi(k - 1, k) = beta;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = solver.eigenvalues()(i);
    double dp = 1.0;
    for (int it = 0; it < 3; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) {
        p1 = x;
        p0 = 1.0;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      x -= p1 / dp;
    }
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
  if (n < 1 || n > 128) throw std::invalid_argument("gauss_legendre: order out of range");
  static std::array<std::unique_ptr<GaussRule>, 129> cache;
  static std::array<std::once_flag, 129> flags;
  std::call_once(flags[n], [n] { cache[n] = std::make_unique<GaussRule>(build_rule(n)); });
  return *cache[n];
}

std::vector<Node1D> composite_rule(double lo, double hi, std::vector<double> breaks,
                                   double max_panel, int order) {
  breaks.push_back(lo);
  breaks.push_back(hi);
  std::sort(breaks.begin(), breaks.end());
  std::vector<double> pts;
  for (double b : breaks) {
    if (b < lo || b > hi) continue;
    if (!pts.empty() && b - pts.back() <= 1e-14) continue;
    pts.push_back(b);
  }
  const GaussRule& rule = gauss_legendre(order);
  std::vector<Node1D> out;
  for (std::size_t s = 0; s + 1 < pts.size(); ++s) {
    const double len = pts[s + 1] - pts[s];
    const int panels = std::max(1, static_cast<int>(std::ceil(len / max_panel - 1e-12)));
    const double h = len / panels;
    for (int j = 0; j < panels; ++j) {
      const double a = pts[s] + j * h;
      for (int i = 0; i < order; ++i)
        out.push_back({a + 0.5 * h * (rule.nodes[i] + 1.0), 0.5 * h * rule.weights[i]});
    }
  }
  return out;
}

}  // namespace bbm
