#include "bbm/maps.hpp"

#include "bbm/mollifiers.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace bbm {

std::string to_string(TargetKind k) {
  switch (k) {
    case TargetKind::euclidean: return "euclidean";
    case TargetKind::circle: return "circle";
    case TargetKind::snowflake: return "snowflake";
    case TargetKind::discrete: return "discrete";
  }
  return "?";
}

TargetSpace TargetSpace::snowflake(double alpha, int m) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InputError("snowflake exponent must lie in (0, 1]");
  return {TargetKind::snowflake, m, alpha};
}

namespace {

double wrap_angle(double t) {
  double r = std::fmod(t, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  return r;
}

}  // namespace

double TargetSpace::distance(const Value& a, const Value& b) const {
  switch (kind) {
    case TargetKind::euclidean: return (a - b).norm();
    case TargetKind::circle: {
      const double t = wrap_angle(a[0] - b[0]);
      return std::min(t, kTwoPi - t);
    }
    case TargetKind::snowflake: return std::pow((a - b).norm(), alpha);
    case TargetKind::discrete: return a == b ? 0.0 : 1.0;
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// maps

MapSpec MapSpec::identity(int d) {
  MapSpec f;
  f.name = "identity";
  f.source_dim = d;
  f.target_dim = d;
  f.rule = [](const Point& x) { return Value(x); };
  f.jacobian = [d](const Point&) { return Jacobian(Jacobian::Identity(d, d)); };
  return f;
}

MapSpec MapSpec::linear(const Jacobian& a) {
  MapSpec f;
  f.name = "linear";
  f.source_dim = static_cast<int>(a.cols());
  f.target_dim = static_cast<int>(a.rows());
  f.rule = [a](const Point& x) { return Value(a * x); };
  f.jacobian = [a](const Point&) { return a; };
  return f;
}

MapSpec MapSpec::power(double k, int d, int axis) {
  MapSpec f;
  f.name = "power";
  f.source_dim = d;
  f.target_dim = 1;
  f.rule = [k, axis](const Point& x) { return make_point(std::pow(x[axis], k)); };
  f.jacobian = [k, d, axis](const Point& x) {
    Jacobian j = Jacobian::Zero(1, d);
    j(0, axis) = k * std::pow(x[axis], k - 1.0);
    return j;
  };
  return f;
}

MapSpec MapSpec::angle_wrap(double freq, int d) {
  MapSpec f;
  f.name = "angle";
  f.source_dim = d;
  f.target_dim = 1;
  f.codomain = TargetKind::circle;
  f.rule = [freq](const Point& x) { return make_point(kTwoPi * freq * x[0]); };
  f.jacobian = [freq, d](const Point&) {
    Jacobian j = Jacobian::Zero(1, d);
    j(0, 0) = kTwoPi * freq;
    return j;
  };
  return f;
}

MapSpec MapSpec::constant(double c, int d, int m) {
  MapSpec f;
  f.name = "constant";
  f.source_dim = d;
  f.target_dim = m;
  f.rule = [c, m](const Point&) { return Value(Value::Constant(m, c)); };
  f.jacobian = [d, m](const Point&) { return Jacobian(Jacobian::Zero(m, d)); };
  return f;
}

MapSpec MapSpec::coordinate(int i, int d) {
  if (i < 0 || i >= d) throw InputError("coordinate map: axis out of range");
  MapSpec f;
  f.name = "x" + std::to_string(i + 1);
  f.source_dim = d;
  f.target_dim = 1;
  f.rule = [i](const Point& x) { return make_point(x[i]); };
  f.jacobian = [i, d](const Point&) {
    Jacobian j = Jacobian::Zero(1, d);
    j(0, i) = 1.0;
    return j;
  };
  return f;
}

MapSpec MapSpec::scaled(const MapSpec& g, double c) {
  MapSpec f = g;
  f.name = g.name + "*" + std::to_string(c);
  f.rule = [g, c](const Point& x) { return Value(c * g.rule(x)); };
  if (g.jacobian) f.jacobian = [g, c](const Point& x) { return Jacobian(c * g.jacobian(x)); };
  return f;
}

double pair_distance(const MapSpec& f, const TargetSpace& y, const Point& x, const Point& xp) {
  return y.distance(f(x), f(xp));
}

Seminorm metric_differential(const MapSpec& f, const TargetSpace& y, const Point& x, double fd_step) {
  if (y.kind == TargetKind::snowflake || y.kind == TargetKind::discrete)
    throw UnsupportedTargetError("metric differential is undefined for " + to_string(y.kind) + " targets");
  Seminorm md;
  if (f.jacobian) {
    md.jacobian = f.jacobian(x);
    return md;
  }
  md.finite_difference = true;
  md.warning = "map '" + f.name + "' has no Jacobian; using central differences";
  const int d = static_cast<int>(x.size());
  md.jacobian = Jacobian::Zero(f.target_dim, d);
  for (int i = 0; i < d; ++i) {
    Point a = x;
    Point b = x;
    a[i] += fd_step;
    b[i] -= fd_step;
    Value diff = f(a) - f(b);
    if (y.kind == TargetKind::circle) diff[0] = std::remainder(diff[0], kTwoPi);
    md.jacobian.col(i) = diff / (2.0 * fd_step);
  }
  return md;
}

double unit_ball_moment(const Seminorm& md, double p, int d) {
  if (d < 1 || d > 3) throw InputError("unit_ball_moment: d must be 1, 2 or 3");
  if (!(p >= 1.0)) throw InputError("unit_ball_moment: p must be at least 1");
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(std::max<Eigen::Index>(1, md.jacobian.rows()), d);
  const int cols = std::min<int>(d, static_cast<int>(md.jacobian.cols()));
  if (cols > 0 && md.jacobian.rows() > 0) j.leftCols(cols) = md.jacobian.leftCols(cols);
  // Principal axes of v -> |J v|^2.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(j.transpose() * j);
  Eigen::VectorXd lam = eig.eigenvalues().cwiseMax(0.0);
  if (lam.maxCoeff() == 0.0) return 0.0;
  const double radial = d / (d + p);
  if (d == 1) return std::pow(lam[0], 0.5 * p) / (p + 1.0);
  if (d == 2) {
    auto f = [&](double t) {
      const double c = std::cos(t);
      const double s = std::sin(t);
      return std::pow(lam[0] * c * c + lam[1] * s * s, 0.5 * p);
    };
    return radial * (2.0 / kPi) * integrate_adaptive(f, 0.0, 0.5 * kPi, 1e-12, 16, 30);
  }
  // Octant of S^2 in (z, phi) coordinates, where the area element is dz dphi.
  auto ring = [&](double z) {
    const double rho2 = 1.0 - z * z;
    auto g = [&](double phi) {
      const double c = std::cos(phi);
      const double s = std::sin(phi);
      return std::pow(rho2 * (lam[0] * c * c + lam[1] * s * s) + lam[2] * z * z, 0.5 * p);
    };
    return integrate_adaptive(g, 0.0, 0.5 * kPi, 1e-12, 16, 30);
  };
  return radial * (2.0 / kPi) * integrate_adaptive(ring, 0.0, 1.0, 1e-12, 16, 30);
}

double predicted_limit(const Space& s, const MapSpec& f, const TargetSpace& y, double p, MollifierKind kind) {
  if (y.kind == TargetKind::snowflake || y.kind == TargetKind::discrete)
    throw UnsupportedTargetError("predicted limit needs a Euclidean or circle target");
  const double step = 1e-5 * s.diameter();
  double total = 0.0;
  for (const auto& node : domain_rule(s, 16, 0.25)) {
    const int dim = s.dim_at(node.x);
    const Seminorm md = metric_differential(f, y, node.x, step);
    total += node.w * theta_formula(kind, p, dim) * unit_ball_moment(md, p, dim);
  }
  return total;
}

double cheeger_energy_smooth(const Space& s, const MapSpec& u, const TargetSpace& y, double p) {
  if (y.kind != TargetKind::euclidean || y.dim != 1 || u.target_dim != 1)
    throw UnsupportedTargetError("Cheeger energy is computed for real-valued maps only");
  const double step = 1e-5 * s.diameter();
  double total = 0.0;
  for (const auto& node : domain_rule(s, 16, 0.25)) {
    const Seminorm md = metric_differential(u, y, node.x, step);
    total += node.w * std::pow(md.jacobian.row(0).norm(), p);
  }
  return total;
}

double cheeger_energy_smooth(const Space& s, const MapSpec& u, double p) {
  TargetSpace y = TargetSpace::euclidean(u.target_dim);
  y.kind = u.codomain;
  return cheeger_energy_smooth(s, u, y, p);
}

}  // namespace bbm
