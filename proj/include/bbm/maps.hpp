#pragma once

#include "bbm/core.hpp"
#include "bbm/space.hpp"

#include <functional>
#include <string>

namespace bbm {

enum class MollifierKind;

/// Target values share the fixed-capacity point type.
using Value = Point;

enum class TargetKind { euclidean, circle, snowflake, discrete };

std::string to_string(TargetKind k);

/// Codomain (Y, d_Y). Circle values are angles in radians with the
/// shorter-arc metric; snowflake is |a - b|^alpha over Euclidean R^m.
struct TargetSpace {
  TargetKind kind = TargetKind::euclidean;
  int dim = 1;
  double alpha = 1.0;

  static TargetSpace euclidean(int m = 1) { return {TargetKind::euclidean, m, 1.0}; }
  static TargetSpace circle() { return {TargetKind::circle, 1, 1.0}; }
  static TargetSpace snowflake(double alpha, int m = 1);
  static TargetSpace discrete(int m = 1) { return {TargetKind::discrete, m, 1.0}; }

  double distance(const Value& a, const Value& b) const;
};

struct MapSpec {
  std::string name;
  std::function<Value(const Point&)> rule;
  /// Optional analytic Jacobian (target_dim x source dim).
  std::function<Jacobian(const Point&)> jacobian;
  int source_dim = 1;
  int target_dim = 1;
  /// Codomain the rule is meant for (angle maps produce circle values).
  TargetKind codomain = TargetKind::euclidean;
  bool smooth = true;

  Value operator()(const Point& x) const { return rule(x); }

  static MapSpec identity(int d = 1);
  /// x -> A x.
  static MapSpec linear(const Jacobian& a);
  /// x -> (x_axis)^k, real valued.
  static MapSpec power(double k, int d = 1, int axis = 0);
  /// x -> 2 pi freq x_0, read as an angle.
  static MapSpec angle_wrap(double freq = 1.0, int d = 1);
  static MapSpec constant(double c = 0.0, int d = 1, int m = 1);
  /// x -> x_i.
  static MapSpec coordinate(int i, int d);
  /// x -> c f(x).
  static MapSpec scaled(const MapSpec& f, double c);
};

/// d_Y(f(x), f(x')).
double pair_distance(const MapSpec& f, const TargetSpace& y, const Point& x, const Point& xp);

/// v -> |J v| for the Jacobian of f at x.
struct Seminorm {
  Jacobian jacobian;
  bool finite_difference = false;
  std::string warning;

  double operator()(const Point& v) const { return (jacobian * v).norm(); }
  int dim() const { return static_cast<int>(jacobian.cols()); }
};

/// Metric differential of f at x. Euclidean and circle targets only; without
/// an analytic Jacobian a central difference with step fd_step is used.
Seminorm metric_differential(const MapSpec& f, const TargetSpace& y, const Point& x, double fd_step = 1e-5);

/// Average of md(v)^p over the Euclidean unit ball of R^d, d in {1, 2, 3}.
double unit_ball_moment(const Seminorm& md, double p, int d);

/// Integral over the domain of Theta(Dim(x), p) times the unit-ball moment of
/// md_x[f], with respect to m.
double predicted_limit(const Space& s, const MapSpec& f, const TargetSpace& y, double p, MollifierKind kind);

/// Integral of |grad u|^p dm for a smooth real-valued u.
double cheeger_energy_smooth(const Space& s, const MapSpec& u, double p);
double cheeger_energy_smooth(const Space& s, const MapSpec& u, const TargetSpace& y, double p);

}  // namespace bbm
