#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace bbm {

/// Points of the built-in spaces live in R^1..R^3; the fixed upper bound keeps
/// them off the heap inside quadrature loops.
using Point = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 3, 1>;
using Jacobian = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 3, 3>;

inline Point make_point(double a) {
  Point x(1);
  x << a;
  return x;
}

inline Point make_point(double a, double b) {
  Point x(2);
  x << a, b;
  return x;
}

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  double length() const { return hi - lo; }
  bool contains(double t) const { return t >= lo && t <= hi; }
};

/// Axis-aligned box of dimension 1..3.
struct Box {
  std::array<Interval, 3> axis{};
  int dim = 0;

  Box() = default;
  explicit Box(Interval a) : dim(1) { axis[0] = a; }
  Box(Interval a, Interval b) : dim(2) {
    axis[0] = a;
    axis[1] = b;
  }

  bool contains(const Point& x) const {
    for (int i = 0; i < dim; ++i)
      if (!axis[i].contains(x[i])) return false;
    return true;
  }

  double volume() const {
    double v = 1.0;
    for (int i = 0; i < dim; ++i) v *= axis[i].length();
    return v;
  }

  double min_side() const {
    double s = axis[0].length();
    for (int i = 1; i < dim; ++i) s = std::min(s, axis[i].length());
    return s;
  }

  bool empty() const {
    for (int i = 0; i < dim; ++i)
      if (!(axis[i].hi > axis[i].lo)) return true;
    return dim == 0;
  }

  /// Componentwise intersection; the result may be empty.
  Box intersect(const Box& other) const {
    Box out = *this;
    for (int i = 0; i < dim; ++i) {
      out.axis[i].lo = std::max(axis[i].lo, other.axis[i].lo);
      out.axis[i].hi = std::min(axis[i].hi, other.axis[i].hi);
    }
    return out;
  }
};

/// Point outside the declared domain, empty region, or similar misuse.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A ball of zero measure where a positive one is required.
class DegenerateSpaceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Target kind that an operation has no meaning for (snowflake metric
/// differentials, non-real-valued Cheeger energies, ...).
class UnsupportedTargetError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed user input: bad configs, too few extrapolation samples.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace bbm
