#pragma once

#include "bbm/core.hpp"
#include "bbm/quadrature.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

namespace bbm {

enum class SpaceKind { euclidean_box, weighted_interval, circle, product };
enum class BallMethod { analytic, quadrature, monte_carlo };

std::string to_string(SpaceKind k);
std::string to_string(BallMethod m);

using AxisWeight = std::function<double(double)>;

/// Memo for ball masses keyed by (center, radius) rounded to 12 significant
/// digits. Callers evaluate at the rounded key, so a key always maps to the
/// same value no matter which thread inserted it first.
class BallCache {
 public:
  using Key = std::array<double, 4>;

  bool find(const Key& key, double& value) const;
  void insert(const Key& key, double value);
  std::size_t size() const;

 private:
  static constexpr std::size_t kMaxEntries = 1u << 21;
  mutable std::mutex mutex_;
  std::map<Key, double> map_;
};

/// Rounds to 12 significant digits.
double quantize(double v);

/// Metric measure space (X, d, m) with X a box in R^1 or R^2 (or a circle),
/// d Euclidean (arc length on the circle) and m = w dx for a separable
/// positive weight. Balls are closed and intrinsic to the domain.
class Space {
 public:
  static Space euclidean_box(const Box& box);
  static Space interval(double lo, double hi);
  static Space unit_cube(int d);
  static Space weighted_interval(Interval domain, AxisWeight w, std::string weight_name);
  /// Circle of the given circumference, points parameterized by arc length.
  static Space circle(double circumference);
  /// Product of two weighted intervals; an empty AxisWeight means Lebesgue.
  static Space product(Interval a, AxisWeight wa, Interval b, AxisWeight wb, std::string weight_name);

  SpaceKind kind() const { return kind_; }
  int dim() const { return domain_.dim; }
  const Box& domain() const { return domain_; }
  bool weighted() const { return static_cast<bool>(weights_[0]) || static_cast<bool>(weights_[1]); }
  const std::string& weight_name() const { return weight_name_; }
  double circumference() const { return circumference_; }

  double weight(const Point& x) const;
  double axis_weight(int axis, double t) const;

  int dim_at(const Point& x) const { return dim_map_ ? dim_map_(x) : dim(); }
  void set_dim_map(std::function<int(const Point&)> f) { dim_map_ = std::move(f); }

  double interior_margin() const { return margin_; }
  void set_interior_margin(double m);

  BallMethod ball_method() const { return method_; }
  void set_ball_method(BallMethod m);
  int mc_samples() const { return mc_samples_; }
  void set_mc_samples(int n) { mc_samples_ = n; }

  bool contains(const Point& x) const;
  /// Throws DomainError if x is not in the domain.
  void require(const Point& x, const char* what) const;
  double distance(const Point& a, const Point& b) const;
  /// sup over x' in X of d(x, x').
  double max_distance(const Point& x) const;
  double diameter() const;
  /// m(X).
  double measure() const;
  /// Distance from x to the boundary of the domain (infinite on the circle).
  double boundary_distance(const Point& x) const;

  /// Radii at which the sphere of radius u around x changes its intersection
  /// pattern with the domain (and with clip, when given).
  std::vector<double> radial_breakpoints(const Point& x, const Box* clip = nullptr) const;

  /// Circle-space coordinate reduced to [0, circumference).
  double wrap(double t) const;

  BallCache& cache() const { return *cache_; }

 private:
  SpaceKind kind_ = SpaceKind::euclidean_box;
  Box domain_;
  std::array<AxisWeight, 2> weights_{};
  std::string weight_name_ = "lebesgue";
  std::function<int(const Point&)> dim_map_;
  double margin_ = 0.0;
  double circumference_ = 0.0;
  BallMethod method_ = BallMethod::analytic;
  int mc_samples_ = 100000;
  std::shared_ptr<BallCache> cache_ = std::make_shared<BallCache>();
};

struct MeasureEstimate {
  double value = 0.0;
  double error = 0.0;
};

/// m(B(x, r)) with its error bound (zero for analytic evaluation).
MeasureEstimate ball_measure_estimate(const Space& s, const Point& x, double r);
double ball_measure(const Space& s, const Point& x, double r);
/// log m(B(x, r)), finite for radii whose ball mass underflows: small interior
/// balls fall back to w(x) |B_1| r^D. Throws DegenerateSpaceError on null balls.
double log_ball_measure(const Space& s, const Point& x, double r);

/// Area of the disk of radius r around c intersected with a 2D box.
double disk_box_area(double cx, double cy, double r, const Box& box);

/// m(region) for a sub-box of the domain.
double region_measure(const Space& s, const Box& region);

/// Angular intervals (theta0, theta1) of the circle |y - c| = u lying inside
/// box. Each interval spans at most a quarter turn.
std::vector<std::pair<double, double>> circle_arcs(double cx, double cy, double u, const Box& box);

/// Integral of g * w over the sphere {x' : d(x, x') = u} intersected with the
/// domain and clip: counting measure in 1D, arc length in 2D.
template <class G>
double sphere_integral(const Space& s, const Point& x, double u, G&& g, const Box* clip = nullptr,
                       int order = 16) {
  if (s.dim() == 1) {
    double total = 0.0;
    if (s.kind() == SpaceKind::circle) {
      const double half = 0.5 * s.circumference();
      if (u <= 0.0 || u > half) return 0.0;
      const int count = (u == half) ? 1 : 2;
      for (int i = 0; i < count; ++i) {
        const Point y = make_point(s.wrap(x[0] + (i == 0 ? u : -u)));
        if (clip && !clip->contains(y)) continue;
        total += g(y);
      }
      return total;
    }
    for (int sgn : {1, -1}) {
      const Point y = make_point(x[0] + sgn * u);
      if (!s.domain().contains(y)) continue;
      if (clip && !clip->contains(y)) continue;
      total += g(y) * s.weight(y);
    }
    return total;
  }
  const Box region = clip ? s.domain().intersect(*clip) : s.domain();
  if (region.empty()) return 0.0;
  const GaussRule& rule = gauss_legendre(order);
  double total = 0.0;
  for (const auto& [t0, t1] : circle_arcs(x[0], x[1], u, region)) {
    const double half = 0.5 * (t1 - t0);
    const double mid = 0.5 * (t1 + t0);
    double arc = 0.0;
    for (int i = 0; i < order; ++i) {
      const double th = mid + half * rule.nodes[i];
      const Point y = make_point(x[0] + u * std::cos(th), x[1] + u * std::sin(th));
      arc += rule.weights[i] * g(y) * s.weight(y);
    }
    total += half * arc;
  }
  return u * total;
}

struct WeightedNode {
  Point x;
  double w = 0.0;
};

/// Tensor composite Gauss-Legendre rule over the domain with weights
/// including the density. Each axis is cut at lo + t and hi - t for every t in
/// boundary_offsets and at the midpoint; pieces are split into panels no
/// wider than max_panel.
std::vector<WeightedNode> domain_rule(const Space& s, int order, double max_panel,
                                      const std::vector<double>& boundary_offsets = {});

struct SamplePoint {
  Point x;
  double weight = 0.0;
};

/// Jittered stratified sample of region with weights proportional to the
/// density, normalized so they sum to m(region).
std::vector<SamplePoint> sample_points(const Space& s, const Box& region, int n, std::uint64_t seed);

struct DoublingReport {
  double c_d = 1.0;
  std::vector<double> radii;
  Point worst_center;
  double worst_radius = 0.0;
};

/// sup of m(B(x,2r)) / m(B(x,r)) over a grid of centers in region and the
/// given radii.
DoublingReport estimate_doubling(const Space& s, const Box& region, const std::vector<double>& radii);

struct DimensionEstimate {
  double value = 0.0;
  std::vector<double> radii;
  std::vector<double> per_radius;
  bool converged = true;
};

/// log(m(B(x,hr)) / m(B(x,r))) / log h over a decreasing radius grid,
/// extrapolated linearly to r = 0. Diagnostic only.
DimensionEstimate dimension_at(const Space& s, const Point& x, const std::vector<double>& radii, double h);

}  // namespace bbm
