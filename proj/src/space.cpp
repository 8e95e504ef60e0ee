#include "bbm/space.hpp"

#include "bbm/extrapolate.hpp"
#include "bbm/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

namespace bbm {

std::string to_string(SpaceKind k) {
  switch (k) {
    case SpaceKind::euclidean_box: return "euclidean-box";
    case SpaceKind::weighted_interval: return "weighted-interval";
    case SpaceKind::circle: return "circle";
    case SpaceKind::product: return "product";
  }
  return "?";
}

std::string to_string(BallMethod m) {
  switch (m) {
    case BallMethod::analytic: return "analytic";
    case BallMethod::quadrature: return "quadrature";
    case BallMethod::monte_carlo: return "monte-carlo";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// cache

double quantize(double v) {
  if (v == 0.0 || !std::isfinite(v)) return v;
  const int e10 = static_cast<int>(std::floor(std::log10(std::abs(v))));
  const double scale = std::pow(10.0, 11 - e10);
  return std::round(v * scale) / scale;
}

bool BallCache::find(const Key& key, double& value) const {
  std::lock_guard<std::mutex> lock(mutex_);
  const auto it = map_.find(key);
  if (it == map_.end()) return false;
  value = it->second;
  return true;
}

void BallCache::insert(const Key& key, double value) {
  std::lock_guard<std::mutex> lock(mutex_);
  if (map_.size() < kMaxEntries) map_.emplace(key, value);
}

std::size_t BallCache::size() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return map_.size();
}

// ---------------------------------------------------------------------------
// Space

Space Space::euclidean_box(const Box& box) {
  if (box.dim < 1 || box.dim > 2) throw DomainError("euclidean_box: dimension must be 1 or 2");
  if (box.empty()) throw DomainError("euclidean_box: empty domain");
  Space s;
  s.kind_ = SpaceKind::euclidean_box;
  s.domain_ = box;
  return s;
}

Space Space::interval(double lo, double hi) { return euclidean_box(Box(Interval{lo, hi})); }

Space Space::unit_cube(int d) {
  if (d == 1) return interval(0.0, 1.0);
  if (d == 2) return euclidean_box(Box(Interval{0.0, 1.0}, Interval{0.0, 1.0}));
  throw DomainError("unit_cube: dimension must be 1 or 2");
}

namespace {

void check_weight(const AxisWeight& w, Interval iv) {
  if (!w) return;
  for (int i = 0; i <= 64; ++i) {
    const double t = iv.lo + iv.length() * i / 64.0;
    const double v = w(t);
    if (!(v > 0.0) || !std::isfinite(v))
      throw DomainError("weight must be positive and finite on the domain");
  }
}

}  // namespace

Space Space::weighted_interval(Interval domain, AxisWeight w, std::string weight_name) {
  if (!(domain.hi > domain.lo)) throw DomainError("weighted_interval: empty domain");
  check_weight(w, domain);
  Space s;
  s.kind_ = SpaceKind::weighted_interval;
  s.domain_ = Box(domain);
  s.weights_[0] = std::move(w);
  s.weight_name_ = std::move(weight_name);
  s.method_ = BallMethod::quadrature;
  return s;
}

Space Space::circle(double circumference) {
  if (!(circumference > 0.0)) throw DomainError("circle: circumference must be positive");
  Space s;
  s.kind_ = SpaceKind::circle;
  s.domain_ = Box(Interval{0.0, circumference});
  s.circumference_ = circumference;
  return s;
}

Space Space::product(Interval a, AxisWeight wa, Interval b, AxisWeight wb, std::string weight_name) {
  if (!(a.hi > a.lo) || !(b.hi > b.lo)) throw DomainError("product: empty factor");
  check_weight(wa, a);
  check_weight(wb, b);
  Space s;
  s.kind_ = SpaceKind::product;
  s.domain_ = Box(a, b);
  s.weights_[0] = std::move(wa);
  s.weights_[1] = std::move(wb);
  s.weight_name_ = std::move(weight_name);
  s.method_ = s.weighted() ? BallMethod::quadrature : BallMethod::analytic;
  return s;
}

void Space::set_interior_margin(double m) {
  if (!(m >= 0.0) || m >= 0.5 * domain_.min_side())
    throw DomainError("interior margin must lie in [0, half the smallest side)");
  margin_ = m;
}

void Space::set_ball_method(BallMethod m) {
  if (m == BallMethod::analytic && weighted())
    throw DomainError("analytic ball measure is only available for unweighted spaces");
  method_ = m;
}

double Space::axis_weight(int axis, double t) const {
  return weights_[axis] ? weights_[axis](t) : 1.0;
}

double Space::weight(const Point& x) const {
  double w = axis_weight(0, x[0]);
  if (dim() == 2) w *= axis_weight(1, x[1]);
  return w;
}

bool Space::contains(const Point& x) const {
  if (x.size() != dim()) return false;
  for (int i = 0; i < dim(); ++i) {
    const Interval& iv = domain_.axis[i];
    const double tol = 1e-12 * std::max(1.0, iv.length());
    if (!(x[i] >= iv.lo - tol && x[i] <= iv.hi + tol)) return false;
  }
  return true;
}

void Space::require(const Point& x, const char* what) const {
  if (!contains(x)) throw DomainError(std::string(what) + ": point outside the domain");
}

double Space::wrap(double t) const {
  double r = std::fmod(t, circumference_);
  if (r < 0.0) r += circumference_;
  return r;
}

double Space::distance(const Point& a, const Point& b) const {
  if (kind_ == SpaceKind::circle) {
    const double t = wrap(a[0] - b[0]);
    return std::min(t, circumference_ - t);
  }
  return (a - b).norm();
}

double Space::max_distance(const Point& x) const {
  if (kind_ == SpaceKind::circle) return 0.5 * circumference_;
  double sq = 0.0;
  for (int i = 0; i < dim(); ++i) {
    const double e = std::max(x[i] - domain_.axis[i].lo, domain_.axis[i].hi - x[i]);
    sq += e * e;
  }
  return std::sqrt(sq);
}

double Space::diameter() const {
  if (kind_ == SpaceKind::circle) return 0.5 * circumference_;
  double sq = 0.0;
  for (int i = 0; i < dim(); ++i) sq += domain_.axis[i].length() * domain_.axis[i].length();
  return std::sqrt(sq);
}

double Space::measure() const { return region_measure(*this, domain_); }

double Space::boundary_distance(const Point& x) const {
  if (kind_ == SpaceKind::circle) return std::numeric_limits<double>::infinity();
  double d = std::numeric_limits<double>::infinity();
  for (int i = 0; i < dim(); ++i)
    d = std::min({d, x[i] - domain_.axis[i].lo, domain_.axis[i].hi - x[i]});
  return d;
}

namespace {

void push_box_breaks(const Point& x, const Box& box, std::vector<double>& out) {
  if (box.dim == 1) {
    out.push_back(std::abs(x[0] - box.axis[0].lo));
    out.push_back(std::abs(box.axis[0].hi - x[0]));
    return;
  }
  for (int i = 0; i < 2; ++i) {
    out.push_back(std::abs(x[i] - box.axis[i].lo));
    out.push_back(std::abs(box.axis[i].hi - x[i]));
  }
  for (double cx : {box.axis[0].lo, box.axis[0].hi})
    for (double cy : {box.axis[1].lo, box.axis[1].hi}) out.push_back(std::hypot(cx - x[0], cy - x[1]));
}

}  // namespace

std::vector<double> Space::radial_breakpoints(const Point& x, const Box* clip) const {
  std::vector<double> out;
  if (kind_ == SpaceKind::circle) {
    out.push_back(0.5 * circumference_);
    if (clip) {
      for (double e : {clip->axis[0].lo, clip->axis[0].hi}) {
        const double t = wrap(e - x[0]);
        out.push_back(std::min(t, circumference_ - t));
      }
    }
  } else {
    push_box_breaks(x, domain_, out);
    if (clip) push_box_breaks(x, *clip, out);
  }
  std::vector<double> pos;
  for (double b : out)
    if (b > 0.0 && std::isfinite(b)) pos.push_back(b);
  std::sort(pos.begin(), pos.end());
  return pos;
}

// ---------------------------------------------------------------------------
// ball measure

double disk_box_area(double cx, double cy, double r, const Box& box) {
  if (!(r > 0.0)) return 0.0;
  // Everything in offsets from the center so the chord ends at +-r stay exact.
  const double y0 = box.axis[1].lo - cy;
  const double y1 = box.axis[1].hi - cy;
  const double x0 = std::max(box.axis[0].lo - cx, -r);
  const double x1 = std::min(box.axis[0].hi - cx, r);
  if (!(x1 > x0) || !(y1 > y0)) return 0.0;
  if (x0 == -r && x1 == r && y0 <= -r && y1 >= r) return kPi * r * r;

  std::vector<double> pts{x0, x1};
  for (double y : {y0, y1}) {
    if (std::abs(y) < r) {
      const double dx = std::sqrt((r - y) * (r + y));
      for (double b : {-dx, dx})
        if (b > x0 && b < x1) pts.push_back(b);
    }
  }
  std::sort(pts.begin(), pts.end());
  // Antiderivative of sqrt(r^2 - t^2).
  auto big_s = [r](double t) {
    t = std::clamp(t, -r, r);
    return 0.5 * (t * std::sqrt(std::max(0.0, (r - t) * (r + t))) + r * r * std::asin(t / r));
  };
  double area = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double a = pts[i];
    const double b = pts[i + 1];
    if (!(b > a)) continue;
    const double xm = 0.5 * (a + b);
    const double sm = std::sqrt(std::max(0.0, (r - xm) * (r + xm)));
    const bool upper_arc = sm < y1;
    const bool lower_arc = -sm > y0;
    if (!((upper_arc ? sm : y1) > (lower_arc ? -sm : y0))) continue;
    const double len = b - a;
    const double arc = big_s(b) - big_s(a);
    area += (upper_arc ? arc : y1 * len) - (lower_arc ? -arc : y0 * len);
  }
  return std::max(0.0, area);
}

namespace {

double axis_integral(const Space& s, int axis, double a, double b) {
  if (!(b > a)) return 0.0;
  if (!s.weighted()) return b - a;
  return integrate_adaptive([&](double t) { return s.axis_weight(axis, t); }, a, b, 1e-13, 10, 30);
}

/// Weight integral over [c - h, c + h] clipped to the domain axis, in offsets
/// from c so tiny h does not cancel against c.
double axis_span(const Space& s, int axis, double c, double h) {
  const Interval& iv = s.domain().axis[axis];
  const double down = std::clamp(c - iv.lo, 0.0, h);
  const double up = std::clamp(iv.hi - c, 0.0, h);
  if (!s.weighted()) return down + up;
  return integrate_adaptive([&](double t) { return s.axis_weight(axis, c + t); }, -down, up, 1e-13, 10, 30);
}

double quadrature_ball(const Space& s, const Point& x, double r) {
  const Box& dom = s.domain();
  if (s.dim() == 1) {
    if (s.kind() == SpaceKind::circle) return std::min(2.0 * r, s.circumference());
    return axis_span(s, 0, x[0], r);
  }
  // X = cx + r sin(phi) makes the chord half-length r cos(phi) smooth; the
  // clamps against the box create kinks that become breakpoints in phi.
  const double cx = x[0];
  const double cy = x[1];
  auto to_phi = [&](double X) { return std::asin(std::clamp((X - cx) / r, -1.0, 1.0)); };
  std::vector<double> breaks{to_phi(dom.axis[0].lo), to_phi(dom.axis[0].hi)};
  for (double y : {dom.axis[1].lo, dom.axis[1].hi}) {
    const double dy = std::abs(y - cy);
    if (dy < r) {
      const double a = std::acos(dy / r);
      breaks.push_back(-a);
      breaks.push_back(a);
    }
  }
  const double p0 = std::max(-0.5 * kPi, to_phi(dom.axis[0].lo));
  const double p1 = std::min(0.5 * kPi, to_phi(dom.axis[0].hi));
  std::sort(breaks.begin(), breaks.end());
  auto integrand = [&](double phi) {
    const double X = cx + r * std::sin(phi);
    const double half = r * std::cos(phi);
    if (!(half > 0.0)) return 0.0;
    return s.axis_weight(0, X) * axis_span(s, 1, cy, half) * half;
  };
  double total = 0.0;
  double a = p0;
  for (double b : breaks) {
    if (b <= a) continue;
    if (b > p1) b = p1;
    total += integrate_adaptive(integrand, a, b, 1e-12, 10, 20);
    a = b;
    if (a >= p1) break;
  }
  if (a < p1) total += integrate_adaptive(integrand, a, p1, 1e-12, 10, 20);
  return total;
}

MeasureEstimate monte_carlo_ball(const Space& s, const Point& x, double r, std::uint64_t seed) {
  Box bound = s.domain();
  if (s.kind() != SpaceKind::circle) {
    Box ball = s.domain();
    for (int i = 0; i < s.dim(); ++i) ball.axis[i] = Interval{x[i] - r, x[i] + r};
    bound = s.domain().intersect(ball);
  }
  if (bound.empty()) return {};
  const int n = std::max(16, s.mc_samples());
  const double vol = bound.volume();
  Rng rng(seed);
  // Stratify along the first axis, uniform along the second.
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    Point y(s.dim());
    y[0] = bound.axis[0].lo + bound.axis[0].length() * (i + rng.uniform()) / n;
    if (s.dim() == 2) y[1] = rng.uniform(bound.axis[1].lo, bound.axis[1].hi);
    const double v = s.distance(x, y) <= r ? s.weight(y) * vol : 0.0;
    sum += v;
    sum_sq += v * v;
  }
  const double mean = sum / n;
  const double var = std::max(0.0, sum_sq / n - mean * mean);
  return {mean, std::sqrt(var / (n - 1))};
}

std::uint64_t key_hash(const BallCache::Key& key) {
  std::uint64_t h = 1469598103934665603ULL;
  for (double v : key) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    h = (h ^ bits) * 1099511628211ULL;
  }
  return h;
}

}  // namespace

MeasureEstimate ball_measure_estimate(const Space& s, const Point& x, double r) {
  s.require(x, "ball_measure");
  if (r < 0.0 || std::isnan(r)) throw DomainError("ball_measure: negative radius");
  if (r == 0.0) return {};
  if (r >= s.max_distance(x)) return {s.measure(), 0.0};

  if (s.ball_method() == BallMethod::analytic) {
    const Box& dom = s.domain();
    if (s.kind() == SpaceKind::circle) return {std::min(2.0 * r, s.circumference()), 0.0};
    if (s.dim() == 1)
      return {std::clamp(x[0] - dom.axis[0].lo, 0.0, r) + std::clamp(dom.axis[0].hi - x[0], 0.0, r), 0.0};
    if (r <= s.boundary_distance(x)) return {kPi * r * r, 0.0};
    return {disk_box_area(x[0], x[1], r, dom), 0.0};
  }

  Point xq = x;
  for (int i = 0; i < x.size(); ++i) xq[i] = quantize(x[i]);
  const double rq = quantize(r);
  const double tag = s.ball_method() == BallMethod::quadrature ? 0.0 : 1.0;
  BallCache::Key key{xq[0], s.dim() == 2 ? xq[1] : 0.0, rq, tag};
  BallCache::Key err_key = key;
  err_key[3] = 2.0;
  double value = 0.0;
  double error = 0.0;
  if (s.cache().find(key, value)) {
    if (tag == 1.0) s.cache().find(err_key, error);
    return {value, error};
  }
  if (tag == 0.0) {
    value = quadrature_ball(s, xq, rq);
    // Adaptive rule tolerance.
    error = 1e-12 * value;
  } else {
    const MeasureEstimate est = monte_carlo_ball(s, xq, rq, key_hash(key));
    value = est.value;
    error = est.error;
    s.cache().insert(err_key, error);
  }
  s.cache().insert(key, value);
  return {value, error};
}

double ball_measure(const Space& s, const Point& x, double r) { return ball_measure_estimate(s, x, r).value; }

double log_ball_measure(const Space& s, const Point& x, double r) {
  const double m = ball_measure(s, x, r);
  if (m > 1e-280) return std::log(m);
  if (r > 0.0 && r < s.boundary_distance(x)) {
    const double w = s.weight(x);
    if (w > 0.0) return std::log(w) + std::log(s.dim() == 1 ? 2.0 : kPi) + s.dim() * std::log(r);
  }
  if (m > 0.0) return std::log(m);
  throw DegenerateSpaceError("ball of zero measure at radius " + std::to_string(r));
}

double region_measure(const Space& s, const Box& region) {
  if (region.empty()) throw DomainError("region_measure: empty region");
  double m = 1.0;
  for (int i = 0; i < region.dim; ++i) m *= axis_integral(s, i, region.axis[i].lo, region.axis[i].hi);
  return m;
}

// ---------------------------------------------------------------------------
// spheres

std::vector<std::pair<double, double>> circle_arcs(double cx, double cy, double u, const Box& box) {
  std::vector<double> cuts{0.0, 0.5 * kPi, kPi, 1.5 * kPi, kTwoPi};
  auto add = [&](double th) {
    th = std::fmod(th, kTwoPi);
    if (th < 0.0) th += kTwoPi;
    cuts.push_back(th);
  };
  for (double a : {box.axis[0].lo, box.axis[0].hi}) {
    const double c = (a - cx) / u;
    if (std::abs(c) <= 1.0) {
      const double th = std::acos(c);
      add(th);
      add(-th);
    }
  }
  for (double b : {box.axis[1].lo, box.axis[1].hi}) {
    const double c = (b - cy) / u;
    if (std::abs(c) <= 1.0) {
      const double th = std::asin(c);
      add(th);
      add(kPi - th);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  std::vector<std::pair<double, double>> arcs;
  const double tol = 1e-13 * std::max(1.0, u);
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i];
    const double b = cuts[i + 1];
    if (b - a <= 1e-15) continue;
    const double m = 0.5 * (a + b);
    const double px = cx + u * std::cos(m);
    const double py = cy + u * std::sin(m);
    if (px >= box.axis[0].lo - tol && px <= box.axis[0].hi + tol && py >= box.axis[1].lo - tol &&
        py <= box.axis[1].hi + tol)
      arcs.emplace_back(a, b);
  }
  return arcs;
}

// ---------------------------------------------------------------------------
// sampling

std::vector<SamplePoint> sample_points(const Space& s, const Box& region, int n, std::uint64_t seed) {
  if (n < 1) throw DomainError("sample_points: n must be positive");
  if (region.empty() || region.dim != s.dim()) throw DomainError("sample_points: empty region");
  for (int i = 0; i < region.dim; ++i) {
    const Interval& d = s.domain().axis[i];
    const double tol = 1e-12 * std::max(1.0, d.length());
    if (region.axis[i].lo < d.lo - tol || region.axis[i].hi > d.hi + tol)
      throw DomainError("sample_points: region not inside the domain");
  }
  Rng rng(seed);
  std::vector<SamplePoint> out;
  out.reserve(n);
  if (region.dim == 1) {
    const Interval& iv = region.axis[0];
    for (int i = 0; i < n; ++i)
      out.push_back({make_point(iv.lo + iv.length() * (i + rng.uniform()) / n), 0.0});
  } else {
    // m x m jittered grid; leftover points are uniform over the region.
    const int m = static_cast<int>(std::floor(std::sqrt(static_cast<double>(n))));
    const Interval& a = region.axis[0];
    const Interval& b = region.axis[1];
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        out.push_back({make_point(a.lo + a.length() * (i + rng.uniform()) / m,
                                  b.lo + b.length() * (j + rng.uniform()) / m),
                       0.0});
    while (static_cast<int>(out.size()) < n)
      out.push_back({make_point(rng.uniform(a.lo, a.hi), rng.uniform(b.lo, b.hi)), 0.0});
  }
  double total = 0.0;
  for (auto& p : out) {
    p.weight = s.weight(p.x);
    total += p.weight;
  }
  const double mass = region_measure(s, region);
  for (auto& p : out) p.weight *= mass / total;
  return out;
}

// ---------------------------------------------------------------------------
// diagnostics

DoublingReport estimate_doubling(const Space& s, const Box& region, const std::vector<double>& radii) {
  if (radii.empty()) throw InputError("estimate_doubling: empty radius grid");
  if (region.empty()) throw DomainError("estimate_doubling: empty region");
  DoublingReport rep;
  rep.radii = radii;
  rep.c_d = 1.0;
  const int per_axis = region.dim == 1 ? 81 : 21;
  std::vector<Point> centers;
  for (int i = 0; i < per_axis; ++i) {
    const double t = region.axis[0].lo + region.axis[0].length() * i / (per_axis - 1);
    if (region.dim == 1) {
      centers.push_back(make_point(t));
      continue;
    }
    for (int j = 0; j < per_axis; ++j)
      centers.push_back(make_point(t, region.axis[1].lo + region.axis[1].length() * j / (per_axis - 1)));
  }
  rep.worst_center = centers.front();
  for (const Point& x : centers) {
    for (double r : radii) {
      if (!(r > 0.0)) throw InputError("estimate_doubling: radii must be positive");
      const double small = ball_measure(s, x, r);
      if (!(small > 0.0)) throw DegenerateSpaceError("estimate_doubling: ball of zero measure");
      const double ratio = ball_measure(s, x, 2.0 * r) / small;
      if (ratio > rep.c_d) {
        rep.c_d = ratio;
        rep.worst_center = x;
        rep.worst_radius = r;
      }
    }
  }
  return rep;
}

DimensionEstimate dimension_at(const Space& s, const Point& x, const std::vector<double>& radii, double h) {
  s.require(x, "dimension_at");
  if (!(h > 1.0)) throw InputError("dimension_at: h must exceed 1");
  if (radii.empty()) throw InputError("dimension_at: empty radius grid");
  DimensionEstimate est;
  est.radii = radii;
  for (double r : radii) {
    const double small = ball_measure(s, x, r);
    if (!(small > 0.0)) throw DegenerateSpaceError("dimension_at: ball of zero measure");
    est.per_radius.push_back(std::log(ball_measure(s, x, h * r) / small) / std::log(h));
  }
  const std::size_t n = radii.size();
  if (n >= 3) {
    const LinearFit fit = fit_linear(radii, est.per_radius);
    est.value = fit.a;
    // A trend that has not settled: successive differences fail to shrink.
    const double d1 = std::abs(est.per_radius[n - 1] - est.per_radius[n - 2]);
    const double d0 = std::abs(est.per_radius[n - 2] - est.per_radius[n - 3]);
    est.converged = d1 <= d0 + 1e-12 && std::abs(fit.a - est.per_radius[n - 1]) <= 0.05 * std::abs(fit.a) + 1e-12;
  } else {
    est.value = est.per_radius.back();
    est.converged = n == 1 || std::abs(est.per_radius[n - 1] - est.per_radius[0]) <= 0.05 * est.value;
  }
  return est;
}

}  // namespace bbm

namespace bbm {

std::vector<WeightedNode> domain_rule(const Space& s, int order, double max_panel,
                                      const std::vector<double>& boundary_offsets) {
  std::array<std::vector<Node1D>, 2> axes;
  for (int i = 0; i < s.dim(); ++i) {
    const Interval& iv = s.domain().axis[i];
    std::vector<double> breaks{0.5 * (iv.lo + iv.hi)};
    if (s.kind() != SpaceKind::circle) {
      for (double t : boundary_offsets) {
        if (t <= 0.0 || t >= 0.5 * iv.length()) continue;
        breaks.push_back(iv.lo + t);
        breaks.push_back(iv.hi - t);
      }
    }
    axes[i] = composite_rule(iv.lo, iv.hi, breaks, max_panel, order);
  }
  std::vector<WeightedNode> out;
  if (s.dim() == 1) {
    out.reserve(axes[0].size());
    for (const auto& a : axes[0]) {
      const Point x = make_point(a.x);
      out.push_back({x, a.w * s.weight(x)});
    }
    return out;
  }
  out.reserve(axes[0].size() * axes[1].size());
  for (const auto& a : axes[0])
    for (const auto& b : axes[1]) {
      const Point x = make_point(a.x, b.x);
      out.push_back({x, a.w * b.w * s.weight(x)});
    }
  return out;
}

}  // namespace bbm
