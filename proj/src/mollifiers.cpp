#include "bbm/mollifiers.hpp"

#include "bbm/parallel.hpp"
#include "bbm/quadrature.hpp"
#include "bbm/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace bbm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double positive_ball(const Space& s, const Point& x, double r) {
  const double m = ball_measure(s, x, r);
  if (!(m > 0.0)) throw DegenerateSpaceError("ball of zero measure at radius " + std::to_string(r));
  return m;
}

}  // namespace

std::string to_string(MollifierKind k) {
  switch (k) {
    case MollifierKind::rho0: return "rho0";
    case MollifierKind::rho1: return "rho1";
    case MollifierKind::rho2: return "rho2";
    case MollifierKind::rho3: return "rho3";
    case MollifierKind::annulus: return "annulus";
  }
  return "?";
}

MollifierKind parse_mollifier(const std::string& name) {
  if (name == "rho0") return MollifierKind::rho0;
  if (name == "rho1") return MollifierKind::rho1;
  if (name == "rho2") return MollifierKind::rho2;
  if (name == "rho3") return MollifierKind::rho3;
  if (name == "annulus") return MollifierKind::annulus;
  throw InputError("unknown mollifier family '" + name + "'");
}

double theta_formula(MollifierKind kind, double p, int dim) {
  if (dim < 1) throw InputError("theta_formula: dimension must be positive");
  const double d = dim;
  switch (kind) {
    case MollifierKind::rho0: return (d + p) / (std::pow(4.0, d) * p);
    case MollifierKind::rho1: return 1.0;
    case MollifierKind::rho2: return (d + p) / d;
    case MollifierKind::rho3: return (d + p) / p;
    case MollifierKind::annulus: break;
  }
  throw InputError("theta_formula: no constant for the annulus kernel");
}

double theta_formula(const MollifierFamily& fam, double p, int dim) { return theta_formula(fam.kind, p, dim); }

// ---------------------------------------------------------------------------
// kernels

RadialKernel::RadialKernel(const MollifierFamily& fam, double delta, const Point& x)
    : fam_(&fam), delta_(delta), x_(x) {
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("kernel: delta must lie in (0, 1)");
  if (fam.kind == MollifierKind::rho1 || fam.kind == MollifierKind::annulus || fam.kind == MollifierKind::rho2) {
    const double m = positive_ball(fam.space, x, delta);
    scale_ = fam.kind == MollifierKind::rho2 ? 1.0 / m : 1.0 / (std::pow(delta, fam.p) * m);
  }
}

double RadialKernel::operator()(double u) const {
  const double p = fam_->p;
  switch (fam_->kind) {
    case MollifierKind::rho0:
      if (u <= 0.0) return 0.0;
      return delta_ / (std::pow(u, p * (1.0 - delta_)) * positive_ball(fam_->space, x_, 4.0 * u));
    case MollifierKind::rho1: return u <= delta_ ? scale_ : 0.0;
    case MollifierKind::rho2:
      if (u <= 0.0 || u > delta_) return 0.0;
      return scale_ / std::pow(u, p);
    case MollifierKind::rho3:
      if (u <= 0.0 || u > delta_) return 0.0;
      return 1.0 / (std::pow(delta_, p) * positive_ball(fam_->space, x_, u));
    case MollifierKind::annulus: return (u >= 0.5 * delta_ && u <= delta_) ? scale_ : 0.0;
  }
  return 0.0;
}

double RadialKernel::support() const {
  return fam_->kind == MollifierKind::rho0 ? std::numeric_limits<double>::infinity() : delta_;
}

std::vector<double> RadialKernel::breakpoints() const {
  std::vector<double> out;
  switch (fam_->kind) {
    case MollifierKind::rho0:
      for (double b : fam_->space.radial_breakpoints(x_)) out.push_back(0.25 * b);
      break;
    case MollifierKind::annulus:
      out.push_back(0.5 * delta_);
      out.push_back(delta_);
      break;
    default: out.push_back(delta_);
  }
  return out;
}

double kernel(const MollifierFamily& fam, double delta, const Point& x, const Point& xp) {
  fam.space.require(x, "kernel");
  fam.space.require(xp, "kernel");
  return RadialKernel(fam, delta, x)(fam.space.distance(x, xp));
}

double log_sigma(const MollifierFamily& fam, double delta, const Point& x, double r) {
  if (!(r > 0.0)) throw DomainError("sigma: radius must be positive");
  const Space& s = fam.space;
  const double reach = s.max_distance(x);
  if (r >= reach) return kNegInf;
  const double p = fam.p;
  switch (fam.kind) {
    case MollifierKind::rho0:
      return std::log(delta) - p * (1.0 - delta) * std::log(r) - log_ball_measure(s, x, 4.0 * r);
    case MollifierKind::rho1:
      if (r >= delta) return kNegInf;
      return -p * std::log(delta) - log_ball_measure(s, x, delta);
    case MollifierKind::rho2:
      if (r >= delta) return kNegInf;
      return -p * std::log(r) - log_ball_measure(s, x, delta);
    case MollifierKind::rho3:
      if (r >= delta) return kNegInf;
      return -p * std::log(delta) - log_ball_measure(s, x, r);
    case MollifierKind::annulus:
      if (r >= delta || reach < 0.5 * delta) return kNegInf;
      return -p * std::log(delta) - log_ball_measure(s, x, delta);
  }
  return kNegInf;
}

double sigma(const MollifierFamily& fam, double delta, const Point& x, double r) {
  return std::exp(log_sigma(fam, delta, x, r));
}

double layer_mass(const MollifierFamily& fam, double delta, const Point& x, double r) {
  const double ls = log_sigma(fam, delta, x, r);
  if (ls == kNegInf) return 0.0;
  return std::exp(ls + log_ball_measure(fam.space, x, r) + fam.p * std::log(r));
}

double sigma_brute_force(const MollifierFamily& fam, double delta, const Point& x, double r, int n,
                         std::uint64_t seed) {
  const Space& s = fam.space;
  const double reach = s.max_distance(x);
  if (r >= reach) return 0.0;
  const RadialKernel k(fam, delta, x);
  Rng rng(seed);
  double best = 0.0;
  int accepted = 0;
  for (int attempt = 0; accepted < n && attempt < 50 * n; ++attempt) {
    const double t = rng.uniform();
    const double u = r + (reach - r) * t * t * t;
    Point y = x;
    if (s.dim() == 1) {
      y[0] = x[0] + (rng.uniform() < 0.5 ? u : -u);
      if (s.kind() == SpaceKind::circle) y[0] = s.wrap(y[0]);
    } else {
      const double th = kTwoPi * rng.uniform();
      y[0] = x[0] + u * std::cos(th);
      y[1] = x[1] + u * std::sin(th);
    }
    if (!s.contains(y)) continue;
    const double d = s.distance(x, y);
    if (!(d > r)) continue;
    ++accepted;
    best = std::max(best, k(d));
  }
  return best;
}

// ---------------------------------------------------------------------------
// layer weights

double LayerTerms::lower_sum() const {
  double s = lower_tail;
  for (double v : lower) s += v;
  return s;
}

double LayerTerms::upper_sum() const {
  double s = upper_tail;
  for (double v : upper) s += v;
  return s;
}

namespace {

/// |exp(a) - exp(b)| without overflow in the intermediate exponentials.
double abs_exp_diff(double a, double b) {
  if (a == kNegInf && b == kNegInf) return 0.0;
  const double hi = std::max(a, b);
  const double lo = std::min(a, b);
  return std::exp(hi) * -std::expm1(lo - hi);
}

struct Scales {
  std::vector<double> radii;
  std::vector<double> log_sigma;
  std::vector<double> log_mass;  // log(m(B(r_k)) r_k^p)
};

class ScaleLadder {
 public:
  ScaleLadder(const MollifierFamily& fam, double delta, const Point& x, double r, double h)
      : fam_(fam), delta_(delta), x_(x), r_(r), h_(h) {
    if (!(h > 1.0)) throw InputError("layer weights need h > 1");
    if (!(r > 0.0)) throw DomainError("layer weights need r > 0");
  }

  double radius(int k) { fill(k); return s_.radii[k]; }
  double log_sigma(int k) { fill(k); return s_.log_sigma[k]; }
  double log_mass(int k) { fill(k); return s_.log_mass[k]; }

 private:
  void fill(int k) {
    while (static_cast<int>(s_.radii.size()) <= k) {
      const int j = static_cast<int>(s_.radii.size());
      const double rk = r_ * std::pow(h_, -j);
      s_.radii.push_back(rk);
      s_.log_sigma.push_back(bbm::log_sigma(fam_, delta_, x_, rk));
      s_.log_mass.push_back(log_ball_measure(fam_.space, x_, rk) + fam_.p * std::log(rk));
    }
  }

  const MollifierFamily& fam_;
  double delta_;
  Point x_;
  double r_;
  double h_;
  Scales s_;
};

/// Appends terms produced by term(k) until the scale or term tolerance stops
/// the series, then closes it with a geometric tail.
template <class Term>
void run_series(Term term, ScaleLadder& ladder, double r, const LayerOptions& opt, std::vector<double>& out,
                double& tail, bool& by_scale) {
  double sum = 0.0;
  for (int k = 0; k < opt.k_max; ++k) {
    if (ladder.radius(k) < opt.scale_floor * r) {
      by_scale = true;
      break;
    }
    const double t = term(k);
    out.push_back(t);
    sum += t;
    if (sum > 0.0 && t < opt.term_tol * sum && k > 0) break;
  }
  tail = 0.0;
  const std::size_t n = out.size();
  if (n >= 2 && out[n - 2] > 0.0) {
    const double q = out[n - 1] / out[n - 2];
    if (q > 0.0 && q < 1.0) tail = out[n - 1] * q / (1.0 - q);
  }
}

}  // namespace

LayerTerms pi_terms(const MollifierFamily& fam, double delta, const Point& x, double r, double h,
                    const LayerOptions& opt) {
  ScaleLadder ladder(fam, delta, x, r, h);
  LayerTerms out;
  auto increment = [&](int k, double log_mass) {
    const double a = ladder.log_sigma(k) + log_mass;
    if (k == 0) return a == kNegInf ? 0.0 : std::exp(a);
    return abs_exp_diff(a, ladder.log_sigma(k - 1) + log_mass);
  };
  bool scale_u = false;
  bool scale_l = false;
  run_series([&](int k) { return increment(k, ladder.log_mass(k)); }, ladder, r, opt, out.upper, out.upper_tail,
             scale_u);
  run_series([&](int k) { return increment(k, ladder.log_mass(k + 1)); }, ladder, r, opt, out.lower,
             out.lower_tail, scale_l);
  out.stopped_by_scale = scale_u || scale_l;
  for (std::size_t k = 0; k < std::max(out.upper.size(), out.lower.size()); ++k)
    out.radii.push_back(ladder.radius(static_cast<int>(k)));
  return out;
}

LayerTerms pi_terms(const MollifierFamily& fam, double delta, const Point& x, double r, double h, int k_max) {
  if (k_max < 1) throw InputError("pi_terms: k_max must be at least 1");
  LayerOptions opt;
  opt.k_max = k_max;
  return pi_terms(fam, delta, x, r, h, opt);
}

LayerTerms shell_upper_terms(const MollifierFamily& fam, double delta, const Point& x, double r, double h,
                             const LayerOptions& opt) {
  ScaleLadder ladder(fam, delta, x, r, h);
  LayerTerms out;
  bool by_scale = false;
  run_series(
      [&](int k) {
        const double a = ladder.log_sigma(k + 1) + ladder.log_mass(k);
        if (k == 0) return a == kNegInf ? 0.0 : std::exp(a);
        return abs_exp_diff(a, ladder.log_sigma(k) + ladder.log_mass(k));
      },
      ladder, r, opt, out.upper, out.upper_tail, by_scale);
  out.stopped_by_scale = by_scale;
  for (std::size_t k = 0; k < out.upper.size(); ++k) out.radii.push_back(ladder.radius(static_cast<int>(k)));
  return out;
}

// ---------------------------------------------------------------------------
// admissibility

bool AdmissibilityReport::admissible() const {
  for (int i = 0; i < 5 && i < static_cast<int>(conditions.size()); ++i)
    if (!conditions[i].pass) return false;
  return conditions.size() >= 5;
}

bool AdmissibilityReport::strongly_admissible() const {
  return admissible() && conditions.size() >= 7 && conditions[5].pass && conditions[6].pass;
}

std::vector<Point> default_probes(const Space& s) {
  const Box& d = s.domain();
  auto at = [&](int axis, double t) { return d.axis[axis].lo + t * d.axis[axis].length(); };
  std::vector<Point> out;
  const double ts[] = {0.4, 0.5, 0.6};
  if (s.dim() == 1) {
    for (double t : {0.4, 0.45, 0.5, 0.55, 0.6}) out.push_back(make_point(at(0, t)));
  } else {
    for (double a : ts)
      for (double b : ts) out.push_back(make_point(at(0, a), at(1, b)));
  }
  return out;
}

namespace {

std::vector<Point> center_grid(const Space& s, int per_axis) {
  const Box& d = s.domain();
  std::vector<Point> out;
  for (int i = 0; i < per_axis; ++i) {
    const double a = d.axis[0].lo + d.axis[0].length() * i / (per_axis - 1);
    if (s.dim() == 1) {
      out.push_back(make_point(a));
      continue;
    }
    for (int j = 0; j < per_axis; ++j)
      out.push_back(make_point(a, d.axis[1].lo + d.axis[1].length() * j / (per_axis - 1)));
  }
  return out;
}

/// Integral over {d(x, .) > r} of rho(x, .) + rho(., x).
double symmetric_tail(const MollifierFamily& fam, double delta, const Point& x, double r) {
  const Space& s = fam.space;
  const double reach = s.max_distance(x);
  if (r >= reach) return 0.0;
  const RadialKernel kx(fam, delta, x);
  const double hi = std::min(reach, std::isfinite(kx.support()) ? kx.support() : reach);
  if (!(hi > r)) return 0.0;
  std::vector<double> breaks = s.radial_breakpoints(x);
  for (double b : kx.breakpoints()) breaks.push_back(b);
  auto shell = [&](double u) {
    const double forward = kx(u);
    return sphere_integral(s, x, u, [&](const Point& y) { return forward + RadialKernel(fam, delta, y)(u); });
  };
  RadialOptions opt;
  opt.order = 8;
  return integrate_radial(shell, r, hi, breaks, opt);
}

/// Value at 0 of the quadratic through the three samples with smallest t.
double lagrange_at_zero(const std::vector<double>& t, const std::vector<double>& v) {
  const std::size_t n = t.size();
  if (n < 3) return v.back();
  const double x0 = t[n - 3], x1 = t[n - 2], x2 = t[n - 1];
  const double l0 = (x1 * x2) / ((x0 - x1) * (x0 - x2));
  const double l1 = (x0 * x2) / ((x1 - x0) * (x1 - x2));
  const double l2 = (x0 * x1) / ((x2 - x0) * (x2 - x1));
  return l0 * v[n - 3] + l1 * v[n - 2] + l2 * v[n - 1];
}

/// Margin of a delta sequence (ordered by decreasing delta) against the
/// delta -> 0 limit being 0.
struct LimitMargin {
  double margin = 0.0;
  bool decreasing = true;
};

LimitMargin zero_limit_margin(const std::vector<double>& deltas, const std::vector<double>& values) {
  LimitMargin out;
  double peak = 0.0;
  for (double v : values) peak = std::max(peak, std::abs(v));
  if (peak == 0.0) return out;
  out.margin = std::abs(lagrange_at_zero(deltas, values)) / peak;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[i - 1] * (1.0 + 1e-12) + 1e-300) out.decreasing = false;
  return out;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

AdmissibilityReport check_admissibility(const MollifierFamily& fam, const AdmissibilityGrids& g) {
  const Space& s = fam.space;
  AdmissibilityReport rep;
  rep.family = to_string(fam.kind);
  rep.p = fam.p;
  rep.dim = s.dim();
  std::vector<double> deltas = g.deltas;
  std::sort(deltas.begin(), deltas.end(), std::greater<>());
  const std::vector<Point> probes = g.probes.empty() ? default_probes(s) : g.probes;
  for (const Point& x : probes) s.require(x, "check_admissibility");
  const int per_axis = g.tail_centers > 0 ? g.tail_centers : (s.dim() == 1 ? 21 : 7);
  const std::vector<Point> centers = center_grid(s, per_axis);

  // i) tails of the symmetrized kernel.
  {
    ConditionVerdict v{"i", true, 0.0, ""};
    std::ostringstream detail;
    for (double r : g.tail_radii) {
      std::vector<double> sup(deltas.size(), 0.0);
      for (std::size_t j = 0; j < deltas.size(); ++j) {
        std::vector<double> vals(centers.size());
        parallel_for(centers.size(), [&](std::size_t c) { vals[c] = symmetric_tail(fam, deltas[j], centers[c], r); });
        for (double t : vals) sup[j] = std::max(sup[j], t);
      }
      const LimitMargin m = zero_limit_margin(deltas, sup);
      v.margin = std::max(v.margin, m.margin);
      if (!(m.margin <= g.threshold) || !m.decreasing) v.pass = false;
      detail << "r=" << fmt(r) << " sup tail at smallest delta " << fmt(sup.back()) << " margin " << fmt(m.margin)
             << (m.decreasing ? "" : " (not decreasing)") << "; ";
    }
    v.detail = detail.str();
    rep.conditions.push_back(v);
  }

  // ii) sigma limits at every center.
  {
    ConditionVerdict v{"ii", true, 0.0, ""};
    for (double r : g.tail_radii) {
      for (const Point& x : centers) {
        std::vector<double> vals;
        for (double d : deltas) vals.push_back(sigma(fam, d, x, r));
        const LimitMargin m = zero_limit_margin(deltas, vals);
        v.margin = std::max(v.margin, m.margin);
        if (!(m.margin <= g.threshold) || !m.decreasing) v.pass = false;
      }
    }
    v.detail = "max relative limit over centers and radii " + fmt(v.margin);
    rep.conditions.push_back(v);
  }

  // iii) monotonicity in the distance on random probes.
  {
    ConditionVerdict v{"iii", true, 0.0, ""};
    Rng rng(g.seed);
    int violations = 0;
    int done = 0;
    for (int attempt = 0; done < g.monotonicity_probes && attempt < 20 * g.monotonicity_probes; ++attempt) {
      const double delta = deltas[attempt % deltas.size()];
      Point x(s.dim());
      for (int i = 0; i < s.dim(); ++i) x[i] = rng.uniform(s.domain().axis[i].lo, s.domain().axis[i].hi);
      auto draw = [&](Point& y) {
        const double u = std::exp(rng.uniform(std::log(1e-3 * delta), std::log(4.0 * delta)));
        y = x;
        if (s.dim() == 1) {
          y[0] += rng.uniform() < 0.5 ? u : -u;
          if (s.kind() == SpaceKind::circle) y[0] = s.wrap(y[0]);
        } else {
          const double th = kTwoPi * rng.uniform();
          y[0] += u * std::cos(th);
          y[1] += u * std::sin(th);
        }
        return s.contains(y);
      };
      Point y1;
      Point y2;
      if (!draw(y1) || !draw(y2)) continue;
      double d1 = s.distance(x, y1);
      double d2 = s.distance(x, y2);
      if (d1 > d2) std::swap(d1, d2);
      const RadialKernel k(fam, delta, x);
      const double k1 = k(d1);
      const double k2 = k(d2);
      ++done;
      if (k1 < k2 * (1.0 - 1e-12)) {
        ++violations;
        v.margin = std::max(v.margin, (k2 - k1) / k2);
      }
    }
    v.pass = violations == 0;
    v.detail = std::to_string(violations) + " violations in " + std::to_string(done) + " probes";
    rep.conditions.push_back(v);
  }

  // iv) sigma(r) m(B(x,r)) r^p -> 0 along r = r0 10^-j.
  {
    ConditionVerdict v{"iv", true, 0.0, ""};
    const double r0 = g.layer_radii.empty() ? 0.1 : *std::max_element(g.layer_radii.begin(), g.layer_radii.end());
    for (const Point& x : probes) {
      for (double d : deltas) {
        std::vector<double> lam;
        for (int j = 0; j <= 305; ++j) lam.push_back(layer_mass(fam, d, x, r0 * std::pow(10.0, -j)));
        const auto peak_it = std::max_element(lam.begin(), lam.end());
        const double peak = *peak_it;
        if (peak == 0.0) continue;
        for (auto it = peak_it + 1; it != lam.end(); ++it)
          if (*it > *(it - 1) * (1.0 + 1e-12)) v.pass = false;
        const double ratio = lam.back() / peak;
        v.margin = std::max(v.margin, ratio);
        if (!(ratio <= 1e-6)) v.pass = false;
      }
    }
    v.detail = "largest final/peak layer mass " + fmt(v.margin);
    rep.conditions.push_back(v);
  }

  const double theta = fam.kind == MollifierKind::annulus ? 0.0 : theta_formula(fam.kind, fam.p, s.dim());
  rep.theta = theta;

  // v) C_M bracket from layer sums at h = 2.
  {
    ConditionVerdict v{"v", true, 0.0, ""};
    std::vector<double> radii = g.layer_radii;
    std::sort(radii.begin(), radii.end(), std::greater<>());
    double finest = 0.0;
    double overall = 1.0;
    double min_lower = std::numeric_limits<double>::infinity();
    for (std::size_t ri = 0; ri < radii.size(); ++ri) {
      for (std::size_t di = 0; di < deltas.size(); ++di) {
        std::vector<LayerTerms> per(probes.size());
        parallel_for(probes.size(), [&](std::size_t i) { per[i] = pi_terms(fam, deltas[di], probes[i], radii[ri], 2.0); });
        std::size_t len = 0;
        for (const auto& t : per) len = std::max({len, t.lower.size(), t.upper.size()});
        double lower = 0.0;
        double upper = 0.0;
        double lower_tail = std::numeric_limits<double>::infinity();
        double upper_tail = 0.0;
        for (std::size_t k = 0; k < len; ++k) {
          double inf_l = std::numeric_limits<double>::infinity();
          double sup_u = 0.0;
          for (const auto& t : per) {
            inf_l = std::min(inf_l, k < t.lower.size() ? t.lower[k] : 0.0);
            sup_u = std::max(sup_u, k < t.upper.size() ? t.upper[k] : 0.0);
          }
          lower += inf_l;
          upper += sup_u;
        }
        for (const auto& t : per) {
          lower_tail = std::min(lower_tail, t.lower_tail);
          upper_tail = std::max(upper_tail, t.upper_tail);
          rep.max_terms = std::max(rep.max_terms, static_cast<int>(std::max(t.lower.size(), t.upper.size())));
        }
        lower += lower_tail;
        upper += upper_tail;
        min_lower = std::min(min_lower, lower);
        const double need = std::max({1.0, upper, lower > 0.0 ? 1.0 / lower : std::numeric_limits<double>::infinity()});
        overall = std::max(overall, need);
        if (ri + 1 == radii.size() && di + 1 == deltas.size()) finest = need;
      }
    }
    rep.c_m_lower = finest;
    rep.c_m_upper = overall;
    v.pass = std::isfinite(overall) && min_lower > 0.0;
    v.margin = min_lower;
    v.detail = "C_M in [" + fmt(finest) + ", " + fmt(overall) + "]";
    rep.conditions.push_back(v);
  }

  // vi, vii) layer sums as h decreases, averaged over one multiplicative
  // period of delta so the position of delta on the r/h^k ladder washes out.
  {
    ConditionVerdict vi{"vi", true, 0.0, ""};
    ConditionVerdict vii{"vii", theta > 0.0, 0.0, ""};
    std::vector<double> hs = g.h_grid;
    std::sort(hs.begin(), hs.end(), std::greater<>());
    const std::size_t cases = probes.size() * g.layer_radii.size();
    // sums[case][h] for lower and upper.
    std::vector<std::vector<double>> sl(cases, std::vector<double>(hs.size()));
    std::vector<std::vector<double>> su(cases, std::vector<double>(hs.size()));
    std::vector<double> tail_frac(cases * hs.size(), 0.0);
    std::vector<int> terms(cases * hs.size(), 0);
    parallel_for(cases * hs.size(), [&](std::size_t idx) {
      const std::size_t c = idx / hs.size();
      const std::size_t hi = idx % hs.size();
      const Point& x = probes[c / g.layer_radii.size()];
      const double r = g.layer_radii[c % g.layer_radii.size()];
      const double h = hs[hi];
      const int jump = static_cast<int>(std::ceil(std::log(r / g.band_delta) / std::log(h)));
      const double d0 = r * std::pow(h, -jump);
      double lo = 0.0;
      double up = 0.0;
      for (int j = 0; j < g.band_points; ++j) {
        const double delta = d0 * std::pow(h, -(j + 0.5) / g.band_points);
        const LayerTerms t = pi_terms(fam, delta, x, r, h);
        lo += t.lower_sum();
        up += t.upper_sum();
        const double total = t.upper_sum();
        if (total > 0.0) tail_frac[idx] = std::max(tail_frac[idx], t.upper_tail / total);
        terms[idx] = std::max(terms[idx], static_cast<int>(t.upper.size()));
      }
      sl[c][hi] = lo / g.band_points;
      su[c][hi] = up / g.band_points;
    });
    for (double f : tail_frac) rep.max_tail_fraction = std::max(rep.max_tail_fraction, f);
    for (int t : terms) rep.max_terms = std::max(rep.max_terms, t);

    double prev_dev = std::numeric_limits<double>::infinity();
    for (std::size_t hi = 0; hi < hs.size(); ++hi) {
      ThetaRow row{hs[hi], 0.0, 0.0, 0.0};
      for (std::size_t c = 0; c < cases; ++c) {
        row.sum_lower += sl[c][hi] / cases;
        row.sum_upper += su[c][hi] / cases;
        row.deviation = std::max(row.deviation, std::abs(theta - sl[c][hi]) + std::abs(theta - su[c][hi]));
        if (!std::isfinite(su[c][hi])) vi.pass = false;
        vi.margin = std::max(vi.margin, su[c][hi]);
      }
      if (row.deviation > prev_dev * (1.0 + 1e-9)) vii.pass = false;
      prev_dev = row.deviation;
      rep.theta_rows.push_back(row);
    }
    vi.detail = "largest band-mean upper sum " + fmt(vi.margin);

    // h -> 1 limit: quadratic through the three smallest h, in h - 1.
    std::vector<double> hm;
    for (double h : hs) hm.push_back(h - 1.0);
    double worst = 0.0;
    double mean_l = 0.0;
    double mean_u = 0.0;
    for (std::size_t c = 0; c < cases; ++c) {
      const double el = lagrange_at_zero(hm, sl[c]);
      const double eu = lagrange_at_zero(hm, su[c]);
      mean_l += el / cases;
      mean_u += eu / cases;
      if (theta > 0.0) worst = std::max({worst, std::abs(el - theta) / theta, std::abs(eu - theta) / theta});
    }
    rep.theta_limit_lower = mean_l;
    rep.theta_limit_upper = mean_u;
    vii.margin = worst;
    if (!(worst <= g.theta_tolerance)) vii.pass = false;
    vii.detail = "h->1 limits lower " + fmt(mean_l) + " upper " + fmt(mean_u) + " vs Theta " + fmt(theta) +
                 ", worst relative gap " + fmt(worst);
    rep.conditions.push_back(vi);
    rep.conditions.push_back(vii);
  }
  return rep;
}

}  // namespace bbm
