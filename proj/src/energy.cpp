#include "bbm/energy.hpp"

#include "bbm/parallel.hpp"
#include "bbm/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace bbm {

std::string to_string(EnergyMethod m) {
  return m == EnergyMethod::quadrature ? "quadrature" : "monte_carlo";
}

RegularizerMode parse_regularizer(const std::string& name) {
  if (name == "average") return RegularizerMode::average;
  if (name == "riesz") return RegularizerMode::riesz;
  if (name == "maximal") return RegularizerMode::maximal;
  throw InputError("unknown regularizer mode '" + name + "'");
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// d_Y(f(x), f(.))^p with f(x) evaluated once.
struct PairPower {
  const MapSpec& f;
  const TargetSpace& y;
  Value fx;
  double p;

  PairPower(const MapSpec& map, const TargetSpace& target, const Point& x, double p_)
      : f(map), y(target), fx(map(x)), p(p_) {}

  double operator()(const Point& xp) const {
    const double d = y.distance(fx, f(xp));
    if (p == 2.0) return d * d;
    if (p == 1.0) return d;
    return std::pow(d, p);
  }
};

/// Below this distance from x the pair distance loses digits to rounding.
double resolution_floor(const Point& x) { return 1e-6 * (1.0 + x.cwiseAbs().maxCoeff()); }

RadialOptions radial_options(const QuadratureConfig& cfg, const Point& x) {
  RadialOptions opt;
  opt.order = cfg.radial_order;
  opt.min_radius = resolution_floor(x);
  return opt;
}

std::vector<double> concat(std::vector<double> a, const std::vector<double>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

void check_problem(const EnergyProblem& pb) {
  if (!(pb.p() >= 1.0)) throw InputError("energy: p must be at least 1");
  if (pb.map.source_dim != pb.space().dim()) throw InputError("energy: map and space dimensions differ");
}

/// Cuts for the outer rule: the inner integral has kinks where the distance
/// to the boundary crosses the kernel scale.
std::vector<double> outer_offsets(const Space& s, double delta) {
  std::vector<double> out;
  for (int j = 0; j <= 4; ++j) out.push_back(delta * std::ldexp(1.0, -j));
  out.push_back(4.0 * delta);
  if (s.dim() == 1)
    for (int j = 0; j <= 8; ++j) out.push_back(0.25 * std::pow(4.0, -j) * s.domain().axis[0].length());
  return out;
}

std::vector<WeightedNode> outer_rule(const Space& s, double delta, const QuadratureConfig& cfg) {
  if (s.dim() == 1) return domain_rule(s, cfg.outer_order, cfg.outer_max_panel, outer_offsets(s, delta));
  return domain_rule(s, cfg.outer_order_2d, cfg.outer_max_panel_2d, outer_offsets(s, delta));
}

/// Stratified estimate of the inner integral: radial shells equal in
/// v = (u/R)^beta, one random direction per sample in 2D.
double inner_integral_mc(const EnergyProblem& pb, double delta, const Point& x, const QuadratureConfig& cfg,
                         Rng& rng) {
  const Space& s = pb.space();
  const RadialKernel k(pb.family, delta, x);
  const double reach = std::min(k.support(), s.max_distance(x));
  if (!(reach > 0.0)) return 0.0;
  const PairPower g(pb.map, pb.target, x, pb.p());
  const double beta = pb.family.kind == MollifierKind::rho0 ? std::min(pb.p() * delta, 1.0) : 1.0;
  const int shells = std::max(1, cfg.shells);
  const int per_shell = std::max(1, cfg.inner_samples / shells);
  // The integrand in v is flat near 0 for the chosen beta, so it is frozen
  // below the resolution floor.
  const double v_floor = std::pow(std::min(1.0, resolution_floor(x) / reach), beta);
  double total = 0.0;
  for (int j = 0; j < shells; ++j) {
    double shell = 0.0;
    for (int i = 0; i < per_shell; ++i) {
      const double v = std::max(v_floor, (j + 1.0 - rng.uniform()) / shells);
      const double u = reach * std::pow(v, 1.0 / beta);
      double sphere = 0.0;
      if (s.dim() == 1) {
        sphere = sphere_integral(s, x, u, g);
      } else {
        const double th = kTwoPi * (i + rng.uniform()) / per_shell;
        const Point yp = make_point(x[0] + u * std::cos(th), x[1] + u * std::sin(th));
        if (s.domain().contains(yp)) sphere = kTwoPi * u * g(yp) * s.weight(yp);
      }
      if (sphere != 0.0) shell += k(u) * sphere * u / (beta * v);
    }
    total += shell / per_shell;
  }
  return total / shells;
}

/// integral of G w over B(x, r) and of w over the same ball, by one rule.
std::pair<double, double> ball_integrals(const Space& s, const std::function<double(const Point&)>& G,
                                         const Point& x, double r, const std::vector<double>& jumps) {
  std::vector<double> breaks = s.radial_breakpoints(x);
  for (double t : jumps)
    for (int i = 0; i < s.dim(); ++i) breaks.push_back(std::abs(t - x[i]));
  auto one = [](const Point&) { return 1.0; };
  const double num = integrate_radial([&](double u) { return sphere_integral(s, x, u, G); }, 0.0, r, breaks);
  const double den = integrate_radial([&](double u) { return sphere_integral(s, x, u, one); }, 0.0, r, breaks);
  return {num, den};
}

}  // namespace

// ---------------------------------------------------------------------------
// inner and double integrals

double inner_integral_between(const EnergyProblem& pb, double delta, const Point& x, double lo, double hi,
                              const Box* mask, const QuadratureConfig& cfg) {
  check_problem(pb);
  const Space& s = pb.space();
  s.require(x, "inner_integral");
  const RadialKernel k(pb.family, delta, x);
  hi = std::min({hi, k.support(), s.max_distance(x)});
  lo = std::max(lo, 0.0);
  if (!(hi > lo)) return 0.0;
  const PairPower g(pb.map, pb.target, x, pb.p());
  auto integrand = [&](double u) {
    const double w = k(u);
    if (w == 0.0) return 0.0;
    return w * sphere_integral(s, x, u, g, mask, cfg.arc_order);
  };
  return integrate_radial(integrand, lo, hi, concat(s.radial_breakpoints(x, mask), k.breakpoints()),
                          radial_options(cfg, x));
}

double inner_integral(const EnergyProblem& pb, double delta, const Point& x, const QuadratureConfig& cfg) {
  return inner_integral_between(pb, delta, x, 0.0, kInf, nullptr, cfg);
}

EnergyEstimate nonlocal_energy(const EnergyProblem& pb, double delta, const QuadratureConfig& cfg,
                               std::uint64_t seed) {
  check_problem(pb);
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("nonlocal_energy: delta must lie in (0, 1)");
  const Space& s = pb.space();
  EnergyEstimate est;
  est.seed = seed;
  est.method = to_string(cfg.method);

  if (cfg.method == EnergyMethod::quadrature) {
    const auto nodes = outer_rule(s, delta, cfg);
    std::vector<double> vals(nodes.size());
    parallel_for(
        nodes.size(), [&](std::size_t i) { vals[i] = nodes[i].w * inner_integral(pb, delta, nodes[i].x, cfg); },
        cfg.workers);
    double total = 0.0;
    for (double v : vals) total += v;
    est.value = std::max(total, 0.0);
    est.n_samples = static_cast<long>(nodes.size());
    return est;
  }

  if (cfg.outer_samples < 2) throw InputError("nonlocal_energy: need at least 2 outer samples");
  const auto pts = sample_points(s, s.domain(), cfg.outer_samples, derive_seed(seed, 0));
  const std::size_t n = pts.size();
  constexpr std::size_t kChunk = 1024;
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<double> z(n);
  parallel_for(
      chunks,
      [&](std::size_t c) {
        Rng rng(derive_seed(seed, c + 1));
        const std::size_t end = std::min(n, (c + 1) * kChunk);
        for (std::size_t i = c * kChunk; i < end; ++i)
          z[i] = static_cast<double>(n) * pts[i].weight * inner_integral_mc(pb, delta, pts[i].x, cfg, rng);
      },
      cfg.workers);
  double mean = 0.0;
  for (double v : z) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : z) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n - 1);
  est.value = std::max(mean, 0.0);
  est.std_error = std::sqrt(var / static_cast<double>(n));
  est.n_samples = static_cast<long>(n);
  return est;
}

double tail_energy(const EnergyProblem& pb, double delta, double r, const QuadratureConfig& cfg) {
  check_problem(pb);
  if (!(r > 0.0)) throw DomainError("tail_energy: r must be positive");
  const Space& s = pb.space();
  const auto nodes = outer_rule(s, delta, cfg);
  std::vector<double> vals(nodes.size());
  parallel_for(
      nodes.size(),
      [&](std::size_t i) { vals[i] = nodes[i].w * inner_integral_between(pb, delta, nodes[i].x, r, kInf, nullptr, cfg); },
      cfg.workers);
  double total = 0.0;
  for (double v : vals) total += v;
  return std::max(total, 0.0);
}

// ---------------------------------------------------------------------------
// Korevaar-Schoen densities

double ks(const Space& s, const MapSpec& f, const TargetSpace& y, double p, const Box* mask, const Point& x,
          double r) {
  if (!(r > 0.0)) throw DomainError("ks: r must be positive");
  s.require(x, "ks");
  const double m = ball_measure(s, x, r);
  if (!(m > 0.0)) return 0.0;
  const PairPower g(f, y, x, p);
  const double hi = std::min(r, s.max_distance(x));
  RadialOptions opt;
  opt.min_radius = resolution_floor(x);
  const double integral = integrate_radial([&](double u) { return sphere_integral(s, x, u, g, mask); }, 0.0, hi,
                                           s.radial_breakpoints(x, mask), opt);
  return std::max(integral, 0.0) / (m * std::pow(r, p));
}

DensityProfile density_estimate(const Space& s, const MapSpec& f, const TargetSpace& y, double p, const Point& x,
                                const std::vector<double>& radii, bool free_gamma) {
  if (radii.empty()) throw InputError("density_estimate: empty radius grid");
  DensityProfile out;
  out.x = x;
  out.radii = radii;
  std::vector<ExtrapolationSample> samples;
  for (double r : radii) {
    out.values.push_back(ks(s, f, y, p, nullptr, x, r));
    samples.push_back({r, out.values.back(), 0.0});
  }
  const auto smallest = std::min_element(radii.begin(), radii.end()) - radii.begin();
  const double fallback = out.values[smallest];
  try {
    const Extrapolation e =
        extrapolate(samples, free_gamma ? ExtrapolationModel::free_gamma : ExtrapolationModel::linear);
    out.density = e.limit;
    out.residual = e.residual;
    out.gamma = e.gamma;
    if (!std::isfinite(e.limit) || e.limit < 0.0) {
      out.density = fallback;
      out.converged = false;
      out.warning = "fit gave an invalid density; reporting the smallest-radius value";
    } else {
      out.converged = std::abs(e.limit - fallback) <= 0.1 * std::abs(e.limit) + 1e-12;
      if (!out.converged) out.warning = "extrapolated density far from the smallest-radius value";
    }
  } catch (const InputError& err) {
    out.density = fallback;
    out.converged = false;
    out.warning = std::string("degenerate fit (") + err.what() + "); reporting the smallest-radius value";
  }
  return out;
}

// ---------------------------------------------------------------------------
// regularizers

namespace {

double ball_average(const MeasureWithDensity& g, const Point& x, double r) {
  if (!(ball_measure(g.space, x, r) > 0.0)) return 0.0;
  const auto [num, den] = ball_integrals(g.space, g.density, x, std::min(r, g.space.max_distance(x)), g.jumps);
  return den > 0.0 ? std::max(num, 0.0) / den : 0.0;
}

}  // namespace

double regularize(const MeasureWithDensity& g, RegularizerMode mode, const Point& x, double r) {
  if (!(r > 0.0)) throw DomainError("regularize: r must be positive");
  g.space.require(x, "regularize");
  switch (mode) {
    case RegularizerMode::average: return ball_average(g, x, r);
    case RegularizerMode::riesz: {
      double sum = 0.0;
      double weight = 1.0 / 3.0;
      double rk = r;
      for (int k = 0; k < 200; ++k) {
        const double a = ball_average(g, x, rk);
        sum += weight * a;
        // Weight still unassigned after term k, times the last average.
        const double tail = 3.0 * weight * (2.0 / 3.0) * a;
        if (tail < 1e-9 * sum || (sum == 0.0 && k > 60)) {
          sum += tail;
          break;
        }
        weight *= 2.0 / 3.0;
        rk *= 0.5;
      }
      return sum;
    }
    case RegularizerMode::maximal: {
      double best = 0.0;
      for (double rk = r; rk >= 1e-6 * r; rk *= 0.5) best = std::max(best, ball_average(g, x, rk));
      return best;
    }
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// partition-of-unity smoothing

PouSmoothing::PouSmoothing(const Space& s, std::vector<Point> centers, std::vector<double> averages, double r)
    : space_(s), centers_(std::move(centers)), averages_(std::move(averages)), r_(r), cell_(0.5 * r) {
  if (centers_.empty()) throw DomainError("partition of unity: empty net");
  if (centers_.size() != averages_.size()) throw InputError("partition of unity: size mismatch");
  if (space_.kind() == SpaceKind::circle) return;
  const Box& d = space_.domain();
  nx_ = static_cast<int>(std::ceil(d.axis[0].length() / cell_)) + 1;
  ny_ = space_.dim() == 2 ? static_cast<int>(std::ceil(d.axis[1].length() / cell_)) + 1 : 1;
  grid_.assign(static_cast<std::size_t>(nx_) * ny_, {});
  for (std::size_t i = 0; i < centers_.size(); ++i) {
    const int cx = std::clamp(static_cast<int>((centers_[i][0] - d.axis[0].lo) / cell_), 0, nx_ - 1);
    const int cy = space_.dim() == 2
                       ? std::clamp(static_cast<int>((centers_[i][1] - d.axis[1].lo) / cell_), 0, ny_ - 1)
                       : 0;
    grid_[static_cast<std::size_t>(cx) * ny_ + cy].push_back(static_cast<int>(i));
  }
}

template <class F>
void PouSmoothing::for_near(const Point& x, F&& f) const {
  if (grid_.empty()) {
    for (std::size_t i = 0; i < centers_.size(); ++i) f(static_cast<int>(i));
    return;
  }
  const Box& d = space_.domain();
  const int cx = static_cast<int>(std::floor((x[0] - d.axis[0].lo) / cell_));
  const int cy = space_.dim() == 2 ? static_cast<int>(std::floor((x[1] - d.axis[1].lo) / cell_)) : 0;
  const int reach_y = space_.dim() == 2 ? 3 : 0;
  for (int i = std::max(0, cx - 3); i <= std::min(nx_ - 1, cx + 3); ++i)
    for (int j = std::max(0, cy - reach_y); j <= std::min(ny_ - 1, cy + reach_y); ++j)
      for (int c : grid_[static_cast<std::size_t>(i) * ny_ + j]) f(c);
}

double PouSmoothing::coverage(const Point& x) const {
  double sum = 0.0;
  for_near(x, [&](int i) { sum += std::max(0.0, 1.0 - space_.distance(x, centers_[i]) / r_); });
  return sum;
}

double PouSmoothing::operator()(const Point& x) const {
  double num = 0.0;
  double den = 0.0;
  for_near(x, [&](int i) {
    const double phi = std::max(0.0, 1.0 - space_.distance(x, centers_[i]) / r_);
    num += phi * averages_[i];
    den += phi;
  });
  if (!(den > 0.0)) throw DomainError("partition of unity does not cover the point");
  return num / den;
}

PouSmoothing pou_smooth(const Space& s, const std::function<double(const Point&)>& u, double r,
                        const std::vector<double>& jumps) {
  if (!(r > 0.0)) throw DomainError("pou_smooth: r must be positive");
  const Box& d = s.domain();
  if (d.empty()) throw DomainError("pou_smooth: empty region");
  const double step = r / 16.0;
  std::array<int, 2> n{1, 1};
  for (int i = 0; i < s.dim(); ++i) n[i] = static_cast<int>(std::ceil(d.axis[i].length() / step)) + 1;
  const bool circle = s.kind() == SpaceKind::circle;
  auto coord = [&](int axis, int k) {
    const Interval& iv = d.axis[axis];
    if (circle) return iv.lo + iv.length() * k / (n[axis] - 1);
    return std::min(iv.hi, iv.lo + k * step);
  };
  if (circle) n[0] -= 1;  // the last grid point coincides with the first

  // Greedy separated net; centers are bucketed by cells of side r/2 so only
  // neighbouring cells need checking.
  const double cell = 0.5 * r;
  std::unordered_map<long long, std::vector<int>> buckets;
  auto key = [&](const Point& p, int dx, int dy) {
    const long long a = static_cast<long long>(std::floor((p[0] - d.axis[0].lo) / cell)) + dx;
    const long long b =
        s.dim() == 2 ? static_cast<long long>(std::floor((p[1] - d.axis[1].lo) / cell)) + dy : 0;
    return a * 1000003LL + b;
  };
  std::vector<Point> centers;
  for (int i = 0; i < n[0]; ++i)
    for (int j = 0; j < n[1]; ++j) {
      const Point p = s.dim() == 1 ? make_point(coord(0, i)) : make_point(coord(0, i), coord(1, j));
      bool far = true;
      if (circle) {
        for (const Point& c : centers)
          if (s.distance(p, c) < 0.5 * r) { far = false; break; }
      } else {
        const int ry = s.dim() == 2 ? 1 : 0;
        for (int dx = -1; dx <= 1 && far; ++dx)
          for (int dy = -ry; dy <= ry && far; ++dy) {
            auto it = buckets.find(key(p, dx, dy));
            if (it == buckets.end()) continue;
            for (int c : it->second)
              if (s.distance(p, centers[c]) < 0.5 * r) { far = false; break; }
          }
      }
      if (!far) continue;
      if (!circle) buckets[key(p, 0, 0)].push_back(static_cast<int>(centers.size()));
      centers.push_back(p);
    }

  std::vector<double> averages(centers.size());
  const double small = 0.125 * r;
  for (std::size_t i = 0; i < centers.size(); ++i) {
    const auto [num, den] = ball_integrals(s, u, centers[i], small, jumps);
    if (!(den > 0.0)) throw DegenerateSpaceError("pou_smooth: ball of zero measure");
    averages[i] = num / den;
  }
  return PouSmoothing(s, std::move(centers), std::move(averages), r);
}

// ---------------------------------------------------------------------------
// layer sandwich

SandwichBounds sandwich_bounds(const EnergyProblem& pb, double delta, const Point& x, double r, double h,
                               const QuadratureConfig& cfg) {
  check_problem(pb);
  const Space& s = pb.space();
  s.require(x, "sandwich_bounds");
  const double p = pb.p();
  auto k = [&](double rad) { return ks(s, pb.map, pb.target, p, nullptr, x, rad); };
  SandwichBounds out;
  out.middle = inner_integral_between(pb, delta, x, 0.0, r, nullptr, cfg);

  const LayerTerms pi = pi_terms(pb.family, delta, x, r, h);
  for (std::size_t i = 0; i < pi.lower.size(); ++i)
    if (pi.lower[i] != 0.0) out.lower += pi.lower[i] * k(pi.radii[i] / h);
  if (pi.lower_tail != 0.0 && !pi.lower.empty()) out.lower += pi.lower_tail * k(pi.radii[pi.lower.size() - 1] / h);
  for (std::size_t i = 0; i < pi.upper.size(); ++i)
    if (pi.upper[i] != 0.0) out.upper_literal += pi.upper[i] * k(pi.radii[i]);
  if (pi.upper_tail != 0.0 && !pi.upper.empty()) out.upper_literal += pi.upper_tail * k(pi.radii[pi.upper.size() - 1]);

  const LayerTerms w = shell_upper_terms(pb.family, delta, x, r, h);
  for (std::size_t i = 0; i < w.upper.size(); ++i)
    if (w.upper[i] != 0.0) out.upper_shell += w.upper[i] * k(w.radii[i]);
  if (w.upper_tail != 0.0 && !w.upper.empty()) out.upper_shell += w.upper_tail * k(w.radii[w.upper.size() - 1]);
  return out;
}

}  // namespace bbm
