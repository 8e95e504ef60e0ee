#pragma once

#include "bbm/core.hpp"
#include "bbm/space.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace bbm {

/// rho0..rho3 are the admissible families; annulus is the non-monotone
/// counterexample chi_{delta/2 <= d <= delta} / (delta^p m(B(x, delta))).
enum class MollifierKind { rho0, rho1, rho2, rho3, annulus };

std::string to_string(MollifierKind k);
MollifierKind parse_mollifier(const std::string& name);

struct MollifierFamily {
  MollifierKind kind = MollifierKind::rho1;
  double p = 2.0;
  Space space;
};

/// Theta(D, p): (D+p)/(4^D p), 1, (D+p)/D, (D+p)/p for rho0..rho3.
double theta_formula(MollifierKind kind, double p, int dim);
double theta_formula(const MollifierFamily& fam, double p, int dim);

/// rho_delta(x, .) as a function of u = d(x, .). Per-center ball masses are
/// evaluated once at construction.
class RadialKernel {
 public:
  RadialKernel(const MollifierFamily& fam, double delta, const Point& x);

  double operator()(double u) const;
  /// Kernel vanishes beyond this radius (infinite for rho0).
  double support() const;
  /// Radii where the kernel has a jump or kink.
  std::vector<double> breakpoints() const;

 private:
  const MollifierFamily* fam_;
  double delta_;
  Point x_;
  double scale_ = 0.0;  // 1 / (delta^p m(B(x, delta))) where it applies
};

double kernel(const MollifierFamily& fam, double delta, const Point& x, const Point& xp);

/// sup of rho_delta(x, .) outside the closed ball B(x, r); 0 when that set is
/// empty. Closed forms rely on monotonicity in the distance.
double sigma(const MollifierFamily& fam, double delta, const Point& x, double r);
/// log sigma, -infinity where sigma vanishes. Finite for radii where sigma
/// itself would overflow.
double log_sigma(const MollifierFamily& fam, double delta, const Point& x, double r);
/// sigma(r) m(B(x, r)) r^p evaluated in logs.
double layer_mass(const MollifierFamily& fam, double delta, const Point& x, double r);

/// Sup of the kernel over n sampled points at distance > r (the definitional
/// oracle). Distances are drawn as r + (R - r) t^3 so samples crowd the ball.
double sigma_brute_force(const MollifierFamily& fam, double delta, const Point& x, double r, int n,
                         std::uint64_t seed);

struct LayerOptions {
  int k_max = 100000;
  /// Stop once r/h^k drops below this fraction of r.
  double scale_floor = 1e-9;
  /// Stop once a term drops below this fraction of the running sum.
  double term_tol = 1e-9;
};

/// Layer weights over the radii r_k = r / h^k, k = 0..K-1. The tails estimate
/// the truncated remainder by a geometric series in the last term ratio.
struct LayerTerms {
  std::vector<double> radii;
  std::vector<double> lower;
  std::vector<double> upper;
  double lower_tail = 0.0;
  double upper_tail = 0.0;
  bool stopped_by_scale = false;

  double lower_sum() const;
  double upper_sum() const;
};

/// Pi_L,k and Pi_U,k:
///   Pi_U,k = |sigma(r_k) - sigma(r_{k-1})| m(B(x, r_k)) r_k^p,   Pi_U,0 = sigma(r) m(B(x,r)) r^p
///   Pi_L,k = |sigma(r_k) - sigma(r_{k-1})| m(B(x, r_{k+1})) r_{k+1}^p,
///   Pi_L,0 = sigma(r) m(B(x, r/h)) (r/h)^p.
LayerTerms pi_terms(const MollifierFamily& fam, double delta, const Point& x, double r, double h,
                    const LayerOptions& opt = {});
LayerTerms pi_terms(const MollifierFamily& fam, double delta, const Point& x, double r, double h, int k_max);

/// Shell weights W_k paired with ks(x, r_k) that bound the restricted inner
/// integral from above: bounding the kernel on each shell
/// B(r_k) \ B(r_{k+1}) by sigma(r_{k+1}) and summing by parts gives
///   W_0 = sigma(r_1) m(B(x, r)) r^p,
///   W_k = (sigma(r_{k+1}) - sigma(r_k)) m(B(x, r_k)) r_k^p.
/// Returned in `upper`; `lower` is left empty.
LayerTerms shell_upper_terms(const MollifierFamily& fam, double delta, const Point& x, double r, double h,
                             const LayerOptions& opt = {});

struct AdmissibilityGrids {
  std::vector<double> deltas{0.08, 0.04, 0.02, 0.01};
  std::vector<double> tail_radii{0.2, 0.1, 0.05};
  std::vector<double> layer_radii{0.1, 0.05};
  std::vector<double> h_grid{1.4, 1.2, 1.1, 1.05};
  /// Interior probes; empty means the default grid around the center.
  std::vector<Point> probes;
  int tail_centers = 0;
  int monotonicity_probes = 4000;
  std::uint64_t seed = 20240611;
  double threshold = 1e-2;
  double theta_tolerance = 0.05;
  /// Delta band [band_delta/h, band_delta) averaged over in the h trend.
  double band_delta = 1e-4;
  int band_points = 8;
};

struct ConditionVerdict {
  std::string name;
  bool pass = false;
  double margin = 0.0;
  std::string detail;
};

struct ThetaRow {
  double h = 0.0;
  double sum_lower = 0.0;
  double sum_upper = 0.0;
  /// Worst |Theta - sum_L| + |Theta - sum_U| over probes and radii.
  double deviation = 0.0;
};

struct AdmissibilityReport {
  std::string family;
  double p = 0.0;
  int dim = 0;
  std::vector<ConditionVerdict> conditions;  // i .. vii
  double c_m_lower = 0.0;
  double c_m_upper = 0.0;
  double theta = 0.0;
  std::vector<ThetaRow> theta_rows;
  double theta_limit_lower = 0.0;
  double theta_limit_upper = 0.0;
  int max_terms = 0;
  double max_tail_fraction = 0.0;

  const ConditionVerdict& condition(int i) const { return conditions.at(i - 1); }
  bool admissible() const;
  bool strongly_admissible() const;
};

std::vector<Point> default_probes(const Space& s);

AdmissibilityReport check_admissibility(const MollifierFamily& fam, const AdmissibilityGrids& grids = {});

}  // namespace bbm
