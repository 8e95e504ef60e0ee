#pragma once

#include "bbm/extrapolate.hpp"
#include "bbm/maps.hpp"
#include "bbm/mollifiers.hpp"
#include "bbm/space.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace bbm {

enum class EnergyMethod { quadrature, monte_carlo };

std::string to_string(EnergyMethod m);

struct QuadratureConfig {
  EnergyMethod method = EnergyMethod::quadrature;
  // Monte Carlo path.
  int outer_samples = 100000;
  int inner_samples = 64;
  int shells = 16;
  // Deterministic path: composite Gauss-Legendre over the domain.
  int outer_order = 16;
  double outer_max_panel = 0.05;
  int outer_order_2d = 8;
  double outer_max_panel_2d = 0.1;
  int radial_order = 10;
  int arc_order = 12;
  unsigned workers = 0;
};

struct EnergyEstimate {
  double value = 0.0;
  double std_error = 0.0;
  long n_samples = 0;
  std::uint64_t seed = 0;
  std::string method;
};

/// Everything the nonlocal functionals need: the family carries the space and
/// the exponent p.
struct EnergyProblem {
  MollifierFamily family;
  MapSpec map;
  TargetSpace target;

  const Space& space() const { return family.space; }
  double p() const { return family.p; }
};

/// Integral over the domain of d_f(x, x')^p rho_delta(x, x') dm(x').
double inner_integral(const EnergyProblem& pb, double delta, const Point& x, const QuadratureConfig& cfg = {});

/// Same integrand restricted to lo < d(x, x') <= hi and to the mask, if any.
double inner_integral_between(const EnergyProblem& pb, double delta, const Point& x, double lo, double hi,
                              const Box* mask = nullptr, const QuadratureConfig& cfg = {});

/// Double integral of d_f^p rho_delta over the domain squared. The Monte
/// Carlo path is deterministic given the seed and independent of the worker
/// count.
EnergyEstimate nonlocal_energy(const EnergyProblem& pb, double delta, const QuadratureConfig& cfg = {},
                               std::uint64_t seed = 1);

/// Double integral restricted to pairs with d(x, x') > r.
double tail_energy(const EnergyProblem& pb, double delta, double r, const QuadratureConfig& cfg = {});

/// Korevaar-Schoen density: (1 / m(B(x,r))) times the integral over
/// B(x,r) intersected with the mask of (d_f(x,.)/r)^p. Zero on null balls.
double ks(const Space& s, const MapSpec& f, const TargetSpace& y, double p, const Box* mask, const Point& x,
          double r);

struct DensityProfile {
  Point x;
  std::vector<double> radii;
  std::vector<double> values;
  double density = 0.0;
  double residual = 0.0;
  double gamma = 1.0;
  bool converged = true;
  std::string warning;
};

/// Fits ks(x, r) = e + b r^gamma over the radii (gamma = 1 unless free_gamma).
DensityProfile density_estimate(const Space& s, const MapSpec& f, const TargetSpace& y, double p, const Point& x,
                                const std::vector<double>& radii, bool free_gamma = false);

/// Measure G m on a space.
struct MeasureWithDensity {
  Space space;
  std::function<double(const Point&)> density;
  /// Coordinates where G jumps (per axis in 2D), used as quadrature cuts.
  std::vector<double> jumps;
};

enum class RegularizerMode { average, riesz, maximal };

RegularizerMode parse_regularizer(const std::string& name);

/// average: A(x,r) = (G m)(B(x,r)) / m(B(x,r)); riesz: (1/3) sum (2/3)^k
/// A(x, r/2^k); maximal: sup of A over r, r/2, ... >= 1e-6 r.
double regularize(const MeasureWithDensity& g, RegularizerMode mode, const Point& x, double r);

/// Partition-of-unity smoothing at scale r: centers form a greedy
/// (r/2)-separated net, phi_i are normalized tents max(0, 1 - d/r), and each
/// center carries the average of u over B(x_i, r/8).
class PouSmoothing {
 public:
  PouSmoothing(const Space& s, std::vector<Point> centers, std::vector<double> averages, double r);

  double operator()(const Point& x) const;
  /// Sum of the unnormalized tents at x; positive wherever u^r is defined.
  double coverage(const Point& x) const;
  const std::vector<Point>& centers() const { return centers_; }
  const std::vector<double>& averages() const { return averages_; }
  double radius() const { return r_; }

 private:
  template <class F>
  void for_near(const Point& x, F&& f) const;

  Space space_;
  std::vector<Point> centers_;
  std::vector<double> averages_;
  double r_;
  double cell_;
  std::vector<std::vector<int>> grid_;
  int nx_ = 1;
  int ny_ = 1;
};

PouSmoothing pou_smooth(const Space& s, const std::function<double(const Point&)>& u, double r,
                        const std::vector<double>& jumps = {});

/// Both sides of the layer sandwich for the inner integral restricted to
/// B(x, r), with E the whole domain.
struct SandwichBounds {
  double lower = 0.0;          // sum Pi_L,k ks(r_{k+1})
  double middle = 0.0;         // restricted inner integral
  double upper_shell = 0.0;    // sum W_k ks(r_k), shell weights
  double upper_literal = 0.0;  // sum Pi_U,k ks(r_k)
};

SandwichBounds sandwich_bounds(const EnergyProblem& pb, double delta, const Point& x, double r, double h,
                               const QuadratureConfig& cfg = {});

}  // namespace bbm
