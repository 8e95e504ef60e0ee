#include "bbm/energy.hpp"
#include "bbm/random.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace bbm;

namespace {

EnergyProblem problem(MollifierKind k, MapSpec f = MapSpec::identity(1), Space s = Space::interval(0, 1),
                      double p = 2.0) {
  TargetSpace y = TargetSpace::euclidean(f.target_dim);
  y.kind = f.codomain;
  return {{k, p, std::move(s)}, std::move(f), y};
}

const MollifierKind kFamilies[] = {MollifierKind::rho0, MollifierKind::rho1, MollifierKind::rho2, MollifierKind::rho3};

}  // namespace

TEST_CASE("inner integrals") {
  const auto pb = problem(MollifierKind::rho3);
  CHECK(inner_integral(pb, 0.1, make_point(0.5)) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(inner_integral(pb, 0.1, make_point(0.0)) == doctest::Approx(0.5).epsilon(1e-10));
  // rho2 with intrinsic balls is 1 everywhere, boundary included
  const auto pb2 = problem(MollifierKind::rho2);
  for (double x : {0.0, 0.02, 0.5, 0.97}) CHECK(inner_integral(pb2, 0.05, make_point(x)) == doctest::Approx(1.0).epsilon(1e-9));
  // rho1 is 1/3 away from the boundary
  CHECK(inner_integral(problem(MollifierKind::rho1), 0.05, make_point(0.5)) == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
  for (auto k : kFamilies) CHECK(inner_integral(problem(k, MapSpec::constant(2.0)), 0.05, make_point(0.3)) == 0.0);
}

TEST_CASE("nonlocal energy on the interval") {
  const auto e2 = nonlocal_energy(problem(MollifierKind::rho2), 0.05);
  CHECK(e2.value == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(e2.std_error == 0.0);
  CHECK(e2.method == "quadrature");
  // boundary layer costs delta/9
  CHECK(nonlocal_energy(problem(MollifierKind::rho1), 0.06).value == doctest::Approx(1.0 / 3.0 - 0.06 / 9).epsilon(1e-8));
  for (auto k : kFamilies) CHECK(nonlocal_energy(problem(k, MapSpec::constant(1.0)), 0.05).value == 0.0);
}

TEST_CASE("Monte Carlo agrees with quadrature") {
  QuadratureConfig mc;
  mc.method = EnergyMethod::monte_carlo;
  mc.outer_samples = 20000;
  for (auto k : kFamilies) {
    const auto pb = problem(k);
    const auto det = nonlocal_energy(pb, 0.05);
    const auto est = nonlocal_energy(pb, 0.05, mc, 7);
    CAPTURE(to_string(k));
    CHECK(est.std_error > 0.0);
    CHECK(est.n_samples == 20000);
    CHECK(std::abs(est.value - det.value) <= 3.0 * est.std_error);
  }
  SUBCASE("worker count does not change the result") {
    const auto pb = problem(MollifierKind::rho0);
    mc.workers = 1;
    const auto a = nonlocal_energy(pb, 0.05, mc, 11);
    mc.workers = 5;
    const auto b = nonlocal_energy(pb, 0.05, mc, 11);
    CHECK(a.value == b.value);
    CHECK(a.std_error == b.std_error);
    const auto c = nonlocal_energy(pb, 0.05, mc, 12);
    CHECK(c.value != a.value);
  }
}

TEST_CASE("tail energy") {
  CHECK(tail_energy(problem(MollifierKind::rho1), 0.05, 0.1) == 0.0);
  CHECK(tail_energy(problem(MollifierKind::rho2), 0.1, 0.1) == 0.0);
  CHECK(tail_energy(problem(MollifierKind::rho3), 0.02, 0.1) == 0.0);
  const auto pb = problem(MollifierKind::rho0);
  double prev = INFINITY;
  for (double d : {0.08, 0.04, 0.02, 0.01}) {
    const double t = tail_energy(pb, d, 0.1);
    CHECK(t > 0.0);
    CHECK(t < prev);
    prev = t;
  }
}

TEST_CASE("Korevaar-Schoen densities") {
  const Space s = Space::interval(0, 1);
  const auto id = MapSpec::identity(1);
  const auto y = TargetSpace::euclidean();
  CHECK(ks(s, id, y, 2.0, nullptr, make_point(0.5), 0.1) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  const Box half(Interval{0.0, 0.5});
  CHECK(ks(s, id, y, 2.0, &half, make_point(0.5), 0.1) == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
  CHECK(ks(s, MapSpec::constant(4.0), y, 2.0, nullptr, make_point(0.5), 0.1) == 0.0);

  Rng rng(3);
  const auto sq = MapSpec::power(2.0);
  for (int t = 0; t < 100; ++t) {
    const double a = rng.uniform(0.0, 0.5);
    const double b = rng.uniform(0.5, 1.0);
    const Box inner(Interval{a + 0.1, b - 0.1});
    const Box outer(Interval{a, b});
    const Point x = make_point(rng.uniform(0.2, 0.8));
    const double r = rng.uniform(0.01, 0.2);
    CHECK(ks(s, sq, y, 2.0, &inner, x, r) <= ks(s, sq, y, 2.0, &outer, x, r) + 1e-15);
  }
}

TEST_CASE("density estimates") {
  const Space s = Space::interval(0, 1);
  const auto y = TargetSpace::euclidean();
  const std::vector<double> radii{0.1, 0.05, 0.025, 0.0125};
  const auto id = density_estimate(s, MapSpec::identity(1), y, 2.0, make_point(0.5), radii);
  CHECK(id.density == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
  CHECK(id.residual < 1e-8);
  const auto sq = density_estimate(s, MapSpec::power(2.0), y, 2.0, make_point(0.5), radii);
  CHECK(sq.density == doctest::Approx(1.0 / 3.0).epsilon(1e-3));
  const auto c = density_estimate(s, MapSpec::constant(1.0), y, 2.0, make_point(0.5), radii);
  CHECK(c.density == 0.0);
  for (double v : sq.values) CHECK(v >= 0.0);
}

TEST_CASE("regularizers") {
  const Space s = Space::interval(0, 1);
  const MeasureWithDensity two{s, [](const Point&) { return 2.0; }, {}};
  CHECK(std::abs(regularize(two, RegularizerMode::riesz, make_point(0.5), 0.1) - 2.0) <= 1e-8 * 2.0);
  const MeasureWithDensity ind{s, [](const Point& x) { return x[0] <= 0.5 ? 1.0 : 0.0; }, {0.5}};
  CHECK(regularize(ind, RegularizerMode::average, make_point(0.5), 0.1) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(regularize(ind, RegularizerMode::maximal, make_point(0.4), 0.05) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(parse_regularizer("median"), InputError);

  Rng rng(5);
  for (int t = 0; t < 50; ++t) {
    const Point x = make_point(rng.uniform(0.1, 0.9));
    const double r = rng.uniform(0.01, 0.1);
    CHECK(regularize(ind, RegularizerMode::average, x, r) <= regularize(ind, RegularizerMode::maximal, x, r) + 1e-12);
  }
}

TEST_CASE("partition-of-unity smoothing") {
  const Space s = Space::interval(0, 1);
  const auto c = pou_smooth(s, [](const Point&) { return 3.25; }, 0.05);
  for (int i = 0; i <= 100; ++i) CHECK(c(make_point(i / 100.0)) == doctest::Approx(3.25).epsilon(1e-14));

  const auto id = pou_smooth(s, [](const Point& x) { return x[0]; }, 0.05);
  double worst = 0.0;
  for (int i = 0; i <= 1000; ++i) worst = std::max(worst, std::abs(id(make_point(i / 1000.0)) - i / 1000.0));
  CHECK(worst <= 0.05);

  // Lipschitz constant of the smoothed step scales like 1/r
  std::vector<double> consts;
  for (double r : {0.1, 0.05, 0.025}) {
    const auto st = pou_smooth(s, [](const Point& x) { return x[0] < 0.5 ? 0.0 : 1.0; }, r, {0.5});
    const double h = 1e-4;
    double lip = 0.0;
    for (int i = 0; i < 10000; ++i) {
      const double a = i * h;
      lip = std::max(lip, std::abs(st(make_point(a + h)) - st(make_point(a))) / h);
    }
    consts.push_back(lip * r);
  }
  const auto [lo, hi] = std::minmax_element(consts.begin(), consts.end());
  CHECK(*lo > 0.0);
  CHECK(*hi / *lo < 1.5);

  const Space sq = Space::unit_cube(2);
  const auto c2 = pou_smooth(sq, [](const Point&) { return -1.0; }, 0.1);
  CHECK(c2(make_point(0.37, 0.91)) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(c2.coverage(make_point(0.0, 1.0)) > 0.0);
}

TEST_CASE("layer sandwich") {
  Rng rng(41);
  for (auto k : kFamilies) {
    for (const Space& s : {Space::interval(0, 1), Space::unit_cube(2)}) {
      const MapSpec f = s.dim() == 1 ? MapSpec::power(2.0) : MapSpec::coordinate(0, 2);
      const auto pb = problem(k, f, s);
      for (int t = 0; t < 2; ++t) {
        const Point x = s.dim() == 1 ? make_point(rng.uniform(0.3, 0.7)) : make_point(rng.uniform(0.3, 0.7), rng.uniform(0.3, 0.7));
        const double delta = t == 0 ? 0.05 : 0.02;
        const double r = t == 0 ? 0.1 : 0.05;
        const double h = t == 0 ? 1.5 : 2.0;
        const auto b = sandwich_bounds(pb, delta, x, r, h);
        CAPTURE(to_string(k));
        CHECK(b.lower <= b.middle * (1 + 1e-6));
        CHECK(b.middle <= b.upper_shell * (1 + 1e-6));
      }
    }
  }
}

TEST_CASE("homogeneity") {
  const double c = -2.5;
  for (auto k : kFamilies) {
    const auto pb = problem(k, MapSpec::power(2.0));
    const auto pc = problem(k, MapSpec::scaled(MapSpec::power(2.0), c));
    const double f = std::pow(std::abs(c), 2.0);
    const double a = inner_integral(pb, 0.04, make_point(0.3));
    CHECK(std::abs(inner_integral(pc, 0.04, make_point(0.3)) - f * a) <= 1e-9 * f * a);
    const double e = nonlocal_energy(pb, 0.04).value;
    CHECK(std::abs(nonlocal_energy(pc, 0.04).value - f * e) <= 1e-9 * f * e);
  }
  const Space s = Space::interval(0, 1);
  const auto y = TargetSpace::euclidean();
  const double k0 = ks(s, MapSpec::power(2.0), y, 3.0, nullptr, make_point(0.6), 0.07);
  const double k1 = ks(s, MapSpec::scaled(MapSpec::power(2.0), c), y, 3.0, nullptr, make_point(0.6), 0.07);
  CHECK(std::abs(k1 - std::pow(2.5, 3.0) * k0) <= 1e-9 * k1);
}
