#include "bbm/extrapolate.hpp"
#include "bbm/quadrature.hpp"
#include "bbm/random.hpp"

#include <doctest.h>

#include <cmath>

using namespace bbm;

TEST_CASE("gauss-legendre is exact for degree 2n-1") {
  for (int n : {1, 2, 5, 16, 64}) {
    const int deg = 2 * n - 1;
    const double got = integrate_gl([&](double x) { return std::pow(x, deg) + std::pow(x, deg - 1); }, 0.0, 1.0, n);
    const double want = 1.0 / (deg + 1) + (deg >= 1 ? 1.0 / deg : 0.0);
    CHECK(got == doctest::Approx(want).epsilon(1e-13));
  }
  double wsum = 0.0;
  for (double w : gauss_legendre(128).weights) wsum += w;
  CHECK(wsum == doctest::Approx(2.0).epsilon(1e-14));
  CHECK_THROWS(gauss_legendre(0));
}

TEST_CASE("adaptive rule handles a kink") {
  const double got = integrate_adaptive([](double x) { return std::abs(x - 0.3); }, 0.0, 1.0);
  CHECK(got == doctest::Approx(0.5 * (0.09 + 0.49)).epsilon(1e-12));
}

TEST_CASE("radial rule resolves power singularities at the origin") {
  // integral of u^(a-1) over (0, 1] is 1/a, including a close to 0
  for (double a : {1.0, 0.5, 0.1, 0.02}) {
    const double got = integrate_radial([a](double u) { return std::pow(u, a - 1.0); }, 0.0, 1.0, {});
    CHECK(got == doctest::Approx(1.0 / a).epsilon(1e-8));
  }
  // jump at the breakpoint
  const double step = integrate_radial([](double u) { return u < 0.3 ? 1.0 : 2.0; }, 0.0, 1.0, {0.3});
  CHECK(step == doctest::Approx(1.7).epsilon(1e-13));
  // lower limit away from zero
  CHECK(integrate_radial([](double u) { return 1.0 / u; }, 0.01, 1.0, {}) ==
        doctest::Approx(std::log(100.0)).epsilon(1e-9));
}

TEST_CASE("composite rule covers the interval") {
  const auto nodes = composite_rule(0.0, 2.0, {0.5, 1.7}, 0.25, 8);
  double w = 0.0;
  double m = 0.0;
  for (const auto& n : nodes) {
    w += n.w;
    m += n.w * n.x * n.x;
  }
  CHECK(w == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(m == doctest::Approx(8.0 / 3.0).epsilon(1e-13));
}

TEST_CASE("derived seeds are distinct and streams reproducible") {
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  Rng a(derive_seed(9, 3));
  Rng b(derive_seed(9, 3));
  for (int i = 0; i < 100; ++i) CHECK(a.uniform() == b.uniform());
  Rng c(4);
  double mean = 0.0;
  for (int i = 0; i < 100000; ++i) mean += c.uniform();
  CHECK(mean / 100000 == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("extrapolation of synthetic data") {
  SUBCASE("linear data recovers the intercept") {
    std::vector<ExtrapolationSample> s;
    for (double d : {0.08, 0.04, 0.02, 0.01}) s.push_back({d, 0.125 + 0.37 * d, 0.0});
    const auto e = extrapolate(s);
    CHECK(std::abs(e.limit - 0.125) < 1e-10);
    CHECK(e.slope == doctest::Approx(0.37).epsilon(1e-9));
    CHECK(e.smallest_delta_value == doctest::Approx(0.125 + 0.0037));
  }
  SUBCASE("values constructed around 1/8") {
    const auto e = extrapolate({{0.04, 0.1253, 0.0}, {0.02, 0.1251, 0.0}, {0.01, 0.12505, 0.0}});
    CHECK(e.limit == doctest::Approx(0.125).epsilon(1e-3));
    CHECK(e.uncertainty < 1e-4);
  }
  SUBCASE("constant data is exact") {
    const double v = 0.1 + 0.2;
    const auto e = extrapolate({{0.3, v, 0.0}, {0.2, v, 0.0}, {0.1, v, 0.0}});
    CHECK(e.limit == v);
    CHECK(e.uncertainty == 0.0);
  }
  SUBCASE("free exponent") {
    std::vector<ExtrapolationSample> s;
    for (double d : {0.16, 0.08, 0.04, 0.02, 0.01}) s.push_back({d, 2.0 - 0.5 * std::pow(d, 0.5), 0.0});
    const auto e = extrapolate(s, ExtrapolationModel::free_gamma);
    CHECK(e.gamma == doctest::Approx(0.5).epsilon(1e-3));
    CHECK(e.limit == doctest::Approx(2.0).epsilon(1e-5));
  }
  SUBCASE("too few samples") {
    CHECK_THROWS_AS(extrapolate({{0.1, 1.0, 0.0}, {0.05, 1.0, 0.0}}, ExtrapolationModel::free_gamma), InputError);
    CHECK_THROWS_AS(extrapolate({{0.1, 1.0, 0.0}, {0.05, 1.0, 0.0}}), InputError);
  }
}
