#include "bbm/mollifiers.hpp"
#include "bbm/random.hpp"

#include <doctest.h>

#include <cmath>

using namespace bbm;

namespace {

MollifierFamily fam(MollifierKind k, double p = 2.0, Space s = Space::interval(0, 1)) {
  return {k, p, std::move(s)};
}

const MollifierKind kFamilies[] = {MollifierKind::rho0, MollifierKind::rho1, MollifierKind::rho2, MollifierKind::rho3};

}  // namespace

TEST_CASE("kernel values") {
  CHECK(kernel(fam(MollifierKind::rho1), 0.1, make_point(0.5), make_point(0.55)) == doctest::Approx(500.0));
  CHECK(kernel(fam(MollifierKind::rho1), 0.1, make_point(0.5), make_point(0.7)) == 0.0);
  const double r0 = 0.1 / (std::pow(0.05, 1.8) * 0.4);
  CHECK(kernel(fam(MollifierKind::rho0), 0.1, make_point(0.5), make_point(0.55)) == doctest::Approx(r0).epsilon(1e-12));
  CHECK(r0 == doctest::Approx(54.97).epsilon(1e-3));
  // diagonal convention
  CHECK(kernel(fam(MollifierKind::rho0), 0.1, make_point(0.5), make_point(0.5)) == 0.0);
  CHECK(kernel(fam(MollifierKind::rho2), 0.1, make_point(0.5), make_point(0.5)) == 0.0);
  // rho3 at u = 0.05: 1/(delta^2 * 0.1)
  CHECK(kernel(fam(MollifierKind::rho3), 0.1, make_point(0.5), make_point(0.45)) == doctest::Approx(1000.0));
  CHECK(kernel(fam(MollifierKind::annulus), 0.1, make_point(0.5), make_point(0.52)) == 0.0);
  CHECK(kernel(fam(MollifierKind::annulus), 0.1, make_point(0.5), make_point(0.58)) == doctest::Approx(500.0));
  CHECK_THROWS_AS(parse_mollifier("rho9"), InputError);
}

TEST_CASE("kernels are monotone in the distance") {
  Rng rng(17);
  for (auto k : kFamilies) {
    for (const Space& s : {Space::interval(0, 1), Space::unit_cube(2)}) {
      const auto f = fam(k, 2.0, s);
      for (int t = 0; t < 200; ++t) {
        const Point x = s.dim() == 1 ? make_point(rng.uniform(0.2, 0.8)) : make_point(rng.uniform(0.2, 0.8), rng.uniform(0.2, 0.8));
        Point dir = s.dim() == 1 ? make_point(1.0) : make_point(rng.uniform(-1, 1), rng.uniform(-1, 1));
        dir /= dir.norm();
        const double u1 = rng.uniform(1e-4, 0.15);
        const double u2 = u1 + rng.uniform(0.0, 0.05);
        const double delta = rng.uniform(0.01, 0.1);
        CHECK(kernel(f, delta, x, Point(x + u1 * dir)) >= kernel(f, delta, x, Point(x + u2 * dir)) * (1 - 1e-12));
      }
    }
  }
}

TEST_CASE("sigma") {
  CHECK(sigma(fam(MollifierKind::rho2), 0.1, make_point(0.5), 0.05) == doctest::Approx(2000.0));
  CHECK(sigma(fam(MollifierKind::rho2), 0.1, make_point(0.5), 0.2) == 0.0);
  CHECK(sigma(fam(MollifierKind::rho0), 0.1, make_point(0.5), 0.05) ==
        doctest::Approx(0.1 / (std::pow(0.05, 1.8) * 0.4)).epsilon(1e-12));
  for (auto k : {MollifierKind::rho1, MollifierKind::rho2, MollifierKind::rho3})
    CHECK(sigma(fam(k), 0.05, make_point(0.5), 0.051) == 0.0);

  SUBCASE("matches the brute-force sup") {
    Rng rng(23);
    for (auto k : kFamilies) {
      const auto f = fam(k);
      for (int t = 0; t < 10; ++t) {
        const Point x = make_point(rng.uniform(0.3, 0.7));
        const double delta = rng.uniform(0.02, 0.1);
        const double r = rng.uniform(0.1, 0.9) * delta;
        const double closed = sigma(f, delta, x, r);
        const double brute = sigma_brute_force(f, delta, x, r, 10000, 100 + t);
        CHECK(brute <= closed * (1 + 1e-9));
        CHECK(brute >= closed * (1 - 1e-3));
      }
    }
  }
}

TEST_CASE("sigma is monotone along a radius grid") {
  for (auto k : kFamilies) {
    const auto f = fam(k);
    double prev = 0.0;
    for (double r = 0.3; r > 1e-5; r /= 1.5) {
      const double v = sigma(f, 0.05, make_point(0.5), r);
      CHECK(v >= prev * (1 - 1e-12));
      prev = v;
    }
  }
}

TEST_CASE("layer terms") {
  const auto f = fam(MollifierKind::rho1);
  const auto t = pi_terms(f, 0.03, make_point(0.5), 0.1, 2.0, 20);
  REQUIRE(t.upper.size() >= 3);
  CHECK(t.upper[0] == 0.0);
  CHECK(t.upper[1] == 0.0);
  const double tt = 0.025 / 0.03;
  CHECK(t.upper[2] == doctest::Approx(std::pow(tt, 3.0)).epsilon(1e-10));
  CHECK(t.upper[2] == doctest::Approx(0.5787).epsilon(1e-3));
  CHECK(t.lower[2] == doctest::Approx(t.upper[2] / 8).epsilon(1e-10));
  CHECK(t.lower[2] == doctest::Approx(0.0723).epsilon(2e-3));

  Rng rng(31);
  for (auto k : kFamilies) {
    for (int c = 0; c < 5; ++c) {
      const double h = rng.uniform(1.1, 3.0);
      const auto terms = pi_terms(fam(k), rng.uniform(0.01, 0.08), make_point(rng.uniform(0.3, 0.7)), 0.1, h);
      REQUIRE(terms.lower.size() == terms.upper.size());
      for (std::size_t i = 0; i < terms.lower.size(); ++i) {
        CHECK(terms.lower[i] >= 0.0);
        CHECK(terms.lower[i] <= terms.upper[i] * (1 + 1e-12));
      }
      CHECK(std::isfinite(terms.upper_sum()));
    }
  }

  SUBCASE("1D layer sums as h approaches 1") {
    // delta on the radius grid r / h^k, where the sums have closed forms
    const double h = 1.05;
    const double delta = 0.1 / std::pow(h, 47) * (1 + 1e-13);
    const auto t1 = pi_terms(fam(MollifierKind::rho1), delta, make_point(0.5), 0.1, h);
    CHECK(t1.upper_sum() == doctest::Approx(1.0).epsilon(1e-9));
    // rho2: 1 + (1 - h^-p)/(h - 1), tending to 1 + p
    const auto t2 = pi_terms(fam(MollifierKind::rho2), delta, make_point(0.5), 0.1, h);
    CHECK(t2.upper_sum() == doctest::Approx(1.0 + (1.0 - std::pow(h, -2.0)) / (h - 1.0)).epsilon(1e-9));
    CHECK(t2.upper_sum() == doctest::Approx(3.0).epsilon(0.05));
  }
}

TEST_CASE("theta constants") {
  CHECK(theta_formula(MollifierKind::rho0, 2.0, 1) == doctest::Approx(0.375));
  CHECK(theta_formula(MollifierKind::rho1, 3.7, 2) == 1.0);
  CHECK(theta_formula(MollifierKind::rho2, 2.0, 2) == 2.0);
  CHECK(theta_formula(MollifierKind::rho3, 2.0, 1) == 1.5);
  for (double p : {1.0, 1.5, 2.0, 3.0})
    for (int d : {1, 2, 3})
      CHECK(theta_formula(MollifierKind::rho3, p, d) * theta_formula(MollifierKind::rho2, p, d) ==
            ((d + p) / p) * ((d + p) / d));
}

TEST_CASE("admissibility certification") {
  for (auto k : kFamilies) {
    for (const Space& s : {Space::interval(0, 1), Space::unit_cube(2)}) {
      const auto rep = check_admissibility(fam(k, 2.0, s));
      CAPTURE(rep.family);
      CAPTURE(s.dim());
      REQUIRE(rep.conditions.size() == 7);
      for (int i = 1; i <= 7; ++i) {
        CAPTURE(rep.condition(i).detail);
        CHECK(rep.condition(i).pass);
        CHECK(std::isfinite(rep.condition(i).margin));
      }
      CHECK(rep.c_m_lower <= rep.c_m_upper);
      CHECK(rep.theta == doctest::Approx(theta_formula(k, 2.0, s.dim())));
      CHECK(rep.strongly_admissible());
    }
  }
  const auto bad = check_admissibility(fam(MollifierKind::annulus));
  CHECK_FALSE(bad.condition(3).pass);
  CHECK_FALSE(bad.admissible());
}
