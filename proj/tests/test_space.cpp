#include "bbm/random.hpp"
#include "bbm/space.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace bbm;

namespace {

// Midpoint pixel count of the disk inside the box.
double pixel_area(double cx, double cy, double r, const Box& box, int n) {
  const double hx = box.axis[0].length() / n;
  const double hy = box.axis[1].length() / n;
  long hits = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double x = box.axis[0].lo + (i + 0.5) * hx;
      const double y = box.axis[1].lo + (j + 0.5) * hy;
      if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) ++hits;
    }
  return hits * hx * hy;
}

Space weighted_space() {
  return Space::weighted_interval({0.1, 0.9}, [](double t) { return 1.0 / t; }, "1/x");
}

}  // namespace

TEST_CASE("ball measure examples") {
  const Space s = Space::interval(0.0, 1.0);
  CHECK(ball_measure(s, make_point(0.5), 0.1) == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(ball_measure(s, make_point(0.05), 0.1) == doctest::Approx(0.15).epsilon(1e-14));
  const Space w = Space::weighted_interval({1e-9, 1.0}, [](double t) { return 1.0 / t; }, "1/x");
  CHECK(ball_measure(w, make_point(0.5), 0.1) == doctest::Approx(std::log(1.5)).epsilon(1e-10));
  CHECK_THROWS_AS(ball_measure(s, make_point(1.5), 0.1), DomainError);
  CHECK(ball_measure(s, make_point(0.5), 3.0) == doctest::Approx(1.0));
}

TEST_CASE("disk-box area against a pixel count") {
  const Box box = Space::unit_cube(2).domain();
  Rng rng(11);
  for (int t = 0; t < 12; ++t) {
    const double cx = rng.uniform();
    const double cy = rng.uniform();
    const double r = rng.uniform(0.05, 0.8);
    const double px = pixel_area(cx, cy, r, box, 1500);
    CHECK(std::abs(disk_box_area(cx, cy, r, box) - px) < 2e-4);
  }
  CHECK(disk_box_area(0.5, 0.5, 0.1, box) == doctest::Approx(kPi * 0.01).epsilon(1e-12));
  CHECK(disk_box_area(0.0, 0.0, 0.1, box) == doctest::Approx(kPi * 0.01 / 4).epsilon(1e-12));
}

TEST_CASE("ball methods agree on the unit square") {
  Space a = Space::unit_cube(2);
  Space q = Space::unit_cube(2);
  q.set_ball_method(BallMethod::quadrature);
  Space m = Space::unit_cube(2);
  m.set_ball_method(BallMethod::monte_carlo);
  m.set_mc_samples(200000);
  Rng rng(3);
  for (int t = 0; t < 10; ++t) {
    const Point x = make_point(rng.uniform(), rng.uniform());
    const double r = rng.uniform(0.01, 0.7);
    const double exact = ball_measure(a, x, r);
    CHECK(ball_measure(q, x, r) == doctest::Approx(exact).epsilon(1e-9));
    const auto est = ball_measure_estimate(m, x, r);
    CHECK(std::abs(est.value - exact) <= 4.0 * est.error + 1e-12);
  }
  // interior balls are exact disks
  for (double r : {1e-3, 0.01, 0.2}) CHECK(ball_measure(a, make_point(0.5, 0.5), r) == doctest::Approx(kPi * r * r).epsilon(1e-10));
}

TEST_CASE("ball measure is monotone in the radius") {
  const Space spaces[] = {Space::interval(0, 1), Space::unit_cube(2), weighted_space(), Space::circle(1.0)};
  Rng rng(5);
  for (const Space& s : spaces) {
    for (int t = 0; t < 50; ++t) {
      Point x = s.dim() == 1 ? make_point(rng.uniform(s.domain().axis[0].lo, s.domain().axis[0].hi))
                             : make_point(rng.uniform(), rng.uniform());
      const double r1 = rng.uniform(0.001, 0.5);
      const double r2 = r1 + rng.uniform(0.0, 0.5);
      CHECK(ball_measure(s, x, r1) <= ball_measure(s, x, r2) * (1 + 1e-12));
    }
  }
}

TEST_CASE("quantized cache returns stable values") {
  const Space w = weighted_space();
  const double a = ball_measure(w, make_point(0.3), 0.05);
  const double b = ball_measure(w, make_point(0.3 + 1e-15), 0.05);
  CHECK(a == b);
  CHECK(w.cache().size() >= 1);
  CHECK(quantize(0.123456789012345) == doctest::Approx(0.123456789012).epsilon(1e-15));
}

TEST_CASE("log ball measure survives underflow") {
  const Space s = Space::unit_cube(2);
  const double r = 1e-200;
  CHECK(log_ball_measure(s, make_point(0.5, 0.5), r) == doctest::Approx(std::log(kPi) + 2 * std::log(r)));
  CHECK(log_ball_measure(s, make_point(0.5, 0.5), 0.1) == doctest::Approx(std::log(kPi * 0.01)));
}

TEST_CASE("circle space") {
  const Space c = Space::circle(1.0);
  CHECK(c.distance(make_point(0.1), make_point(0.9)) == doctest::Approx(0.2));
  CHECK(ball_measure(c, make_point(0.05), 0.1) == doctest::Approx(0.2));
  CHECK(ball_measure(c, make_point(0.05), 0.7) == doctest::Approx(1.0));
  double n = 0.0;
  CHECK(sphere_integral(c, make_point(0.95), 0.1, [&](const Point&) { return 1.0; }) == 2.0);
  n = sphere_integral(c, make_point(0.95), 0.1, [](const Point& y) { return y[0]; });
  CHECK(n == doctest::Approx(0.05 + 0.85));
}

TEST_CASE("sphere integral is the radial derivative of the ball mass") {
  const Space s = Space::unit_cube(2);
  Rng rng(8);
  for (int t = 0; t < 10; ++t) {
    const Point x = make_point(rng.uniform(), rng.uniform());
    const double u = rng.uniform(0.05, 0.9);
    const double e = 1e-6;
    const double fd = (ball_measure(s, x, u + e) - ball_measure(s, x, u - e)) / (2 * e);
    CHECK(sphere_integral(s, x, u, [](const Point&) { return 1.0; }) == doctest::Approx(fd).epsilon(1e-6));
  }
  const Space w = weighted_space();
  const double fd = (ball_measure(w, make_point(0.2), 0.15 + 1e-6) - ball_measure(w, make_point(0.2), 0.15 - 1e-6)) / 2e-6;
  CHECK(sphere_integral(w, make_point(0.2), 0.15, [](const Point&) { return 1.0; }) == doctest::Approx(fd).epsilon(1e-6));
}

TEST_CASE("sample points") {
  const Space s = Space::interval(0, 1);
  const auto a = sample_points(s, s.domain(), 4, 7);
  const auto b = sample_points(s, s.domain(), 4, 7);
  REQUIRE(a.size() == 4);
  for (int i = 0; i < 4; ++i) {
    CHECK(a[i].x[0] == b[i].x[0]);
    CHECK(a[i].weight == b[i].weight);
  }
  for (int n : {1, 3, 1000}) {
    double sum = 0.0;
    for (const auto& p : sample_points(s, s.domain(), n, 2)) sum += p.weight;
    CHECK(std::abs(sum - 1.0) < 1e-12);
  }
  CHECK_THROWS_AS(sample_points(s, Box(Interval{0.5, 0.5}), 10, 1), DomainError);

  // weighted CDF against ln(x/0.1)/ln 9
  const Space w = weighted_space();
  auto pts = sample_points(w, w.domain(), 100000, 3);
  std::sort(pts.begin(), pts.end(), [](const SamplePoint& p, const SamplePoint& q) { return p.x[0] < q.x[0]; });
  const double total = std::log(9.0);
  double acc = 0.0;
  double worst = 0.0;
  for (const auto& p : pts) {
    acc += p.weight;
    worst = std::max(worst, std::abs(acc / total - std::log(p.x[0] / 0.1) / total));
  }
  CHECK(worst < 0.01);

  const Space sq = Space::unit_cube(2);
  double sum = 0.0;
  for (const auto& p : sample_points(sq, Box(Interval{0.0, 0.5}, Interval{0.0, 1.0}), 1000, 4)) {
    CHECK(p.x[0] <= 0.5);
    sum += p.weight;
  }
  CHECK(sum == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("doubling constants") {
  const Space s = Space::interval(0, 1);
  const auto d1 = estimate_doubling(s, s.domain(), {0.1, 0.05, 0.01});
  CHECK(d1.c_d == doctest::Approx(2.0).epsilon(0.005));
  const Space sq = Space::unit_cube(2);
  const auto d2 = estimate_doubling(sq, Box(Interval{0.3, 0.7}, Interval{0.3, 0.7}), {0.05, 0.02, 0.01});
  CHECK(std::abs(d2.c_d - 4.0) < 0.05);
  const auto dw = estimate_doubling(weighted_space(), Box(Interval{0.1, 0.9}), {0.1, 0.05});
  CHECK(dw.c_d >= 2.0);
  CHECK(std::isfinite(dw.c_d));
  CHECK(dw.worst_center[0] < 0.31);
}

TEST_CASE("local dimension") {
  const Space sq = Space::unit_cube(2);
  const std::vector<double> radii{0.01, 0.005, 0.0025};
  CHECK(dimension_at(sq, make_point(0.5, 0.5), radii, 2.0).value == doctest::Approx(2.0).epsilon(0.025));
  const Space s = Space::interval(0, 1);
  CHECK(std::abs(dimension_at(s, make_point(0.5), radii, 2.0).value - 1.0) < 0.02);
  CHECK(std::abs(dimension_at(s, make_point(0.0), radii, 2.0).value - 1.0) < 0.02);
  CHECK_THROWS_AS(dimension_at(s, make_point(0.5), radii, 1.0), InputError);
}

TEST_CASE("space validation") {
  Space s = Space::interval(0, 1);
  CHECK_THROWS_AS(s.set_interior_margin(-1.0), DomainError);
  CHECK_THROWS_AS(Space::circle(0.0), DomainError);
  CHECK(s.boundary_distance(make_point(0.2)) == doctest::Approx(0.2));
  CHECK(Space::unit_cube(2).diameter() == doctest::Approx(std::sqrt(2.0)));
}
