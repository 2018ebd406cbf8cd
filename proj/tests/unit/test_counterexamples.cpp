#include "parext/counterexamples.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace parext;

namespace {

Point pt(double a, double b) {
  Point p(2);
  p << a, b;
  return p;
}

}  // namespace

TEST_CASE("bump values") {
  CHECK(bump(0.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(bump(1.0) == 0.0);
  CHECK(bump(-1.0) == 0.0);
  CHECK(bump(2.5) == 0.0);
  CHECK(bump(0.5) == doctest::Approx(std::exp(-4.0 / 3.0)).epsilon(1e-15));
}

TEST_CASE("bump is even and bounded by its center value") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int i = 0; i < 200; ++i) {
    const double x = u(rng);
    CHECK(bump(x) == bump(-x));
    CHECK(bump(x) >= 0.0);
    CHECK(bump(x) <= std::exp(-1.0));
  }
}

TEST_CASE("bump derivative matches finite differences") {
  for (double x : {-0.9, -0.5, -0.1, 0.0, 0.3, 0.7, 0.95, 1.1}) {
    const double h = 1e-6;
    const double fd = (bump(x + h) - bump(x - h)) / (2.0 * h);
    CHECK(bump_derivative(x) == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("smooth step values") {
  CHECK(smooth_step(-2.0) == 0.0);
  CHECK(smooth_step(1.0) == 1.0);
  CHECK(smooth_step(-0.5) == doctest::Approx(0.5).epsilon(1e-10));
  const double v = smooth_step(-0.25);
  CHECK(v > 0.5);
  CHECK(v < 1.0);
  CHECK(v == doctest::Approx(1.0 - smooth_step(-0.75)).epsilon(1e-10));
}

TEST_CASE("smooth step symmetry identity and monotonicity") {
  for (double x : {-0.95, -0.8, -0.6, -0.5, -0.3, -0.05}) {
    CHECK(smooth_step(x) + smooth_step(-x - 1.0) == doctest::Approx(1.0).epsilon(1e-10));
  }
  double prev = -1.0;
  for (double x = -1.2; x <= 0.2; x += 0.01) {
    const double g = smooth_step(x);
    CHECK(g >= prev);
    prev = g;
  }
}

TEST_CASE("smooth step quadrature is converged at the default panel count") {
  for (double x : {-0.9, -0.6, -0.5, -0.25, -0.1}) {
    CHECK(std::abs(smooth_step(x, 4096) - smooth_step(x, 16384)) <= 1e-12);
  }
  const double h = 1e-6;
  for (double x : {-0.75, -0.5, -0.2}) {
    const double fd = (smooth_step(x + h) - smooth_step(x - h)) / (2.0 * h);
    CHECK(smooth_step_derivative(x) == doctest::Approx(fd).epsilon(1e-5));
  }
  CHECK(smooth_step_complement(0.5) == smooth_step(-0.5));
  CHECK_THROWS_AS(smooth_step(0.0, 4), std::invalid_argument);
}

TEST_CASE("noextension scenario forms") {
  const NamedScenario sc = noextension_scenario(2);
  CHECK(sc.connection.component(0, pt(2.0, 2.0))(0, 0) == 0.0);
  CHECK(sc.connection.component(1, pt(2.0, 2.0))(0, 0) == 0.0);
  CHECK(sc.section.value(pt(0.0, -1.5)) == 1.0);
  CHECK_FALSE(sc.section.in_domain(pt(0.0, -0.5)));  // inside Q
  CHECK(sc.section.in_domain(pt(0.0, 0.5)));
  CHECK(sc.expected_jump.has_value());
  CHECK(*sc.expected_jump == doctest::Approx(std::exp(-1.0)));
  CHECK_THROWS_AS(noextension_scenario(1), std::invalid_argument);
}

TEST_CASE("noextension component forms vanish outside the unit cube") {
  const NamedScenario sc = noextension_scenario(2);
  // Shell of points with max-coordinate 1.25.
  for (double t = -1.25; t <= 1.25; t += 0.25) {
    for (const Point& x : {pt(1.25, t), pt(-1.25, t), pt(t, 1.25), pt(t, -1.25)}) {
      CHECK(sc.connection.component(0, x)(0, 0) == 0.0);
      CHECK(sc.connection.component(1, x)(0, 0) == 0.0);
    }
  }
  // Support of omega_2 lies in [-1,1] x [0,1].
  for (double x1 : {-0.9, -0.3, 0.2, 0.8}) {
    for (double x2 : {-0.9, -0.4, -0.05}) {
      CHECK(sc.connection.component(1, pt(x1, x2))(0, 0) == 0.0);
    }
    CHECK(sc.connection.component(1, pt(x1, 0.5))(0, 0) != 0.0);
  }
}

TEST_CASE("noextension section is parallel off Q") {
  const NamedScenario sc = noextension_scenario(2);
  const Grid grid(sc.box, {128, 128});
  std::vector<std::uint8_t> defined = obstacle_mask(sc.obstacle, grid, 4);
  for (auto& m : defined) m = m ? 0 : 1;
  const SampledSection s = SampledSection::sample(
      grid, 1,
      [&sc](const Point& p) {
        Eigen::VectorXd v(1);
        v[0] = sc.section.value(p);
        return v;
      },
      defined);
  for (int axis : {0, 1}) {
    const ResidualField rf = covariant_residual(sc.connection, s, axis, grid.spacing(axis));
    CHECK(rf.max_magnitude <= sc.tolerances.input_residual);
  }
}

TEST_CASE("cantor-c0 scenario forms") {
  const NamedScenario sc = cantor_c0_scenario(2);
  CHECK(sc.connection.component(0, pt(-1.0, 0.7))(0, 0) == 0.0);  // f' = 0 left of 0
  CHECK(sc.section.value(pt(1.0, 0.5)) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(sc.connection.smoothness() == Smoothness::C0);
  CHECK(sc.obstacle_measure.has_value());
  CHECK(*sc.obstacle_measure == 0);
  CHECK_THROWS_AS(cantor_c0_scenario(1), std::invalid_argument);

  const NamedScenario smooth = cantor_c1_scenario(2);
  CHECK(smooth.connection.smoothness() == Smoothness::Cinf);
  CHECK(smooth.expected == Verdict::Extended);
}

TEST_CASE("big measure obstacle on the unit square") {
  const OpenBox box = OpenBox::cube(2, 0.0, 1.0);
  const BigMeasureResult r = big_measure_obstacle(box, 0.5, 8);
  CHECK(r.exact_measure > rational_of(0.5));
  CHECK_FALSE(r.obstacle.empty());
}

TEST_CASE("big measure obstacle accepts negative targets with the empty set") {
  const BigMeasureResult r = big_measure_obstacle(OpenBox::cube(2, 0.0, 1.0), -0.25, 4);
  CHECK(r.obstacle.empty());
  CHECK(r.exact_measure == 0);
}

TEST_CASE("big measure obstacle on (0,2)x(0,1) at lambda0 = 1.2") {
  const OpenBox box({{0.0, 2.0}, {0.0, 1.0}});
  const BigMeasureResult r = big_measure_obstacle(box, 1.2, 8);
  CHECK(r.exact_measure > rational_of(1.2));
  CHECK(r.cubes.cubes.size() >= 2);
  const UnionObstacle* parts = r.obstacle.get_if<UnionObstacle>();
  REQUIRE(parts != nullptr);
  CHECK(parts->parts.size() == r.cubes.cubes.size());

  CHECK_THROWS_AS(big_measure_obstacle(box, 2.5, 8), std::invalid_argument);
}

TEST_CASE("scenario registry") {
  for (const std::string& name : scenario_names()) {
    const NamedScenario sc = make_scenario(name);
    CHECK(sc.dim >= 1);
    CHECK(sc.connection.rank() == 1);
  }
  CHECK_THROWS_WITH_AS(make_scenario("nope"), doctest::Contains("registry"),
                       std::invalid_argument);
}
