#include "parext/connection.hpp"

#include "parext/counterexamples.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace parext;

namespace {

Eigen::VectorXd vec1(double v) {
  Eigen::VectorXd x(1);
  x[0] = v;
  return x;
}

Point pt(double a, double b) {
  Point p(2);
  p << a, b;
  return p;
}

ConnectionForm constant_form(const OpenBox& box, std::vector<Eigen::MatrixXd> mats) {
  std::vector<MatrixField> comps;
  for (const Eigen::MatrixXd& m : mats)
    comps.push_back([m](const Point&) { return m; });
  return ConnectionForm(box, static_cast<int>(mats.front().rows()), std::move(comps),
                        Smoothness::Cinf);
}

}  // namespace

TEST_CASE("standard connection transports identically") {
  const ConnectionForm conn = standard_connection(2, 1);
  const OpenBox box = OpenBox::cube(2, -1.0, 2.0);
  const PiecewisePath path = PiecewisePath::line(pt(0, 0), pt(1, 1), box);
  const TransportResult r = parallel_transport(conn, path, vec1(1.0), 1e-2);
  CHECK(r.value[0] == 1.0);  // zero right-hand side, bit-exact
  CHECK(r.richardson_defect == 0.0);
}

TEST_CASE("standard connection: different paths agree exactly") {
  const ConnectionForm conn = standard_connection(2, 1);
  const OpenBox box = OpenBox::cube(2, -1.0, 2.0);
  const PiecewisePath direct = PiecewisePath::line(pt(0, 0), pt(1, 1), box);
  const PiecewisePath corner = PiecewisePath::polyline({pt(0, 0), pt(1, 0), pt(1, 1)}, box);
  const Eigen::VectorXd a = parallel_transport(conn, direct, vec1(0.75), 1e-2).value;
  const Eigen::VectorXd b = parallel_transport(conn, corner, vec1(0.75), 1e-2).value;
  CHECK(a[0] == b[0]);
}

TEST_CASE("transport determinism") {
  const NamedScenario sc = noextension_scenario(2);
  const PiecewisePath path = PiecewisePath::line(pt(-0.5, -0.3), pt(0.7, 0.4), sc.box);
  const TransportResult a = parallel_transport(sc.connection, path, vec1(1.0), 1e-3);
  const TransportResult b = parallel_transport(sc.connection, path, vec1(1.0), 1e-3);
  CHECK(a.value[0] == b.value[0]);  // bit-for-bit
}

TEST_CASE("rank-1 constant form has the separable closed form") {
  const double c = 0.8;
  const OpenBox box = OpenBox::cube(1, -1.0, 3.0);
  Eigen::MatrixXd m(1, 1);
  m << c;
  const ConnectionForm conn = constant_form(box, {m});
  Point a(1), b(1);
  a << 0.0;
  b << 2.0;  // segment of length L = 2
  const PiecewisePath path = PiecewisePath::line(a, b, box);
  const TransportResult r = parallel_transport(conn, path, vec1(1.5), 1e-3);
  CHECK(r.value[0] == doctest::Approx(1.5 * std::exp(-c * 2.0)).epsilon(1e-8));
}

TEST_CASE("noextension connection is trivial outside the cube") {
  const NamedScenario sc = noextension_scenario(2);
  const PiecewisePath path = PiecewisePath::line(pt(-2, -2), pt(2, -2), sc.box);
  const TransportResult r = parallel_transport(sc.connection, path, vec1(1.0), 1e-3);
  CHECK(r.value[0] == 1.0);
}

TEST_CASE("transport rejects paths leaving the box") {
  const NamedScenario sc = noextension_scenario(2);
  const PiecewisePath path = PiecewisePath::line(pt(0, 0), pt(5, 0), OpenBox::cube(2, -9, 9));
  CHECK_THROWS_AS(parallel_transport(sc.connection, path, vec1(1.0), 1e-2), std::domain_error);
}

TEST_CASE("concatenation matches the joined path") {
  const NamedScenario sc = noextension_scenario(2);
  const PiecewisePath first = PiecewisePath::line(pt(-1.5, -0.5), pt(0.2, 0.3), sc.box);
  const PiecewisePath second = PiecewisePath::line(pt(0.2, 0.3), pt(1.4, 0.8), sc.box);
  const PiecewisePath joined = PiecewisePath::concatenate(first, second);

  const TransportResult r1 = parallel_transport(sc.connection, first, vec1(1.0), 1e-3);
  const TransportResult r2 = parallel_transport(sc.connection, second, r1.value, 1e-3);
  const TransportResult rj = parallel_transport(sc.connection, joined, vec1(1.0), 1e-3);
  const double tol = 2.0 * std::max({r1.richardson_defect, r2.richardson_defect,
                                     rj.richardson_defect, 1e-12});
  CHECK(std::abs(r2.value[0] - rj.value[0]) <= tol);
}

TEST_CASE("inversion returns to the start") {
  for (const NamedScenario& sc : {noextension_scenario(2), cantor_c1_scenario(2)}) {
    const PiecewisePath path = PiecewisePath::polyline(
        {pt(-0.8, -0.4), pt(0.3, 0.2), pt(0.9, 0.9)}, sc.box);
    const TransportResult fwd = parallel_transport(sc.connection, path, vec1(1.0), 1e-3);
    const TransportResult back =
        parallel_transport(sc.connection, path.reversed(), fwd.value, 1e-3);
    CHECK(std::abs(back.value[0] - 1.0) <= 1e-6);
  }
}

TEST_CASE("transport is linear") {
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const OpenBox box = OpenBox::cube(2, -2.0, 2.0);
  Eigen::MatrixXd m1(2, 2), m2(2, 2);
  m1 << 0.3, -0.2, 0.1, 0.4;
  m2 << -0.1, 0.5, 0.2, -0.3;
  const ConnectionForm conn = constant_form(box, {m1, m2});
  const PiecewisePath path = PiecewisePath::line(pt(-1, -1), pt(1, 1), box);

  Eigen::VectorXd v(2), w(2);
  v << u(rng), u(rng);
  w << u(rng), u(rng);
  const double a = u(rng), b = u(rng);
  const Eigen::VectorXd tv = parallel_transport(conn, path, v, 1e-3).value;
  const Eigen::VectorXd tw = parallel_transport(conn, path, w, 1e-3).value;
  const Eigen::VectorXd tc = parallel_transport(conn, path, a * v + b * w, 1e-3).value;
  CHECK((tc - (a * tv + b * tw)).lpNorm<Eigen::Infinity>() <= 1e-9);
}

TEST_CASE("restrict keeps evaluation and transport") {
  const NamedScenario sc = noextension_scenario(2);
  const OpenBox sub = OpenBox::cube(2, -1.5, 1.5);
  const ConnectionForm restricted = restrict_to(sc.connection, sub);

  const Point center = pt(0.0, 0.0);
  CHECK(restricted.component(0, center)(0, 0) ==
        sc.connection.component(0, center)(0, 0));

  const PiecewisePath path = PiecewisePath::line(pt(-1.0, -0.5), pt(1.0, 0.5), sub);
  const double a = parallel_transport(restricted, path, vec1(1.0), 1e-3).value[0];
  const double b = parallel_transport(sc.connection, path, vec1(1.0), 1e-3).value[0];
  CHECK(a == b);  // same ODE, same steps

  CHECK_THROWS_AS(restrict_to(restricted, OpenBox::cube(2, -2.0, 2.0)), std::domain_error);

  const ConnectionForm std_restricted = restrict_to(standard_connection(2, 1), sub);
  CHECK(std_restricted.component(1, center)(0, 0) == 0.0);
}

TEST_CASE("pullback of the standard connection stays standard") {
  const OpenBox box = OpenBox::cube(2, -1.0, 1.0);
  const Diffeo d = Diffeo::axis_swap(box, 0, 1);
  const ConnectionForm pb = pullback(restrict_to(standard_connection(2, 1), box), d);
  CHECK(pb.component(0, pt(0.2, -0.3))(0, 0) == 0.0);
  CHECK(pb.component(1, pt(0.2, -0.3))(0, 0) == 0.0);
}

TEST_CASE("pullback by a translation shifts the components") {
  const OpenBox source = OpenBox::cube(2, -1.0, 1.0);
  Point offset(2);
  offset << 0.25, -0.5;
  const Diffeo d = Diffeo::translation(source, offset);
  std::vector<MatrixField> comps;
  comps.push_back([](const Point& x) {
    Eigen::MatrixXd m(1, 1);
    m << x[0] + 2.0 * x[1];
    return m;
  });
  comps.push_back([](const Point& x) {
    Eigen::MatrixXd m(1, 1);
    m << x[0] * x[1];
    return m;
  });
  const ConnectionForm conn = ConnectionForm(d.target, 1, std::move(comps), Smoothness::Cinf);
  const ConnectionForm pb = pullback(conn, d);
  const Point x = pt(0.1, 0.4);
  CHECK(pb.component(0, x)(0, 0) ==
        doctest::Approx(conn.component(0, pt(0.35, -0.1))(0, 0)));
  CHECK(pb.component(1, x)(0, 0) ==
        doctest::Approx(conn.component(1, pt(0.35, -0.1))(0, 0)));
}

TEST_CASE("pullback by the axis swap moves a dx1-only form to dx2") {
  // Hand-computed chain rule: with omega = A(x) dx^1 and phi the swap,
  // omega'_2(x') = A(swap(x')) and omega'_1 = 0.
  const OpenBox box = OpenBox::cube(2, -1.0, 1.0);
  std::vector<MatrixField> comps;
  comps.push_back([](const Point& x) {
    Eigen::MatrixXd m(1, 1);
    m << std::sin(x[0]) + x[1];
    return m;
  });
  comps.push_back([](const Point&) { return Eigen::MatrixXd::Zero(1, 1); });
  const ConnectionForm conn = ConnectionForm(box, 1, std::move(comps), Smoothness::Cinf);
  const ConnectionForm pb = pullback(conn, Diffeo::axis_swap(box, 0, 1));
  const Point x = pt(0.3, -0.6);
  CHECK(pb.component(0, x)(0, 0) == 0.0);
  CHECK(pb.component(1, x)(0, 0) ==
        doctest::Approx(std::sin(-0.6) + 0.3).epsilon(1e-14));
}

TEST_CASE("pullback rejects a mismatched inverse") {
  const OpenBox box = OpenBox::cube(2, -1.0, 1.0);
  Diffeo broken = Diffeo::axis_swap(box, 0, 1);
  broken.inverse = [](const Point& x) { return Point(x * 2.0); };
  CHECK_THROWS_AS(pullback(restrict_to(standard_connection(2, 1), box), broken),
                  std::invalid_argument);
}

TEST_CASE("pullback evaluation rejects singular Jacobians") {
  const OpenBox box = OpenBox::cube(2, -1.0, 1.0);
  Diffeo collapse;
  collapse.source = box;
  collapse.target = box;
  collapse.forward = [](const Point& x) { return x; };
  collapse.inverse = [](const Point& x) { return x; };
  collapse.jacobian = [](const Point&) { return Eigen::MatrixXd::Zero(2, 2); };
  const ConnectionForm pb = pullback(restrict_to(standard_connection(2, 1), box), collapse);
  CHECK_THROWS_WITH_AS(pb.component(0, pt(0.1, 0.1)), doctest::Contains("singular"),
                       std::runtime_error);
}

TEST_CASE("transport commutes with pullback along diffeomorphisms") {
  const NamedScenario sc = noextension_scenario(2);
  std::mt19937 rng(4242);
  std::uniform_real_distribution<double> u(-0.8, 0.8);

  const OpenBox small = OpenBox::cube(2, -0.9, 0.9);
  Point offset(2);
  offset << 0.4, -0.3;
  std::vector<Diffeo> moves = {
      Diffeo::translation(small, offset),
      Diffeo::axis_swap(small, 0, 1),
      Diffeo::rotation2d(small, sc.box, M_PI / 6.0),
  };
  for (const Diffeo& d : moves) {
    Diffeo into = d;
    into.target = sc.box;  // all images stay inside the scenario box
    const ConnectionForm pb = pullback(sc.connection, into);
    for (int trial = 0; trial < 3; ++trial) {
      const PiecewisePath gamma =
          PiecewisePath::polyline({pt(u(rng), u(rng)), pt(u(rng), u(rng)), pt(u(rng), u(rng))},
                                  small);
      const double direct =
          parallel_transport(sc.connection, gamma.mapped(into), vec1(1.0), 1e-3).value[0];
      const double pulled = parallel_transport(pb, gamma, vec1(1.0), 1e-3).value[0];
      CHECK(std::abs(direct - pulled) <= 2e-6);
    }
  }
}

TEST_CASE("covariant residual of a constant section under the standard connection") {
  const OpenBox box = OpenBox::cube(2, 0.0, 1.0);
  const Grid grid(box, {16, 16});
  const ConnectionForm conn = standard_connection(2, 1);
  std::vector<std::uint8_t> defined(grid.node_count(), 1);
  const SampledSection s =
      SampledSection::sample(grid, 1, [](const Point&) { return vec1(3.5); }, defined);
  for (int axis : {0, 1}) {
    const ResidualField rf = covariant_residual(conn, s, axis, grid.spacing(axis));
    CHECK(rf.max_magnitude == 0.0);
    CHECK(rf.eligible_count == 16u * 14u);
  }
}

TEST_CASE("covariant residual skips nodes with undefined neighbors") {
  const OpenBox box = OpenBox::cube(2, 0.0, 1.0);
  const Grid grid(box, {8, 8});
  const ConnectionForm conn = standard_connection(2, 1);
  std::vector<std::uint8_t> defined(grid.node_count(), 1);
  defined[grid.index({4, 4})] = 0;
  const SampledSection s =
      SampledSection::sample(grid, 1, [](const Point&) { return vec1(1.0); }, defined);
  const ResidualField rf = covariant_residual(conn, s, 0, grid.spacing(0));
  CHECK_FALSE(rf.eligible[grid.index({3, 4})]);
  CHECK_FALSE(rf.eligible[grid.index({5, 4})]);
  CHECK_FALSE(rf.eligible[grid.index({4, 4})]);
  CHECK(rf.eligible[grid.index({3, 3})]);
  CHECK_THROWS_AS(covariant_residual(conn, s, 0, 0.33 * grid.spacing(0)), std::invalid_argument);
}
