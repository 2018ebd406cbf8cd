#include "parext/extension.hpp"

#include "parext/counterexamples.hpp"

#include <doctest.h>

#include <cmath>

using namespace parext;

namespace {

Point pt(double a, double b) {
  Point p(2);
  p << a, b;
  return p;
}

SampledSection sample_scalar(const Grid& grid, const std::function<double(const Point&)>& f,
                             const std::vector<std::uint8_t>& defined) {
  return SampledSection::sample(
      grid, 1,
      [&f](const Point& p) {
        Eigen::VectorXd v(1);
        v[0] = f(p);
        return v;
      },
      defined);
}

std::vector<std::uint8_t> off_mask(const ObstacleSet& F, const Grid& grid, int depth) {
  std::vector<std::uint8_t> mask = obstacle_mask(F, grid, depth);
  for (auto& m : mask) m = m ? 0 : 1;
  return mask;
}

ConnectionForm rank1_constants(const OpenBox& box, double c1, double c2) {
  std::vector<MatrixField> comps;
  for (double c : {c1, c2})
    comps.push_back([c](const Point&) {
      Eigen::MatrixXd m(1, 1);
      m << c;
      return m;
    });
  return ConnectionForm(box, 1, std::move(comps), Smoothness::Cinf);
}

}  // namespace

TEST_CASE("extend_slab: standard connection and constant section") {
  const OpenBox box = OpenBox::cube(2, 0.0, 1.0);
  const Grid grid(box, {32, 32});
  HalfSlab F{0, 0.5, 1, CantorLikeSet::ternary({0.0, 1.0})};
  const SampledSection s =
      sample_scalar(grid, [](const Point&) { return 2.5; }, off_mask(ObstacleSet(F), grid, 8));
  const ExtensionReport report =
      extend_slab(standard_connection(2, 1), s, F, 0.25, Tolerances{}, 8);
  CHECK(report.verdict == Verdict::Extended);
  CHECK(report.agreement <= 1e-13);
  for (double r : report.axis_residual) CHECK(r <= 1e-12);
  for (std::size_t node = 0; node < grid.node_count(); ++node) {
    CHECK(report.extended.defined(node));
    CHECK(report.extended.value(node)[0] == doctest::Approx(2.5).epsilon(1e-12));
  }
}

TEST_CASE("extend_slab preconditions") {
  const OpenBox box = OpenBox::cube(2, 0.0, 1.0);
  const Grid grid(box, {16, 16});
  HalfSlab F{0, 0.5, 1, CantorLikeSet::ternary({0.0, 1.0})};
  const SampledSection constant =
      sample_scalar(grid, [](const Point&) { return 1.0; }, off_mask(ObstacleSet(F), grid, 6));

  // a1 right of the threshold.
  CHECK_THROWS_AS(
      extend_slab(standard_connection(2, 1), constant, F, 0.75, Tolerances{}, 6),
      std::invalid_argument);

  // Constant section is not parallel for a nonzero constant form.
  const ConnectionForm conn = rank1_constants(box, 0.4, 0.0);
  CHECK_THROWS_WITH_AS(extend_slab(conn, constant, F, 0.25, Tolerances{}, 6),
                       doctest::Contains("not parallel"), std::runtime_error);
}

TEST_CASE("extend_slab reproduces the closed form for constant coefficients") {
  const OpenBox box = OpenBox::cube(2, 0.0, 1.0);
  const Grid grid(box, {128, 128});
  const double c1 = 0.3, c2 = -0.7;
  const ConnectionForm conn = rank1_constants(box, c1, c2);
  auto closed = [c1, c2](const Point& x) { return std::exp(-c1 * x[0] - c2 * x[1]); };
  HalfSlab F{0, 0.5, 1, CantorLikeSet::ternary({0.0, 1.0})};
  const SampledSection s = sample_scalar(grid, closed, off_mask(ObstacleSet(F), grid, 12));

  const ExtensionReport report = extend_slab(conn, s, F, 0.25, Tolerances{}, 12);
  CHECK(report.verdict == Verdict::Extended);
  CHECK(report.agreement <= 1e-8);
  for (std::size_t node = 0; node < grid.node_count(); ++node)
    CHECK(std::abs(report.extended.value(node)[0] - closed(grid.point(node))) <= 1e-8);
}

TEST_CASE("extend_slab idempotence on an already-total section") {
  const OpenBox box = OpenBox::cube(2, 0.0, 1.0);
  const Grid grid(box, {32, 32});
  const ConnectionForm conn = rank1_constants(box, 0.3, -0.7);
  auto closed = [](const Point& x) { return std::exp(-0.3 * x[0] + 0.7 * x[1]); };
  const std::vector<std::uint8_t> all(grid.node_count(), 1);
  const SampledSection total = sample_scalar(grid, closed, all);
  HalfSlab F{0, 0.5, 1, CantorLikeSet::ternary({0.0, 1.0})};
  Tolerances tol;
  tol.input_residual = 1e-3;  // h^2 residual floor at 32 cells/axis
  tol.residual = 1e-3;
  const ExtensionReport report = extend_slab(conn, total, F, 0.25, tol, 12);
  CHECK(report.verdict == Verdict::Extended);
  CHECK(report.agreement <= 1e-10);
  for (std::size_t node = 0; node < grid.node_count(); ++node)
    CHECK(std::abs(report.extended.value(node)[0] - total.value(node)[0]) <= 1e-10);
}

TEST_CASE("extend_slab on the noextension scenario above the slab") {
  // Case-(i) geometry: F' = {x1 >= -1, x2 in {0}} inside the region x2 > 0;
  // the closed-form oracle above Q is t2 = 1 + f.
  const NamedScenario sc = noextension_scenario(2);
  const OpenBox region({{-3.0, 3.0}, {0.0, 3.0}});
  const Grid grid(region, {128, 64});
  const ConnectionForm conn = restrict_to(sc.connection, region);
  HalfSlab F{0, -1.0, 1, CantorLikeSet::discrete({0.0, 3.0}, {0.0})};
  const SampledSection s =
      sample_scalar(grid, sc.section.value, off_mask(ObstacleSet(F), grid, 4));

  Tolerances tol = sc.tolerances;
  const ExtensionReport report = extend_slab(conn, s, F, -2.0, tol, 4);
  CHECK(report.thin_policy == ThinResidualPolicy::Assert);  // discrete case
  CHECK(report.verdict == Verdict::Extended);
  for (std::size_t node = 0; node < grid.node_count(); ++node) {
    const double want = sc.section.value(grid.point(node));
    CHECK(std::abs(report.extended.value(node)[0] - want) <= 1e-5);
  }
}

TEST_CASE("extend_slab detects the cantor-c0 obstruction under the C1 policy") {
  const NamedScenario sc = cantor_c0_scenario(2);
  const Grid grid(sc.box, {96, 96});
  const SampledSection s =
      sample_scalar(grid, sc.section.value, off_mask(sc.obstacle, grid, 12));
  const HalfSlab& F = *sc.obstacle.get_if<HalfSlab>();

  const ExtensionReport report =
      extend_slab(sc.connection, s, F, -1.0, sc.tolerances, 12, ThinResidualPolicy::Assert);
  CHECK(report.verdict == Verdict::Obstructed);
  REQUIRE(report.evidence.has_value());
  CHECK(report.evidence->kind == "residual");
  // Axis-1 residual vanishes by construction, the thin axis blows up.
  CHECK(report.axis_residual[0] <= sc.tolerances.residual);
  CHECK(report.axis_residual[1] > 10.0 * sc.tolerances.residual);
  // Report-only policy on the same data reports extended: the C0 guarantee
  // asserts nothing about the thin axis.
  const ExtensionReport relaxed =
      extend_slab(sc.connection, s, F, -1.0, sc.tolerances, 12, ThinResidualPolicy::Report);
  CHECK(relaxed.verdict == Verdict::Extended);
  CHECK(relaxed.agreement <= sc.tolerances.agreement);
}

TEST_CASE("extend_bidirectional agrees across axis orders") {
  const NamedScenario sc = fat_cantor_box_scenario();
  const Grid grid(sc.box, {64, 64});
  const SampledSection s =
      sample_scalar(grid, sc.section.value, off_mask(sc.obstacle, grid, 10));
  const BiSlab& F = *sc.obstacle.get_if<BiSlab>();
  Tolerances tol = sc.tolerances;
  tol.input_residual = 1e-4;  // coarser grid than the scenario default
  tol.residual = 1e-4;
  const ExtensionReport report = extend_bidirectional(sc.connection, s, F, 0.125, 0.125, tol, 10);
  CHECK(report.verdict == Verdict::Extended);
  CHECK(report.bidirectional_gap <= 1e-9);
  for (std::size_t node = 0; node < grid.node_count(); ++node) {
    const double want = sc.section.value(grid.point(node));
    CHECK(std::abs(report.extended.value(node)[0] - want) <= 1e-8);
  }
}

TEST_CASE("extend_bidirectional: standard connection with a constant section") {
  const OpenBox box = OpenBox::cube(2, 0.0, 1.0);
  const Grid grid(box, {48, 48});
  const CantorLikeSet fat = fat_cantor_build({0.3, 0.9}, 0.4);
  BiSlab F{HalfSlab{0, 0.25, 1, fat}, HalfSlab{1, 0.25, 0, fat}};
  const SampledSection s =
      sample_scalar(grid, [](const Point&) { return 4.0; }, off_mask(ObstacleSet(F), grid, 8));
  const ExtensionReport report =
      extend_bidirectional(standard_connection(2, 1), s, F, 0.125, 0.125, Tolerances{}, 8);
  CHECK(report.verdict == Verdict::Extended);
  CHECK(report.bidirectional_gap == 0.0);  // both orders give the exact constant
}

TEST_CASE("extend_bidirectional under a connection declared C0 only") {
  // Case (iii): with a merely-C0 connection over a fat-Cantor product the
  // thin-axis residuals are reported, not asserted; the verdict rides on the
  // agreement checks alone.
  const OpenBox box = OpenBox::cube(2, 0.0, 1.0);
  const Grid grid(box, {64, 64});
  std::vector<MatrixField> comps;
  for (double c : {0.3, -0.7})
    comps.push_back([c](const Point&) {
      Eigen::MatrixXd m(1, 1);
      m << c;
      return m;
    });
  const ConnectionForm conn(box, 1, std::move(comps), Smoothness::C0);
  auto closed = [](const Point& x) { return std::exp(-0.3 * x[0] + 0.7 * x[1]); };
  const CantorLikeSet fat = fat_cantor_build({0.3, 0.9}, 0.45);
  BiSlab F{HalfSlab{0, 0.25, 1, fat}, HalfSlab{1, 0.25, 0, fat}};
  const SampledSection s = sample_scalar(grid, closed, off_mask(ObstacleSet(F), grid, 10));
  Tolerances tol;
  tol.input_residual = 1e-4;
  tol.residual = 1e-4;
  const ExtensionReport report = extend_bidirectional(conn, s, F, 0.125, 0.125, tol, 10);
  CHECK(report.thin_policy == ThinResidualPolicy::Report);
  CHECK(report.verdict == Verdict::Extended);
  CHECK(report.agreement <= tol.agreement);
}

TEST_CASE("extend_bidirectional reports the location of a disagreement") {
  const NamedScenario sc = fat_cantor_box_scenario();
  const Grid grid(sc.box, {48, 48});
  const SampledSection s =
      sample_scalar(grid, sc.section.value, off_mask(sc.obstacle, grid, 8));
  const BiSlab& F = *sc.obstacle.get_if<BiSlab>();
  Tolerances tol = sc.tolerances;
  tol.input_residual = 1e-3;
  tol.residual = 1e-3;
  tol.agreement = 1e-18;  // below integrator rounding: the orders must "disagree"
  try {
    extend_bidirectional(sc.connection, s, F, 0.125, 0.125, tol, 8);
    FAIL("expected InconsistencyError");
  } catch (const InconsistencyError& e) {
    CHECK(e.magnitude() > 0.0);
    CHECK(e.location().size() == 2);
  }
}

TEST_CASE("maximal scan extends across a bounded hyperplane patch") {
  const OpenBox box = OpenBox::cube(2, 0.0, 1.0);
  const Grid grid(box, {64, 64});
  HyperplanePatch patch;
  patch.axis = 1;
  patch.level = 0.5;
  patch.sides.push_back(SideConstraint{0, 0.25, std::numeric_limits<double>::infinity()});
  const ObstacleSet F(patch);
  const SampledSection s =
      sample_scalar(grid, [](const Point&) { return 1.5; }, off_mask(F, grid, 4));
  const MaximalRegion region =
      maximal_extension_scan(standard_connection(2, 1), s, F, grid, 2, Tolerances{}, 4);
  CHECK(region.full());
  CHECK(region.frontier.empty());
  for (std::size_t node = 0; node < grid.node_count(); ++node)
    CHECK(region.section.value(node)[0] == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("maximal scan blocks on a full hyperplane with mismatched constants") {
  const OpenBox box = OpenBox::cube(2, 0.0, 1.0);
  const Grid grid(box, {64, 64});
  HyperplanePatch plane;
  plane.axis = 1;
  plane.level = 0.5;
  const ObstacleSet F(plane);
  const std::vector<std::uint8_t> defined = off_mask(F, grid, 4);
  const SampledSection s =
      sample_scalar(grid, [](const Point& x) { return x[1] < 0.5 ? 0.0 : 1.0; }, defined);
  const MaximalRegion region =
      maximal_extension_scan(standard_connection(2, 1), s, F, grid, 2, Tolerances{}, 4);
  CHECK_FALSE(region.full());
  std::size_t f_nodes = 0;
  for (std::uint8_t d : defined) f_nodes += d ? 0 : 1;
  CHECK(region.frontier.size() == f_nodes);  // every F-node stays blocked
}

TEST_CASE("maximal scan halts inside Q for the noextension section") {
  const NamedScenario sc = noextension_scenario(2);
  const Grid grid(sc.box, {64, 64});
  std::vector<std::uint8_t> defined = off_mask(sc.obstacle, grid, 4);
  for (std::size_t node = 0; node < grid.node_count(); ++node)
    if (defined[node] && !sc.section.in_domain(grid.point(node))) defined[node] = 0;
  const SampledSection s = sample_scalar(grid, sc.section.value, defined);
  Tolerances tol = sc.tolerances;
  tol.input_residual = 0.2;  // coarser grid than the pinned 128 cells/axis
  tol.residual = 0.2;
  tol.consistency = 0.2;
  const MaximalRegion region =
      maximal_extension_scan(sc.connection, s, sc.obstacle, grid, 2, tol, 4);
  CHECK_FALSE(region.full());
  CHECK_FALSE(region.frontier.empty());
  for (std::size_t node : region.frontier) {
    const Point x = grid.point(node);
    // Frontier nodes live in (one cell around) Q.
    CHECK(x[0] >= -1.1);
    CHECK(x[0] <= 1.1);
    CHECK(x[1] >= -1.1);
    CHECK(x[1] <= 0.1);
  }
}

TEST_CASE("detect_jump on the pinned examples") {
  SUBCASE("noextension n=2") {
    const NamedScenario sc = noextension_scenario(2);
    const JumpProbe probe = detect_jump(sc.connection, sc.section.value, 1, pt(0.0, 0.0),
                                        {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6});
    CHECK(probe.limit_below == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(probe.limit_above == doctest::Approx(1.0 + std::exp(-1.0)).epsilon(1e-9));
    CHECK(std::abs(probe.jump - std::exp(-1.0)) <= 1e-6);
  }
  SUBCASE("noextension n=3") {
    const NamedScenario sc = noextension_scenario(3);
    Point base = Point::Zero(3);
    const JumpProbe probe = detect_jump(sc.connection, sc.section.value, 2, base,
                                        {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6});
    CHECK(std::abs(probe.jump - std::exp(-2.0)) <= 1e-6);
  }
  SUBCASE("constant section has no jump") {
    const JumpProbe probe =
        detect_jump(standard_connection(2, 1), [](const Point&) { return 2.0; }, 1,
                    pt(0.5, 0.5), {1e-1, 1e-2, 1e-3});
    CHECK(probe.jump == 0.0);
  }
  SUBCASE("non-monotone epsilons are rejected") {
    CHECK_THROWS_AS(detect_jump(standard_connection(2, 1), [](const Point&) { return 0.0; }, 0,
                                pt(0.5, 0.5), {1e-2, 1e-1}),
                    std::invalid_argument);
  }
}

TEST_CASE("detect_nondifferentiability on the cantor section") {
  const NamedScenario sc = cantor_c0_scenario(2);
  std::vector<double> h;
  for (int k = 4; k <= 10; ++k) h.push_back(std::pow(3.0, -k));

  const auto probes = detect_nondifferentiability(
      sc.section.value, 1, {pt(0.5, 0.0), pt(-0.5, 0.0), pt(0.5, 0.5)}, h);
  REQUIRE(probes.size() == 3);
  CHECK(probes[0].verdict == QuotientVerdict::Divergent);
  // Growth oracle at (0.5, 0): quotient_k = f(0.5) g(3^-k) / (2*3^-k)
  // = 0.25 * (3/2)^k / 2.
  for (std::size_t i = 0; i < h.size(); ++i) {
    const int k = 4 + static_cast<int>(i);
    const double want = 0.25 * std::pow(1.5, k) / 2.0;
    CHECK(probes[0].quotients[i] == doctest::Approx(want).epsilon(1e-9));
  }
  CHECK(probes[1].verdict == QuotientVerdict::Convergent);  // f = 0 left of zero
  CHECK(probes[1].quotients.back() == 0.0);
  CHECK(probes[2].verdict == QuotientVerdict::Convergent);  // locally constant g
  CHECK(probes[2].quotients.back() == 0.0);

  CHECK_THROWS_AS(
      detect_nondifferentiability(sc.section.value, 1, {pt(0.5, 0.0)}, {1e-1, 1e-2}),
      std::invalid_argument);
  CHECK_THROWS_AS(
      detect_nondifferentiability(sc.section.value, 1, {pt(0.5, 0.0)}, {1e-3, 1e-2, 1e-1}),
      std::invalid_argument);
}
