#pragma once

#include "parext/connection.hpp"
#include "parext/extension.hpp"
#include "parext/rational.hpp"
#include "parext/sets.hpp"

#include <optional>
#include <string>
#include <vector>

namespace parext {

/// exp(-1/(1-x^2)) inside (-1, 1), zero outside; even, bounded by e^-1.
double bump(double x);
double bump_derivative(double x);

/// Smoothed step g from the normalized bump primitive: 0 below -1, 1 above 0,
/// strictly increasing in between. Composite Simpson quadrature; the
/// denominator is cached per panel count.
double smooth_step(double x, int quadrature_panels = 4096);
double smooth_step_derivative(double x, int quadrature_panels = 4096);
/// Companion h(x) = g(-x): 1 below 0, 0 above 1.
double smooth_step_complement(double x, int quadrature_panels = 4096);

struct ScenarioSection {
  std::function<double(const Point&)> value;
  std::function<bool(const Point&)> in_domain;  // where the closed form is valid
};

/// A scenario bundles everything one run needs: connection, closed-form
/// section, obstacle, expected verdict, pinned tolerances and probe points.
struct NamedScenario {
  std::string name;
  int dim = 2;
  OpenBox box = OpenBox::cube(2, 0.0, 1.0);
  ConnectionForm connection = standard_connection(2, 1);
  ScenarioSection section;
  ObstacleSet obstacle;
  Verdict expected = Verdict::Extended;
  Tolerances tolerances;
  std::optional<ThinResidualPolicy> thin_policy;
  int obstacle_depth = 12;

  std::optional<double> expected_jump;
  std::optional<Point> jump_base;
  int jump_axis = 1;
  std::vector<Point> divergence_probes;
  std::vector<Point> convergence_probes;
  std::optional<Rational> obstacle_measure;
};

/// Standard connection, constant section, no obstacle.
NamedScenario standard_scenario(int n);
/// The smooth rank-1 connection that is trivial outside [-1,1]^n together with
/// the section that cannot be extended across Q = [-1,1]^(n-1) x [-1,0];
/// jump b(0)^(n-1) at the inner face.
NamedScenario noextension_scenario(int n);
/// The C0 Cantor-function connection with section 1 + f(x1) g(x2) and the
/// half-slab obstacle over the ternary set; obstructed under the C1 policy.
NamedScenario cantor_c0_scenario(int n);
/// Smooth companion of cantor_c0: same obstacle geometry under a C-infinity
/// connection whose parallel section extends.
NamedScenario cantor_c1_scenario(int n);
/// Bi-slab product of two fat Cantor sets under a constant-coefficient rank-1
/// connection with closed-form section.
NamedScenario fat_cantor_box_scenario();
/// Half-hyperplane with boundary inside the box; extends for every registry
/// connection. connection_name selects which one ("standard" by default).
NamedScenario hyperplane_patch_scenario(const std::string& connection_name = "standard");
/// Full hyperplane with mismatched constants on the two sides; obstructed.
NamedScenario hyperplane_full_scenario();
/// Dyadic-cube union of fat Cantor products with exact measure above 1.2 on
/// (0,2) x (0,1); extends under the standard connection.
NamedScenario big_measure_scenario();

std::vector<std::string> scenario_names();

/// Builds a registry scenario by name; dim = 0 keeps the scenario default.
/// Throws std::invalid_argument for unknown names.
NamedScenario make_scenario(const std::string& name, int dim = 0);

struct BigMeasureResult {
  ObstacleSet obstacle;
  Rational exact_measure;
  CubeDecomposition cubes;
};

/// Dyadic-decomposes the box, keeps every cube at the smallest level whose
/// interior volumes sum above lambda0, and fills each cube with a fat Cantor
/// product sized so the exact total measure exceeds lambda0.
BigMeasureResult big_measure_obstacle(const OpenBox& box, double lambda0, int max_level);

}  // namespace parext
