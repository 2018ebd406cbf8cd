#include "parext/counterexamples.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace parext {

double bump(double x) {
  if (std::abs(x) >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - x * x));
}

double bump_derivative(double x) {
  const double b = bump(x);
  if (b == 0.0) return 0.0;
  const double u = 1.0 - x * x;
  return b * (-2.0 * x) / (u * u);
}

namespace {

// Prefix Simpson table for the bump primitive over [-1, 1]; one table per
// panel count, built once.
struct StepTable {
  int panels;
  double h;
  std::vector<double> prefix;  // integral of bump from -1 to the panel edges
  double denom;
};

double panel_simpson(double a, double b) {
  return (b - a) / 6.0 * (bump(a) + 4.0 * bump(0.5 * (a + b)) + bump(b));
}

std::shared_ptr<const StepTable> step_table(int panels) {
  if (panels < 16) throw std::invalid_argument("smooth_step: needs at least 16 panels");
  static std::mutex mutex;
  static std::map<int, std::shared_ptr<const StepTable>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(panels);
  if (it != cache.end()) return it->second;
  auto table = std::make_shared<StepTable>();
  table->panels = panels;
  table->h = 2.0 / panels;
  table->prefix.resize(static_cast<std::size_t>(panels) + 1, 0.0);
  for (int j = 0; j < panels; ++j) {
    const double a = -1.0 + j * table->h;
    const double b = -1.0 + (j + 1) * table->h;
    table->prefix[static_cast<std::size_t>(j) + 1] =
        table->prefix[static_cast<std::size_t>(j)] + panel_simpson(a, b);
  }
  table->denom = table->prefix.back();
  cache[panels] = table;
  return table;
}

// Normalized primitive of the bump on [-1, 1].
double bump_primitive(double u, int panels) {
  if (panels < 16) throw std::invalid_argument("smooth_step: needs at least 16 panels");
  if (u <= -1.0) return 0.0;
  if (u >= 1.0) return 1.0;
  const auto table = step_table(panels);
  int j = static_cast<int>(std::floor((u + 1.0) / table->h));
  j = std::clamp(j, 0, table->panels - 1);
  const double edge = -1.0 + j * table->h;
  const double value = table->prefix[static_cast<std::size_t>(j)] + panel_simpson(edge, u);
  return value / table->denom;
}

}  // namespace

double smooth_step(double x, int quadrature_panels) {
  return bump_primitive(2.0 * x + 1.0, quadrature_panels);
}

double smooth_step_derivative(double x, int quadrature_panels) {
  const auto table = step_table(quadrature_panels);
  return 2.0 * bump(2.0 * x + 1.0) / table->denom;
}

double smooth_step_complement(double x, int quadrature_panels) {
  return smooth_step(-x, quadrature_panels);
}

// ---------------------------------------------------------------------------
// Scenarios
// ---------------------------------------------------------------------------

namespace {

constexpr int kPanels = 4096;
constexpr int kCantorDepth = 48;

Eigen::MatrixXd scalar(double v) {
  Eigen::MatrixXd m(1, 1);
  m(0, 0) = v;
  return m;
}

Eigen::VectorXd vec1(double v) {
  Eigen::VectorXd x(1);
  x[0] = v;
  return x;
}

// f(x) = b(x_1) ... b(x_{n-1}) h(x_n) and its partials, closed form.
struct NoextensionForms {
  int n;

  double f(const Point& x) const {
    double v = smooth_step_complement(x[n - 1], kPanels);
    for (int i = 0; i + 1 < n; ++i) v *= bump(x[i]);
    return v;
  }

  double df(int axis, const Point& x) const {
    if (axis == n - 1) {
      double v = -smooth_step_derivative(-x[n - 1], kPanels);  // h'(t) = -g'(-t)
      for (int i = 0; i + 1 < n; ++i) v *= bump(x[i]);
      return v;
    }
    double v = bump_derivative(x[axis]) * smooth_step_complement(x[n - 1], kPanels);
    for (int i = 0; i + 1 < n; ++i)
      if (i != axis) v *= bump(x[i]);
    return v;
  }

  double omega(int axis, const Point& x) const {
    const double denom = 1.0 + f(x);
    if (axis == n - 1) return -df(axis, x) / denom;
    return -smooth_step(x[n - 1], kPanels) * df(axis, x) / denom;
  }
};

}  // namespace

NamedScenario standard_scenario(int n) {
  if (n < 1) throw std::invalid_argument("standard_scenario: n must be >= 1");
  NamedScenario sc;
  sc.name = "standard";
  sc.dim = n;
  sc.box = OpenBox::cube(n, 0.0, 1.0);
  sc.connection = standard_connection(n, 1);
  sc.section.value = [](const Point&) { return 1.0; };
  sc.section.in_domain = [](const Point&) { return true; };
  sc.obstacle = ObstacleSet(EmptyObstacle{});
  sc.expected = Verdict::Extended;
  return sc;
}

NamedScenario noextension_scenario(int n) {
  if (n < 2) throw std::invalid_argument("noextension_scenario: n must be >= 2");
  NamedScenario sc;
  sc.name = "noextension";
  sc.dim = n;
  sc.box = OpenBox::cube(n, -3.0, 3.0);

  const NoextensionForms forms{n};
  std::vector<MatrixField> comps;
  for (int i = 0; i < n; ++i)
    comps.push_back([forms, i](const Point& x) { return scalar(forms.omega(i, x)); });
  sc.connection = ConnectionForm(sc.box, 1, std::move(comps), Smoothness::Cinf);

  sc.section.value = [forms, n](const Point& x) {
    return 1.0 + (x[n - 1] <= 0.0 ? 0.0 : forms.f(x));
  };
  sc.section.in_domain = [n](const Point& x) {
    // Off Q = [-1,1]^{n-1} x [-1,0].
    if (x[n - 1] < -1.0 || x[n - 1] > 0.0) return true;
    for (int i = 0; i + 1 < n; ++i)
      if (std::abs(x[i]) > 1.0) return true;
    return false;
  };

  ClosedBoxObstacle q;
  q.lo.assign(static_cast<std::size_t>(n), -1.0);
  q.hi.assign(static_cast<std::size_t>(n), 1.0);
  q.hi.back() = 0.0;
  sc.obstacle = ObstacleSet(q);

  sc.expected = Verdict::Obstructed;
  sc.expected_jump = std::pow(std::exp(-1.0), n - 1);
  Point base = Point::Zero(n);
  sc.jump_base = base;
  sc.jump_axis = n - 1;

  // Residual floor at 128 cells/axis: the central-difference error carries
  // the bump's third derivative (|b'''| ~ 1e2), giving ~3.5e-2 residuals on
  // legitimately parallel input.
  sc.tolerances.input_residual = 0.05;
  sc.tolerances.residual = 0.05;
  sc.tolerances.agreement = 0.05;
  sc.tolerances.consistency = 0.05;
  return sc;
}

namespace {

double cantor_f(double x1) { return x1 < 0.0 ? 0.0 : x1 * x1; }
double cantor_fprime(double x1) { return x1 < 0.0 ? 0.0 : 2.0 * x1; }

OpenBox cantor_box(int n) {
  std::vector<Interval> axes;
  axes.push_back({-2.0, 2.0});
  axes.push_back({-1.0, 2.0});
  for (int i = 2; i < n; ++i) axes.push_back({-1.0, 1.0});
  return OpenBox(std::move(axes));
}

std::vector<Point> lift(const std::vector<std::pair<double, double>>& pts, int n) {
  std::vector<Point> out;
  for (const auto& [a, b] : pts) {
    Point p = Point::Zero(n);
    p[0] = a;
    p[1] = b;
    out.push_back(p);
  }
  return out;
}

}  // namespace

NamedScenario cantor_c0_scenario(int n) {
  if (n < 2) throw std::invalid_argument("cantor_c0_scenario: n must be >= 2");
  NamedScenario sc;
  sc.name = "cantor-c0";
  sc.dim = n;
  sc.box = cantor_box(n);

  std::vector<MatrixField> comps;
  comps.push_back([](const Point& x) {
    const double fg = cantor_f(x[0]) * cantor_function(x[1], kCantorDepth);
    return scalar(-cantor_fprime(x[0]) * cantor_function(x[1], kCantorDepth) / (1.0 + fg));
  });
  for (int i = 1; i < n; ++i)
    comps.push_back([](const Point&) { return scalar(0.0); });
  sc.connection = ConnectionForm(sc.box, 1, std::move(comps), Smoothness::C0);

  sc.section.value = [](const Point& x) {
    return 1.0 + cantor_f(x[0]) * cantor_function(x[1], kCantorDepth);
  };
  sc.section.in_domain = [](const Point&) { return true; };

  HalfSlab slab;
  slab.slab_axis = 0;
  slab.threshold = 0.0;
  slab.thin_axis = 1;
  slab.thin_set = CantorLikeSet::ternary({0.0, 1.0});
  sc.obstacle = ObstacleSet(slab);

  sc.expected = Verdict::Obstructed;
  sc.thin_policy = ThinResidualPolicy::Assert;  // the C1 criterion that fails
  sc.divergence_probes = lift(
      {{0.5, 0.0}, {1.0, 1.0}, {0.8, 1.0 / 3.0}, {0.6, 2.0 / 3.0}, {1.2, 0.25}, {0.9, 0.75}}, n);
  sc.convergence_probes = lift({{-0.5, 0.25}, {0.5, 0.5}, {1.0, -0.5}}, n);

  sc.tolerances.input_residual = 0.05;
  sc.tolerances.residual = 0.05;
  sc.tolerances.agreement = 1e-5;
  sc.tolerances.consistency = 1e-4;
  sc.obstacle_measure = Rational(0);  // lambda^n(F) = 0
  return sc;
}

NamedScenario cantor_c1_scenario(int n) {
  if (n < 2) throw std::invalid_argument("cantor_c1_scenario: n must be >= 2");
  NamedScenario sc;
  sc.name = "cantor-c1";
  sc.dim = n;
  sc.box = cantor_box(n);

  // Smooth companion S = 1 + q(x1) G(x2), both factors smoothed steps; the
  // connection is -dS/S, so S is its global parallel section.
  auto q = [](double u) { return smooth_step(u - 1.0, kPanels); };
  auto qd = [](double u) { return smooth_step_derivative(u - 1.0, kPanels); };
  auto G = [](double u) { return smooth_step(u - 1.0, kPanels); };
  auto Gd = [](double u) { return smooth_step_derivative(u - 1.0, kPanels); };
  auto S = [q, G](const Point& x) { return 1.0 + q(x[0]) * G(x[1]); };

  std::vector<MatrixField> comps;
  comps.push_back([q, qd, G, S](const Point& x) { return scalar(-qd(x[0]) * G(x[1]) / S(x)); });
  comps.push_back([q, Gd, S](const Point& x) { return scalar(-q(x[0]) * Gd(x[1]) / S(x)); });
  for (int i = 2; i < n; ++i)
    comps.push_back([](const Point&) { return scalar(0.0); });
  sc.connection = ConnectionForm(sc.box, 1, std::move(comps), Smoothness::Cinf);

  sc.section.value = S;
  sc.section.in_domain = [](const Point&) { return true; };

  HalfSlab slab;
  slab.slab_axis = 0;
  slab.threshold = 0.0;
  slab.thin_axis = 1;
  slab.thin_set = CantorLikeSet::ternary({0.0, 1.0});
  sc.obstacle = ObstacleSet(slab);

  sc.expected = Verdict::Extended;
  sc.tolerances.input_residual = 0.05;
  sc.tolerances.residual = 0.05;
  sc.tolerances.agreement = 1e-5;
  sc.tolerances.consistency = 1e-4;
  return sc;
}

NamedScenario fat_cantor_box_scenario() {
  NamedScenario sc;
  sc.name = "fat-cantor-box";
  sc.dim = 2;
  sc.box = OpenBox::cube(2, 0.0, 1.0);

  const double c1 = 0.3;
  const double c2 = -0.7;
  std::vector<MatrixField> comps;
  comps.push_back([c1](const Point&) { return scalar(c1); });
  comps.push_back([c2](const Point&) { return scalar(c2); });
  sc.connection = ConnectionForm(sc.box, 1, std::move(comps), Smoothness::Cinf);

  sc.section.value = [c1, c2](const Point& x) { return std::exp(-c1 * x[0] - c2 * x[1]); };
  sc.section.in_domain = [](const Point&) { return true; };

  const CantorLikeSet fat = fat_cantor_build({0.3, 0.9}, 0.45);
  BiSlab bi;
  bi.first = HalfSlab{0, 0.25, 1, fat};
  bi.second = HalfSlab{1, 0.25, 0, fat};
  sc.obstacle = ObstacleSet(bi);

  sc.expected = Verdict::Extended;
  sc.tolerances.input_residual = 1e-5;
  sc.tolerances.residual = 1e-5;
  sc.tolerances.agreement = 1e-6;
  return sc;
}

NamedScenario hyperplane_patch_scenario(const std::string& connection_name) {
  NamedScenario sc;
  sc.name = "hyperplane-patch";
  sc.dim = 2;
  sc.box = OpenBox::cube(2, 0.0, 1.0);

  HyperplanePatch patch;
  patch.axis = 1;
  patch.level = 0.5;
  patch.sides.push_back(SideConstraint{0, 0.25, std::numeric_limits<double>::infinity()});
  sc.obstacle = ObstacleSet(patch);
  sc.expected = Verdict::Extended;

  sc.tolerances.input_residual = 0.01;
  sc.tolerances.residual = 0.05;
  sc.tolerances.agreement = 1e-3;
  sc.tolerances.consistency = 1e-3;

  if (connection_name == "standard") {
    sc.connection = standard_connection(2, 1);
    sc.section.value = [](const Point&) { return 1.0; };
  } else if (connection_name == "noextension") {
    sc.connection = restrict_to(noextension_scenario(2).connection, sc.box);
    const NoextensionForms forms{2};
    sc.section.value = [forms](const Point& x) { return 1.0 + forms.f(x); };
  } else if (connection_name == "cantor-c1") {
    NamedScenario base = cantor_c1_scenario(2);
    sc.connection = restrict_to(base.connection, sc.box);
    sc.section.value = base.section.value;
  } else if (connection_name == "cantor-c0") {
    // The natural section of the C0 connection is not C1 off the patch; the
    // zero section is the parallel section this geometry can offer it.
    sc.connection = restrict_to(cantor_c0_scenario(2).connection, sc.box);
    sc.section.value = [](const Point&) { return 0.0; };
  } else {
    throw std::invalid_argument("hyperplane_patch_scenario: unknown connection " + connection_name);
  }
  sc.section.in_domain = [](const Point&) { return true; };
  sc.name = "hyperplane-patch";
  return sc;
}

NamedScenario hyperplane_full_scenario() {
  NamedScenario sc;
  sc.name = "hyperplane-full";
  sc.dim = 2;
  sc.box = OpenBox::cube(2, 0.0, 1.0);
  sc.connection = standard_connection(2, 1);

  HyperplanePatch plane;
  plane.axis = 1;
  plane.level = 0.5;
  sc.obstacle = ObstacleSet(plane);

  // Locally constant with mismatched constants on the two components.
  sc.section.value = [](const Point& x) { return x[1] < 0.5 ? 0.0 : 1.0; };
  sc.section.in_domain = [](const Point& x) { return x[1] != 0.5; };
  sc.expected = Verdict::Obstructed;
  return sc;
}

BigMeasureResult big_measure_obstacle(const OpenBox& box, double lambda0, int max_level) {
  if (box.dim() != 2)
    throw std::invalid_argument("big_measure_obstacle: implemented for dimension 2");
  BigMeasureResult result;
  if (lambda0 < 0.0) {
    result.obstacle = ObstacleSet(EmptyObstacle{});
    result.exact_measure = 0;
    return result;
  }
  Rational volume = 1;
  for (int i = 0; i < box.dim(); ++i)
    volume *= rational_of(box.axis(i).hi) - rational_of(box.axis(i).lo);
  const Rational target = rational_of(lambda0);
  if (target >= volume)
    throw std::invalid_argument("big_measure_obstacle: lambda0 >= box volume is infeasible");

  const auto indicator = [&box](const Point& p) { return box.contains(p); };
  CubeDecomposition cubes;
  Rational lambda1 = 0;
  for (int level = 0; level <= max_level; ++level) {
    cubes = dyadic_decompose(indicator, box, level);
    lambda1 = cubes.interior_measure(box.dim());
    if (lambda1 > target) break;
  }
  if (lambda1 <= target)
    throw std::invalid_argument("big_measure_obstacle: max_level too small to exceed lambda0");

  const Rational rho = target / lambda1;  // per-cube measure fraction to beat
  UnionObstacle parts;
  Rational total = 0;
  for (const DyadicCube& cube : cubes.cubes) {
    const Rational side = cube.exact_volume(1);
    // Deterministic margin: largest frac = 2^-m with (1 - frac)^2 > rho.
    Rational frac(1, 4);
    while (!((1 - frac) * (1 - frac) > rho)) frac /= 2;
    const Rational delta = frac * side;

    BiSlab product;
    Rational cube_measure = 1;
    std::vector<CantorLikeSet> factors;
    for (int axis = 0; axis < 2; ++axis) {
      const Interval iv = cube.axis_interval(axis);
      const Rational lo = rational_of(iv.lo) + delta / 4;
      const Rational hi = rational_of(iv.hi) - delta / 4;
      const Interval inner{to_double(lo), to_double(hi)};
      // Residual (hi - lo)(1 - theta/2) equals side - delta for theta below;
      // recompute from the stored doubles so the reported measure is exact.
      const Rational inner_len = rational_of(inner.hi) - rational_of(inner.lo);
      const Rational theta = delta / inner_len;
      factors.push_back(CantorLikeSet::fat(inner, theta));
      cube_measure *= factors.back().exact_measure();
    }
    product.first = HalfSlab{0, factors[0].ambient().lo, 1, factors[1]};
    product.second = HalfSlab{1, factors[1].ambient().lo, 0, factors[0]};
    parts.parts.push_back(ObstacleSet(product));
    total += cube_measure;
  }
  if (!(total > target))
    throw std::logic_error("big_measure_obstacle: construction missed the target measure");

  result.obstacle = ObstacleSet(std::move(parts));
  result.exact_measure = total;
  result.cubes = std::move(cubes);
  return result;
}

NamedScenario big_measure_scenario() {
  NamedScenario sc;
  sc.name = "big-measure";
  sc.dim = 2;
  sc.box = OpenBox({{0.0, 2.0}, {0.0, 1.0}});
  sc.connection = standard_connection(2, 1);
  sc.section.value = [](const Point&) { return 1.0; };
  sc.section.in_domain = [](const Point&) { return true; };

  BigMeasureResult bm = big_measure_obstacle(sc.box, 1.2, 8);
  sc.obstacle = std::move(bm.obstacle);
  sc.obstacle_measure = bm.exact_measure;
  sc.obstacle_depth = 8;
  sc.expected = Verdict::Extended;
  return sc;
}

std::vector<std::string> scenario_names() {
  return {"standard",    "noextension",     "cantor-c0",       "cantor-c1",
          "fat-cantor-box", "big-measure", "hyperplane-patch", "hyperplane-full"};
}

NamedScenario make_scenario(const std::string& name, int dim) {
  if (name == "standard") return standard_scenario(dim > 0 ? dim : 2);
  if (name == "noextension") return noextension_scenario(dim > 0 ? dim : 2);
  if (name == "cantor-c0") return cantor_c0_scenario(dim > 0 ? dim : 2);
  if (name == "cantor-c1") return cantor_c1_scenario(dim > 0 ? dim : 2);
  if (name == "fat-cantor-box") return fat_cantor_box_scenario();
  if (name == "big-measure") return big_measure_scenario();
  if (name == "hyperplane-patch") return hyperplane_patch_scenario();
  if (name == "hyperplane-full") return hyperplane_full_scenario();
  std::string known;
  for (const std::string& s : scenario_names()) known += (known.empty() ? "" : ", ") + s;
  throw std::invalid_argument("unknown scenario '" + name + "' (registry: " + known + ")");
}

}  // namespace parext
