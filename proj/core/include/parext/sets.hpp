#pragma once

#include "parext/geometry.hpp"
#include "parext/rational.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <variant>
#include <vector>

namespace parext {

/// Stage-wise Cantor-type subset of an interval. The stage-k cover is a finite
/// union of disjoint closed intervals, nested decreasing in k.
class CantorLikeSet {
 public:
  enum class Kind { Ternary, Fat, Discrete };

  static CantorLikeSet ternary(Interval ambient);
  /// Fat variant: stage k removes the open middle of length
  /// removal_scale * L * 4^-k from each of the 2^(k-1) stage intervals.
  static CantorLikeSet fat(Interval ambient, Rational removal_scale);
  static CantorLikeSet discrete(Interval ambient, std::vector<double> points);

  Kind kind() const { return kind_; }
  const Interval& ambient() const { return ambient_; }

  /// Stage-depth cover membership. Throws std::domain_error when x is outside
  /// the closed ambient interval.
  bool contains(double x, int depth) const;
  /// Does the closed interval [a, b] meet the stage-depth cover?
  bool cover_intersects(double a, double b, int depth) const;

  /// Exact measure of the limit set: L * (1 - scale/2) for fat, 0 otherwise.
  Rational exact_measure() const;
  /// Exact total length of the stage-depth cover.
  Rational stage_cover_length(int depth) const;
  /// The 2^depth closed intervals of the stage-depth cover, ascending
  /// (ternary and fat variants; depth capped at 20).
  std::vector<std::pair<Rational, Rational>> stage_intervals(int depth) const;
  /// Smallest distance between distinct points (discrete variant).
  double min_gap() const;

  const std::vector<double>& points() const { return points_; }
  const Rational& removal_scale() const { return removal_scale_; }

 private:
  CantorLikeSet() = default;

  Kind kind_ = Kind::Ternary;
  Interval ambient_;
  std::vector<double> points_;   // discrete
  Rational removal_scale_ = 0;   // fat
};

/// Builds a fat Cantor set in ambient whose exact residual measure strictly
/// exceeds target_measure. Throws std::invalid_argument when the target is
/// infeasible (>= ambient length).
CantorLikeSet fat_cantor_build(Interval ambient, double target_measure);

/// Stage-depth approximation of the Cantor function, extended by 0 below 0 and
/// 1 above 1. Exact on middle thirds removed at stage <= depth; monotone.
double cantor_function(double x, int depth);

/// Free-function mirror of CantorLikeSet::contains.
bool cantor_contains(const CantorLikeSet& set, double x, int depth);

// ---------------------------------------------------------------------------
// Obstacle descriptors
// ---------------------------------------------------------------------------

/// Half-slab piece {x : x_slab >= threshold, x_thin in thin_set}.
struct HalfSlab {
  int slab_axis = 0;
  double threshold = 0.0;
  int thin_axis = 1;
  CantorLikeSet thin_set = CantorLikeSet::ternary({0.0, 1.0});
};

/// Intersection of two half-slabs with roles of the axes swapped.
struct BiSlab {
  HalfSlab first;
  HalfSlab second;
};

/// One-sided clamp on a coordinate; infinite bounds mean unconstrained.
struct SideConstraint {
  int axis = 0;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
};

/// Piece of the hyperplane {x_axis == level} cut by side constraints.
struct HyperplanePatch {
  int axis = 0;
  double level = 0.0;
  std::vector<SideConstraint> sides;
};

/// Explicit per-cell mask over its own grid.
struct GridMaskObstacle {
  OpenBox box = OpenBox::cube(1, 0.0, 1.0);
  std::vector<int> resolution;
  std::vector<std::uint8_t> bits;  // row-major, 1 = inside
};

/// Closed axis-aligned box.
struct ClosedBoxObstacle {
  std::vector<double> lo;
  std::vector<double> hi;
};

struct EmptyObstacle {};

class ObstacleSet;

/// Finite union of descriptors (locally finite by construction).
struct UnionObstacle {
  std::vector<ObstacleSet> parts;
};

class ObstacleSet {
 public:
  using Variant = std::variant<EmptyObstacle, HalfSlab, BiSlab, HyperplanePatch,
                               GridMaskObstacle, ClosedBoxObstacle, UnionObstacle>;

  ObstacleSet() : v_(EmptyObstacle{}) {}
  ObstacleSet(Variant v) : v_(std::move(v)) {}  // NOLINT(google-explicit-constructor)

  const Variant& variant() const { return v_; }
  template <class T>
  const T* get_if() const {
    return std::get_if<T>(&v_);
  }
  bool empty() const { return std::holds_alternative<EmptyObstacle>(v_); }

  /// Point membership at the given construction depth.
  bool contains_point(const Point& x, int depth) const;
  /// Conservative cell query: does the closed cell center +- halo meet the
  /// stage-depth descriptor? Used for grid masks; undecidable-at-depth cells
  /// count as inside.
  bool intersects_cell(const Point& center, const std::vector<double>& halo, int depth) const;

 private:
  Variant v_;
};

/// Cell-conservative membership mask of F on a grid (1 = inside F).
std::vector<std::uint8_t> obstacle_mask(const ObstacleSet& F, const Grid& grid, int depth);

struct ComponentLabels {
  int count = 0;
  std::vector<int> labels;  // -1 on F-nodes
};

/// Flood-fill components of the grid complement of F, 2n-neighbor adjacency.
ComponentLabels complement_components(const Grid& grid, const ObstacleSet& F, int depth);

// ---------------------------------------------------------------------------
// Dyadic cube decompositions
// ---------------------------------------------------------------------------

/// Closed cube [corner * 2^-level, (corner + 1) * 2^-level] per axis.
struct DyadicCube {
  int level = 0;
  std::vector<long long> corner;

  double side() const { return std::ldexp(1.0, -level); }
  Rational exact_volume(int dim) const;
  Interval axis_interval(int axis) const;
};

struct CubeDecomposition {
  std::vector<DyadicCube> cubes;
  /// Total measure of the (pairwise disjoint) cube interiors, exact.
  Rational interior_measure(int dim) const;
};

/// Maximal dyadic cubes up to max_level whose closed hull lies in the domain.
/// The indicator is sampled at the 2^n corners and the center of each cube.
CubeDecomposition dyadic_decompose(const std::function<bool(const Point&)>& indicator,
                                   const OpenBox& bounds, int max_level);

}  // namespace parext
