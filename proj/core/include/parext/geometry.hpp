#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace parext {

using Point = Eigen::VectorXd;

/// Open real interval (lo, hi).
struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  double length() const { return hi - lo; }
  double midpoint() const { return 0.5 * (lo + hi); }
  bool contains(double x) const { return lo < x && x < hi; }
};

/// Open n-dimensional interval; every scenario lives on one of these.
class OpenBox {
 public:
  explicit OpenBox(std::vector<Interval> axes);

  static OpenBox cube(int n, double lo, double hi);

  int dim() const { return static_cast<int>(axes_.size()); }
  const Interval& axis(int i) const { return axes_.at(static_cast<std::size_t>(i)); }
  bool contains(const Point& x) const;
  /// True when sub fits inside this box (equal endpoints allowed).
  bool contains_box(const OpenBox& sub) const;
  double volume() const;

 private:
  std::vector<Interval> axes_;
};

/// Uniform cell-centered grid over an open box. Nodes are cell centers and
/// therefore lie strictly inside the box.
class Grid {
 public:
  Grid(OpenBox box, std::vector<int> resolution);

  int dim() const { return box_.dim(); }
  const OpenBox& box() const { return box_; }
  int resolution(int axis) const { return res_.at(static_cast<std::size_t>(axis)); }
  std::size_t node_count() const { return count_; }
  double spacing(int axis) const;
  double coordinate(int axis, int idx) const;

  std::size_t index(const std::vector<int>& multi) const;
  std::vector<int> multi_index(std::size_t node) const;
  Point point(std::size_t node) const;
  /// Neighbor along one axis; returns false when it would leave the grid.
  bool neighbor(std::size_t node, int axis, int delta, std::size_t* out) const;

 private:
  OpenBox box_;
  std::vector<int> res_;
  std::vector<std::size_t> stride_;
  std::size_t count_;
};

}  // namespace parext
