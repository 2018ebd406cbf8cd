#pragma once

#include "parext/geometry.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <vector>

namespace parext {

enum class Smoothness { C0, C1, Cinf };

using MatrixField = std::function<Eigen::MatrixXd(const Point&)>;

/// Linear connection on the rank-r trivial bundle over an open box, encoded by
/// the matrix of 1-forms omega = omega_1 dx^1 + ... + omega_n dx^n in the
/// standard frame. The smoothness tag is declared, not verified.
class ConnectionForm {
 public:
  ConnectionForm(OpenBox box, int rank, std::vector<MatrixField> components,
                 Smoothness smoothness);

  int dim() const { return box_.dim(); }
  int rank() const { return rank_; }
  const OpenBox& box() const { return box_; }
  Smoothness smoothness() const { return smoothness_; }

  /// Evaluates omega_axis at x; throws on non-finite results.
  Eigen::MatrixXd component(int axis, const Point& x) const;

 private:
  OpenBox box_;
  int rank_;
  std::vector<MatrixField> components_;
  Smoothness smoothness_;
};

/// The zero-form connection whose parallel sections are locally constant.
ConnectionForm standard_connection(int n, int r);

/// Same component maps, domain re-declared on sub. Throws when sub is not
/// contained in the connection's box.
ConnectionForm restrict_to(const ConnectionForm& conn, const OpenBox& sub);

/// Diffeomorphism between boxes with user-supplied inverse and Jacobian.
struct Diffeo {
  OpenBox source = OpenBox::cube(1, 0.0, 1.0);
  OpenBox target = OpenBox::cube(1, 0.0, 1.0);
  std::function<Point(const Point&)> forward;
  std::function<Point(const Point&)> inverse;
  std::function<Eigen::MatrixXd(const Point&)> jacobian;  // of forward

  static Diffeo translation(const OpenBox& source, const Point& offset);
  static Diffeo axis_swap(const OpenBox& square, int a, int b);
  static Diffeo rotation2d(const OpenBox& source, const OpenBox& target, double angle);
};

/// Pullback connection: omega'_j(x') = sum_i omega_i(phi(x')) dphi_i/dx'_j.
/// Component evaluation throws when the Jacobian is singular at the point.
ConnectionForm pullback(const ConnectionForm& conn, const Diffeo& d);

/// Piecewise-C1 path with evaluable position and velocity per segment.
class PiecewisePath {
 public:
  struct Segment {
    double t0 = 0.0;
    double t1 = 1.0;
    std::function<Point(double)> position;
    std::function<Point(double)> velocity;
  };

  PiecewisePath(std::vector<Segment> segments, OpenBox ambient);

  static PiecewisePath line(const Point& a, const Point& b, OpenBox ambient);
  static PiecewisePath polyline(const std::vector<Point>& vertices, OpenBox ambient);
  static PiecewisePath concatenate(const PiecewisePath& first, const PiecewisePath& second);

  double t_begin() const;
  double t_end() const;
  Point position(double t) const;
  Point velocity(double t) const;
  const std::vector<Segment>& segments() const { return segments_; }
  const OpenBox& ambient() const { return ambient_; }

  PiecewisePath reversed() const;
  /// The image path phi(gamma) in d.target.
  PiecewisePath mapped(const Diffeo& d) const;

 private:
  std::vector<Segment> segments_;
  OpenBox ambient_;
};

struct TransportResult {
  Eigen::VectorXd value;
  /// Richardson pair defect: max-norm distance between the step-h and
  /// step-h/2 runs; the value comes from the finer run.
  double richardson_defect = 0.0;
};

/// Solves v' = -(sum_i omega_i(gamma(t)) gamma_i'(t)) v by classical RK4 with
/// fixed substeps of at most `step`. Throws std::domain_error when the path
/// leaves the connection's box.
TransportResult parallel_transport(const ConnectionForm& conn, const PiecewisePath& path,
                                   const Eigen::VectorXd& v0, double step);

/// Grid sample of a section with a defined-mask.
class SampledSection {
 public:
  SampledSection(Grid grid, int rank);

  static SampledSection sample(const Grid& grid, int rank,
                               const std::function<Eigen::VectorXd(const Point&)>& f,
                               const std::vector<std::uint8_t>& defined);

  const Grid& grid() const { return grid_; }
  int rank() const { return rank_; }
  bool defined(std::size_t node) const { return defined_[node] != 0; }
  const std::vector<std::uint8_t>& defined_mask() const { return defined_; }
  std::size_t defined_count() const;

  Eigen::VectorXd value(std::size_t node) const { return values_.col(static_cast<Eigen::Index>(node)); }
  void set(std::size_t node, const Eigen::VectorXd& v);
  void clear(std::size_t node);

 private:
  Grid grid_;
  int rank_;
  Eigen::MatrixXd values_;  // rank x node_count
  std::vector<std::uint8_t> defined_;
};

struct ResidualField {
  std::vector<double> magnitude;      // 0 where ineligible
  std::vector<std::uint8_t> eligible; // both axis neighbors defined
  double max_magnitude = 0.0;
  std::size_t argmax = 0;
  std::size_t eligible_count = 0;
};

/// Per-node ||D_i s + omega_i s|| with D_i by central difference over the
/// h-neighbors; nodes whose neighbors are undefined are skipped, not one-sided.
ResidualField covariant_residual(const ConnectionForm& conn, const SampledSection& s,
                                 int axis, double h);

}  // namespace parext
