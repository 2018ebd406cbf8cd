#pragma once

#include "parext/geometry.hpp"

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <vector>

namespace parext {

using CoefficientField = std::function<Eigen::MatrixXd(double, const Point&)>;

/// Matrix family X(t, y) with X(t0, y) = identity, stored on a time grid times
/// a list of parameter nodes.
class FundamentalSolution {
 public:
  FundamentalSolution(double t0, std::vector<double> times, std::vector<Point> params,
                      int rank, std::optional<Grid> param_grid);

  double t0() const { return t0_; }
  std::size_t t0_index() const { return t0_index_; }
  const std::vector<double>& times() const { return times_; }
  const std::vector<Point>& params() const { return params_; }
  int rank() const { return rank_; }
  const std::optional<Grid>& param_grid() const { return param_grid_; }

  const Eigen::MatrixXd& at(std::size_t param, std::size_t time) const;
  Eigen::MatrixXd& at(std::size_t param, std::size_t time);

 private:
  double t0_;
  std::size_t t0_index_;
  std::vector<double> times_;
  std::vector<Point> params_;
  int rank_;
  std::optional<Grid> param_grid_;
  std::vector<Eigen::MatrixXd> data_;
};

/// Integrates X' = A(t, y) X from t0 in both directions for every parameter
/// node, landing exactly on the time nodes (t0 is inserted when missing).
/// X(t0, y) is the identity by construction, not by integration.
FundamentalSolution fundamental_matrix(const CoefficientField& A, int rank, double t0,
                                       std::vector<double> time_nodes,
                                       std::vector<Point> param_nodes, double step,
                                       std::optional<Grid> param_grid = std::nullopt);

/// max |det X(t,y) - exp(int_t0^t trace A)| over all nodes; the trace integral
/// uses per-interval Simpson with midpoint evaluations. A standard accuracy
/// oracle for the integrator.
double liouville_defect(const FundamentalSolution& fs, const CoefficientField& A);

/// Discrete Lipschitz surrogate max ||X(t,y) - X(t,y')|| / ||y - y'|| over
/// adjacent parameter nodes (grid adjacency when available, else consecutive).
/// Throws when the value is not finite.
double parameter_continuity_modulus(const FundamentalSolution& fs);

}  // namespace parext
