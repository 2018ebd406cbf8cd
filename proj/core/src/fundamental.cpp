#include "parext/fundamental.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace parext {

namespace {

std::string node_string(double t, const Point& y) {
  std::ostringstream os;
  os << "(t=" << t << ", y=(";
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (i) os << ", ";
    os << y[i];
  }
  os << "))";
  return os.str();
}

Eigen::MatrixXd eval_coefficient(const CoefficientField& A, int rank, double t, const Point& y) {
  Eigen::MatrixXd m;
  try {
    m = A(t, y);
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("fundamental_matrix: coefficient evaluation failed at ") +
                             node_string(t, y) + ": " + e.what());
  }
  if (m.rows() != rank || m.cols() != rank || !m.allFinite())
    throw std::runtime_error("fundamental_matrix: bad coefficient value at " + node_string(t, y));
  return m;
}

// One RK4 sweep of X' = A(t) X from t_from to t_to (either direction).
void integrate_span(const CoefficientField& A, int rank, const Point& y, double t_from,
                    double t_to, double step, Eigen::MatrixXd* X) {
  const double len = t_to - t_from;
  if (len == 0.0) return;
  // Slack keeps rounding in node differences from flipping the substep count.
  const int substeps = std::max(1, static_cast<int>(std::ceil(std::abs(len) / step - 1e-9)));
  const double h = len / substeps;
  double t = t_from;
  for (int k = 0; k < substeps; ++k) {
    const Eigen::MatrixXd k1 = eval_coefficient(A, rank, t, y) * (*X);
    const Eigen::MatrixXd x2 = *X + 0.5 * h * k1;
    const Eigen::MatrixXd k2 = eval_coefficient(A, rank, t + 0.5 * h, y) * x2;
    const Eigen::MatrixXd x3 = *X + 0.5 * h * k2;
    const Eigen::MatrixXd k3 = eval_coefficient(A, rank, t + 0.5 * h, y) * x3;
    const Eigen::MatrixXd x4 = *X + h * k3;
    const Eigen::MatrixXd k4 = eval_coefficient(A, rank, t + h, y) * x4;
    *X += (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4);
    t = t_from + (k + 1) * h;
  }
}

}  // namespace

FundamentalSolution::FundamentalSolution(double t0, std::vector<double> times,
                                         std::vector<Point> params, int rank,
                                         std::optional<Grid> param_grid)
    : t0_(t0), times_(std::move(times)), params_(std::move(params)), rank_(rank),
      param_grid_(std::move(param_grid)) {
  if (times_.empty()) throw std::invalid_argument("FundamentalSolution: empty time grid");
  if (params_.empty()) throw std::invalid_argument("FundamentalSolution: empty parameter set");
  const auto it = std::find(times_.begin(), times_.end(), t0_);
  if (it == times_.end())
    throw std::invalid_argument("FundamentalSolution: t0 must be a time node");
  t0_index_ = static_cast<std::size_t>(it - times_.begin());
  data_.assign(params_.size() * times_.size(), Eigen::MatrixXd::Identity(rank_, rank_));
}

const Eigen::MatrixXd& FundamentalSolution::at(std::size_t param, std::size_t time) const {
  return data_[param * times_.size() + time];
}

Eigen::MatrixXd& FundamentalSolution::at(std::size_t param, std::size_t time) {
  return data_[param * times_.size() + time];
}

FundamentalSolution fundamental_matrix(const CoefficientField& A, int rank, double t0,
                                       std::vector<double> time_nodes,
                                       std::vector<Point> param_nodes, double step,
                                       std::optional<Grid> param_grid) {
  if (!(step > 0.0)) throw std::invalid_argument("fundamental_matrix: step must be > 0");
  if (rank < 1) throw std::invalid_argument("fundamental_matrix: rank must be >= 1");
  if (time_nodes.empty()) throw std::invalid_argument("fundamental_matrix: empty time grid");
  std::sort(time_nodes.begin(), time_nodes.end());
  // Rebuild the grid to contain t0 exactly, so X(t0) = id holds by
  // construction rather than by integration.
  if (std::find(time_nodes.begin(), time_nodes.end(), t0) == time_nodes.end()) {
    time_nodes.push_back(t0);
    std::sort(time_nodes.begin(), time_nodes.end());
  }

  FundamentalSolution fs(t0, std::move(time_nodes), std::move(param_nodes), rank,
                         std::move(param_grid));
  const std::vector<double>& times = fs.times();
  const std::size_t i0 = fs.t0_index();

  for (std::size_t p = 0; p < fs.params().size(); ++p) {
    const Point& y = fs.params()[p];
    // Forward from t0.
    Eigen::MatrixXd X = Eigen::MatrixXd::Identity(rank, rank);
    fs.at(p, i0) = X;
    for (std::size_t j = i0 + 1; j < times.size(); ++j) {
      integrate_span(A, rank, y, times[j - 1], times[j], step, &X);
      fs.at(p, j) = X;
    }
    // Backward from t0.
    X = Eigen::MatrixXd::Identity(rank, rank);
    for (std::size_t j = i0; j-- > 0;) {
      integrate_span(A, rank, y, times[j + 1], times[j], step, &X);
      fs.at(p, j) = X;
    }
  }
  return fs;
}

double liouville_defect(const FundamentalSolution& fs, const CoefficientField& A) {
  const std::vector<double>& times = fs.times();
  const std::size_t i0 = fs.t0_index();
  double worst = 0.0;
  std::vector<double> integral(times.size(), 0.0);
  for (std::size_t p = 0; p < fs.params().size(); ++p) {
    const Point& y = fs.params()[p];
    auto trace_at = [&](double t) { return A(t, y).trace(); };
    // Cumulative trace integral from t0 in both directions; per-interval
    // Simpson with a midpoint evaluation.
    integral[i0] = 0.0;
    for (std::size_t j = i0 + 1; j < times.size(); ++j) {
      const double a = times[j - 1];
      const double b = times[j];
      integral[j] = integral[j - 1] +
                    (b - a) / 6.0 * (trace_at(a) + 4.0 * trace_at(0.5 * (a + b)) + trace_at(b));
    }
    for (std::size_t j = i0; j-- > 0;) {
      const double a = times[j + 1];
      const double b = times[j];
      integral[j] = integral[j + 1] +
                    (b - a) / 6.0 * (trace_at(a) + 4.0 * trace_at(0.5 * (a + b)) + trace_at(b));
    }
    for (std::size_t j = 0; j < times.size(); ++j) {
      const double defect = std::abs(fs.at(p, j).determinant() - std::exp(integral[j]));
      worst = std::max(worst, defect);
    }
  }
  return worst;
}

double parameter_continuity_modulus(const FundamentalSolution& fs) {
  const std::vector<Point>& params = fs.params();
  if (params.size() < 2) return 0.0;
  double worst = 0.0;
  auto account = [&](std::size_t p, std::size_t q) {
    const double dy = (params[p] - params[q]).norm();
    if (dy == 0.0) return;
    for (std::size_t j = 0; j < fs.times().size(); ++j) {
      const double dX = (fs.at(p, j) - fs.at(q, j)).norm();
      worst = std::max(worst, dX / dy);
    }
  };
  if (fs.param_grid()) {
    const Grid& g = *fs.param_grid();
    for (std::size_t node = 0; node < g.node_count(); ++node) {
      for (int axis = 0; axis < g.dim(); ++axis) {
        std::size_t nb = 0;
        if (g.neighbor(node, axis, +1, &nb)) account(node, nb);
      }
    }
  } else {
    for (std::size_t p = 0; p + 1 < params.size(); ++p) account(p, p + 1);
  }
  if (!std::isfinite(worst))
    throw std::runtime_error("parameter_continuity_modulus: non-finite modulus");
  return worst;
}

}  // namespace parext
