#include "parext/extension.hpp"

#include "parext/fundamental.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace parext {

std::string to_string(Verdict v) {
  return v == Verdict::Extended ? "extended" : "obstructed";
}

std::string to_string(QuotientVerdict v) {
  switch (v) {
    case QuotientVerdict::Divergent: return "divergent";
    case QuotientVerdict::Convergent: return "convergent";
    default: return "inconclusive";
  }
}

InconsistencyError::InconsistencyError(std::string what, Point location, double magnitude)
    : std::runtime_error(std::move(what)), location_(std::move(location)), magnitude_(magnitude) {}

namespace {

// Axes other than `axis`, in increasing order.
std::vector<int> other_axes(int dim, int axis) {
  std::vector<int> out;
  for (int i = 0; i < dim; ++i)
    if (i != axis) out.push_back(i);
  return out;
}

struct SlabFrame {
  int slab_axis;
  std::vector<int> others;
  Grid param_grid;  // grid over the non-slab axes

  static SlabFrame build(const Grid& grid, int slab_axis) {
    std::vector<int> others = other_axes(grid.dim(), slab_axis);
    std::vector<Interval> axes;
    std::vector<int> res;
    for (int i : others) {
      axes.push_back(grid.box().axis(i));
      res.push_back(grid.resolution(i));
    }
    return SlabFrame{slab_axis, others, Grid(OpenBox(std::move(axes)), std::move(res))};
  }

  std::size_t node(const Grid& grid, int slab_idx, std::size_t param) const {
    std::vector<int> pm = param_grid.multi_index(param);
    std::vector<int> multi(static_cast<std::size_t>(grid.dim()));
    multi[static_cast<std::size_t>(slab_axis)] = slab_idx;
    for (std::size_t k = 0; k < others.size(); ++k)
      multi[static_cast<std::size_t>(others[k])] = pm[k];
    return grid.index(multi);
  }

  Point assemble(double t, const Point& y) const {
    Point x(static_cast<Eigen::Index>(others.size()) + 1);
    x[slab_axis] = t;
    for (std::size_t k = 0; k < others.size(); ++k) x[others[k]] = y[static_cast<Eigen::Index>(k)];
    return x;
  }
};

void check_input_parallel(const ConnectionForm& conn, const SampledSection& s,
                          const Tolerances& tol) {
  for (int axis = 0; axis < s.grid().dim(); ++axis) {
    const ResidualField rf = covariant_residual(conn, s, axis, s.grid().spacing(axis));
    if (rf.max_magnitude > tol.input_residual) {
      std::ostringstream os;
      os << "input section is not parallel off F: axis " << axis << " residual "
         << rf.max_magnitude << " > " << tol.input_residual;
      throw std::runtime_error(os.str());
    }
  }
}

ThinResidualPolicy default_policy(const ConnectionForm& conn, const HalfSlab& F) {
  if (F.thin_set.kind() == CantorLikeSet::Kind::Discrete) return ThinResidualPolicy::Assert;
  if (conn.smoothness() != Smoothness::C0) return ThinResidualPolicy::Assert;
  return ThinResidualPolicy::Report;
}

}  // namespace

ExtensionReport extend_slab(const ConnectionForm& conn, const SampledSection& s, const HalfSlab& F,
                            double a1, const Tolerances& tol, int depth,
                            std::optional<ThinResidualPolicy> policy_override) {
  const Grid& grid = s.grid();
  const int n = grid.dim();
  const int r = conn.rank();
  if (conn.dim() != n || s.rank() != r)
    throw std::invalid_argument("extend_slab: connection/section shape mismatch");
  if (F.slab_axis == F.thin_axis || F.slab_axis < 0 || F.slab_axis >= n || F.thin_axis < 0 ||
      F.thin_axis >= n)
    throw std::invalid_argument("extend_slab: bad slab axes");
  if (!(a1 < F.threshold))
    throw std::invalid_argument("extend_slab: requires a1 < slab threshold");

  const int sa = F.slab_axis;
  const double spacing = grid.spacing(sa);
  // Snap a1 to the nearest node whose whole cell lies left of the threshold,
  // so the base hyperplane is entirely off F and X(a1) = id sits on a node.
  int jmax = -1;
  for (int j = grid.resolution(sa) - 1; j >= 0; --j) {
    if (grid.coordinate(sa, j) + 0.5 * spacing < F.threshold) {
      jmax = j;
      break;
    }
  }
  if (jmax < 0)
    throw std::invalid_argument("extend_slab: no admissible base hyperplane left of the slab");
  int j0 = static_cast<int>(std::llround((a1 - grid.box().axis(sa).lo) / spacing - 0.5));
  j0 = std::clamp(j0, 0, jmax);
  const double a1_used = grid.coordinate(sa, j0);

  check_input_parallel(conn, s, tol);

  const SlabFrame frame = SlabFrame::build(grid, sa);
  const std::size_t param_count = frame.param_grid.node_count();

  std::vector<Point> params;
  params.reserve(param_count);
  std::vector<Eigen::VectorXd> start(param_count);
  for (std::size_t p = 0; p < param_count; ++p) {
    params.push_back(frame.param_grid.point(p));
    const std::size_t base = frame.node(grid, j0, p);
    if (!s.defined(base))
      throw std::runtime_error("extend_slab: section undefined on the base hyperplane");
    start[p] = s.value(base);
  }

  std::vector<double> times;
  times.reserve(static_cast<std::size_t>(grid.resolution(sa)));
  for (int j = 0; j < grid.resolution(sa); ++j) times.push_back(grid.coordinate(sa, j));

  const CoefficientField A = [&conn, &frame, sa](double t, const Point& y) {
    return Eigen::MatrixXd(-conn.component(sa, frame.assemble(t, y)));
  };
  const FundamentalSolution fs =
      fundamental_matrix(A, r, a1_used, times, params, tol.step, frame.param_grid);

  ExtensionReport report{SampledSection(grid, r)};
  report.base_coordinate = a1_used;
  report.slab_axis = sa;
  report.thin_axis = F.thin_axis;
  report.thin_policy = policy_override.value_or(default_policy(conn, F));

  for (std::size_t p = 0; p < param_count; ++p) {
    for (std::size_t j = 0; j < fs.times().size(); ++j) {
      const std::size_t node = frame.node(grid, static_cast<int>(j), p);
      report.extended.set(node, fs.at(p, j) * start[p]);
    }
  }

  // Agreement with the input section off F.
  double agreement = 0.0;
  std::size_t agreement_argmax = 0;
  for (std::size_t node = 0; node < grid.node_count(); ++node) {
    if (!s.defined(node)) continue;
    const double d = (report.extended.value(node) - s.value(node)).lpNorm<Eigen::Infinity>();
    if (d > agreement) {
      agreement = d;
      agreement_argmax = node;
    }
  }
  report.agreement = agreement;

  report.axis_residual.assign(static_cast<std::size_t>(n), 0.0);
  std::vector<std::size_t> residual_argmax(static_cast<std::size_t>(n), 0);
  for (int axis = 0; axis < n; ++axis) {
    const ResidualField rf = covariant_residual(conn, report.extended, axis, grid.spacing(axis));
    report.axis_residual[static_cast<std::size_t>(axis)] = rf.max_magnitude;
    residual_argmax[static_cast<std::size_t>(axis)] = rf.argmax;
  }

  bool ok = agreement <= tol.agreement;
  std::optional<Evidence> evidence;
  if (!ok) {
    evidence = Evidence{grid.point(agreement_argmax), "agreement", agreement, {}};
  }
  for (int axis = 0; axis < n && ok; ++axis) {
    const bool asserted =
        axis != F.thin_axis || report.thin_policy == ThinResidualPolicy::Assert;
    if (!asserted) continue;
    const double res = report.axis_residual[static_cast<std::size_t>(axis)];
    if (res > tol.residual) {
      ok = false;
      evidence = Evidence{grid.point(residual_argmax[static_cast<std::size_t>(axis)]), "residual",
                          res, {}};
    }
  }
  report.verdict = ok ? Verdict::Extended : Verdict::Obstructed;
  report.evidence = std::move(evidence);
  (void)depth;
  return report;
}

ExtensionReport extend_bidirectional(const ConnectionForm& conn, const SampledSection& s,
                                     const BiSlab& F, double a1, double a2, const Tolerances& tol,
                                     int depth) {
  ExtensionReport first = extend_slab(conn, s, F.first, a1, tol, depth);
  ExtensionReport second = extend_slab(conn, s, F.second, a2, tol, depth);

  const Grid& grid = s.grid();
  double gap = 0.0;
  std::size_t argmax = 0;
  for (std::size_t node = 0; node < grid.node_count(); ++node) {
    const double d =
        (first.extended.value(node) - second.extended.value(node)).lpNorm<Eigen::Infinity>();
    if (d > gap) {
      gap = d;
      argmax = node;
    }
  }
  if (gap > tol.agreement) {
    std::ostringstream os;
    os << "extend_bidirectional: axis orders disagree by " << gap << " (tolerance "
       << tol.agreement << ")";
    throw InconsistencyError(os.str(), grid.point(argmax), gap);
  }

  ExtensionReport merged = first;
  merged.bidirectional_gap = gap;
  merged.agreement = std::max(first.agreement, second.agreement);
  for (std::size_t i = 0; i < merged.axis_residual.size(); ++i)
    merged.axis_residual[i] = std::max(merged.axis_residual[i], second.axis_residual[i]);
  if (second.verdict == Verdict::Obstructed && merged.verdict == Verdict::Extended) {
    merged.verdict = Verdict::Obstructed;
    merged.evidence = second.evidence;
  }
  return merged;
}

namespace {

// Integrates the transport ODE for one window line along `axis`, landing on
// consecutive node coordinates. Start value sits at slab index j_from.
void integrate_line(const ConnectionForm& conn, const Grid& grid, int axis,
                    const std::vector<int>& base_multi, int j_from, int j_to,
                    const Eigen::VectorXd& v_from, double step,
                    std::vector<Eigen::VectorXd>* out) {
  const int r = conn.rank();
  std::vector<int> multi = base_multi;
  Point x(grid.dim());
  for (int i = 0; i < grid.dim(); ++i) x[i] = grid.coordinate(i, multi[static_cast<std::size_t>(i)]);

  auto coeff = [&](double t) {
    x[axis] = t;
    return Eigen::MatrixXd(-conn.component(axis, x));
  };

  const int dir = j_to >= j_from ? 1 : -1;
  Eigen::VectorXd v = v_from;
  (*out)[static_cast<std::size_t>(j_from)] = v;
  for (int j = j_from; j != j_to; j += dir) {
    const double ta = grid.coordinate(axis, j);
    const double tb = grid.coordinate(axis, j + dir);
    const double len = tb - ta;
    const int substeps = std::max(1, static_cast<int>(std::ceil(std::abs(len) / step - 1e-9)));
    const double h = len / substeps;
    double t = ta;
    for (int k = 0; k < substeps; ++k) {
      const Eigen::VectorXd k1 = coeff(t) * v;
      const Eigen::VectorXd k2 = coeff(t + 0.5 * h) * (v + 0.5 * h * k1);
      const Eigen::VectorXd k3 = coeff(t + 0.5 * h) * (v + 0.5 * h * k2);
      const Eigen::VectorXd k4 = coeff(t + h) * (v + h * k3);
      v += (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4);
      t = ta + (k + 1) * h;
    }
    (*out)[static_cast<std::size_t>(j + dir)] = v;
  }
  (void)r;
}

struct WindowBox {
  std::vector<int> lo, hi;  // inclusive node index ranges per axis
};

WindowBox window_around(const Grid& grid, const std::vector<int>& q, int w) {
  WindowBox box;
  box.lo.resize(q.size());
  box.hi.resize(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    box.lo[i] = std::max(0, q[i] - w);
    box.hi[i] = std::min(grid.resolution(static_cast<int>(i)) - 1, q[i] + w);
  }
  return box;
}

// Odometer over the cross-section of a window perpendicular to `axis`.
template <class F>
void for_each_line(const WindowBox& box, int axis, F&& f) {
  std::vector<int> multi = box.lo;
  const int n = static_cast<int>(box.lo.size());
  while (true) {
    f(multi);
    int i = n - 1;
    while (i >= 0) {
      if (i == axis) {
        --i;
        continue;
      }
      if (++multi[static_cast<std::size_t>(i)] <= box.hi[static_cast<std::size_t>(i)]) break;
      multi[static_cast<std::size_t>(i)] = box.lo[static_cast<std::size_t>(i)];
      --i;
    }
    if (i < 0) break;
  }
}

}  // namespace

MaximalRegion maximal_extension_scan(const ConnectionForm& conn, const SampledSection& s,
                                     const ObstacleSet& F, const Grid& grid, int window,
                                     const Tolerances& tol, int depth) {
  if (window < 1) throw std::invalid_argument("maximal_extension_scan: window must be >= 1");
  check_input_parallel(conn, s, tol);

  const int n = grid.dim();
  SampledSection work = s;
  std::vector<std::uint8_t> known = s.defined_mask();
  std::vector<std::uint8_t> rejected(grid.node_count(), 0);

  std::vector<std::size_t> pending;
  for (std::size_t node = 0; node < grid.node_count(); ++node)
    if (!known[node]) pending.push_back(node);

  // Local values per window line, indexed by the node index along the
  // integration axis (grid-wide indexing keeps the bookkeeping simple).
  std::vector<Eigen::VectorXd> line_values;

  bool progress = true;
  while (progress && !pending.empty()) {
    progress = false;
    std::vector<std::pair<std::size_t, Eigen::VectorXd>> accepted;

    for (std::size_t q_node : pending) {
      const std::vector<int> q = grid.multi_index(q_node);
      bool done = false;
      for (int w = window; w >= 1 && !done; --w) {
        const WindowBox box = window_around(grid, q, w);
        for (int axis = 0; axis < n && !done; ++axis) {
          for (int side = 0; side < 2 && !done; ++side) {
            const int j_from = side == 0 ? box.lo[static_cast<std::size_t>(axis)]
                                         : box.hi[static_cast<std::size_t>(axis)];
            const int j_to = side == 0 ? box.hi[static_cast<std::size_t>(axis)]
                                       : box.lo[static_cast<std::size_t>(axis)];
            if (j_from == j_to) continue;
            // The feeding slice must be entirely known already.
            bool slice_known = true;
            for_each_line(box, axis, [&](const std::vector<int>& multi) {
              if (!slice_known) return;
              std::vector<int> m = multi;
              m[static_cast<std::size_t>(axis)] = j_from;
              if (!known[grid.index(m)]) slice_known = false;
            });
            if (!slice_known) continue;

            // Integrate every window line from the slice and check agreement
            // with everything already known inside the window.
            bool consistent = true;
            Eigen::VectorXd q_value;
            Eigen::VectorXd q_prev, q_next;
            bool have_prev = false, have_next = false;
            for_each_line(box, axis, [&](const std::vector<int>& multi) {
              if (!consistent) return;
              std::vector<int> m = multi;
              m[static_cast<std::size_t>(axis)] = j_from;
              const std::size_t from_node = grid.index(m);
              line_values.assign(static_cast<std::size_t>(grid.resolution(axis)),
                                 Eigen::VectorXd());
              integrate_line(conn, grid, axis, multi, j_from, j_to, work.value(from_node),
                             tol.step, &line_values);
              for (int j = box.lo[static_cast<std::size_t>(axis)];
                   j <= box.hi[static_cast<std::size_t>(axis)]; ++j) {
                m[static_cast<std::size_t>(axis)] = j;
                const std::size_t node = grid.index(m);
                const Eigen::VectorXd& v = line_values[static_cast<std::size_t>(j)];
                if (known[node] &&
                    (v - work.value(node)).lpNorm<Eigen::Infinity>() > tol.consistency) {
                  consistent = false;
                  return;
                }
                // Remember the pieces the residual check at q needs.
                bool on_q_line = true;
                for (int i = 0; i < n; ++i)
                  if (i != axis && m[static_cast<std::size_t>(i)] != q[static_cast<std::size_t>(i)])
                    on_q_line = false;
                if (on_q_line) {
                  if (j == q[static_cast<std::size_t>(axis)]) q_value = v;
                  if (j == q[static_cast<std::size_t>(axis)] - 1) {
                    q_prev = v;
                    have_prev = true;
                  }
                  if (j == q[static_cast<std::size_t>(axis)] + 1) {
                    q_next = v;
                    have_next = true;
                  }
                }
              }
            });
            if (!consistent || q_value.size() == 0) continue;

            // Covariant residual at q along the integration axis; the cross
            // axes are checked against known neighbor values when available.
            bool residual_ok = true;
            const Point xq = grid.point(q_node);
            if (have_prev && have_next) {
              const Eigen::VectorXd d =
                  (q_next - q_prev) / (2.0 * grid.spacing(axis)) +
                  conn.component(axis, xq) * q_value;
              if (d.lpNorm<Eigen::Infinity>() > tol.residual) residual_ok = false;
            }
            for (int ax = 0; ax < n && residual_ok; ++ax) {
              if (ax == axis) continue;
              std::size_t prev_node = 0, next_node = 0;
              if (!grid.neighbor(q_node, ax, -1, &prev_node) ||
                  !grid.neighbor(q_node, ax, +1, &next_node))
                continue;
              if (!known[prev_node] || !known[next_node]) continue;
              const Eigen::VectorXd d =
                  (work.value(next_node) - work.value(prev_node)) / (2.0 * grid.spacing(ax)) +
                  conn.component(ax, xq) * q_value;
              if (d.lpNorm<Eigen::Infinity>() > tol.residual) residual_ok = false;
            }
            if (!residual_ok) continue;

            accepted.emplace_back(q_node, q_value);
            done = true;
          }
        }
      }
    }

    if (!accepted.empty()) {
      for (const auto& [node, value] : accepted) {
        work.set(node, value);
        known[node] = 1;
      }
      // Windows fed from opposite sides can both pass one-sided checks while
      // disagreeing across the obstacle. Re-check every new node against the
      // merged field; failures are removed and never retried.
      std::vector<std::size_t> bad;
      for (const auto& [node, value] : accepted) {
        const Point x = grid.point(node);
        for (int axis = 0; axis < n; ++axis) {
          std::size_t prev_node = 0, next_node = 0;
          if (!grid.neighbor(node, axis, -1, &prev_node) ||
              !grid.neighbor(node, axis, +1, &next_node))
            continue;
          if (!known[prev_node] || !known[next_node]) continue;
          const Eigen::VectorXd d =
              (work.value(next_node) - work.value(prev_node)) / (2.0 * grid.spacing(axis)) +
              conn.component(axis, x) * value;
          if (d.lpNorm<Eigen::Infinity>() > tol.residual) {
            bad.push_back(node);
            break;
          }
        }
      }
      for (std::size_t node : bad) {
        work.clear(node);
        known[node] = 0;
        rejected[node] = 1;
      }
      if (bad.size() < accepted.size()) progress = true;
      std::vector<std::size_t> still;
      still.reserve(pending.size());
      for (std::size_t node : pending)
        if (!known[node] && !rejected[node]) still.push_back(node);
      pending.swap(still);
    }
  }

  std::vector<std::size_t> frontier;
  std::size_t unextended = 0;
  for (std::size_t node = 0; node < grid.node_count(); ++node) {
    if (known[node]) continue;
    ++unextended;
    for (int axis = 0; axis < n; ++axis) {
      std::size_t nb = 0;
      bool touches = false;
      for (int delta : {-1, +1}) {
        if (grid.neighbor(node, axis, delta, &nb) && known[nb]) {
          touches = true;
          break;
        }
      }
      if (touches) {
        frontier.push_back(node);
        break;
      }
    }
  }

  (void)F;
  (void)depth;
  return MaximalRegion{std::move(known), std::move(frontier), std::move(work), unextended};
}

JumpProbe detect_jump(const ConnectionForm& conn, const std::function<double(const Point&)>& section,
                      int axis, const Point& base, const std::vector<double>& epsilons) {
  if (epsilons.empty()) throw std::invalid_argument("detect_jump: empty epsilon sequence");
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    if (!(epsilons[i] > 0.0) || (i > 0 && !(epsilons[i] < epsilons[i - 1])))
      throw std::invalid_argument("detect_jump: epsilons must be strictly decreasing and positive");
  }
  if (axis < 0 || axis >= conn.dim()) throw std::invalid_argument("detect_jump: axis out of range");

  JumpProbe probe;
  for (double eps : epsilons) {
    Point below = base;
    Point above = base;
    below[axis] -= eps;
    above[axis] += eps;
    probe.limit_below = section(below);
    probe.limit_above = section(above);
  }
  probe.jump = std::abs(probe.limit_above - probe.limit_below);
  return probe;
}

std::vector<QuotientProbe> detect_nondifferentiability(
    const std::function<double(const Point&)>& section, int axis, const std::vector<Point>& points,
    const std::vector<double>& h_seq) {
  if (h_seq.size() < 3)
    throw std::invalid_argument("detect_nondifferentiability: need at least 3 h values");
  for (std::size_t i = 0; i < h_seq.size(); ++i) {
    if (!(h_seq[i] > 0.0) || (i > 0 && !(h_seq[i] < h_seq[i - 1])))
      throw std::invalid_argument("detect_nondifferentiability: h must decrease strictly");
  }

  const double growth = 1.5 * (1.0 - 1e-6);
  std::vector<QuotientProbe> out;
  out.reserve(points.size());
  for (const Point& p : points) {
    QuotientProbe probe;
    probe.point = p;
    for (double h : h_seq) {
      Point lo = p, hi = p;
      lo[axis] -= h;
      hi[axis] += h;
      probe.quotients.push_back((section(hi) - section(lo)) / (2.0 * h));
    }
    bool divergent = true;
    for (std::size_t i = 0; i + 1 < probe.quotients.size(); ++i) {
      if (!(std::abs(probe.quotients[i + 1]) >= growth * std::abs(probe.quotients[i])) ||
          probe.quotients[i] == 0.0) {
        divergent = false;
        break;
      }
    }
    if (divergent && std::abs(probe.quotients.back()) > 0.0) {
      probe.verdict = QuotientVerdict::Divergent;
    } else {
      const double last = probe.quotients[probe.quotients.size() - 1];
      const double prev = probe.quotients[probe.quotients.size() - 2];
      if (std::abs(last - prev) <= 0.01 * std::max(std::abs(last), 1e-12))
        probe.verdict = QuotientVerdict::Convergent;
      else
        probe.verdict = QuotientVerdict::Inconclusive;
    }
    out.push_back(std::move(probe));
  }
  return out;
}

}  // namespace parext
