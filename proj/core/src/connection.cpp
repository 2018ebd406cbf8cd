#include "parext/connection.hpp"

#include <cmath>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace parext {

namespace {

void require_finite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite()) throw std::runtime_error(std::string(what) + ": non-finite matrix value");
}

std::string point_string(const Point& x) {
  std::ostringstream os;
  os << "(";
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (i) os << ", ";
    os << x[i];
  }
  os << ")";
  return os.str();
}

}  // namespace

ConnectionForm::ConnectionForm(OpenBox box, int rank, std::vector<MatrixField> components,
                               Smoothness smoothness)
    : box_(std::move(box)), rank_(rank), components_(std::move(components)), smoothness_(smoothness) {
  if (rank_ < 1) throw std::invalid_argument("ConnectionForm: rank must be >= 1");
  if (static_cast<int>(components_.size()) != box_.dim())
    throw std::invalid_argument("ConnectionForm: one component field per axis required");
}

Eigen::MatrixXd ConnectionForm::component(int axis, const Point& x) const {
  Eigen::MatrixXd m = components_.at(static_cast<std::size_t>(axis))(x);
  if (m.rows() != rank_ || m.cols() != rank_)
    throw std::runtime_error("ConnectionForm: component has wrong shape");
  require_finite(m, "ConnectionForm::component");
  return m;
}

ConnectionForm standard_connection(int n, int r) {
  if (n < 1 || r < 1) throw std::invalid_argument("standard_connection: n, r must be >= 1");
  std::vector<MatrixField> comps;
  comps.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    comps.push_back([r](const Point&) { return Eigen::MatrixXd::Zero(r, r); });
  // Any box works for the zero form; pick the unit cube scaled wide so
  // restriction to scenario boxes is always legal.
  return ConnectionForm(OpenBox::cube(n, -1e9, 1e9), r, std::move(comps), Smoothness::Cinf);
}

ConnectionForm restrict_to(const ConnectionForm& conn, const OpenBox& sub) {
  if (!conn.box().contains_box(sub))
    throw std::domain_error("restrict_to: sub-box not contained in the connection's box");
  const auto parent = std::make_shared<ConnectionForm>(conn);
  std::vector<MatrixField> comps;
  comps.reserve(static_cast<std::size_t>(conn.dim()));
  for (int i = 0; i < conn.dim(); ++i)
    comps.push_back([parent, i](const Point& x) { return parent->component(i, x); });
  return ConnectionForm(sub, conn.rank(), std::move(comps), conn.smoothness());
}

Diffeo Diffeo::translation(const OpenBox& source, const Point& offset) {
  std::vector<Interval> target_axes;
  for (int i = 0; i < source.dim(); ++i)
    target_axes.push_back({source.axis(i).lo + offset[i], source.axis(i).hi + offset[i]});
  Diffeo d;
  d.source = source;
  d.target = OpenBox(std::move(target_axes));
  d.forward = [offset](const Point& x) { return Point(x + offset); };
  d.inverse = [offset](const Point& x) { return Point(x - offset); };
  const int n = source.dim();
  d.jacobian = [n](const Point&) { return Eigen::MatrixXd::Identity(n, n); };
  return d;
}

Diffeo Diffeo::axis_swap(const OpenBox& square, int a, int b) {
  const int n = square.dim();
  Eigen::MatrixXd J = Eigen::MatrixXd::Identity(n, n);
  J(a, a) = J(b, b) = 0.0;
  J(a, b) = J(b, a) = 1.0;
  Diffeo d;
  d.source = square;
  d.target = square;
  auto swap = [a, b](const Point& x) {
    Point y = x;
    std::swap(y[a], y[b]);
    return y;
  };
  d.forward = swap;
  d.inverse = swap;
  d.jacobian = [J](const Point&) { return J; };
  return d;
}

Diffeo Diffeo::rotation2d(const OpenBox& source, const OpenBox& target, double angle) {
  Eigen::Matrix2d R;
  R << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  Diffeo d;
  d.source = source;
  d.target = target;
  d.forward = [R](const Point& x) { return Point(R * x); };
  d.inverse = [R](const Point& x) { return Point(R.transpose() * x); };
  d.jacobian = [R](const Point&) { return Eigen::MatrixXd(R); };
  return d;
}

ConnectionForm pullback(const ConnectionForm& conn, const Diffeo& d) {
  if (conn.dim() != d.source.dim())
    throw std::invalid_argument("pullback: dimension mismatch");
  for (const double frac : {0.5, 0.7}) {
    // Composition check at sampled interior points.
    Point probe(d.source.dim());
    for (int i = 0; i < d.source.dim(); ++i) {
      const Interval& iv = d.source.axis(i);
      probe[i] = iv.lo + frac * iv.length();
    }
    const Point round_trip = d.inverse(d.forward(probe));
    if ((round_trip - probe).lpNorm<Eigen::Infinity>() > 1e-8)
      throw std::invalid_argument("pullback: inverse does not invert the forward map");
  }
  const auto parent = std::make_shared<ConnectionForm>(conn);
  std::vector<MatrixField> comps;
  const int n = conn.dim();
  const int r = conn.rank();
  for (int j = 0; j < n; ++j) {
    comps.push_back([parent, d, j, n, r](const Point& xp) {
      const Point x = d.forward(xp);
      const Eigen::MatrixXd J = d.jacobian(xp);
      if (std::abs(J.determinant()) < 1e-14)
        throw std::runtime_error("pullback: singular Jacobian at " + point_string(xp));
      Eigen::MatrixXd out = Eigen::MatrixXd::Zero(r, r);
      for (int i = 0; i < n; ++i) {
        const double dphi = J(i, j);
        if (dphi != 0.0) out += parent->component(i, x) * dphi;
      }
      return out;
    });
  }
  return ConnectionForm(d.source, r, std::move(comps), conn.smoothness());
}

PiecewisePath::PiecewisePath(std::vector<Segment> segments, OpenBox ambient)
    : segments_(std::move(segments)), ambient_(std::move(ambient)) {
  if (segments_.empty()) throw std::invalid_argument("PiecewisePath: needs at least one segment");
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    if (!(segments_[i].t0 < segments_[i].t1))
      throw std::invalid_argument("PiecewisePath: segment times must increase");
    if (i > 0) {
      if (segments_[i].t0 != segments_[i - 1].t1)
        throw std::invalid_argument("PiecewisePath: breakpoints must chain");
      const Point gap =
          segments_[i].position(segments_[i].t0) - segments_[i - 1].position(segments_[i - 1].t1);
      if (gap.lpNorm<Eigen::Infinity>() > 1e-9)
        throw std::invalid_argument("PiecewisePath: position must be continuous at breakpoints");
    }
  }
}

PiecewisePath PiecewisePath::line(const Point& a, const Point& b, OpenBox ambient) {
  Segment seg;
  seg.t0 = 0.0;
  seg.t1 = 1.0;
  seg.position = [a, b](double t) { return Point(a + t * (b - a)); };
  seg.velocity = [a, b](double) { return Point(b - a); };
  return PiecewisePath({seg}, std::move(ambient));
}

PiecewisePath PiecewisePath::polyline(const std::vector<Point>& vertices, OpenBox ambient) {
  if (vertices.size() < 2) throw std::invalid_argument("polyline: needs >= 2 vertices");
  std::vector<Segment> segs;
  for (std::size_t i = 0; i + 1 < vertices.size(); ++i) {
    Segment seg;
    seg.t0 = static_cast<double>(i);
    seg.t1 = static_cast<double>(i + 1);
    const Point a = vertices[i];
    const Point b = vertices[i + 1];
    const double t0 = seg.t0;
    seg.position = [a, b, t0](double t) { return Point(a + (t - t0) * (b - a)); };
    seg.velocity = [a, b](double) { return Point(b - a); };
    segs.push_back(std::move(seg));
  }
  return PiecewisePath(std::move(segs), std::move(ambient));
}

PiecewisePath PiecewisePath::concatenate(const PiecewisePath& first, const PiecewisePath& second) {
  std::vector<Segment> segs = first.segments_;
  const double shift = first.t_end() - second.t_begin();
  for (const Segment& s : second.segments_) {
    Segment t;
    t.t0 = s.t0 + shift;
    t.t1 = s.t1 + shift;
    t.position = [s, shift](double u) { return s.position(u - shift); };
    t.velocity = [s, shift](double u) { return s.velocity(u - shift); };
    segs.push_back(std::move(t));
  }
  return PiecewisePath(std::move(segs), first.ambient_);
}

double PiecewisePath::t_begin() const { return segments_.front().t0; }
double PiecewisePath::t_end() const { return segments_.back().t1; }

Point PiecewisePath::position(double t) const {
  for (const Segment& s : segments_)
    if (t <= s.t1) return s.position(t);
  return segments_.back().position(segments_.back().t1);
}

Point PiecewisePath::velocity(double t) const {
  for (const Segment& s : segments_)
    if (t <= s.t1) return s.velocity(t);
  return segments_.back().velocity(segments_.back().t1);
}

PiecewisePath PiecewisePath::reversed() const {
  const double a = t_begin();
  const double b = t_end();
  std::vector<Segment> segs;
  for (auto it = segments_.rbegin(); it != segments_.rend(); ++it) {
    Segment seg;
    seg.t0 = a + (b - it->t1);
    seg.t1 = a + (b - it->t0);
    const Segment src = *it;
    const double sum = a + b;
    seg.position = [src, sum](double t) { return src.position(sum - t); };
    seg.velocity = [src, sum](double t) { return Point(-src.velocity(sum - t)); };
    segs.push_back(std::move(seg));
  }
  return PiecewisePath(std::move(segs), ambient_);
}

PiecewisePath PiecewisePath::mapped(const Diffeo& d) const {
  std::vector<Segment> segs;
  for (const Segment& s : segments_) {
    Segment t;
    t.t0 = s.t0;
    t.t1 = s.t1;
    const Segment src = s;
    t.position = [src, d](double u) { return d.forward(src.position(u)); };
    t.velocity = [src, d](double u) {
      return Point(d.jacobian(src.position(u)) * src.velocity(u));
    };
    segs.push_back(std::move(t));
  }
  return PiecewisePath(std::move(segs), d.target);
}

namespace {

// RK4 on v' = -(sum_i omega_i(gamma(t)) gamma_i'(t)) v over one parameter
// range, substeps no longer than `step`. Stage evaluations use the segment's
// own maps so breakpoint times never pick up the neighboring velocity.
Eigen::VectorXd transport_once(const ConnectionForm& conn, const PiecewisePath& path,
                               const Eigen::VectorXd& v0, double step) {
  Eigen::VectorXd v = v0;
  for (const PiecewisePath::Segment& seg : path.segments()) {
    auto rhs = [&](double t, const Eigen::VectorXd& vv) -> Eigen::VectorXd {
      const Point x = seg.position(t);
      if (!conn.box().contains(x))
        throw std::domain_error("parallel_transport: path exits the box at t=" +
                                std::to_string(t) + " x=" + point_string(x));
      const Point vel = seg.velocity(t);
      Eigen::MatrixXd m = Eigen::MatrixXd::Zero(conn.rank(), conn.rank());
      for (int i = 0; i < conn.dim(); ++i) {
        if (vel[i] != 0.0) m += conn.component(i, x) * vel[i];
      }
      return Eigen::VectorXd(-m * vv);
    };
    const double len = seg.t1 - seg.t0;
    const int substeps = std::max(1, static_cast<int>(std::ceil(len / step - 1e-9)));
    const double h = len / substeps;
    double t = seg.t0;
    for (int k = 0; k < substeps; ++k) {
      const Eigen::VectorXd k1 = rhs(t, v);
      const Eigen::VectorXd k2 = rhs(t + 0.5 * h, v + 0.5 * h * k1);
      const Eigen::VectorXd k3 = rhs(t + 0.5 * h, v + 0.5 * h * k2);
      const Eigen::VectorXd k4 = rhs(t + h, v + h * k3);
      v += (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4);
      t = seg.t0 + (k + 1) * h;
    }
  }
  return v;
}

}  // namespace

TransportResult parallel_transport(const ConnectionForm& conn, const PiecewisePath& path,
                                   const Eigen::VectorXd& v0, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("parallel_transport: step must be > 0");
  if (v0.size() != conn.rank())
    throw std::invalid_argument("parallel_transport: v0 size must equal the rank");
  const Eigen::VectorXd coarse = transport_once(conn, path, v0, step);
  const Eigen::VectorXd fine = transport_once(conn, path, v0, 0.5 * step);
  TransportResult out;
  out.value = fine;
  out.richardson_defect = (coarse - fine).lpNorm<Eigen::Infinity>();
  return out;
}

SampledSection::SampledSection(Grid grid, int rank)
    : grid_(std::move(grid)), rank_(rank),
      values_(Eigen::MatrixXd::Zero(rank, static_cast<Eigen::Index>(grid_.node_count()))),
      defined_(grid_.node_count(), 0) {
  if (rank_ < 1) throw std::invalid_argument("SampledSection: rank must be >= 1");
}

SampledSection SampledSection::sample(const Grid& grid, int rank,
                                      const std::function<Eigen::VectorXd(const Point&)>& f,
                                      const std::vector<std::uint8_t>& defined) {
  if (defined.size() != grid.node_count())
    throw std::invalid_argument("SampledSection::sample: mask size mismatch");
  SampledSection s(grid, rank);
  for (std::size_t node = 0; node < grid.node_count(); ++node) {
    if (!defined[node]) continue;
    s.set(node, f(grid.point(node)));
  }
  return s;
}

std::size_t SampledSection::defined_count() const {
  std::size_t c = 0;
  for (std::uint8_t d : defined_) c += d;
  return c;
}

void SampledSection::set(std::size_t node, const Eigen::VectorXd& v) {
  if (v.size() != rank_) throw std::invalid_argument("SampledSection::set: wrong value size");
  values_.col(static_cast<Eigen::Index>(node)) = v;
  defined_[node] = 1;
}

void SampledSection::clear(std::size_t node) {
  values_.col(static_cast<Eigen::Index>(node)).setZero();
  defined_[node] = 0;
}

ResidualField covariant_residual(const ConnectionForm& conn, const SampledSection& s, int axis,
                                 double h) {
  const Grid& grid = s.grid();
  if (axis < 0 || axis >= grid.dim())
    throw std::invalid_argument("covariant_residual: axis out of range");
  const double spacing = grid.spacing(axis);
  const int stride = static_cast<int>(std::llround(h / spacing));
  if (stride < 1 || std::abs(stride * spacing - h) > 1e-9 * std::max(1.0, std::abs(h)))
    throw std::invalid_argument("covariant_residual: h must be a positive multiple of the grid spacing");

  ResidualField out;
  out.magnitude.assign(grid.node_count(), 0.0);
  out.eligible.assign(grid.node_count(), 0);
  for (std::size_t node = 0; node < grid.node_count(); ++node) {
    if (!s.defined(node)) continue;
    std::size_t prev = 0, next = 0;
    if (!grid.neighbor(node, axis, -stride, &prev) || !grid.neighbor(node, axis, +stride, &next))
      continue;
    if (!s.defined(prev) || !s.defined(next)) continue;
    const Point x = grid.point(node);
    const Eigen::VectorXd grad = (s.value(next) - s.value(prev)) / (2.0 * h);
    const Eigen::VectorXd res = grad + conn.component(axis, x) * s.value(node);
    const double mag = res.lpNorm<Eigen::Infinity>();
    out.magnitude[node] = mag;
    out.eligible[node] = 1;
    ++out.eligible_count;
    if (mag > out.max_magnitude) {
      out.max_magnitude = mag;
      out.argmax = node;
    }
  }
  return out;
}

}  // namespace parext
