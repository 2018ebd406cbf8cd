#include "parext/sets.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <set>
#include <stdexcept>

namespace parext {

namespace {

Rational rational_length(const Interval& iv) {
  return rational_of(iv.hi) - rational_of(iv.lo);
}

// Stage-depth cover intersection for the middle-removal families. The query
// interval [a, b] is given in ambient coordinates, already clipped. Children
// of a stage interval are computed exactly; a cover-interval endpoint inside
// [a, b] settles the query at once since endpoints survive every stage.
struct CoverQuery {
  const CantorLikeSet::Kind kind;
  const Rational ambient_length;
  const Rational removal_scale;
  Rational a, b;

  bool visit(const Rational& c0, const Rational& c1, int stage, int depth) const {
    if (b < c0 || a > c1) return false;
    if ((c0 >= a && c0 <= b) || (c1 >= a && c1 <= b)) return true;
    if (stage >= depth) return true;  // [a,b] strictly inside a stage interval
    if (kind == CantorLikeSet::Kind::Ternary) {
      const Rational third = (c1 - c0) / 3;
      return visit(c0, c0 + third, stage + 1, depth) ||
             visit(c1 - third, c1, stage + 1, depth);
    }
    // Fat: remove the open middle of length scale * L * 4^-(stage+1).
    Rational m = removal_scale * ambient_length;
    for (int j = 0; j <= stage; ++j) m /= 4;
    const Rational mid = (c0 + c1) / 2;
    return visit(c0, mid - m / 2, stage + 1, depth) ||
           visit(mid + m / 2, c1, stage + 1, depth);
  }
};

}  // namespace

CantorLikeSet CantorLikeSet::ternary(Interval ambient) {
  CantorLikeSet s;
  s.kind_ = Kind::Ternary;
  s.ambient_ = ambient;
  return s;
}

CantorLikeSet CantorLikeSet::fat(Interval ambient, Rational removal_scale) {
  if (removal_scale <= 0 || removal_scale > 1)
    throw std::invalid_argument("CantorLikeSet::fat: removal scale must be in (0, 1]");
  CantorLikeSet s;
  s.kind_ = Kind::Fat;
  s.ambient_ = ambient;
  s.removal_scale_ = std::move(removal_scale);
  return s;
}

CantorLikeSet CantorLikeSet::discrete(Interval ambient, std::vector<double> points) {
  for (double p : points) {
    if (p < ambient.lo || p > ambient.hi)
      throw std::invalid_argument("CantorLikeSet::discrete: point outside ambient");
  }
  std::sort(points.begin(), points.end());
  CantorLikeSet s;
  s.kind_ = Kind::Discrete;
  s.ambient_ = ambient;
  s.points_ = std::move(points);
  return s;
}

bool CantorLikeSet::contains(double x, int depth) const {
  if (x < ambient_.lo || x > ambient_.hi)
    throw std::domain_error("CantorLikeSet::contains: x outside ambient interval");
  if (depth < 1) throw std::invalid_argument("CantorLikeSet::contains: depth must be >= 1");
  return cover_intersects(x, x, depth);
}

bool CantorLikeSet::cover_intersects(double a, double b, int depth) const {
  if (a > b) std::swap(a, b);
  if (b < ambient_.lo || a > ambient_.hi) return false;
  if (kind_ == Kind::Discrete) {
    for (double p : points_)
      if (p >= a && p <= b) return true;
    return false;
  }
  const Rational lo = rational_of(ambient_.lo);
  const Rational hi = rational_of(ambient_.hi);
  CoverQuery q{kind_, hi - lo, removal_scale_,
               std::max(rational_of(a), lo), std::min(rational_of(b), hi)};
  return q.visit(lo, hi, 0, depth);
}

Rational CantorLikeSet::exact_measure() const {
  if (kind_ != Kind::Fat) return 0;
  return rational_length(ambient_) * (1 - removal_scale_ / 2);
}

Rational CantorLikeSet::stage_cover_length(int depth) const {
  const Rational L = rational_length(ambient_);
  switch (kind_) {
    case Kind::Ternary: {
      Rational r = L;
      for (int k = 0; k < depth; ++k) r = r * 2 / 3;
      return r;
    }
    case Kind::Fat: {
      // Removed total through stage d: scale * L * sum_{k=1..d} 2^-(k+1).
      Rational removed = 0;
      Rational term = Rational(1, 4);
      for (int k = 1; k <= depth; ++k) {
        removed += term;
        term /= 2;
      }
      return L - removal_scale_ * L * removed;
    }
    case Kind::Discrete:
      return 0;
  }
  return 0;
}

std::vector<std::pair<Rational, Rational>> CantorLikeSet::stage_intervals(int depth) const {
  if (kind_ == Kind::Discrete)
    throw std::invalid_argument("stage_intervals: not defined for discrete sets");
  if (depth < 0 || depth > 20)
    throw std::invalid_argument("stage_intervals: depth must be in [0, 20]");
  const Rational lo = rational_of(ambient_.lo);
  const Rational hi = rational_of(ambient_.hi);
  const Rational L = hi - lo;
  std::vector<std::pair<Rational, Rational>> cover{{lo, hi}};
  for (int stage = 1; stage <= depth; ++stage) {
    std::vector<std::pair<Rational, Rational>> next;
    next.reserve(cover.size() * 2);
    for (const auto& [a, b] : cover) {
      if (kind_ == Kind::Ternary) {
        const Rational third = (b - a) / 3;
        next.emplace_back(a, a + third);
        next.emplace_back(b - third, b);
      } else {
        Rational m = removal_scale_ * L;
        for (int j = 0; j < stage; ++j) m /= 4;
        const Rational mid = (a + b) / 2;
        next.emplace_back(a, mid - m / 2);
        next.emplace_back(mid + m / 2, b);
      }
    }
    cover.swap(next);
  }
  return cover;
}

double CantorLikeSet::min_gap() const {
  if (kind_ != Kind::Discrete || points_.size() < 2)
    return std::numeric_limits<double>::infinity();
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < points_.size(); ++i)
    gap = std::min(gap, points_[i] - points_[i - 1]);
  return gap;
}

CantorLikeSet fat_cantor_build(Interval ambient, double target_measure) {
  const Rational L = rational_length(ambient);
  const Rational T = rational_of(target_measure);
  if (T < 0) throw std::invalid_argument("fat_cantor_build: target must be >= 0");
  if (T >= L) throw std::invalid_argument("fat_cantor_build: target >= ambient length is infeasible");
  // Scale the classical middle-4^-k schedule so the removal sum is (L - T)/2,
  // leaving exact residual (L + T)/2 > T.
  const Rational scale = (L - T) / L;
  return CantorLikeSet::fat(ambient, scale);
}

double cantor_function(double x, int depth) {
  if (depth < 1) throw std::invalid_argument("cantor_function: depth must be >= 1");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  // Exact integer walk on p/q with q = 2^60; p stays in [0, q].
  const std::int64_t q = std::int64_t{1} << 60;
  std::int64_t p = llround(x * std::ldexp(1.0, 60));
  if (p <= 0) return 0.0;
  if (p >= q) return 1.0;
  double acc = 0.0;
  double s = 1.0;
  for (int k = 0; k < depth; ++k) {
    const std::int64_t t = 3 * p;
    if (t < q) {
      p = t;
      s *= 0.5;
    } else if (t > 2 * q) {
      p = t - 2 * q;
      acc += 0.5 * s;
      s *= 0.5;
    } else {
      return acc + 0.5 * s;  // inside the closed middle third
    }
  }
  return acc + s * (static_cast<double>(p) / static_cast<double>(q));
}

bool cantor_contains(const CantorLikeSet& set, double x, int depth) {
  return set.contains(x, depth);
}

// ---------------------------------------------------------------------------
// Obstacles
// ---------------------------------------------------------------------------

namespace {

bool cell_meets_halfslab(const HalfSlab& f, const Point& c, const std::vector<double>& halo,
                         int depth) {
  if (c[f.slab_axis] + halo[static_cast<std::size_t>(f.slab_axis)] < f.threshold) return false;
  const double h = halo[static_cast<std::size_t>(f.thin_axis)];
  return f.thin_set.cover_intersects(c[f.thin_axis] - h, c[f.thin_axis] + h, depth);
}

bool cell_meets_patch(const HyperplanePatch& f, const Point& c, const std::vector<double>& halo) {
  if (std::abs(c[f.axis] - f.level) > halo[static_cast<std::size_t>(f.axis)]) return false;
  for (const SideConstraint& sc : f.sides) {
    const double h = halo[static_cast<std::size_t>(sc.axis)];
    if (c[sc.axis] + h < sc.lo || c[sc.axis] - h > sc.hi) return false;
  }
  return true;
}

bool cell_meets_mask(const GridMaskObstacle& f, const Point& c, const std::vector<double>& halo) {
  const int n = f.box.dim();
  std::vector<int> lo(static_cast<std::size_t>(n)), hi(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const Interval& iv = f.box.axis(i);
    const double d = iv.length() / f.resolution[static_cast<std::size_t>(i)];
    int a = static_cast<int>(std::floor((c[i] - halo[static_cast<std::size_t>(i)] - iv.lo) / d));
    int b = static_cast<int>(std::floor((c[i] + halo[static_cast<std::size_t>(i)] - iv.lo) / d));
    a = std::max(a, 0);
    b = std::min(b, f.resolution[static_cast<std::size_t>(i)] - 1);
    if (a > b) return false;
    lo[static_cast<std::size_t>(i)] = a;
    hi[static_cast<std::size_t>(i)] = b;
  }
  // Odometer over the overlapped mask cells.
  std::vector<int> m = lo;
  while (true) {
    std::size_t idx = 0;
    for (int i = 0; i < n; ++i)
      idx = idx * static_cast<std::size_t>(f.resolution[static_cast<std::size_t>(i)]) +
            static_cast<std::size_t>(m[static_cast<std::size_t>(i)]);
    if (f.bits[idx]) return true;
    int axis = n - 1;
    while (axis >= 0) {
      if (++m[static_cast<std::size_t>(axis)] <= hi[static_cast<std::size_t>(axis)]) break;
      m[static_cast<std::size_t>(axis)] = lo[static_cast<std::size_t>(axis)];
      --axis;
    }
    if (axis < 0) return false;
  }
}

bool cell_meets_box(const ClosedBoxObstacle& f, const Point& c, const std::vector<double>& halo) {
  for (std::size_t i = 0; i < f.lo.size(); ++i) {
    const double h = halo[i];
    if (c[static_cast<Eigen::Index>(i)] + h < f.lo[i] || c[static_cast<Eigen::Index>(i)] - h > f.hi[i])
      return false;
  }
  return true;
}

}  // namespace

bool ObstacleSet::intersects_cell(const Point& center, const std::vector<double>& halo,
                                  int depth) const {
  return std::visit(
      [&](const auto& f) -> bool {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, EmptyObstacle>) {
          return false;
        } else if constexpr (std::is_same_v<T, HalfSlab>) {
          return cell_meets_halfslab(f, center, halo, depth);
        } else if constexpr (std::is_same_v<T, BiSlab>) {
          return cell_meets_halfslab(f.first, center, halo, depth) &&
                 cell_meets_halfslab(f.second, center, halo, depth);
        } else if constexpr (std::is_same_v<T, HyperplanePatch>) {
          return cell_meets_patch(f, center, halo);
        } else if constexpr (std::is_same_v<T, GridMaskObstacle>) {
          return cell_meets_mask(f, center, halo);
        } else if constexpr (std::is_same_v<T, ClosedBoxObstacle>) {
          return cell_meets_box(f, center, halo);
        } else {
          for (const ObstacleSet& part : f.parts)
            if (part.intersects_cell(center, halo, depth)) return true;
          return false;
        }
      },
      v_);
}

bool ObstacleSet::contains_point(const Point& x, int depth) const {
  const std::vector<double> halo(static_cast<std::size_t>(x.size()), 0.0);
  return intersects_cell(x, halo, depth);
}

namespace {

// Separable fast path: per-axis cell marks combined over the grid. Every
// descriptor except GridMaskObstacle factorizes over axes.
struct AxisMarks {
  std::vector<std::vector<std::uint8_t>> marks;  // per axis, per index

  static AxisMarks all(const Grid& g) {
    AxisMarks m;
    m.marks.resize(static_cast<std::size_t>(g.dim()));
    for (int i = 0; i < g.dim(); ++i)
      m.marks[static_cast<std::size_t>(i)].assign(static_cast<std::size_t>(g.resolution(i)), 1);
    return m;
  }
};

void combine_and(const Grid& g, const AxisMarks& m, std::vector<std::uint8_t>* out) {
  const std::size_t count = g.node_count();
  std::vector<int> multi(static_cast<std::size_t>(g.dim()), 0);
  for (std::size_t node = 0; node < count; ++node) {
    std::uint8_t v = 1;
    for (int i = 0; i < g.dim(); ++i) {
      if (!m.marks[static_cast<std::size_t>(i)][static_cast<std::size_t>(multi[static_cast<std::size_t>(i)])]) {
        v = 0;
        break;
      }
    }
    if (v) (*out)[node] = 1;
    int axis = g.dim() - 1;
    while (axis >= 0) {
      if (++multi[static_cast<std::size_t>(axis)] < g.resolution(axis)) break;
      multi[static_cast<std::size_t>(axis)] = 0;
      --axis;
    }
  }
}

void mask_halfslab(const HalfSlab& f, const Grid& g, int depth, std::vector<std::uint8_t>* out) {
  AxisMarks m = AxisMarks::all(g);
  auto& slab = m.marks[static_cast<std::size_t>(f.slab_axis)];
  for (int j = 0; j < g.resolution(f.slab_axis); ++j)
    slab[static_cast<std::size_t>(j)] =
        (g.coordinate(f.slab_axis, j) + 0.5 * g.spacing(f.slab_axis) >= f.threshold) ? 1 : 0;
  auto& thin = m.marks[static_cast<std::size_t>(f.thin_axis)];
  const double h = 0.5 * g.spacing(f.thin_axis);
  for (int j = 0; j < g.resolution(f.thin_axis); ++j) {
    const double c = g.coordinate(f.thin_axis, j);
    thin[static_cast<std::size_t>(j)] = f.thin_set.cover_intersects(c - h, c + h, depth) ? 1 : 0;
  }
  combine_and(g, m, out);
}

void mask_patch(const HyperplanePatch& f, const Grid& g, std::vector<std::uint8_t>* out) {
  AxisMarks m = AxisMarks::all(g);
  auto& plane = m.marks[static_cast<std::size_t>(f.axis)];
  for (int j = 0; j < g.resolution(f.axis); ++j)
    plane[static_cast<std::size_t>(j)] =
        (std::abs(g.coordinate(f.axis, j) - f.level) <= 0.5 * g.spacing(f.axis)) ? 1 : 0;
  for (const SideConstraint& sc : f.sides) {
    auto& ax = m.marks[static_cast<std::size_t>(sc.axis)];
    const double h = 0.5 * g.spacing(sc.axis);
    for (int j = 0; j < g.resolution(sc.axis); ++j) {
      const double c = g.coordinate(sc.axis, j);
      if (c + h < sc.lo || c - h > sc.hi) ax[static_cast<std::size_t>(j)] = 0;
    }
  }
  combine_and(g, m, out);
}

void mask_closed_box(const ClosedBoxObstacle& f, const Grid& g, std::vector<std::uint8_t>* out) {
  AxisMarks m = AxisMarks::all(g);
  for (int i = 0; i < g.dim(); ++i) {
    auto& ax = m.marks[static_cast<std::size_t>(i)];
    const double h = 0.5 * g.spacing(i);
    for (int j = 0; j < g.resolution(i); ++j) {
      const double c = g.coordinate(i, j);
      if (c + h < f.lo[static_cast<std::size_t>(i)] || c - h > f.hi[static_cast<std::size_t>(i)])
        ax[static_cast<std::size_t>(j)] = 0;
    }
  }
  combine_and(g, m, out);
}

void mask_into(const ObstacleSet& F, const Grid& g, int depth, std::vector<std::uint8_t>* out);

void mask_bislab(const BiSlab& f, const Grid& g, int depth, std::vector<std::uint8_t>* out) {
  std::vector<std::uint8_t> a(g.node_count(), 0), b(g.node_count(), 0);
  mask_halfslab(f.first, g, depth, &a);
  mask_halfslab(f.second, g, depth, &b);
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] && b[i]) (*out)[i] = 1;
}

void mask_into(const ObstacleSet& F, const Grid& g, int depth, std::vector<std::uint8_t>* out) {
  std::visit(
      [&](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, EmptyObstacle>) {
          // nothing
        } else if constexpr (std::is_same_v<T, HalfSlab>) {
          mask_halfslab(f, g, depth, out);
        } else if constexpr (std::is_same_v<T, BiSlab>) {
          mask_bislab(f, g, depth, out);
        } else if constexpr (std::is_same_v<T, HyperplanePatch>) {
          mask_patch(f, g, out);
        } else if constexpr (std::is_same_v<T, ClosedBoxObstacle>) {
          mask_closed_box(f, g, out);
        } else if constexpr (std::is_same_v<T, GridMaskObstacle>) {
          std::vector<double> halo(static_cast<std::size_t>(g.dim()));
          for (int i = 0; i < g.dim(); ++i) halo[static_cast<std::size_t>(i)] = 0.5 * g.spacing(i);
          for (std::size_t node = 0; node < g.node_count(); ++node)
            if (cell_meets_mask(f, g.point(node), halo)) (*out)[node] = 1;
        } else {
          for (const ObstacleSet& part : f.parts) mask_into(part, g, depth, out);
        }
      },
      F.variant());
}

}  // namespace

std::vector<std::uint8_t> obstacle_mask(const ObstacleSet& F, const Grid& grid, int depth) {
  std::vector<std::uint8_t> out(grid.node_count(), 0);
  mask_into(F, grid, depth, &out);
  return out;
}

ComponentLabels complement_components(const Grid& grid, const ObstacleSet& F, int depth) {
  const std::vector<std::uint8_t> inside = obstacle_mask(F, grid, depth);
  ComponentLabels result;
  result.labels.assign(grid.node_count(), -1);
  std::deque<std::size_t> queue;
  for (std::size_t seed = 0; seed < grid.node_count(); ++seed) {
    if (inside[seed] || result.labels[seed] >= 0) continue;
    const int label = result.count++;
    result.labels[seed] = label;
    queue.push_back(seed);
    while (!queue.empty()) {
      const std::size_t node = queue.front();
      queue.pop_front();
      for (int axis = 0; axis < grid.dim(); ++axis) {
        for (int delta : {-1, +1}) {
          std::size_t nb = 0;
          if (!grid.neighbor(node, axis, delta, &nb)) continue;
          if (inside[nb] || result.labels[nb] >= 0) continue;
          result.labels[nb] = label;
          queue.push_back(nb);
        }
      }
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Dyadic decomposition
// ---------------------------------------------------------------------------

Rational DyadicCube::exact_volume(int dim) const {
  Rational side(1, boost::multiprecision::cpp_int(1) << level);
  Rational v = 1;
  for (int i = 0; i < dim; ++i) v *= side;
  return v;
}

Interval DyadicCube::axis_interval(int axis) const {
  const double s = side();
  const double c = static_cast<double>(corner[static_cast<std::size_t>(axis)]);
  return Interval{c * s, (c + 1) * s};
}

Rational CubeDecomposition::interior_measure(int dim) const {
  Rational total = 0;
  for (const DyadicCube& c : cubes) total += c.exact_volume(dim);
  return total;
}

namespace {

long long floor_div(long long a, long long b) {
  long long q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

CubeDecomposition dyadic_decompose(const std::function<bool(const Point&)>& indicator,
                                   const OpenBox& bounds, int max_level) {
  if (max_level < 0) throw std::invalid_argument("dyadic_decompose: max_level must be >= 0");
  const int n = bounds.dim();
  CubeDecomposition result;
  std::vector<std::set<std::vector<long long>>> accepted(static_cast<std::size_t>(max_level) + 1);

  for (int k = 0; k <= max_level; ++k) {
    const double side = std::ldexp(1.0, -k);
    std::vector<long long> lo(static_cast<std::size_t>(n)), hi(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      lo[static_cast<std::size_t>(i)] =
          static_cast<long long>(std::floor(bounds.axis(i).lo / side));
      hi[static_cast<std::size_t>(i)] =
          static_cast<long long>(std::ceil(bounds.axis(i).hi / side)) - 1;
    }
    std::vector<long long> m = lo;
    if (n == 0) continue;
    while (true) {
      // Skip descendants of already-accepted cubes.
      bool covered = false;
      for (int kp = 0; kp < k && !covered; ++kp) {
        std::vector<long long> anc(static_cast<std::size_t>(n));
        const long long shift = 1LL << (k - kp);
        for (int i = 0; i < n; ++i)
          anc[static_cast<std::size_t>(i)] = floor_div(m[static_cast<std::size_t>(i)], shift);
        covered = accepted[static_cast<std::size_t>(kp)].count(anc) > 0;
      }
      if (!covered) {
        // Corners and center of the closed hull must satisfy the indicator.
        bool ok = true;
        Point p(n);
        for (unsigned corner = 0; corner < (1u << n) && ok; ++corner) {
          for (int i = 0; i < n; ++i)
            p[i] = (static_cast<double>(m[static_cast<std::size_t>(i)]) +
                    ((corner >> i) & 1u ? 1.0 : 0.0)) *
                   side;
          ok = indicator(p);
        }
        if (ok) {
          for (int i = 0; i < n; ++i)
            p[i] = (static_cast<double>(m[static_cast<std::size_t>(i)]) + 0.5) * side;
          ok = indicator(p);
        }
        if (ok) {
          accepted[static_cast<std::size_t>(k)].insert(m);
          result.cubes.push_back(DyadicCube{k, m});
        }
      }
      int axis = n - 1;
      while (axis >= 0) {
        if (++m[static_cast<std::size_t>(axis)] <= hi[static_cast<std::size_t>(axis)]) break;
        m[static_cast<std::size_t>(axis)] = lo[static_cast<std::size_t>(axis)];
        --axis;
      }
      if (axis < 0) break;
    }
  }
  return result;
}

}  // namespace parext
