#include "parext/geometry.hpp"

#include <stdexcept>
#include <string>

namespace parext {

OpenBox::OpenBox(std::vector<Interval> axes) : axes_(std::move(axes)) {
  if (axes_.empty()) throw std::invalid_argument("OpenBox: dimension must be >= 1");
  for (const Interval& iv : axes_) {
    if (!(iv.lo < iv.hi))
      throw std::invalid_argument("OpenBox: requires lo < hi on every axis");
  }
}

OpenBox OpenBox::cube(int n, double lo, double hi) {
  return OpenBox(std::vector<Interval>(static_cast<std::size_t>(n), Interval{lo, hi}));
}

bool OpenBox::contains(const Point& x) const {
  if (x.size() != dim()) return false;
  for (int i = 0; i < dim(); ++i)
    if (!axes_[static_cast<std::size_t>(i)].contains(x[i])) return false;
  return true;
}

bool OpenBox::contains_box(const OpenBox& sub) const {
  if (sub.dim() != dim()) return false;
  for (int i = 0; i < dim(); ++i) {
    const Interval& outer = axis(i);
    const Interval& inner = sub.axis(i);
    if (inner.lo < outer.lo || inner.hi > outer.hi) return false;
  }
  return true;
}

double OpenBox::volume() const {
  double v = 1.0;
  for (const Interval& iv : axes_) v *= iv.length();
  return v;
}

Grid::Grid(OpenBox box, std::vector<int> resolution)
    : box_(std::move(box)), res_(std::move(resolution)) {
  if (static_cast<int>(res_.size()) != box_.dim())
    throw std::invalid_argument("Grid: resolution size must match box dimension");
  count_ = 1;
  for (int r : res_) {
    if (r < 1) throw std::invalid_argument("Grid: resolution must be positive");
    count_ *= static_cast<std::size_t>(r);
  }
  stride_.assign(res_.size(), 1);
  for (int i = box_.dim() - 2; i >= 0; --i) {
    stride_[static_cast<std::size_t>(i)] =
        stride_[static_cast<std::size_t>(i + 1)] * static_cast<std::size_t>(res_[static_cast<std::size_t>(i + 1)]);
  }
}

double Grid::spacing(int axis) const {
  return box_.axis(axis).length() / resolution(axis);
}

double Grid::coordinate(int axis, int idx) const {
  return box_.axis(axis).lo + (idx + 0.5) * spacing(axis);
}

std::size_t Grid::index(const std::vector<int>& multi) const {
  std::size_t out = 0;
  for (std::size_t i = 0; i < res_.size(); ++i)
    out += static_cast<std::size_t>(multi[i]) * stride_[i];
  return out;
}

std::vector<int> Grid::multi_index(std::size_t node) const {
  std::vector<int> multi(res_.size());
  for (std::size_t i = 0; i < res_.size(); ++i) {
    multi[i] = static_cast<int>(node / stride_[i]);
    node %= stride_[i];
  }
  return multi;
}

Point Grid::point(std::size_t node) const {
  std::vector<int> multi = multi_index(node);
  Point p(dim());
  for (int i = 0; i < dim(); ++i) p[i] = coordinate(i, multi[static_cast<std::size_t>(i)]);
  return p;
}

bool Grid::neighbor(std::size_t node, int axis, int delta, std::size_t* out) const {
  const std::size_t a = static_cast<std::size_t>(axis);
  const int idx = static_cast<int>(node / stride_[a]) % res_[a];
  const int next = idx + delta;
  if (next < 0 || next >= res_[a]) return false;
  if (delta >= 0)
    *out = node + static_cast<std::size_t>(delta) * stride_[a];
  else
    *out = node - static_cast<std::size_t>(-delta) * stride_[a];
  return true;
}

}  // namespace parext
