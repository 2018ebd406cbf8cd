#include "parext/io.hpp"

#include <cstdio>
#include <ostream>

namespace parext {

std::string fmt12(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return std::string(buf);
}

void write_section_csv(std::ostream& os, const SampledSection& s) {
  const Grid& g = s.grid();
  const int n = g.dim();
  for (int i = 0; i < n; ++i) os << "i" << i << ",";
  for (int i = 0; i < n; ++i) os << "x" << i << ",";
  os << "defined";
  for (int k = 0; k < s.rank(); ++k) os << ",v" << k;
  os << "\n";
  for (std::size_t node = 0; node < g.node_count(); ++node) {
    const std::vector<int> multi = g.multi_index(node);
    for (int i = 0; i < n; ++i) os << multi[static_cast<std::size_t>(i)] << ",";
    for (int i = 0; i < n; ++i) os << fmt12(g.coordinate(i, multi[static_cast<std::size_t>(i)])) << ",";
    os << (s.defined(node) ? 1 : 0);
    const Eigen::VectorXd v = s.value(node);
    for (int k = 0; k < s.rank(); ++k) os << "," << fmt12(s.defined(node) ? v[k] : 0.0);
    os << "\n";
  }
}

void write_cubes_csv(std::ostream& os, const CubeDecomposition& d) {
  os << "level";
  if (!d.cubes.empty())
    for (std::size_t i = 0; i < d.cubes.front().corner.size(); ++i) os << ",c" << i;
  os << "\n";
  for (const DyadicCube& c : d.cubes) {
    os << c.level;
    for (long long m : c.corner) os << "," << m;
    os << "\n";
  }
}

void write_fundamental_csv(std::ostream& os, const FundamentalSolution& fs) {
  os << "t";
  const Eigen::Index pdim = fs.params().front().size();
  for (Eigen::Index i = 0; i < pdim; ++i) os << ",y" << i;
  for (int a = 0; a < fs.rank(); ++a)
    for (int b = 0; b < fs.rank(); ++b) os << ",x" << a << b;
  os << "\n";
  for (std::size_t p = 0; p < fs.params().size(); ++p) {
    for (std::size_t j = 0; j < fs.times().size(); ++j) {
      os << fmt12(fs.times()[j]);
      for (Eigen::Index i = 0; i < pdim; ++i) os << "," << fmt12(fs.params()[p][i]);
      const Eigen::MatrixXd& X = fs.at(p, j);
      for (int a = 0; a < fs.rank(); ++a)
        for (int b = 0; b < fs.rank(); ++b) os << "," << fmt12(X(a, b));
      os << "\n";
    }
  }
}

}  // namespace parext
