#include "parext/io.hpp"

#include "parext/fundamental.hpp"

#include <doctest.h>

#include <sstream>

using namespace parext;

TEST_CASE("fmt12 prints twelve significant digits") {
  CHECK(fmt12(0.5) == "0.5");
  CHECK(fmt12(1.0 / 3.0) == "0.333333333333");
  CHECK(fmt12(0.36787944117144233) == "0.367879441171");
  CHECK(fmt12(-2.5e-10) == "-2.5e-10");
}

TEST_CASE("section csv schema") {
  const Grid grid(OpenBox::cube(2, 0.0, 1.0), {2, 2});
  std::vector<std::uint8_t> defined(4, 1);
  defined[3] = 0;
  const SampledSection s = SampledSection::sample(
      grid, 1,
      [](const Point& p) {
        Eigen::VectorXd v(1);
        v[0] = p[0] + 10.0 * p[1];
        return v;
      },
      defined);
  std::ostringstream os;
  write_section_csv(os, s);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "i0,i1,x0,x1,defined,v0");
  int rows = 0;
  int defined_rows = 0;
  while (std::getline(is, line)) {
    ++rows;
    std::istringstream fields(line);
    std::string field;
    for (int i = 0; i < 5; ++i) std::getline(fields, field, ',');
    if (field == "1") ++defined_rows;
  }
  CHECK(rows == 4);
  CHECK(defined_rows == 3);
}

TEST_CASE("cube csv schema") {
  CubeDecomposition d;
  d.cubes.push_back(DyadicCube{2, {1, 3}});
  std::ostringstream os;
  write_cubes_csv(os, d);
  CHECK(os.str() == "level,c0,c1\n2,1,3\n");
}

TEST_CASE("fundamental csv schema") {
  const CoefficientField A = [](double, const Point&) { return Eigen::MatrixXd::Zero(1, 1); };
  Point y(1);
  y[0] = 0.25;
  const FundamentalSolution fs = fundamental_matrix(A, 1, 0.0, {0.0, 1.0}, {y}, 0.5);
  std::ostringstream os;
  write_fundamental_csv(os, fs);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "t,y0,x00");
  std::getline(is, line);
  CHECK(line == "0,0.25,1");
  std::getline(is, line);
  CHECK(line == "1,0.25,1");
}
