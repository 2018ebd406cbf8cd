#include "parext/geometry.hpp"

#include <doctest.h>

using namespace parext;

TEST_CASE("open box validation") {
  CHECK_THROWS_AS(OpenBox({{1.0, 0.0}}), std::invalid_argument);
  CHECK_THROWS_AS(OpenBox({{0.0, 0.0}}), std::invalid_argument);
  CHECK_THROWS_AS(OpenBox(std::vector<Interval>{}), std::invalid_argument);
  const OpenBox box({{0.0, 2.0}, {-1.0, 1.0}});
  CHECK(box.dim() == 2);
  CHECK(box.volume() == doctest::Approx(4.0));
  Point p(2);
  p << 0.0, 0.0;
  CHECK_FALSE(box.contains(p));  // boundary is outside
  p << 1.0, 0.0;
  CHECK(box.contains(p));
  CHECK(box.contains_box(OpenBox({{0.5, 1.5}, {-1.0, 1.0}})));
  CHECK_FALSE(box.contains_box(OpenBox({{-0.5, 1.5}, {-1.0, 1.0}})));
}

TEST_CASE("grid nodes are cell centers strictly inside the box") {
  const OpenBox box({{0.0, 1.0}, {2.0, 4.0}});
  const Grid grid(box, {4, 8});
  CHECK(grid.node_count() == 32);
  CHECK(grid.spacing(0) == doctest::Approx(0.25));
  CHECK(grid.spacing(1) == doctest::Approx(0.25));
  for (std::size_t node = 0; node < grid.node_count(); ++node) {
    CHECK(box.contains(grid.point(node)));
    CHECK(grid.index(grid.multi_index(node)) == node);
  }
  CHECK(grid.coordinate(0, 0) == doctest::Approx(0.125));
  CHECK(grid.coordinate(1, 7) == doctest::Approx(3.875));

  std::size_t nb = 0;
  CHECK(grid.neighbor(grid.index({0, 0}), 0, +1, &nb));
  CHECK(nb == grid.index({1, 0}));
  CHECK_FALSE(grid.neighbor(grid.index({0, 0}), 0, -1, &nb));
  CHECK_FALSE(grid.neighbor(grid.index({3, 5}), 0, +1, &nb));
  CHECK_THROWS_AS(Grid(box, {4}), std::invalid_argument);
  CHECK_THROWS_AS(Grid(box, {4, 0}), std::invalid_argument);
}
