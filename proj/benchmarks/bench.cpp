#include "parext/counterexamples.hpp"
#include "parext/extension.hpp"
#include "parext/fundamental.hpp"
#include "parext/sets.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace parext;

void BM_cantor_function(benchmark::State& state) {
  const int depth = static_cast<int>(state.range(0));
  double x = 0.0;
  for (auto _ : state) {
    x += 1e-7;
    if (x > 1.0) x = 0.0;
    benchmark::DoNotOptimize(cantor_function(x, depth));
  }
}
BENCHMARK(BM_cantor_function)->Arg(12)->Arg(48);

void BM_ternary_mask(benchmark::State& state) {
  const int res = static_cast<int>(state.range(0));
  const OpenBox box = OpenBox::cube(2, 0.0, 1.0);
  const Grid grid(box, {res, res});
  HalfSlab slab{0, 0.5, 1, CantorLikeSet::ternary({0.0, 1.0})};
  const ObstacleSet F(slab);
  for (auto _ : state) benchmark::DoNotOptimize(obstacle_mask(F, grid, 12));
}
BENCHMARK(BM_ternary_mask)->Arg(128)->Arg(256);

void BM_parallel_transport(benchmark::State& state) {
  const NamedScenario sc = noextension_scenario(2);
  Point a(2), b(2);
  a << -2.0, -1.5;
  b << 1.5, 1.0;
  const PiecewisePath path = PiecewisePath::line(a, b, sc.box);
  Eigen::VectorXd v0(1);
  v0 << 1.0;
  for (auto _ : state)
    benchmark::DoNotOptimize(parallel_transport(sc.connection, path, v0, 1e-3));
}
BENCHMARK(BM_parallel_transport);

void BM_fundamental_sweep(benchmark::State& state) {
  const int params = static_cast<int>(state.range(0));
  const NamedScenario sc = cantor_c0_scenario(2);
  const CoefficientField A = [&sc](double t, const Point& y) {
    Point x(2);
    x << t, y[0];
    return Eigen::MatrixXd(-sc.connection.component(0, x));
  };
  std::vector<double> times;
  for (int i = 0; i < 128; ++i) times.push_back(-2.0 + 4.0 * (i + 0.5) / 128);
  std::vector<Point> nodes;
  for (int i = 0; i < params; ++i) {
    Point p(1);
    p[0] = -1.0 + 3.0 * (i + 0.5) / params;
    nodes.push_back(p);
  }
  for (auto _ : state)
    benchmark::DoNotOptimize(fundamental_matrix(A, 1, -1.0, times, nodes, 1e-3));
}
BENCHMARK(BM_fundamental_sweep)->Arg(32)->Arg(128);

void BM_extend_slab(benchmark::State& state) {
  const int res = static_cast<int>(state.range(0));
  const NamedScenario sc = cantor_c0_scenario(2);
  const Grid grid(sc.box, {res, res});
  std::vector<std::uint8_t> defined = obstacle_mask(sc.obstacle, grid, 12);
  for (auto& m : defined) m = m ? 0 : 1;
  const SampledSection s = SampledSection::sample(
      grid, 1,
      [&sc](const Point& p) {
        Eigen::VectorXd v(1);
        v[0] = sc.section.value(p);
        return v;
      },
      defined);
  const HalfSlab& F = *sc.obstacle.get_if<HalfSlab>();
  for (auto _ : state)
    benchmark::DoNotOptimize(
        extend_slab(sc.connection, s, F, -1.0, sc.tolerances, 12, ThinResidualPolicy::Report));
}
BENCHMARK(BM_extend_slab)->Arg(64)->Arg(128);

}  // namespace

BENCHMARK_MAIN();
