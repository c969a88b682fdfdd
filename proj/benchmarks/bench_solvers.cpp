#include <benchmark/benchmark.h>

#include "minv/argmin.hpp"
#include "minv/fixtures.hpp"
#include "minv/solvers.hpp"

namespace {

void BM_EntropySolution(benchmark::State& state) {
  minv::FixtureOptions opts;
  opts.grid = static_cast<std::size_t>(state.range(0));
  const auto f = minv::make_fixture("offset-polar-under", opts);
  for (auto _ : state) {
    auto rep = minv::entropy_solution(f.map, *f.theta_grid, *f.grid_data);
    benchmark::DoNotOptimize(rep.objective);
  }
}
BENCHMARK(BM_EntropySolution)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_PolarInversion(benchmark::State& state) {
  const minv::PointwiseSolver solver(minv::polar_map());
  minv::Vector y(2);
  y << 1.3, -0.4;
  for (auto _ : state) benchmark::DoNotOptimize(solver.invert(y));
}
BENCHMARK(BM_PolarInversion)->Unit(benchmark::kMicrosecond);

void BM_LeastNorm(benchmark::State& state) {
  const minv::PointwiseSolver solver(minv::offset_polar_map());
  minv::Vector y(1);
  y << 0.6;
  for (auto _ : state) benchmark::DoNotOptimize(solver.least_norm(y));
}
BENCHMARK(BM_LeastNorm)->Unit(benchmark::kMicrosecond);

}  // namespace
