#include <benchmark/benchmark.h>

#include "minv/rng.hpp"
#include "minv/transport.hpp"

namespace {

minv::ParticleMeasure cloud(std::size_t n, const char* stream) {
  auto rng = minv::make_rng(1, stream);
  minv::Matrix pts(static_cast<Eigen::Index>(n), 2);
  for (Eigen::Index i = 0; i < pts.size(); ++i) pts.data()[i] = minv::standard_normal(rng);
  return minv::ParticleMeasure::uniform(pts);
}

void BM_ExactOt(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto mu = cloud(n, "bench/mu");
  const auto nu = cloud(n, "bench/nu");
  const auto cost = minv::cost_matrix(mu.points(), nu.points(), 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(minv::exact_ot(mu, nu, cost).objective);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ExactOt)->RangeMultiplier(2)->Range(16, 256)->Complexity()->Unit(benchmark::kMicrosecond);

void BM_Sinkhorn(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto mu = cloud(n, "bench/mu");
  const auto nu = cloud(n, "bench/nu");
  const auto cost = minv::cost_matrix(mu.points(), nu.points(), 2.0);
  minv::SinkhornOptions opts;
  opts.epsilon = 0.1;
  opts.tolerance = 1e-6;
  opts.max_iter = 100000;
  for (auto _ : state) benchmark::DoNotOptimize(minv::sinkhorn(mu, nu, cost, opts).objective);
}
BENCHMARK(BM_Sinkhorn)->RangeMultiplier(2)->Range(16, 256)->Unit(benchmark::kMillisecond);

}  // namespace
