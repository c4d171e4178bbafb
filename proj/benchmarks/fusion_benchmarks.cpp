#include <benchmark/benchmark.h>

#include "ocifuse/fusion.hpp"
#include "support/instances.hpp"

namespace ocifuse {
namespace {

void BM_SolveCi(benchmark::State& state) {
  testing::Rng rng(1);
  const auto count = static_cast<std::size_t>(state.range(0));
  const CiProblem p = testing::random_ci(count, state.range(1), false, rng);
  for (auto _ : state) benchmark::DoNotOptimize(solve_ci(p).objective);
}
BENCHMARK(BM_SolveCi)->Args({2, 2})->Args({2, 6})->Args({4, 4})->Args({8, 6})->Unit(benchmark::kMillisecond);

void BM_SolveSci(benchmark::State& state) {
  testing::Rng rng(2);
  const SciProblem p = testing::random_sci_dense(state.range(0), false, rng);
  for (auto _ : state) benchmark::DoNotOptimize(solve_sci(p).objective);
}
BENCHMARK(BM_SolveSci)->Arg(2)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);

void BM_SolveOciPd(benchmark::State& state) {
  testing::Rng rng(3);
  const auto bounds = static_cast<std::size_t>(state.range(1));
  const OciProblem p = testing::random_oci_pd(3, state.range(0), state.range(0), bounds, rng);
  for (auto _ : state) benchmark::DoNotOptimize(solve_oci(p).objective);
}
BENCHMARK(BM_SolveOciPd)->Args({4, 2})->Args({8, 4})->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace ocifuse

BENCHMARK_MAIN();
