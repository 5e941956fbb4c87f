#include <vector>

#include <benchmark/benchmark.h>
#include <omp.h>

#include "cmdp/solver.hpp"
#include "cmdp/worlds.hpp"
#include "solver/compiled.hpp"

namespace {

cmdp::FiniteMdp slip_grid(int side) {
  return cmdp::grid_world(cmdp::GridSpec{side, side, {0, 0}, 0.2}, {}, {{side - 1, side - 1}});
}

template <double (*Sweep)(const cmdp::solver::CompiledMdp&, double, const double*, double*)>
void BM_Sweep(benchmark::State& state) {
  const auto m = slip_grid(static_cast<int>(state.range(0)));
  const auto c = cmdp::solver::compile(m);
  std::vector<double> v(c.num_states, 0.0), out(c.num_states);
  for (auto _ : state) {
    benchmark::DoNotOptimize(Sweep(c, 0.95, v.data(), out.data()));
    v.swap(out);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(c.num_states));
  state.counters["threads"] = omp_get_max_threads();
}

void BM_SweepSerial(benchmark::State& state) { BM_Sweep<cmdp::solver::sweep_serial>(state); }
void BM_SweepParallel(benchmark::State& state) { BM_Sweep<cmdp::solver::sweep_parallel>(state); }

void BM_ValueIteration(benchmark::State& state) {
  const auto m = slip_grid(static_cast<int>(state.range(0)));
  cmdp::SolverOptions opts;
  opts.parallel = state.range(1) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(cmdp::value_iteration(m, opts).values.data());
}

}  // namespace

BENCHMARK(BM_SweepSerial)->Arg(32)->Arg(128)->Arg(256);
BENCHMARK(BM_SweepParallel)->Arg(32)->Arg(128)->Arg(256);
BENCHMARK(BM_ValueIteration)->Args({32, 0})->Args({32, 1})->Args({96, 0})->Args({96, 1})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
