#include <benchmark/benchmark.h>
static void noop(benchmark::State& s){for(auto _ : s){benchmark::DoNotOptimize(_);}}
BENCHMARK(noop);
BENCHMARK_MAIN();
