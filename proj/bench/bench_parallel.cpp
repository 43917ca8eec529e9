// OpenMP kernels against their serial references.

#include <benchmark/benchmark.h>

#include "hetheat/covariance.hpp"
#include "hetheat/sampler.hpp"

using namespace hetheat;

namespace {

const PiecewiseKernel kTwoPhase(make_medium(1, 4, 1, 2));

void BM_GramParallel(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(build_gram(kTwoPhase, 1.0, n));
}

void BM_GramSerial(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(build_gram_serial(kTwoPhase, 1.0, n));
}

void BM_SampleParallel(benchmark::State& state) {
    const CholeskyFactor f(build_gram(kTwoPhase, 1.0, static_cast<int>(state.range(0))));
    for (auto _ : state) benchmark::DoNotOptimize(cholesky_sample(f, 7, 1000));
}

void BM_SampleSerial(benchmark::State& state) {
    const CholeskyFactor f(build_gram(kTwoPhase, 1.0, static_cast<int>(state.range(0))));
    for (auto _ : state) benchmark::DoNotOptimize(cholesky_sample_serial(f, 7, 1000));
}

}  // namespace

BENCHMARK(BM_GramParallel)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GramSerial)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SampleParallel)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SampleSerial)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
