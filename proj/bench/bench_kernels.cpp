#include <benchmark/benchmark.h>

#include "horocount/equidist.hpp"
#include "horocount/latcount.hpp"

using namespace horocount;

namespace {

Matrix skew_gram(int d) {
  Matrix g = Matrix::Identity(d, d);
  for (int i = 0; i + 1 < d; ++i) g(i, i + 1) = g(i + 1, i) = 0.3;
  return g;
}

void count_serial(benchmark::State& st) {
  EllipsoidSpec s(QuadForm(skew_gram(int(st.range(0)))), double(st.range(1)));
  for (auto _ : st) benchmark::DoNotOptimize(count_full_serial(s).n0);
}

void count_parallel(benchmark::State& st) {
  EllipsoidSpec s(QuadForm(skew_gram(int(st.range(0)))), double(st.range(1)));
  for (auto _ : st) benchmark::DoNotOptimize(count_full(s, CountMode::Float, 0).n0);
}

// Base point of the (d-1)-dimensional factor: d = 2 uses the trivial 1x1 one.
GroupElement base_point(int d) {
  if (d == 2) return GroupElement::identity(1);
  Matrix g(2, 2);
  g << 1.1, 0.3, 0.0, 1 / 1.1;
  return GroupElement(g);
}

void fiber_serial(benchmark::State& st) {
  auto h = RadialProfile::bump(1);
  for (auto _ : st) benchmark::DoNotOptimize(fiber_integral_serial(4.0, base_point(int(st.range(0))), h, int(st.range(1))));
}

void fiber_parallel(benchmark::State& st) {
  auto h = RadialProfile::bump(1);
  for (auto _ : st) benchmark::DoNotOptimize(fiber_integral(4.0, base_point(int(st.range(0))), h, int(st.range(1)), 0));
}

}  // namespace

BENCHMARK(count_serial)->Args({3, 200})->Args({4, 60})->Unit(benchmark::kMillisecond);
BENCHMARK(count_parallel)->Args({3, 200})->Args({4, 60})->Unit(benchmark::kMillisecond);
BENCHMARK(fiber_serial)->Args({2, 20000})->Args({3, 150})->Unit(benchmark::kMillisecond);
BENCHMARK(fiber_parallel)->Args({2, 20000})->Args({3, 150})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
