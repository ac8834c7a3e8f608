#include <benchmark/benchmark.h>

#include "asrb/tensor.hpp"

#include <random>

namespace {

// Forward + backward through a square matmul chain of depth 2.
void BM_MatmulBackward(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937 rng(7);
  std::uniform_real_distribution<float> dist(-0.5f, 0.5f);
  std::vector<float> a(static_cast<size_t>(n) * n), b(a.size()), c(a.size());
  for (auto* v : {&a, &b, &c})
    for (float& x : *v) x = dist(rng);
  for (auto _ : state) {
    asrb::Tape<float> tape;
    auto ta = tape.leaf(n, n, a, true);
    auto tb = tape.leaf(n, n, b, true);
    auto tc = tape.leaf(n, n, c, true);
    auto loss = asrb::mean_all(asrb::matmul(asrb::matmul(ta, tb), tc));
    tape.backward(loss);
    benchmark::DoNotOptimize(ta.grad());
  }
  state.SetItemsProcessed(state.iterations() * 2ll * n * n * n * 2);
}

}  // namespace

BENCHMARK(BM_MatmulBackward)->Arg(32)->Arg(64)->Arg(128);

BENCHMARK_MAIN();
