#include <benchmark/benchmark.h>

#include "asrb/metrics.hpp"

#include <random>

namespace {

std::vector<std::string> random_words(int n, std::mt19937& rng) {
  std::uniform_int_distribution<int> tok(0, 19);
  std::vector<std::string> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) out.push_back("t" + std::to_string(tok(rng)));
  return out;
}

void BM_Align(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937 rng(11);
  auto ref = random_words(n, rng);
  auto hyp = random_words(n + n / 4, rng);
  for (auto _ : state) {
    auto counts = asrb::align(ref, hyp);
    benchmark::DoNotOptimize(counts);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n) * (n + n / 4));
}

}  // namespace

BENCHMARK(BM_Align)->Arg(16)->Arg(64)->Arg(256);
