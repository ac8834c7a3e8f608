#include <benchmark/benchmark.h>

#include "asrb/decode.hpp"

#include <cmath>
#include <random>

namespace {

// Synthetic scorer: a fixed random bigram log-distribution table.
asrb::StepScorer make_table_scorer(int vocab, int eos, uint32_t seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(0.1, 1.0);
  std::vector<std::vector<double>> table(vocab + 1, std::vector<double>(vocab));
  for (auto& row : table) {
    double sum = 0.0;
    for (double& v : row) sum += (v = dist(rng));
    for (double& v : row) v = std::log(v / sum);
  }
  return [table, eos](const std::vector<int>& prefix) {
    int last = prefix.empty() ? table.size() - 1 : prefix.back();
    return table[last];
  };
}

void BM_BeamSearch(benchmark::State& state) {
  asrb::DecodeParams p;
  p.beam_size = static_cast<int>(state.range(0));
  p.max_length = 24;
  p.nrns = 2;
  p.eos_id = 0;
  auto scorer = make_table_scorer(16, p.eos_id, 3);
  for (auto _ : state) {
    auto hyps = asrb::beam_search(scorer, p);
    benchmark::DoNotOptimize(hyps);
  }
}

}  // namespace

BENCHMARK(BM_BeamSearch)->Arg(2)->Arg(5)->Arg(10);
