#include <vector>

#include <benchmark/benchmark.h>

#include "upbench/metrics/uplift_curve.hpp"
#include "upbench/numerics/rng.hpp"

namespace {

struct Labels {
  std::vector<double> scores;
  std::vector<std::uint8_t> t;
  std::vector<std::uint8_t> y;
};

Labels make_labels(std::size_t n) {
  upbench::Rng rng(42);
  Labels l;
  for (std::size_t i = 0; i < n; ++i) {
    l.scores.push_back(rng.normal());
    l.t.push_back(rng.bernoulli(0.5) ? 1 : 0);
    l.y.push_back(rng.bernoulli(0.1) ? 1 : 0);
  }
  return l;
}

void BM_RankAndAccumulate(benchmark::State& state) {
  const Labels l = make_labels(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto curve = upbench::metrics::rank_and_accumulate(l.scores, l.t, l.y);
    benchmark::DoNotOptimize(curve.treated.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RankAndAccumulate)->Arg(1 << 10)->Arg(1 << 14)->Arg(1 << 18);

void BM_Evaluate(benchmark::State& state) {
  const Labels l = make_labels(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto report = upbench::metrics::evaluate(l.scores, l.t, l.y);
    benchmark::DoNotOptimize(report.qini);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Evaluate)->Arg(1 << 10)->Arg(1 << 14)->Arg(1 << 18);

}  // namespace
