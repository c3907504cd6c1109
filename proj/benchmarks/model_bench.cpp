#include <benchmark/benchmark.h>

#include "upbench/models/model.hpp"
#include "upbench/numerics/adamw.hpp"
#include "upbench/numerics/rng.hpp"

namespace {

using upbench::models::ModelKind;

upbench::models::Batch random_batch(upbench::Index n, upbench::Index k) {
  upbench::Rng rng(7);
  upbench::models::Batch b{upbench::Tensor(n, k), upbench::Tensor(n, 1), upbench::Tensor(n, 1)};
  for (upbench::Index i = 0; i < b.x.size(); ++i) b.x.data()[i] = rng.normal();
  for (upbench::Index i = 0; i < n; ++i) {
    b.t(i, 0) = rng.bernoulli(0.5);
    b.y(i, 0) = rng.bernoulli(0.2);
  }
  return b;
}

void BM_TrainStep(benchmark::State& state) {
  const auto kind = upbench::models::kAllModelKinds[static_cast<std::size_t>(state.range(0))];
  upbench::models::ModelHyperparams hp;
  hp.rank = 64;
  auto model = upbench::models::build_model(kind, 12, hp, true, 1);
  upbench::nn::AdamW optimizer({});
  const auto batch = random_batch(512, 12);
  for (auto _ : state) {
    auto loss = model->train_step(batch, optimizer);
    benchmark::DoNotOptimize(loss.total);
  }
  state.SetLabel(std::string(upbench::models::to_string(kind)));
  state.SetItemsProcessed(state.iterations() * batch.rows());
}
BENCHMARK(BM_TrainStep)->DenseRange(0, 12);

void BM_PredictUplift(benchmark::State& state) {
  upbench::models::ModelHyperparams hp;
  hp.rank = 64;
  auto model = upbench::models::build_model(ModelKind::TARNet, 12, hp, true, 1);
  const auto batch = random_batch(state.range(0), 12);
  for (auto _ : state) {
    auto uplift = model->predict_uplift(batch.x);
    benchmark::DoNotOptimize(uplift.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_PredictUplift)->Arg(1 << 12)->Arg(1 << 16);

void BM_AdamWStep(benchmark::State& state) {
  upbench::nn::Parameter p{"w", upbench::Tensor::Random(state.range(0), 128),
                           upbench::Tensor::Random(state.range(0), 128)};
  upbench::nn::AdamW optimizer({});
  upbench::nn::Parameter* params[] = {&p};
  for (auto _ : state) {
    optimizer.step(params);
    benchmark::DoNotOptimize(p.value.data());
  }
}
BENCHMARK(BM_AdamWStep)->Arg(128)->Arg(1024);

}  // namespace
