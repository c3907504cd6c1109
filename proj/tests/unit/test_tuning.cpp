#include <set>
#include <tuple>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "upbench/error.hpp"
#include "upbench/synthetic/generator.hpp"
#include "upbench/data/split.hpp"
#include "upbench/tuning/search.hpp"

namespace {

using namespace upbench::tuning;
using upbench::models::ModelHyperparams;
using upbench::models::TrainStatus;

auto key(const ModelHyperparams& hp) {
  return std::make_tuple(hp.rank, hp.batch_size, hp.lr, hp.weight_decay, hp.alpha);
}

TEST(SearchSpace, DefaultAxesMatchPublishedRanges) {
  const SearchSpace space;
  EXPECT_EQ(space.rank(), (std::vector<int>{32, 64, 128}));
  EXPECT_EQ(space.batch_size(), (std::vector<int>{256, 512, 1024, 2048}));
  EXPECT_EQ(space.lr(), (std::vector<double>{1e-4, 5e-4, 1e-3, 5e-3, 1e-2}));
  EXPECT_EQ(space.weight_decay(), (std::vector<double>{1e-5, 1e-4, 1e-3, 1e-2}));
  EXPECT_EQ(space.alpha().size(), 9u);
  EXPECT_DOUBLE_EQ(space.alpha().front(), 0.1);
  EXPECT_DOUBLE_EQ(space.alpha().back(), 0.9);
  EXPECT_EQ(space.cardinality(), 3u * 4u * 5u * 4u * 9u);
}

TEST(SearchSpace, GridIndexZeroIsFirstOfEveryAxis) {
  const auto hp = SearchSpace().grid_point(0);
  EXPECT_EQ(hp.rank, 32);
  EXPECT_EQ(hp.batch_size, 256);
  EXPECT_EQ(hp.lr, 1e-4);
  EXPECT_EQ(hp.weight_decay, 1e-5);
  EXPECT_DOUBLE_EQ(hp.alpha, 0.1);
}

TEST(SearchSpace, GridEnumeratesEveryConfigurationOnce) {
  const SearchSpace space;
  std::set<decltype(key(ModelHyperparams{}))> seen;
  ConfigSampler sampler(space, 0, SearchStrategy::Grid);
  for (std::size_t i = 0; i < space.cardinality(); ++i) seen.insert(key(sampler.next()));
  EXPECT_EQ(seen.size(), 2160u);
  EXPECT_EQ(key(sampler.next()), key(space.grid_point(0)));  // wraps around
  EXPECT_EQ(space.grid_point(1).alpha, space.alpha()[1]);    // alpha fastest
  EXPECT_EQ(space.grid_point(9).weight_decay, space.weight_decay()[1]);
}

TEST(SearchSpace, JsonRoundTripAndValidation) {
  const SearchSpace small({16}, {64, 128}, {1e-3}, {0.0}, {0.5});
  const nlohmann::json j = small;
  const auto back = search_space_from_json(j);
  EXPECT_EQ(back.batch_size(), small.batch_size());
  EXPECT_EQ(back.cardinality(), 2u);
  EXPECT_THROW(SearchSpace({}, {64}, {1e-3}, {0.0}, {0.5}), upbench::ConfigError);
  EXPECT_THROW(SearchSpace({16}, {64}, {-1.0}, {0.0}, {0.5}), upbench::ConfigError);
}

TEST(ConfigSampler, RandomIsSeededAndCoversAxes) {
  const SearchSpace space;
  ConfigSampler a(space, 7, SearchStrategy::Random), b(space, 7, SearchStrategy::Random),
      c(space, 8, SearchStrategy::Random);
  std::set<int> ranks;
  bool differs = false;
  for (int i = 0; i < 200; ++i) {
    const auto x = a.next();
    EXPECT_EQ(key(x), key(b.next()));
    differs |= key(x) != key(c.next());
    ranks.insert(x.rank);
  }
  EXPECT_TRUE(differs);
  EXPECT_EQ(ranks.size(), 3u);
  EXPECT_EQ(key(sample_config(space, 7, SearchStrategy::Random)),
            key(ConfigSampler(space, 7, SearchStrategy::Random).next()));
}

TEST(ConfigSampler, KeepsBaseArchitecture) {
  ModelHyperparams base;
  base.head_depth = 4;
  ConfigSampler s(SearchSpace(), 1, SearchStrategy::Random, base);
  EXPECT_EQ(s.next().head_depth, 4);
}

TEST(Strategy, Parsing) {
  EXPECT_EQ(parse_search_strategy("grid"), SearchStrategy::Grid);
  EXPECT_EQ(parse_search_strategy("random"), SearchStrategy::Random);
  EXPECT_THROW(parse_search_strategy("bayes"), upbench::ConfigError);
}

// A runner that never trains: valid Qini is a fixed function of the index.
TrialRunner scripted(std::vector<double> qini, std::set<std::size_t> diverge = {}) {
  return [=](std::size_t index, const ModelHyperparams& hp, std::uint64_t seed) {
    TrialOutcome out;
    out.trial.config = hp;
    out.trial.seed = seed;
    if (diverge.count(index)) {
      out.trial.status = TrainStatus::Diverged;
      out.trial.message = "scripted divergence";
      return out;
    }
    upbench::metrics::EvalReport r;
    r.qini = qini[index];
    out.trial.valid = r;
    return out;
  };
}

TEST(RunSearch, SelectsArgmaxOfValidationQini) {
  SearchOptions opts;
  opts.budget = 5;
  const auto result = run_search(SearchSpace(), opts, scripted({0.1, 0.4, 0.3, 0.2, 0.0}));
  ASSERT_TRUE(result.best);
  EXPECT_EQ(*result.best, 1u);
  EXPECT_EQ(result.trials.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(result.trials[i].index, i);
}

TEST(RunSearch, TiesGoToEarlierTrial) {
  SearchOptions opts;
  opts.budget = 4;
  opts.workers = 3;
  const auto result = run_search(SearchSpace(), opts, scripted({0.2, 0.5, 0.5, 0.5}));
  EXPECT_EQ(*result.best, 1u);
}

TEST(RunSearch, DivergedTrialsAreSkipped) {
  SearchOptions opts;
  opts.budget = 3;
  const auto result = run_search(SearchSpace(), opts, scripted({0.9, 0.1, 0.2}, {0}));
  EXPECT_EQ(*result.best, 2u);
  EXPECT_TRUE(result.trials[0].diverged());
}

TEST(RunSearch, AllDivergedReportsFailure) {
  SearchOptions opts;
  opts.budget = 3;
  const auto result = run_search(SearchSpace(), opts, scripted({0, 0, 0}, {0, 1, 2}));
  EXPECT_FALSE(result.best);
  EXPECT_EQ(result.failure, "all 3 trials diverged");
}

TEST(RunSearch, BudgetOneRunsSingleTrial) {
  SearchOptions opts;
  opts.budget = 1;
  const auto result = run_search(SearchSpace(), opts, scripted({0.3}));
  EXPECT_EQ(result.trials.size(), 1u);
  EXPECT_EQ(*result.best, 0u);
}

TEST(RunSearch, ConfigsAndSeedsIndependentOfWorkerCount) {
  SearchOptions opts;
  opts.budget = 6;
  opts.base_seed = 11;
  const auto serial = run_search(SearchSpace(), opts, scripted({1, 2, 3, 4, 5, 6}));
  opts.workers = 4;
  const auto parallel = run_search(SearchSpace(), opts, scripted({1, 2, 3, 4, 5, 6}));
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(serial.trials[i].config, parallel.trials[i].config);
    EXPECT_EQ(serial.trials[i].seed, parallel.trials[i].seed);
  }
}

TEST(RunSearch, RunnerExceptionPropagates) {
  SearchOptions opts;
  opts.budget = 2;
  TrialRunner bad = [](std::size_t, const ModelHyperparams&, std::uint64_t) -> TrialOutcome {
    throw upbench::DataError("broken runner");
  };
  EXPECT_THROW(run_search(SearchSpace(), opts, bad), upbench::DataError);
}

TEST(SelectBest, EmptyAndMissingValidation) {
  EXPECT_FALSE(select_best({}));
  std::vector<Trial> trials(2);
  trials[1].valid = upbench::metrics::EvalReport{};
  EXPECT_EQ(select_best(trials), std::optional<std::size_t>(1));
}

TEST(Trial, JsonRoundTrip) {
  Trial t;
  t.index = 3;
  t.config.rank = 64;
  t.seed = 99;
  t.trajectory = {0.1, 0.2};
  t.valid = upbench::metrics::EvalReport{};
  t.valid->qini = 0.25;
  t.status = TrainStatus::EarlyStopped;
  t.epochs_run = 7;
  t.best_epoch = 2;
  t.parameter_count = 1234;
  const nlohmann::json j = t;
  const auto back = j.get<Trial>();
  EXPECT_EQ(back.index, 3u);
  EXPECT_EQ(back.config, t.config);
  EXPECT_EQ(back.trajectory, t.trajectory);
  EXPECT_EQ(back.valid->qini, 0.25);
  EXPECT_FALSE(back.test);
  EXPECT_EQ(back.status, TrainStatus::EarlyStopped);
  EXPECT_EQ(back.parameter_count, 1234u);
}

TEST(TrainingRunner, SmallRealSearch) {
  upbench::synthetic::SyntheticSpec spec;
  spec.n = 1500;
  spec.k = 4;
  spec.seed = 2;
  const auto ds = upbench::synthetic::generate(spec);
  const auto parts = upbench::data::split(ds.size(), upbench::data::SplitPlan::three_way(0));
  const auto tr = ds.subset(parts.train), va = ds.subset(parts.valid), te = ds.subset(parts.test);
  SearchOptions opts;
  opts.budget = 2;
  opts.train.max_epochs = 3;
  const SearchSpace space({16}, {128}, {5e-3}, {1e-4}, {0.3, 0.6});
  const auto result = run_search(upbench::models::ModelKind::TARNet, {tr, va, te}, space, opts);
  ASSERT_TRUE(result.best);
  ASSERT_TRUE(result.best_model);
  const auto& best = *result.best_trial();
  EXPECT_TRUE(best.test.has_value());
  EXPECT_GT(best.parameter_count, 0u);
  EXPECT_LE(best.epochs_run, 3);
  EXPECT_EQ(best.trajectory.size(), static_cast<std::size_t>(best.epochs_run));
  const auto again = run_search(upbench::models::ModelKind::TARNet, {tr, va, te}, space, opts);
  EXPECT_EQ(again.trials[0].valid->qini, result.trials[0].valid->qini);
  EXPECT_EQ(again.trials[1].test->auuc, result.trials[1].test->auuc);
}

}  // namespace
