#include "upbench/tuning/search.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include <nlohmann/json.hpp>

#include "upbench/error.hpp"

namespace upbench::tuning {

namespace {

template <typename T>
void require_axis(const std::vector<T>& axis, const char* name) {
  if (axis.empty()) throw ConfigError(std::string("search axis '") + name + "' is empty");
}

template <typename T, typename Pred>
void require_values(const std::vector<T>& axis, const char* name, Pred ok) {
  for (const T& v : axis) {
    if (!ok(v)) throw ConfigError(std::string("search axis '") + name + "' has an invalid value");
  }
}

template <typename T>
const T& pick(const std::vector<T>& axis, Rng& rng) {
  return axis[static_cast<std::size_t>(rng.below(axis.size()))];
}

}  // namespace

SearchSpace::SearchSpace()
    : SearchSpace({32, 64, 128}, {256, 512, 1024, 2048}, {1e-4, 5e-4, 1e-3, 5e-3, 1e-2},
                  {1e-5, 1e-4, 1e-3, 1e-2}, {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}) {}

SearchSpace::SearchSpace(std::vector<int> rank, std::vector<int> batch_size,
                         std::vector<double> lr, std::vector<double> weight_decay,
                         std::vector<double> alpha)
    : rank_(std::move(rank)),
      batch_size_(std::move(batch_size)),
      lr_(std::move(lr)),
      weight_decay_(std::move(weight_decay)),
      alpha_(std::move(alpha)) {
  require_axis(rank_, "rank");
  require_axis(batch_size_, "batch_size");
  require_axis(lr_, "lr");
  require_axis(weight_decay_, "weight_decay");
  require_axis(alpha_, "alpha");
  require_values(rank_, "rank", [](int v) { return v >= 1; });
  require_values(batch_size_, "batch_size", [](int v) { return v >= 1; });
  require_values(lr_, "lr", [](double v) { return v > 0.0 && std::isfinite(v); });
  require_values(weight_decay_, "weight_decay", [](double v) { return v >= 0.0 && std::isfinite(v); });
  require_values(alpha_, "alpha", [](double v) { return v >= 0.0 && std::isfinite(v); });
}

std::size_t SearchSpace::cardinality() const {
  return rank_.size() * batch_size_.size() * lr_.size() * weight_decay_.size() * alpha_.size();
}

models::ModelHyperparams SearchSpace::grid_point(std::size_t index,
                                                 const models::ModelHyperparams& base) const {
  if (index >= cardinality()) throw ConfigError("grid index out of range");
  models::ModelHyperparams hp = base;
  hp.alpha = alpha_[index % alpha_.size()];
  index /= alpha_.size();
  hp.weight_decay = weight_decay_[index % weight_decay_.size()];
  index /= weight_decay_.size();
  hp.lr = lr_[index % lr_.size()];
  index /= lr_.size();
  hp.batch_size = batch_size_[index % batch_size_.size()];
  index /= batch_size_.size();
  hp.rank = rank_[index];
  return hp;
}

void to_json(nlohmann::json& j, const SearchSpace& space) {
  j = nlohmann::json{{"rank", space.rank()},
                     {"batch_size", space.batch_size()},
                     {"lr", space.lr()},
                     {"weight_decay", space.weight_decay()},
                     {"alpha", space.alpha()}};
}

SearchSpace search_space_from_json(const nlohmann::json& j) {
  const SearchSpace defaults;
  return SearchSpace(j.value("rank", defaults.rank()), j.value("batch_size", defaults.batch_size()),
                     j.value("lr", defaults.lr()), j.value("weight_decay", defaults.weight_decay()),
                     j.value("alpha", defaults.alpha()));
}

std::string_view to_string(SearchStrategy strategy) {
  return strategy == SearchStrategy::Random ? "random" : "grid";
}

SearchStrategy parse_search_strategy(std::string_view text) {
  if (text == "random") return SearchStrategy::Random;
  if (text == "grid") return SearchStrategy::Grid;
  throw ConfigError("unknown search strategy '" + std::string(text) + "'");
}

ConfigSampler::ConfigSampler(SearchSpace space, std::uint64_t seed, SearchStrategy strategy,
                             models::ModelHyperparams base)
    : space_(std::move(space)),
      strategy_(strategy),
      base_(base),
      rng_(Rng::derive(seed, 0x5ea4c4)) {}

models::ModelHyperparams ConfigSampler::next() {
  if (strategy_ == SearchStrategy::Grid) {
    return space_.grid_point(position_++ % space_.cardinality(), base_);
  }
  models::ModelHyperparams hp = base_;
  hp.rank = pick(space_.rank(), rng_);
  hp.batch_size = pick(space_.batch_size(), rng_);
  hp.lr = pick(space_.lr(), rng_);
  hp.weight_decay = pick(space_.weight_decay(), rng_);
  hp.alpha = pick(space_.alpha(), rng_);
  ++position_;
  return hp;
}

models::ModelHyperparams sample_config(const SearchSpace& space, std::uint64_t sampler_seed,
                                       SearchStrategy strategy) {
  return ConfigSampler(space, sampler_seed, strategy).next();
}

void to_json(nlohmann::json& j, const Trial& trial) {
  j = nlohmann::json{{"index", trial.index},
                     {"config", trial.config},
                     {"seed", trial.seed},
                     {"trajectory", trial.trajectory},
                     {"status", models::to_string(trial.status)},
                     {"seconds", trial.seconds},
                     {"epochs_run", trial.epochs_run},
                     {"best_epoch", trial.best_epoch},
                     {"parameter_count", trial.parameter_count},
                     {"valid", nullptr},
                     {"test", nullptr}};
  if (trial.valid) j["valid"] = *trial.valid;
  if (trial.test) j["test"] = *trial.test;
  if (!trial.message.empty()) j["message"] = trial.message;
}

void from_json(const nlohmann::json& j, Trial& trial) {
  trial = Trial{};
  trial.index = j.at("index").get<std::size_t>();
  trial.config = j.at("config").get<models::ModelHyperparams>();
  trial.seed = j.at("seed").get<std::uint64_t>();
  trial.trajectory = j.at("trajectory").get<std::vector<double>>();
  trial.status = models::parse_train_status(j.at("status").get<std::string>());
  trial.seconds = j.value("seconds", 0.0);
  trial.epochs_run = j.value("epochs_run", 0);
  trial.best_epoch = j.value("best_epoch", 0);
  trial.parameter_count = j.value("parameter_count", std::size_t{0});
  if (j.contains("valid") && !j["valid"].is_null()) trial.valid = j["valid"].get<metrics::EvalReport>();
  if (j.contains("test") && !j["test"].is_null()) trial.test = j["test"].get<metrics::EvalReport>();
  trial.message = j.value("message", std::string());
}

std::optional<std::size_t> select_best(const std::vector<Trial>& trials) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < trials.size(); ++i) {
    const Trial& t = trials[i];
    if (t.diverged() || !t.valid) continue;
    if (!best || t.valid->qini > trials[*best].valid->qini) best = i;
  }
  return best;
}

SearchResult run_search(const SearchSpace& space, const SearchOptions& options,
                        const TrialRunner& runner) {
  if (options.budget < 1) throw ConfigError("search budget must be at least 1");

  // Configurations are drawn up front so they do not depend on scheduling.
  ConfigSampler sampler(space, options.base_seed, options.strategy, options.architecture);
  std::vector<models::ModelHyperparams> configs;
  for (std::size_t i = 0; i < options.budget; ++i) configs.push_back(sampler.next());

  std::vector<TrialOutcome> outcomes(options.budget);
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;

  auto work = [&] {
    for (std::size_t i = next++; i < options.budget; i = next++) {
      try {
        outcomes[i] = runner(i, configs[i], Rng::derive(options.base_seed, i));
        outcomes[i].trial.index = i;
        outcomes[i].trial.config = configs[i];
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min(options.workers, options.budget));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (error) std::rethrow_exception(error);

  SearchResult result;
  for (auto& outcome : outcomes) result.trials.push_back(outcome.trial);
  result.best = select_best(result.trials);
  if (result.best) {
    result.best_model = std::move(outcomes[*result.best].model);
  } else {
    result.failure = "all " + std::to_string(options.budget) + " trials diverged";
  }
  return result;
}

TrialRunner training_runner(models::ModelKind kind, const SearchSplits& splits,
                            const SearchOptions& options) {
  return [kind, &splits, options](std::size_t index, const models::ModelHyperparams& hp,
                                  std::uint64_t seed) {
    TrialOutcome out;
    out.trial.index = index;
    out.trial.config = hp;
    out.trial.seed = seed;
    auto model = models::build_model(kind, splits.train.feature_count(), hp, options.feature_norm,
                                     Rng::derive(seed, 0x30de1));
    models::TrainOptions train_options = options.train;
    train_options.shuffle_seed = Rng::derive(seed, 0x5bff1e);
    const models::TrainResult tr = models::train(*model, splits.train, splits.valid, train_options);

    out.trial.status = tr.status;
    out.trial.trajectory = tr.valid_scores;
    out.trial.seconds = tr.seconds;
    out.trial.epochs_run = tr.epochs_run;
    out.trial.best_epoch = tr.best_epoch;
    out.trial.parameter_count = model->parameter_count();
    out.trial.message = tr.message;
    if (tr.status == models::TrainStatus::Diverged) return out;

    const std::string name(models::to_string(kind));
    std::string non_finite;
    auto evaluate_split = [&](const data::UpliftDataset& ds, const char* split)
        -> std::optional<metrics::EvalReport> {
      const std::vector<double> scores = model->predict_uplift(ds.x);
      for (double s : scores) {
        if (!std::isfinite(s)) {
          non_finite = std::string("non-finite uplift on ") + split + " split";
          return std::nullopt;
        }
      }
      metrics::EvalReport r = metrics::evaluate(scores, ds.t, ds.y, options.k_percent);
      r.split = split;
      r.model = name;
      r.seed = seed;
      return r;
    };
    out.trial.valid = evaluate_split(splits.valid, "valid");
    if (out.trial.valid) out.trial.test = evaluate_split(splits.test, "test");
    if (!non_finite.empty()) {
      out.trial.status = models::TrainStatus::Diverged;
      out.trial.valid.reset();
      out.trial.test.reset();
      out.trial.message = non_finite;
      return out;
    }
    out.model = std::move(model);
    return out;
  };
}

SearchResult run_search(models::ModelKind kind, const SearchSplits& splits,
                        const SearchSpace& space, const SearchOptions& options) {
  return run_search(space, options, training_runner(kind, splits, options));
}

}  // namespace upbench::tuning
