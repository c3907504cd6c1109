#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "upbench/data/dataset.hpp"
#include "upbench/metrics/uplift_curve.hpp"
#include "upbench/models/model.hpp"
#include "upbench/models/train.hpp"

namespace upbench::tuning {

// Candidate values per hyperparameter axis.
class SearchSpace {
 public:
  // The standard grids: 3 ranks, 4 batch sizes, 5 learning rates, 4 weight
  // decays and 9 auxiliary weights.
  SearchSpace();
  SearchSpace(std::vector<int> rank, std::vector<int> batch_size, std::vector<double> lr,
              std::vector<double> weight_decay, std::vector<double> alpha);

  const std::vector<int>& rank() const { return rank_; }
  const std::vector<int>& batch_size() const { return batch_size_; }
  const std::vector<double>& lr() const { return lr_; }
  const std::vector<double>& weight_decay() const { return weight_decay_; }
  const std::vector<double>& alpha() const { return alpha_; }

  std::size_t cardinality() const;

  // Configuration at a lexicographic grid position over
  // (rank, batch size, lr, weight decay, alpha), alpha varying fastest. The
  // remaining fields are copied from `base`.
  models::ModelHyperparams grid_point(std::size_t index,
                                      const models::ModelHyperparams& base = {}) const;

 private:
  std::vector<int> rank_;
  std::vector<int> batch_size_;
  std::vector<double> lr_;
  std::vector<double> weight_decay_;
  std::vector<double> alpha_;
};

void to_json(nlohmann::json& j, const SearchSpace& space);
SearchSpace search_space_from_json(const nlohmann::json& j);

enum class SearchStrategy { Random, Grid };
std::string_view to_string(SearchStrategy strategy);
SearchStrategy parse_search_strategy(std::string_view text);

// Produces the configuration sequence of a search. Random draws every axis
// uniformly and independently from a seeded stream; Grid walks the grid in
// lexicographic order and wraps around. Fields outside the space (depths,
// activation) come from `base`.
class ConfigSampler {
 public:
  ConfigSampler(SearchSpace space, std::uint64_t seed, SearchStrategy strategy,
                models::ModelHyperparams base = {});

  models::ModelHyperparams next();

 private:
  SearchSpace space_;
  SearchStrategy strategy_;
  models::ModelHyperparams base_;
  Rng rng_;
  std::size_t position_ = 0;
};

// First configuration of a fresh sampler.
models::ModelHyperparams sample_config(const SearchSpace& space, std::uint64_t sampler_seed,
                                       SearchStrategy strategy);

struct Trial {
  std::size_t index = 0;
  models::ModelHyperparams config;
  std::uint64_t seed = 0;
  std::vector<double> trajectory;  // validation score per epoch
  std::optional<metrics::EvalReport> valid;
  std::optional<metrics::EvalReport> test;
  models::TrainStatus status = models::TrainStatus::Completed;
  double seconds = 0.0;
  int epochs_run = 0;
  int best_epoch = 0;
  std::size_t parameter_count = 0;
  std::string message;

  bool diverged() const { return status == models::TrainStatus::Diverged; }
};

void to_json(nlohmann::json& j, const Trial& trial);
void from_json(const nlohmann::json& j, Trial& trial);

struct TrialOutcome {
  Trial trial;
  std::unique_ptr<models::UpliftModel> model;  // may be null
};

// Trains and evaluates one configuration. Must fill trial.valid unless the
// trial diverged.
using TrialRunner = std::function<TrialOutcome(std::size_t index, const models::ModelHyperparams&,
                                               std::uint64_t seed)>;

struct SearchOptions {
  std::size_t budget = 30;
  SearchStrategy strategy = SearchStrategy::Random;
  std::uint64_t base_seed = 0;
  std::size_t workers = 1;
  models::TrainOptions train;
  bool feature_norm = false;
  double k_percent = 30.0;
  models::ModelHyperparams architecture;  // depths and activation
};

struct SearchSplits {
  const data::UpliftDataset& train;
  const data::UpliftDataset& valid;
  const data::UpliftDataset& test;
};

struct SearchResult {
  std::vector<Trial> trials;                   // by trial index
  std::optional<std::size_t> best;             // index into trials
  std::unique_ptr<models::UpliftModel> best_model;
  std::string failure;                         // set when no trial can be selected

  const Trial* best_trial() const { return best ? &trials[*best] : nullptr; }
};

// Highest validation Qini among non-diverged trials; ties go to the lower
// index. Empty when every trial diverged.
std::optional<std::size_t> select_best(const std::vector<Trial>& trials);

// Runs `options.budget` trials on a pool of `options.workers` threads.
SearchResult run_search(const SearchSpace& space, const SearchOptions& options,
                        const TrialRunner& runner);

// Trial runner that builds `kind`, trains it with early stopping and
// evaluates the restored best epoch on the validation and test splits.
TrialRunner training_runner(models::ModelKind kind, const SearchSplits& splits,
                            const SearchOptions& options);

SearchResult run_search(models::ModelKind kind, const SearchSplits& splits,
                        const SearchSpace& space, const SearchOptions& options);

}  // namespace upbench::tuning
