#include "upbench/models/train.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

#include "upbench/data/split.hpp"
#include "upbench/error.hpp"
#include "upbench/metrics/uplift_curve.hpp"
#include "upbench/numerics/adamw.hpp"

namespace upbench::models {

std::string_view to_string(StoppingMetric metric) {
  return metric == StoppingMetric::ValidQini ? "valid-qini" : "valid-loss";
}

StoppingMetric parse_stopping_metric(std::string_view text) {
  if (text == "valid-qini") return StoppingMetric::ValidQini;
  if (text == "valid-loss") return StoppingMetric::ValidLoss;
  throw ConfigError("unknown stopping metric '" + std::string(text) + "'");
}

std::string_view to_string(TrainStatus status) {
  switch (status) {
    case TrainStatus::Completed: return "completed";
    case TrainStatus::EarlyStopped: return "early-stopped";
    case TrainStatus::Diverged: return "diverged";
  }
  return "?";
}

TrainStatus parse_train_status(std::string_view text) {
  if (text == "completed") return TrainStatus::Completed;
  if (text == "early-stopped") return TrainStatus::EarlyStopped;
  if (text == "diverged") return TrainStatus::Diverged;
  throw ConfigError("unknown train status '" + std::string(text) + "'");
}

EarlyStopping::EarlyStopping(int patience) : patience_(patience) {
  if (patience < 1) throw ConfigError("patience must be at least 1");
}

bool EarlyStopping::update(double score) {
  ++epochs_;
  last_improved_ = best_epoch_ == 0 || score > best_score_;
  if (last_improved_) {
    best_score_ = score;
    best_epoch_ = epochs_;
    stale_ = 0;
  } else {
    ++stale_;
  }
  return stale_ >= patience_;
}

double validation_score(UpliftModel& model, const data::UpliftDataset& valid,
                        StoppingMetric metric) {
  if (metric == StoppingMetric::ValidQini) {
    const std::vector<double> uplift = model.predict_uplift(valid.x);
    for (double u : uplift) {
      if (!std::isfinite(u)) throw NonFiniteError("non-finite uplift prediction");
    }
    const auto curve = metrics::rank_and_accumulate(uplift, valid.t, valid.y);
    return metrics::qini_coefficient(curve);
  }
  const PotentialOutcomes po = model.predict_potential(valid.x);
  double sse = 0.0;
  for (std::size_t i = 0; i < valid.size(); ++i) {
    const double pred = valid.t[i] ? po.treated[i] : po.control[i];
    const double err = pred - valid.y[i];
    sse += err * err;
  }
  return -sse / static_cast<double>(valid.size());
}

TrainResult train(UpliftModel& model, const data::UpliftDataset& train,
                  const data::UpliftDataset& valid, const TrainOptions& options) {
  const StoppingMetric metric = options.metric;
  return models::train(model, train, valid, options,
                       [metric](UpliftModel& m, const data::UpliftDataset& v) {
                         return validation_score(m, v, metric);
                       });
}

namespace {

struct Snapshot {
  std::vector<Tensor> params;
  std::vector<Tensor> buffers;
};

Snapshot take_snapshot(UpliftModel& model) {
  Snapshot s{model.parameters().snapshot(), {}};
  for (auto& [name, tensor] : model.buffers()) s.buffers.push_back(*tensor);
  return s;
}

void restore_snapshot(UpliftModel& model, const Snapshot& s) {
  model.parameters().restore(s.params);
  auto buffers = model.buffers();
  for (std::size_t i = 0; i < buffers.size(); ++i) *buffers[i].second = s.buffers[i];
}

}  // namespace

TrainResult train(UpliftModel& model, const data::UpliftDataset& train,
                  const data::UpliftDataset& valid, const TrainOptions& options,
                  const EpochScorer& scorer) {
  if (options.max_epochs < 0) throw ConfigError("max_epochs must be non-negative");
  if (train.size() == 0) throw DataError("empty training set");
  if (valid.size() == 0) throw DataError("empty validation set");

  const auto start = std::chrono::steady_clock::now();
  const ModelHyperparams& hp = model.hyperparams();
  nn::AdamW optimizer(nn::AdamWOptions{.lr = hp.lr, .weight_decay = hp.weight_decay});
  EarlyStopping stopper(options.patience);
  TrainResult result;
  Snapshot best;

  std::vector<std::size_t> all(train.size());
  std::iota(all.begin(), all.end(), std::size_t{0});

  for (int epoch = 1; epoch <= options.max_epochs; ++epoch) {
    const auto batches = data::make_batches(all, static_cast<std::size_t>(hp.batch_size),
                                            Rng::derive(options.shuffle_seed, epoch));
    double loss_sum = 0.0;
    std::size_t steps = 0;
    try {
      for (const auto& indices : batches) {
        // Batch statistics need two rows; a trailing singleton is dropped.
        if (indices.size() < 2 && model.feature_norm()) continue;
        const LossBreakdown lb = model.train_step(make_batch(train, indices), optimizer);
        if (!std::isfinite(lb.total)) throw NonFiniteError("non-finite training loss");
        loss_sum += lb.total;
        ++steps;
      }
    } catch (const NonFiniteError& e) {
      result.status = TrainStatus::Diverged;
      result.message = e.what();
      result.epochs_run = epoch;
      break;
    }
    result.epochs_run = epoch;
    result.train_losses.push_back(steps ? loss_sum / static_cast<double>(steps) : 0.0);

    double score = 0.0;
    try {
      score = scorer(model, valid);
    } catch (const NonFiniteError& e) {
      result.status = TrainStatus::Diverged;
      result.message = e.what();
      break;
    }
    if (!std::isfinite(score)) {
      result.status = TrainStatus::Diverged;
      result.message = "non-finite validation score";
      break;
    }
    result.valid_scores.push_back(score);
    const bool stop = stopper.update(score);
    if (stopper.last_improved()) best = take_snapshot(model);
    if (stop && epoch < options.max_epochs) {
      result.status = TrainStatus::EarlyStopped;
      break;
    }
  }

  if (result.status != TrainStatus::Diverged && stopper.best_epoch() > 0) {
    restore_snapshot(model, best);
  }
  result.best_epoch = stopper.best_epoch();
  result.best_score = stopper.best_score();
  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  model.telemetry.epochs_run = result.epochs_run;
  model.telemetry.best_epoch = result.best_epoch;
  model.telemetry.seconds = result.seconds;
  return result;
}

}  // namespace upbench::models
