#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "upbench/data/dataset.hpp"
#include "upbench/models/model.hpp"

namespace upbench::models {

enum class StoppingMetric { ValidQini, ValidLoss };
enum class TrainStatus { Completed, EarlyStopped, Diverged };

std::string_view to_string(StoppingMetric metric);
StoppingMetric parse_stopping_metric(std::string_view text);
std::string_view to_string(TrainStatus status);
TrainStatus parse_train_status(std::string_view text);

struct TrainOptions {
  int max_epochs = 20;
  int patience = 5;
  StoppingMetric metric = StoppingMetric::ValidQini;
  std::uint64_t shuffle_seed = 0;
};

// Tracks the best score seen so far (higher is better). Only a strictly
// greater score counts as an improvement.
class EarlyStopping {
 public:
  explicit EarlyStopping(int patience);

  // Records the score of the next epoch; returns true once `patience`
  // consecutive epochs have passed without improvement.
  bool update(double score);

  int epochs_seen() const { return epochs_; }
  int best_epoch() const { return best_epoch_; }    // 1-based, 0 before any epoch
  double best_score() const { return best_score_; }
  bool last_improved() const { return last_improved_; }

 private:
  int patience_;
  int epochs_ = 0;
  int best_epoch_ = 0;
  int stale_ = 0;
  double best_score_ = 0.0;
  bool last_improved_ = false;
};

struct TrainResult {
  TrainStatus status = TrainStatus::Completed;
  std::vector<double> valid_scores;  // one per epoch
  std::vector<double> train_losses;  // mean batch total per epoch
  int epochs_run = 0;
  int best_epoch = 0;
  double best_score = 0.0;
  double seconds = 0.0;
  std::string message;
};

// Per-epoch validation score, higher is better.
using EpochScorer = std::function<double(UpliftModel&, const data::UpliftDataset&)>;

// ValidQini: Qini coefficient of predicted uplift. ValidLoss: negated MSE of
// the factual prediction.
double validation_score(UpliftModel& model, const data::UpliftDataset& valid,
                        StoppingMetric metric);

// Mini-batch AdamW over `train` with early stopping on `valid`. The
// parameters (and batch-norm statistics) of the best epoch are restored
// before returning. A non-finite loss or gradient ends training with status
// Diverged; no exception escapes for that case.
TrainResult train(UpliftModel& model, const data::UpliftDataset& train,
                  const data::UpliftDataset& valid, const TrainOptions& options);
TrainResult train(UpliftModel& model, const data::UpliftDataset& train,
                  const data::UpliftDataset& valid, const TrainOptions& options,
                  const EpochScorer& scorer);

}  // namespace upbench::models
