#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "upbench/data/dataset.hpp"
#include "upbench/numerics/adamw.hpp"
#include "upbench/numerics/graph.hpp"
#include "upbench/numerics/layers.hpp"
#include "upbench/numerics/rng.hpp"

namespace upbench::models {

enum class ModelKind {
  SLearner,
  TLearner,
  BNN,
  TARNet,
  CFRNet,
  CEVAE,
  GANITE,
  DragonNet,
  FlexTENet,
  SNet,
  EUEN,
  DESCN,
  EFIN,
};

inline constexpr std::array<ModelKind, 13> kAllModelKinds = {
    ModelKind::SLearner,  ModelKind::TLearner, ModelKind::BNN,       ModelKind::TARNet,
    ModelKind::CFRNet,    ModelKind::CEVAE,    ModelKind::GANITE,    ModelKind::DragonNet,
    ModelKind::FlexTENet, ModelKind::SNet,     ModelKind::EUEN,      ModelKind::DESCN,
    ModelKind::EFIN,
};

// How the treatment indicator reaches the network: only as a branch switch,
// or as an input feature.
enum class Family { Switch, Feature };

std::string_view to_string(ModelKind kind);
std::string_view to_string(Family family);
// Case-insensitive; accepts "S-Learner" style spellings. Throws ConfigError.
ModelKind parse_model_kind(std::string_view text);
Family family_of(ModelKind kind);

struct ModelHyperparams {
  int rank = 64;             // hidden units
  int batch_size = 512;
  double lr = 1e-3;
  double weight_decay = 1e-4;
  double alpha = 0.5;        // shared weight of every auxiliary loss
  int representation_depth = 2;
  int head_depth = 2;
  int single_depth = 3;      // hidden layers of single-network models
  nn::Activation activation = nn::Activation::Elu;
};

void to_json(nlohmann::json& j, const ModelHyperparams& hp);
void from_json(const nlohmann::json& j, ModelHyperparams& hp);
bool operator==(const ModelHyperparams& a, const ModelHyperparams& b);

// Dense view of a set of rows: covariates plus n x 1 treatment/outcome.
struct Batch {
  Tensor x;
  Tensor t;
  Tensor y;

  Index rows() const { return x.rows(); }
};

Batch make_batch(const data::UpliftDataset& ds, std::span<const std::size_t> indices);
Batch full_batch(const data::UpliftDataset& ds);

struct LossBreakdown {
  double total = 0.0;
  double factual = 0.0;
  std::vector<std::pair<std::string, double>> auxiliary;  // unweighted values
};

struct PotentialOutcomes {
  std::vector<double> control;  // Y_hat(0)
  std::vector<double> treated;  // Y_hat(1)
};

struct Telemetry {
  int epochs_run = 0;
  int best_epoch = 0;
  double seconds = 0.0;
};

// One scalar training objective and the parameters it updates. Most models
// have a single objective over all parameters; adversarial models have one
// per player.
struct Objective {
  std::string name;
  nn::Var loss;
  std::vector<nn::Parameter*> params;
};

// A two-head uplift predictor. Subclasses build one static graph in their
// constructor that holds the training loss and the two inference outputs.
//
// Graph inputs: "x" (n x k), "t" and "y" (n x 1) and, for models that sample,
// "noise".
class UpliftModel {
 public:
  UpliftModel(ModelKind kind, std::size_t features, const ModelHyperparams& hp,
              bool feature_norm, std::uint64_t seed);
  virtual ~UpliftModel() = default;
  UpliftModel(const UpliftModel&) = delete;
  UpliftModel& operator=(const UpliftModel&) = delete;

  ModelKind kind() const { return kind_; }
  Family family() const { return family_of(kind_); }
  std::size_t feature_count() const { return features_; }
  const ModelHyperparams& hyperparams() const { return hp_; }
  bool feature_norm() const { return norm_ != nullptr; }
  std::uint64_t seed() const { return seed_; }

  // Learnable scalars only; batch-norm running statistics are buffers.
  std::size_t parameter_count() const { return params_.scalar_count(); }
  nn::ParameterSet& parameters() { return params_; }
  const nn::ParameterSet& parameters() const { return params_; }
  nn::Graph& graph() { return graph_; }

  // Non-learnable state that a checkpoint must carry (name, tensor).
  std::vector<std::pair<std::string, Tensor*>> buffers();

  // Feed for a training-mode pass over `batch`; draws fresh noise for
  // sampling models.
  nn::Feed make_feed(const Batch& batch);

  // Training-mode forward pass (no parameter update).
  LossBreakdown loss(const Batch& batch);
  LossBreakdown loss(const nn::Feed& feed);

  virtual std::vector<Objective> objectives();

  // Forward + backward for every objective and one AdamW update each, in
  // order. Returns the breakdown from the last forward pass. Throws
  // NonFiniteError on a non-finite loss or gradient.
  virtual LossBreakdown train_step(const Batch& batch, nn::AdamW& optimizer);

  // Inference mode, deterministic, rows processed independently.
  PotentialOutcomes predict_potential(const Tensor& x);
  std::vector<double> predict_uplift(const Tensor& x);

  Telemetry telemetry;

 protected:
  // Width lists for the standard blocks.
  std::vector<Index> representation_widths(Index in) const;
  std::vector<Index> head_widths(Index in) const;
  std::vector<Index> single_widths(Index in) const;

  nn::Mlp mlp(const std::string& name, const std::vector<Index>& widths, bool activate_last = false);
  nn::Linear linear(const std::string& name, Index in, Index out);
  nn::Parameter& weight(const std::string& name, Index rows, Index cols);

  // Raw covariate entry point: the "x" input, batch-normalized when the
  // feature-normalization toggle is on.
  nn::Var covariates() const { return covariates_; }
  nn::Var treatment() const { return t_; }
  nn::Var outcome() const { return y_; }
  nn::Var raw_x() const { return x_; }

  // Linear-kernel squared MMD between representation rows of the two groups.
  nn::Var linear_mmd(nn::Var representation);

  // Declares a noise input of `width` columns drawn N(0, 1) per training pass.
  nn::Var noise_input(Index width);

  // Registers the graph outputs. Total = factual + alpha * sum(auxiliary)
  // unless `total` is given.
  void finalize(nn::Var factual, std::vector<std::pair<std::string, nn::Var>> auxiliary,
                nn::Var control_prob, nn::Var treated_prob, nn::Var total = {});

  double alpha() const { return hp_.alpha; }
  Index rank() const { return hp_.rank; }
  Rng& init_rng() { return init_rng_; }

  nn::Graph graph_;
  nn::ParameterSet params_;
  nn::Var total_;

 private:
  ModelKind kind_;
  std::size_t features_;
  ModelHyperparams hp_;
  std::uint64_t seed_;
  Rng init_rng_;
  Rng noise_rng_;
  std::unique_ptr<nn::BatchNormLayer> norm_;
  nn::Var x_, t_, y_, covariates_, noise_;
  Index noise_width_ = 0;
  nn::Var factual_;
  std::vector<std::pair<std::string, nn::Var>> auxiliary_;
  nn::Var control_prob_, treated_prob_;
};

// Builds an untrained model with seeded initialization. Throws ConfigError
// for k < 1 or invalid hyperparameters.
std::unique_ptr<UpliftModel> build_model(ModelKind kind, std::size_t features,
                                         const ModelHyperparams& hp, bool feature_norm,
                                         std::uint64_t seed);

}  // namespace upbench::models
