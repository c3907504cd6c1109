#include "upbench/models/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include <nlohmann/json.hpp>

#include "upbench/error.hpp"

namespace upbench::models {

namespace {

constexpr Index kPredictChunk = 4096;

std::string normalized_name(std::string_view text) {
  std::string out;
  for (char c : text) {
    if (c == '-' || c == '_' || c == ' ') continue;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

}  // namespace

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::SLearner: return "S-Learner";
    case ModelKind::TLearner: return "T-Learner";
    case ModelKind::BNN: return "BNN";
    case ModelKind::TARNet: return "TARNet";
    case ModelKind::CFRNet: return "CFRNet";
    case ModelKind::CEVAE: return "CEVAE";
    case ModelKind::GANITE: return "GANITE";
    case ModelKind::DragonNet: return "DragonNet";
    case ModelKind::FlexTENet: return "FlexTENet";
    case ModelKind::SNet: return "SNet";
    case ModelKind::EUEN: return "EUEN";
    case ModelKind::DESCN: return "DESCN";
    case ModelKind::EFIN: return "EFIN";
  }
  return "?";
}

std::string_view to_string(Family family) {
  return family == Family::Switch ? "switch" : "feature";
}

ModelKind parse_model_kind(std::string_view text) {
  const std::string key = normalized_name(text);
  for (ModelKind kind : kAllModelKinds) {
    if (normalized_name(to_string(kind)) == key) return kind;
  }
  throw ConfigError("unknown model kind '" + std::string(text) + "'");
}

Family family_of(ModelKind kind) {
  switch (kind) {
    case ModelKind::TLearner:
    case ModelKind::TARNet:
    case ModelKind::CFRNet:
    case ModelKind::FlexTENet:
    case ModelKind::EUEN:
      return Family::Switch;
    default:
      return Family::Feature;
  }
}

void to_json(nlohmann::json& j, const ModelHyperparams& hp) {
  j = nlohmann::json{{"rank", hp.rank},
                     {"batch_size", hp.batch_size},
                     {"lr", hp.lr},
                     {"weight_decay", hp.weight_decay},
                     {"alpha", hp.alpha},
                     {"representation_depth", hp.representation_depth},
                     {"head_depth", hp.head_depth},
                     {"single_depth", hp.single_depth},
                     {"activation", hp.activation == nn::Activation::Elu ? "elu" : "tanh"}};
}

void from_json(const nlohmann::json& j, ModelHyperparams& hp) {
  hp = ModelHyperparams{};
  hp.rank = j.value("rank", hp.rank);
  hp.batch_size = j.value("batch_size", hp.batch_size);
  hp.lr = j.value("lr", hp.lr);
  hp.weight_decay = j.value("weight_decay", hp.weight_decay);
  hp.alpha = j.value("alpha", hp.alpha);
  hp.representation_depth = j.value("representation_depth", hp.representation_depth);
  hp.head_depth = j.value("head_depth", hp.head_depth);
  hp.single_depth = j.value("single_depth", hp.single_depth);
  const std::string act = j.value("activation", std::string("elu"));
  if (act == "elu") {
    hp.activation = nn::Activation::Elu;
  } else if (act == "tanh") {
    hp.activation = nn::Activation::Tanh;
  } else {
    throw ConfigError("unknown activation '" + act + "'");
  }
}

bool operator==(const ModelHyperparams& a, const ModelHyperparams& b) {
  return a.rank == b.rank && a.batch_size == b.batch_size && a.lr == b.lr &&
         a.weight_decay == b.weight_decay && a.alpha == b.alpha &&
         a.representation_depth == b.representation_depth && a.head_depth == b.head_depth &&
         a.single_depth == b.single_depth && a.activation == b.activation;
}

Batch make_batch(const data::UpliftDataset& ds, std::span<const std::size_t> indices) {
  return Batch{data::gather_rows(ds.x, indices), data::gather_column(ds.t, indices),
               data::gather_column(ds.y, indices)};
}

Batch full_batch(const data::UpliftDataset& ds) {
  return Batch{ds.x, data::treatment_column(ds), data::outcome_column(ds)};
}

UpliftModel::UpliftModel(ModelKind kind, std::size_t features, const ModelHyperparams& hp,
                         bool feature_norm, std::uint64_t seed)
    : kind_(kind),
      features_(features),
      hp_(hp),
      seed_(seed),
      init_rng_(Rng::derive(seed, 1)),
      noise_rng_(Rng::derive(seed, 2)) {
  if (features < 1) throw ConfigError("model needs at least one feature");
  if (hp.rank < 1) throw ConfigError("rank must be positive");
  if (hp.batch_size < 1) throw ConfigError("batch size must be positive");
  if (!(hp.lr > 0.0) || !std::isfinite(hp.lr)) throw ConfigError("learning rate must be positive");
  if (hp.weight_decay < 0.0) throw ConfigError("weight decay must be non-negative");
  if (hp.alpha < 0.0) throw ConfigError("alpha must be non-negative");
  if (hp.representation_depth < 1 || hp.head_depth < 1 || hp.single_depth < 1) {
    throw ConfigError("network depths must be positive");
  }

  x_ = graph_.input("x");
  t_ = graph_.input("t");
  y_ = graph_.input("y");
  if (feature_norm) {
    norm_ = std::make_unique<nn::BatchNormLayer>(params_, "input_norm",
                                                 static_cast<Index>(features));
    covariates_ = graph_.batchnorm(*norm_, x_);
  } else {
    covariates_ = x_;
  }
}

std::vector<std::pair<std::string, Tensor*>> UpliftModel::buffers() {
  std::vector<std::pair<std::string, Tensor*>> out;
  if (norm_) {
    out.emplace_back(norm_->name() + ".running_mean", &norm_->running_mean());
    out.emplace_back(norm_->name() + ".running_var", &norm_->running_var());
  }
  return out;
}

std::vector<Index> UpliftModel::representation_widths(Index in) const {
  std::vector<Index> w{in};
  for (int i = 0; i < hp_.representation_depth; ++i) w.push_back(hp_.rank);
  return w;
}

std::vector<Index> UpliftModel::head_widths(Index in) const {
  std::vector<Index> w{in};
  for (int i = 0; i + 1 < hp_.head_depth; ++i) w.push_back(hp_.rank);
  w.push_back(1);
  return w;
}

std::vector<Index> UpliftModel::single_widths(Index in) const {
  std::vector<Index> w{in};
  for (int i = 0; i < hp_.single_depth; ++i) w.push_back(hp_.rank);
  w.push_back(1);
  return w;
}

nn::Mlp UpliftModel::mlp(const std::string& name, const std::vector<Index>& widths,
                         bool activate_last) {
  return nn::Mlp(params_, name, widths, init_rng_, hp_.activation, activate_last);
}

nn::Linear UpliftModel::linear(const std::string& name, Index in, Index out) {
  return nn::Linear(params_, name, in, out, init_rng_);
}

nn::Parameter& UpliftModel::weight(const std::string& name, Index rows, Index cols) {
  return params_.uniform(name, rows, cols, 1.0 / std::sqrt(static_cast<double>(rows)), init_rng_);
}

nn::Var UpliftModel::linear_mmd(nn::Var representation) {
  nn::Var treated_mean = graph_.group_mean(representation, t_);
  nn::Var control_mean = graph_.group_mean(representation, graph_.one_minus(t_));
  // 1 when both groups have rows, else 0 (t is binary, so the sums are counts).
  nn::Var both_present = graph_.mul(graph_.clip(graph_.sum(t_), 0.0, 1.0),
                                    graph_.clip(graph_.sum(graph_.one_minus(t_)), 0.0, 1.0));
  return graph_.mul(graph_.sum(graph_.square(graph_.sub(treated_mean, control_mean))), both_present);
}

nn::Var UpliftModel::noise_input(Index width) {
  noise_width_ = width;
  noise_ = graph_.input("noise");
  return noise_;
}

void UpliftModel::finalize(nn::Var factual, std::vector<std::pair<std::string, nn::Var>> auxiliary,
                           nn::Var control_prob, nn::Var treated_prob, nn::Var total) {
  factual_ = factual;
  auxiliary_ = std::move(auxiliary);
  control_prob_ = control_prob;
  treated_prob_ = treated_prob;
  if (total.valid()) {
    total_ = total;
    return;
  }
  nn::Var sum = factual;
  if (!auxiliary_.empty()) {
    nn::Var aux = auxiliary_.front().second;
    for (std::size_t i = 1; i < auxiliary_.size(); ++i) aux = graph_.add(aux, auxiliary_[i].second);
    sum = graph_.add(sum, graph_.scale(aux, hp_.alpha));
  }
  total_ = sum;
}

nn::Feed UpliftModel::make_feed(const Batch& batch) {
  if (batch.x.cols() != static_cast<Index>(features_)) {
    throw ShapeError("model expects " + std::to_string(features_) + " features, got " +
                     std::to_string(batch.x.cols()));
  }
  nn::Feed feed;
  feed.emplace("x", batch.x);
  feed.emplace("t", batch.t);
  feed.emplace("y", batch.y);
  if (noise_.valid()) {
    Tensor noise(batch.rows(), noise_width_);
    for (Index i = 0; i < noise.size(); ++i) noise.data()[i] = noise_rng_.normal();
    feed.emplace("noise", std::move(noise));
  }
  return feed;
}

LossBreakdown UpliftModel::loss(const Batch& batch) { return loss(make_feed(batch)); }

LossBreakdown UpliftModel::loss(const nn::Feed& feed) {
  std::vector<nn::Var> targets{total_, factual_};
  for (const auto& [name, var] : auxiliary_) targets.push_back(var);
  graph_.forward(feed, targets, nn::Mode::Train);
  LossBreakdown out;
  out.total = graph_.scalar(total_);
  out.factual = graph_.scalar(factual_);
  for (const auto& [name, var] : auxiliary_) out.auxiliary.emplace_back(name, graph_.scalar(var));
  return out;
}

std::vector<Objective> UpliftModel::objectives() {
  return {Objective{"total", total_, params_.all()}};
}

LossBreakdown UpliftModel::train_step(const Batch& batch, nn::AdamW& optimizer) {
  const nn::Feed feed = make_feed(batch);
  LossBreakdown last;
  for (const Objective& objective : objectives()) {
    last = loss(feed);
    const double value = graph_.scalar(objective.loss);
    if (!std::isfinite(value)) throw NonFiniteError("non-finite loss in objective " + objective.name);
    graph_.backward(objective.loss);
    optimizer.step(objective.params);
  }
  return last;
}

PotentialOutcomes UpliftModel::predict_potential(const Tensor& x) {
  if (x.cols() != static_cast<Index>(features_)) {
    throw ShapeError("model expects " + std::to_string(features_) + " features, got " +
                     std::to_string(x.cols()));
  }
  PotentialOutcomes out;
  out.control.reserve(static_cast<std::size_t>(x.rows()));
  out.treated.reserve(static_cast<std::size_t>(x.rows()));
  const std::vector<nn::Var> targets{control_prob_, treated_prob_};
  for (Index begin = 0; begin < x.rows(); begin += kPredictChunk) {
    const Index count = std::min(kPredictChunk, x.rows() - begin);
    nn::Feed feed;
    feed.emplace("x", x.middleRows(begin, count));
    graph_.forward(feed, targets, nn::Mode::Infer);
    const Tensor& c = graph_.value(control_prob_);
    const Tensor& t = graph_.value(treated_prob_);
    for (Index i = 0; i < count; ++i) {
      out.control.push_back(c(i, 0));
      out.treated.push_back(t(i, 0));
    }
  }
  return out;
}

std::vector<double> UpliftModel::predict_uplift(const Tensor& x) {
  PotentialOutcomes po = predict_potential(x);
  std::vector<double> uplift(po.treated.size());
  for (std::size_t i = 0; i < uplift.size(); ++i) uplift[i] = po.treated[i] - po.control[i];
  return uplift;
}

}  // namespace upbench::models
