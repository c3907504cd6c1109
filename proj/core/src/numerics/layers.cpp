#include "upbench/numerics/layers.hpp"

#include <cmath>

#include "upbench/error.hpp"

namespace upbench::nn {

Parameter& ParameterSet::create(std::string name, Tensor initial) {
  Parameter& p = params_.emplace_back();
  p.name = std::move(name);
  p.grad = Tensor::Zero(initial.rows(), initial.cols());
  p.value = std::move(initial);
  return p;
}

Parameter& ParameterSet::uniform(std::string name, Index rows, Index cols, double bound,
                                 Rng& rng) {
  Tensor init(rows, cols);
  for (Index i = 0; i < init.size(); ++i) init.data()[i] = rng.uniform(-bound, bound);
  return create(std::move(name), std::move(init));
}

std::vector<Parameter*> ParameterSet::all() {
  std::vector<Parameter*> out;
  out.reserve(params_.size());
  for (auto& p : params_) out.push_back(&p);
  return out;
}

std::vector<const Parameter*> ParameterSet::all() const {
  std::vector<const Parameter*> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(&p);
  return out;
}

const Parameter* ParameterSet::find(std::string_view name) const {
  for (const auto& p : params_) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

Parameter* ParameterSet::find(std::string_view name) {
  for (auto& p : params_) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t total = 0;
  for (const auto& p : params_) total += static_cast<std::size_t>(p.value.size());
  return total;
}

std::vector<Tensor> ParameterSet::snapshot() const {
  std::vector<Tensor> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p.value);
  return out;
}

void ParameterSet::restore(const std::vector<Tensor>& values) {
  if (values.size() != params_.size()) {
    throw ShapeError("parameter snapshot has " + std::to_string(values.size()) +
                     " tensors, expected " + std::to_string(params_.size()));
  }
  std::size_t i = 0;
  for (auto& p : params_) {
    const Tensor& v = values[i++];
    if (v.rows() != p.value.rows() || v.cols() != p.value.cols()) {
      throw ShapeError("snapshot shape mismatch for parameter '" + p.name + "'");
    }
    p.value = v;
  }
}

Var activate(Graph& g, Var x, Activation act) {
  switch (act) {
    case Activation::Elu:
      return g.elu(x);
    case Activation::Tanh:
      return g.tanh(x);
  }
  return x;
}

Linear::Linear(ParameterSet& params, const std::string& name, Index in, Index out, Rng& rng)
    : in_(in), out_(out) {
  if (in < 1 || out < 1) throw ShapeError("linear layer '" + name + "' needs positive widths");
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  weight_ = &params.uniform(name + ".weight", in, out, bound, rng);
  bias_ = &params.uniform(name + ".bias", 1, out, bound, rng);
}

Var Linear::apply(Graph& g, Var x) const {
  return g.add_row(g.matmul(x, g.param(*weight_)), g.param(*bias_));
}

Mlp::Mlp(ParameterSet& params, const std::string& name, const std::vector<Index>& widths,
         Rng& rng, Activation activation, bool activate_last)
    : activation_(activation), activate_last_(activate_last) {
  if (widths.size() < 2) throw ShapeError("mlp '" + name + "' needs at least two widths");
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    layers_.emplace_back(params, name + "." + std::to_string(i), widths[i], widths[i + 1], rng);
  }
}

Var Mlp::apply(Graph& g, Var x) const {
  Var h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    h = layers_[i].apply(g, h);
    if (i + 1 < layers_.size() || activate_last_) h = activate(g, h, activation_);
  }
  return h;
}

BatchNormLayer::BatchNormLayer(ParameterSet& params, const std::string& name, Index features,
                               double epsilon, double momentum)
    : name_(name),
      running_mean_(Tensor::Zero(1, features)),
      running_var_(Tensor::Ones(1, features)),
      epsilon_(epsilon),
      momentum_(momentum) {
  if (!(epsilon > 0.0)) throw ConfigError("batch norm epsilon must be positive");
  if (features < 1) throw ShapeError("batch norm needs at least one feature");
  gamma_ = &params.create(name + ".gamma", Tensor::Ones(1, features));
  beta_ = &params.create(name + ".beta", Tensor::Zero(1, features));
}

Tensor BatchNormLayer::forward(const Tensor& batch, Mode mode, Tensor* normalized,
                               Tensor* inv_std) {
  if (batch.cols() != features()) {
    throw ShapeError("batch norm '" + name_ + "' expects " + std::to_string(features()) +
                     " features, got " + shape_string(batch));
  }
  Tensor mean;
  Tensor var;
  if (mode == Mode::Train) {
    if (batch.rows() < 2) {
      throw ShapeError("batch norm '" + name_ + "' needs at least 2 rows in train mode");
    }
    const double n = static_cast<double>(batch.rows());
    mean = batch.colwise().sum() / n;
    var = (batch.rowwise() - mean.row(0)).array().square().colwise().sum().matrix() / n;
    running_mean_ = momentum_ * running_mean_ + (1.0 - momentum_) * mean;
    running_var_ = momentum_ * running_var_ + (1.0 - momentum_) * var;
  } else {
    mean = running_mean_;
    var = running_var_;
  }
  Tensor inv = (var.array() + epsilon_).rsqrt().matrix();
  Tensor xhat = ((batch.rowwise() - mean.row(0)).array().rowwise() * inv.row(0).array()).matrix();
  Tensor out = ((xhat.array().rowwise() * gamma_->value.row(0).array()).rowwise() +
                beta_->value.row(0).array())
                   .matrix();
  if (normalized) *normalized = std::move(xhat);
  if (inv_std) *inv_std = std::move(inv);
  return out;
}

}  // namespace upbench::nn
