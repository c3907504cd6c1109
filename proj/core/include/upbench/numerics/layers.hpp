#pragma once

#include <cstddef>
#include <deque>
#include <string>
#include <vector>

#include "upbench/numerics/graph.hpp"
#include "upbench/numerics/rng.hpp"
#include "upbench/numerics/tensor.hpp"

namespace upbench::nn {

// Owns the learnable tensors of one model. Addresses are stable for the
// lifetime of the set, so graphs and optimizers may hold raw pointers.
class ParameterSet {
 public:
  ParameterSet() = default;
  ParameterSet(const ParameterSet&) = delete;
  ParameterSet& operator=(const ParameterSet&) = delete;

  Parameter& create(std::string name, Tensor initial);
  // Uniform(-bound, bound) initialization.
  Parameter& uniform(std::string name, Index rows, Index cols, double bound, Rng& rng);

  std::vector<Parameter*> all();
  std::vector<const Parameter*> all() const;
  const Parameter* find(std::string_view name) const;
  Parameter* find(std::string_view name);

  // Number of learnable scalars.
  std::size_t scalar_count() const;
  std::size_t size() const { return params_.size(); }

  std::vector<Tensor> snapshot() const;
  void restore(const std::vector<Tensor>& values);

 private:
  std::deque<Parameter> params_;
};

enum class Activation { Elu, Tanh };

Var activate(Graph& g, Var x, Activation act);

// y = x W + b with fan-in scaled uniform initialization U(-1/sqrt(in), 1/sqrt(in)).
class Linear {
 public:
  Linear() = default;
  Linear(ParameterSet& params, const std::string& name, Index in, Index out, Rng& rng);

  Var apply(Graph& g, Var x) const;

  Parameter& weight() const { return *weight_; }
  Parameter& bias() const { return *bias_; }
  Index in_features() const { return in_; }
  Index out_features() const { return out_; }

 private:
  Parameter* weight_ = nullptr;
  Parameter* bias_ = nullptr;
  Index in_ = 0;
  Index out_ = 0;
};

// Stack of Linear layers over `widths` (input width first). The hidden
// activation follows every layer except the last, which stays linear unless
// `activate_last` is set.
class Mlp {
 public:
  Mlp() = default;
  Mlp(ParameterSet& params, const std::string& name, const std::vector<Index>& widths, Rng& rng,
      Activation activation = Activation::Elu, bool activate_last = false);

  Var apply(Graph& g, Var x) const;

  const std::vector<Linear>& layers() const { return layers_; }
  Index in_features() const { return layers_.front().in_features(); }
  Index out_features() const { return layers_.back().out_features(); }

 private:
  std::vector<Linear> layers_;
  Activation activation_ = Activation::Elu;
  bool activate_last_ = false;
};

// Per-feature batch normalization with learnable scale (gamma) and shift
// (beta). Train mode normalizes with the batch mean and population variance
// and folds them into the running statistics; infer mode uses the running
// statistics.
class BatchNormLayer {
 public:
  static constexpr double kDefaultEpsilon = 1e-5;
  static constexpr double kDefaultMomentum = 0.9;

  BatchNormLayer(ParameterSet& params, const std::string& name, Index features,
                 double epsilon = kDefaultEpsilon, double momentum = kDefaultMomentum);

  // Optional outputs receive the normalized pre-affine batch (n x d) and the
  // per-feature inverse standard deviation (1 x d) used for backward.
  Tensor forward(const Tensor& batch, Mode mode, Tensor* normalized = nullptr,
                 Tensor* inv_std = nullptr);

  Parameter& gamma() const { return *gamma_; }
  Parameter& beta() const { return *beta_; }
  Tensor& running_mean() { return running_mean_; }
  Tensor& running_var() { return running_var_; }
  const Tensor& running_mean() const { return running_mean_; }
  const Tensor& running_var() const { return running_var_; }
  double epsilon() const { return epsilon_; }
  double momentum() const { return momentum_; }
  Index features() const { return running_mean_.cols(); }
  const std::string& name() const { return name_; }

 private:
  std::string name_;
  Parameter* gamma_ = nullptr;
  Parameter* beta_ = nullptr;
  Tensor running_mean_;
  Tensor running_var_;
  double epsilon_;
  double momentum_;
};

}  // namespace upbench::nn
