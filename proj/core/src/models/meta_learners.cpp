#include "architectures.hpp"

namespace upbench::models::detail {

SLearner::SLearner(std::size_t k, const ModelHyperparams& hp, bool fn, std::uint64_t seed)
    : UpliftModel(ModelKind::SLearner, k, hp, fn, seed) {
  auto& g = graph_;
  const Index in = static_cast<Index>(k) + 1;
  nn::Mlp net = mlp("slearner", single_widths(in));
  nn::Var x = covariates();
  nn::Var t = treatment();

  nn::Var factual_prob = g.sigmoid(net.apply(g, g.concat_cols({x, t})));
  nn::Var y0 = g.sigmoid(net.apply(g, g.concat_cols({x, g.fill_col(x, 0.0)})));
  nn::Var y1 = g.sigmoid(net.apply(g, g.concat_cols({x, g.fill_col(x, 1.0)})));
  finalize(g.mse(factual_prob, outcome()), {}, y0, y1);
}

TLearner::TLearner(std::size_t k, const ModelHyperparams& hp, bool fn, std::uint64_t seed)
    : UpliftModel(ModelKind::TLearner, k, hp, fn, seed) {
  auto& g = graph_;
  const Index in = static_cast<Index>(k);
  nn::Mlp control = mlp("tlearner.control", single_widths(in));
  nn::Mlp treated = mlp("tlearner.treated", single_widths(in));
  nn::Var x = covariates();

  nn::Var y0 = g.sigmoid(control.apply(g, x));
  nn::Var y1 = g.sigmoid(treated.apply(g, x));
  finalize(g.mse(g.select(treatment(), y1, y0), outcome()), {}, y0, y1);
}

}  // namespace upbench::models::detail
