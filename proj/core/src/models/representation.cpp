#include <algorithm>
#include <string>
#include <vector>

#include "architectures.hpp"

namespace upbench::models::detail {

namespace {

// Mean of squared entries of a^T b.
nn::Var orthogonality(nn::Graph& g, nn::Parameter& a, nn::Parameter& b) {
  return g.mean(g.square(g.matmul(g.transpose(g.param(a)), g.param(b))));
}

}  // namespace

Bnn::Bnn(std::size_t k, const ModelHyperparams& hp, bool fn, std::uint64_t seed)
    : UpliftModel(ModelKind::BNN, k, hp, fn, seed) {
  auto& g = graph_;
  const Index r = rank();
  nn::Mlp phi = mlp("bnn.representation", representation_widths(static_cast<Index>(k)), true);
  nn::Mlp out = mlp("bnn.outcome", head_widths(r + 1));

  nn::Var h = phi.apply(g, covariates());
  nn::Var factual_prob = g.sigmoid(out.apply(g, g.concat_cols({h, treatment()})));
  nn::Var y0 = g.sigmoid(out.apply(g, g.concat_cols({h, g.fill_col(h, 0.0)})));
  nn::Var y1 = g.sigmoid(out.apply(g, g.concat_cols({h, g.fill_col(h, 1.0)})));
  finalize(g.mse(factual_prob, outcome()), {{"mmd", linear_mmd(h)}}, y0, y1);
}

TarNet::TarNet(ModelKind kind, std::size_t k, const ModelHyperparams& hp, bool fn,
               std::uint64_t seed)
    : UpliftModel(kind, k, hp, fn, seed) {
  auto& g = graph_;
  const std::string prefix = kind == ModelKind::CFRNet ? "cfrnet" : "tarnet";
  const Index r = rank();
  nn::Mlp phi = mlp(prefix + ".representation", representation_widths(static_cast<Index>(k)), true);
  nn::Mlp head0 = mlp(prefix + ".control", head_widths(r));
  nn::Mlp head1 = mlp(prefix + ".treated", head_widths(r));

  nn::Var h = phi.apply(g, covariates());
  nn::Var y0 = g.sigmoid(head0.apply(g, h));
  nn::Var y1 = g.sigmoid(head1.apply(g, h));
  std::vector<std::pair<std::string, nn::Var>> aux;
  if (kind == ModelKind::CFRNet) aux.emplace_back("ipm", linear_mmd(h));
  finalize(g.mse(g.select(treatment(), y1, y0), outcome()), std::move(aux), y0, y1);
}

DragonNet::DragonNet(std::size_t k, const ModelHyperparams& hp, bool fn, std::uint64_t seed)
    : UpliftModel(ModelKind::DragonNet, k, hp, fn, seed) {
  auto& g = graph_;
  const Index r = rank();
  nn::Mlp phi = mlp("dragonnet.representation", representation_widths(static_cast<Index>(k)), true);
  nn::Mlp head0 = mlp("dragonnet.control", head_widths(r));
  nn::Mlp head1 = mlp("dragonnet.treated", head_widths(r));
  nn::Linear propensity = linear("dragonnet.propensity", r, 1);
  nn::Parameter& epsilon = params_.create("dragonnet.epsilon", Tensor::Zero(1, 1));

  nn::Var t = treatment();
  nn::Var h = phi.apply(g, covariates());
  nn::Var y0 = g.sigmoid(head0.apply(g, h));
  nn::Var y1 = g.sigmoid(head1.apply(g, h));
  nn::Var factual_prob = g.select(t, y1, y0);
  nn::Var prop = g.clip(g.sigmoid(propensity.apply(g, h)), 1e-3, 1.0 - 1e-3);

  // Targeted regularization: the factual prediction is perturbed along
  // t/g - (1-t)/(1-g) by a learned scalar.
  nn::Var direction = g.sub(g.div(t, prop), g.div(g.one_minus(t), g.one_minus(prop)));
  nn::Var perturbed = g.add(factual_prob, g.matmul(direction, g.param(epsilon)));
  nn::Var targeted = g.mse(perturbed, outcome());

  finalize(g.mse(factual_prob, outcome()),
           {{"propensity", g.bce(prop, t)}, {"targeted", targeted}}, y0, y1);
}

SNet::SNet(std::size_t k, const ModelHyperparams& hp, bool fn, std::uint64_t seed)
    : UpliftModel(ModelKind::SNet, k, hp, fn, seed) {
  auto& g = graph_;
  const Index r = rank();
  const auto widths = representation_widths(static_cast<Index>(k));
  // Five factor blocks: shared by all outputs, by both outcomes, control
  // only, treated only, propensity only.
  nn::Mlp common = mlp("snet.common", widths, true);
  nn::Mlp outcome_shared = mlp("snet.outcome", widths, true);
  nn::Mlp control_only = mlp("snet.control_only", widths, true);
  nn::Mlp treated_only = mlp("snet.treated_only", widths, true);
  nn::Mlp propensity_only = mlp("snet.propensity_only", widths, true);
  nn::Mlp head0 = mlp("snet.control", head_widths(3 * r));
  nn::Mlp head1 = mlp("snet.treated", head_widths(3 * r));
  nn::Linear prop_head = linear("snet.propensity", 2 * r, 1);

  nn::Var x = covariates();
  nn::Var t = treatment();
  nn::Var hc = common.apply(g, x);
  nn::Var ho = outcome_shared.apply(g, x);
  nn::Var h0 = control_only.apply(g, x);
  nn::Var h1 = treated_only.apply(g, x);
  nn::Var hw = propensity_only.apply(g, x);

  nn::Var y0 = g.sigmoid(head0.apply(g, g.concat_cols({hc, ho, h0})));
  nn::Var y1 = g.sigmoid(head1.apply(g, g.concat_cols({hc, ho, h1})));
  nn::Var prop = g.sigmoid(prop_head.apply(g, g.concat_cols({hc, hw})));

  const std::vector<const nn::Mlp*> blocks{&common, &outcome_shared, &control_only, &treated_only,
                                           &propensity_only};
  nn::Var ortho;
  int pairs = 0;
  for (std::size_t a = 0; a < blocks.size(); ++a) {
    for (std::size_t b = a + 1; b < blocks.size(); ++b) {
      nn::Var term = orthogonality(g, blocks[a]->layers().front().weight(),
                                   blocks[b]->layers().front().weight());
      ortho = ortho.valid() ? g.add(ortho, term) : term;
      ++pairs;
    }
  }
  ortho = g.scale(ortho, 1.0 / pairs);

  finalize(g.mse(g.select(t, y1, y0), outcome()),
           {{"propensity", g.bce(prop, t)}, {"orthogonality", ortho}}, y0, y1);
}

FlexTENet::FlexTENet(std::size_t k, const ModelHyperparams& hp, bool fn, std::uint64_t seed)
    : UpliftModel(ModelKind::FlexTENet, k, hp, fn, seed) {
  auto& g = graph_;
  const Index in = static_cast<Index>(k);
  const Index r = rank();
  const Index p = std::max<Index>(1, r / 2);
  const int depth = hyperparams().representation_depth;
  const nn::Activation act = hyperparams().activation;

  nn::Var x = covariates();
  nn::Var shared;
  nn::Var priv[2];
  Index shared_in = in;
  Index priv_in = 0;
  nn::Var ortho;
  int terms = 0;
  auto add_ortho = [&](nn::Var term) {
    ortho = ortho.valid() ? g.add(ortho, term) : term;
    ++terms;
  };

  // Each layer: a shared stream, and per outcome a private stream that reads
  // both the previous shared and its own previous private activations.
  for (int layer = 0; layer < depth; ++layer) {
    const std::string tag = std::to_string(layer);
    nn::Linear shared_layer = linear("flextenet.shared." + tag, shared_in, r);
    nn::Var next_shared = nn::activate(g, shared_layer.apply(g, layer == 0 ? x : shared), act);
    nn::Var next_priv[2];
    for (int arm = 0; arm < 2; ++arm) {
      const std::string name = "flextenet.private" + std::to_string(arm) + "." + tag;
      nn::Linear from_shared = linear(name, shared_in, p);
      nn::Var pre = from_shared.apply(g, layer == 0 ? x : shared);
      add_ortho(orthogonality(g, shared_layer.weight(), from_shared.weight()));
      if (layer > 0) {
        nn::Parameter& from_private = weight(name + ".private_weight", priv_in, p);
        pre = g.add(pre, g.matmul(priv[arm], g.param(from_private)));
      }
      next_priv[arm] = nn::activate(g, pre, act);
    }
    shared = next_shared;
    priv[0] = next_priv[0];
    priv[1] = next_priv[1];
    shared_in = r;
    priv_in = p;
  }

  nn::Var prob[2];
  for (int arm = 0; arm < 2; ++arm) {
    const std::string name = "flextenet.output" + std::to_string(arm);
    nn::Linear from_shared = linear(name, r, 1);
    nn::Parameter& from_private = weight(name + ".private_weight", p, 1);
    prob[arm] = g.sigmoid(g.add(from_shared.apply(g, shared), g.matmul(priv[arm], g.param(from_private))));
  }
  ortho = g.scale(ortho, 1.0 / terms);

  finalize(g.mse(g.select(treatment(), prob[1], prob[0]), outcome()), {{"orthogonality", ortho}},
           prob[0], prob[1]);
}

}  // namespace upbench::models::detail
