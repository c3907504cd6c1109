#include <algorithm>
#include <cmath>

#include "architectures.hpp"

namespace upbench::models::detail {

Euen::Euen(std::size_t k, const ModelHyperparams& hp, bool fn, std::uint64_t seed)
    : UpliftModel(ModelKind::EUEN, k, hp, fn, seed) {
  auto& g = graph_;
  auto widths = representation_widths(static_cast<Index>(k));
  widths.push_back(1);
  nn::Mlp control = mlp("euen.control", widths);
  nn::Mlp uplift = mlp("euen.uplift", widths);

  nn::Var x = covariates();
  nn::Var c = control.apply(g, x);
  nn::Var u = uplift.apply(g, x);
  nn::Var y0 = g.sigmoid(c);
  nn::Var y1 = g.sigmoid(g.add(c, u));
  finalize(g.mse(g.select(treatment(), y1, y0), outcome()), {}, y0, y1);
}

Descn::Descn(std::size_t k, const ModelHyperparams& hp, bool fn, std::uint64_t seed)
    : UpliftModel(ModelKind::DESCN, k, hp, fn, seed) {
  auto& g = graph_;
  const Index r = rank();
  nn::Mlp phi = mlp("descn.representation", representation_widths(static_cast<Index>(k)), true);
  nn::Mlp prop_head = mlp("descn.propensity", head_widths(r));
  nn::Mlp head0 = mlp("descn.control", head_widths(r));
  nn::Mlp head1 = mlp("descn.treated", head_widths(r));
  nn::Mlp pseudo_effect = mlp("descn.pseudo_effect", head_widths(r));

  nn::Var t = treatment();
  nn::Var y = outcome();
  nn::Var h = phi.apply(g, covariates());
  nn::Var prop = g.sigmoid(prop_head.apply(g, h));
  nn::Var logit0 = head0.apply(g, h);
  nn::Var logit1 = head1.apply(g, h);
  nn::Var y0 = g.sigmoid(logit0);
  nn::Var y1 = g.sigmoid(logit1);
  nn::Var effect = pseudo_effect.apply(g, h);
  nn::Var cross1 = g.sigmoid(g.add(logit0, effect));
  nn::Var cross0 = g.sigmoid(g.sub(logit1, effect));

  // Entire-space terms: P(t=1, y=1) and P(t=0, y=1) over all rows.
  nn::Var es_treated = g.bce(g.mul(prop, y1), g.mul(t, y));
  nn::Var es_control = g.bce(g.mul(g.one_minus(prop), y0), g.mul(g.one_minus(t), y));
  nn::Var cross = g.mse(g.select(t, cross1, cross0), y);

  finalize(g.mse(g.select(t, y1, y0), y),
           {{"propensity", g.bce(prop, t)},
            {"entire_space_treated", es_treated},
            {"entire_space_control", es_control},
            {"cross", cross}},
           y0, y1);
}

Efin::Efin(std::size_t k, const ModelHyperparams& hp, bool fn, std::uint64_t seed)
    : UpliftModel(ModelKind::EFIN, k, hp, fn, seed) {
  auto& g = graph_;
  const Index in = static_cast<Index>(k);
  const Index r = rank();
  const Index d = std::max<Index>(4, r / 4);

  // Feature i embeds as x_i * scale_i + shift_i.
  nn::Parameter& scale = weight("efin.embedding_scale", in, d);
  nn::Parameter& shift = weight("efin.embedding_shift", in, d);
  nn::Parameter& self_query = weight("efin.self_query", d, 1);
  nn::Parameter& treatment_query = weight("efin.treatment_embedding", d, 1);
  auto widths = representation_widths(d);
  widths.push_back(1);
  nn::Mlp control = mlp("efin.control", widths);
  nn::Mlp uplift = mlp("efin.uplift", widths);
  nn::Linear classifier = linear("efin.treatment_classifier", d, 1);

  nn::Var x = covariates();
  nn::Var w = g.param(scale);
  nn::Var b = g.param(shift);
  const double temperature = 1.0 / std::sqrt(static_cast<double>(d));

  // Attention over feature embeddings: score_i = (x_i w_i + b_i) . q, so the
  // scores are affine in x with per-feature slope (W q) and offset (B q).
  auto pool = [&](nn::Parameter& query) {
    nn::Var q = g.param(query);
    nn::Var slope = g.transpose(g.matmul(w, q));
    nn::Var offset = g.transpose(g.matmul(b, q));
    nn::Var scores = g.scale(g.add_row(g.mul_row(x, slope), offset), temperature);
    nn::Var attn = g.softmax_rows(scores);
    return g.add(g.matmul(g.mul(attn, x), w), g.matmul(attn, b));
  };

  nn::Var pooled_self = pool(self_query);
  nn::Var pooled_treatment = pool(treatment_query);
  nn::Var c = control.apply(g, pooled_self);
  nn::Var u = uplift.apply(g, pooled_treatment);
  nn::Var y0 = g.sigmoid(c);
  nn::Var y1 = g.sigmoid(g.add(c, u));
  nn::Var t = treatment();
  nn::Var factual_prob = g.sigmoid(g.add(c, g.mul(t, u)));

  // The treatment-aware representation should not reveal t.
  nn::Var t_prob = g.sigmoid(classifier.apply(g, pooled_treatment));
  nn::Var confusion = g.bce(t_prob, g.fill_col(t_prob, 0.5));

  finalize(g.mse(factual_prob, outcome()), {{"intervention_confusion", confusion}}, y0, y1);
}

}  // namespace upbench::models::detail
