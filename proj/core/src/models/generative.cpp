#include <algorithm>
#include <string>

#include "architectures.hpp"

namespace upbench::models::detail {

Cevae::Cevae(std::size_t k, const ModelHyperparams& hp, bool fn, std::uint64_t seed)
    : UpliftModel(ModelKind::CEVAE, k, hp, fn, seed) {
  auto& g = graph_;
  const Index in = static_cast<Index>(k);
  const Index r = rank();
  const Index latent = std::max<Index>(4, r / 4);

  nn::Mlp encoder = mlp("cevae.encoder", representation_widths(in + 2), true);
  nn::Linear enc_mean = linear("cevae.encoder_mean", r, latent);
  nn::Linear enc_logvar = linear("cevae.encoder_logvar", r, latent);
  nn::Mlp decode_x = mlp("cevae.decoder_x", {latent, r, in});
  nn::Mlp decode_t = mlp("cevae.decoder_t", {latent, r, 1});
  nn::Mlp decode_y0 = mlp("cevae.decoder_y0", {latent, r, 1});
  nn::Mlp decode_y1 = mlp("cevae.decoder_y1", {latent, r, 1});
  // Amortized q(z | x) used at prediction time, when t and y are unknown.
  nn::Mlp prior_encoder = mlp("cevae.covariate_encoder", {in, r, latent});

  nn::Var x = covariates();
  nn::Var t = treatment();
  nn::Var y = outcome();
  nn::Var eps = noise_input(latent);

  nn::Var h = encoder.apply(g, g.concat_cols({x, t, y}));
  nn::Var mu = enc_mean.apply(g, h);
  nn::Var logvar = g.clip(enc_logvar.apply(g, h), -8.0, 8.0);
  nn::Var z = g.add(mu, g.mul(g.exp(g.scale(logvar, 0.5)), eps));

  nn::Var x_target = g.detach(x);
  nn::Var recon_x = g.scale(g.mean(g.row_sum(g.square(g.sub(decode_x.apply(g, z), x_target)))), 0.5);
  nn::Var t_nll = g.bce(g.sigmoid(decode_t.apply(g, z)), t);
  nn::Var y_prob = g.select(t, g.sigmoid(decode_y1.apply(g, z)), g.sigmoid(decode_y0.apply(g, z)));
  nn::Var y_nll = g.bce(y_prob, y);
  nn::Var kl = g.mean(g.row_sum(g.scale(
      g.add_scalar(g.sub(g.add(g.square(mu), g.exp(logvar)), logvar), -1.0), 0.5)));

  nn::Var z_x = prior_encoder.apply(g, x);
  nn::Var match = g.mean(g.row_sum(g.square(g.sub(z_x, g.detach(mu)))));

  nn::Var y0 = g.sigmoid(decode_y0.apply(g, z_x));
  nn::Var y1 = g.sigmoid(decode_y1.apply(g, z_x));
  finalize(g.mse(y_prob, y),
           {{"reconstruction_x", recon_x},
            {"reconstruction_t", t_nll},
            {"reconstruction_y", y_nll},
            {"kl", kl},
            {"covariate_encoder", match}},
           y0, y1);
}

Ganite::Ganite(std::size_t k, const ModelHyperparams& hp, bool fn, std::uint64_t seed)
    : UpliftModel(ModelKind::GANITE, k, hp, fn, seed) {
  auto& g = graph_;
  const Index in = static_cast<Index>(k);
  const Index r = rank();
  const Index noise_width = std::max<Index>(4, r / 4);

  auto widths = representation_widths(in + 2 + noise_width);
  widths.push_back(2);
  nn::Mlp generator = mlp("ganite.generator", widths);
  auto disc_widths = representation_widths(in + 2);
  disc_widths.push_back(1);
  nn::Mlp discriminator = mlp("ganite.discriminator", disc_widths);
  auto ite_widths = representation_widths(in);
  ite_widths.push_back(2);
  nn::Mlp ite = mlp("ganite.ite", ite_widths);

  nn::Var x = covariates();
  nn::Var t = treatment();
  nn::Var y = outcome();
  nn::Var z = noise_input(noise_width);

  nn::Var gen = g.sigmoid(generator.apply(g, g.concat_cols({x, t, y, z})));
  nn::Var gen0 = g.slice_cols(gen, 0, 1);
  nn::Var gen1 = g.slice_cols(gen, 1, 1);
  nn::Var gen_supervised = g.mse(g.select(t, gen1, gen0), y);

  // Completed outcome vector: factual y in the observed slot, generated
  // counterfactual in the other.
  nn::Var complete0 = g.select(t, gen0, y);
  nn::Var complete1 = g.select(t, y, gen1);
  nn::Var disc = g.sigmoid(discriminator.apply(g, g.concat_cols({x, complete0, complete1})));
  discriminator_loss_ = g.bce(disc, t);
  nn::Var adversarial = g.neg(discriminator_loss_);

  nn::Var pred = g.sigmoid(ite.apply(g, x));
  nn::Var y0 = g.slice_cols(pred, 0, 1);
  nn::Var y1 = g.slice_cols(pred, 1, 1);
  nn::Var factual = g.mse(g.select(t, y1, y0), y);
  nn::Var counterfactual = g.mse(g.select(t, y0, y1), g.detach(g.select(t, gen0, gen1)));

  generator_loss_ = g.add(g.add(factual, counterfactual),
                          g.add(gen_supervised, g.scale(adversarial, alpha())));

  for (nn::Parameter* p : params_.all()) {
    if (p->name.rfind("ganite.discriminator", 0) == 0) {
      discriminator_params_.push_back(p);
    } else {
      generator_params_.push_back(p);
    }
  }

  finalize(factual,
           {{"counterfactual", counterfactual},
            {"generator_supervised", gen_supervised},
            {"adversarial", adversarial},
            {"discriminator", discriminator_loss_}},
           y0, y1, generator_loss_);
}

std::vector<Objective> Ganite::objectives() {
  return {Objective{"discriminator", discriminator_loss_, discriminator_params_},
          Objective{"generator", generator_loss_, generator_params_}};
}

}  // namespace upbench::models::detail
