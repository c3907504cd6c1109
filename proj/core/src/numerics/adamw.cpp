#include "upbench/numerics/adamw.hpp"

#include <cmath>

#include "upbench/error.hpp"

namespace upbench::nn {

AdamW::AdamW(AdamWOptions options) : options_(options) {
  if (!(options_.lr >= 0.0) || !(options_.weight_decay >= 0.0)) {
    throw ConfigError("AdamW: lr and weight decay must be non-negative");
  }
  if (!(options_.beta1 >= 0.0 && options_.beta1 < 1.0 && options_.beta2 >= 0.0 &&
        options_.beta2 < 1.0)) {
    throw ConfigError("AdamW: moment decay coefficients must lie in [0, 1)");
  }
}

void AdamW::step(std::span<Parameter* const> params) {
  for (const Parameter* p : params) {
    if (p->grad.rows() != p->value.rows() || p->grad.cols() != p->value.cols()) {
      throw ShapeError("AdamW: gradient shape mismatch for '" + p->name + "'");
    }
    if (!p->grad.allFinite()) {
      throw NonFiniteError("AdamW: non-finite gradient for '" + p->name + "'");
    }
  }
  const double lr = options_.lr;
  for (Parameter* p : params) {
    Slot& s = slots_[p];
    if (s.step == 0) {
      s.first_moment = Tensor::Zero(p->value.rows(), p->value.cols());
      s.second_moment = Tensor::Zero(p->value.rows(), p->value.cols());
    }
    ++s.step;
    const double t = static_cast<double>(s.step);
    s.first_moment = options_.beta1 * s.first_moment + (1.0 - options_.beta1) * p->grad;
    s.second_moment = options_.beta2 * s.second_moment +
                      (1.0 - options_.beta2) * p->grad.cwiseProduct(p->grad);
    const double bc1 = 1.0 - std::pow(options_.beta1, t);
    const double bc2 = 1.0 - std::pow(options_.beta2, t);
    p->value *= (1.0 - lr * options_.weight_decay);
    p->value.array() -= lr * (s.first_moment.array() / bc1) /
                        ((s.second_moment.array() / bc2).sqrt() + options_.eps);
  }
}

const AdamW::Slot* AdamW::slot(const Parameter* p) const {
  auto it = slots_.find(p);
  return it == slots_.end() ? nullptr : &it->second;
}

}  // namespace upbench::nn
