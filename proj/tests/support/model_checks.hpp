#pragma once
// Helpers shared by the model unit tests and the acceptance binary.
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "upbench/data/dataset.hpp"
#include "upbench/models/model.hpp"
#include "upbench/numerics/rng.hpp"

namespace checks {

using upbench::Index;
using upbench::Tensor;

inline upbench::models::Batch random_batch(Index n, Index k, std::uint64_t seed) {
  upbench::Rng rng(seed);
  upbench::models::Batch b{Tensor(n, k), Tensor(n, 1), Tensor(n, 1)};
  for (Index i = 0; i < b.x.size(); ++i) b.x.data()[i] = rng.normal();
  for (Index i = 0; i < n; ++i) {
    b.t(i, 0) = static_cast<double>(i % 2);
    b.y(i, 0) = rng.bernoulli(0.4) ? 1.0 : 0.0;
  }
  return b;
}

struct GradientReport {
  double worst = 0.0;
  std::size_t checked = 0;
};

// Central differences (h = 1e-5) against backward() for every objective of
// the model on one fixed feed. Stop-gradient values are frozen at the base
// point so the checked function is the one backward() differentiates.
inline GradientReport gradient_check(upbench::models::UpliftModel& model,
                                     const upbench::models::Batch& batch) {
  GradientReport report;
  const auto feed = model.make_feed(batch);
  auto& g = model.graph();
  for (const auto& objective : model.objectives()) {
    g.freeze_detached(false);
    model.loss(feed);
    g.backward(objective.loss);
    g.freeze_detached(true);
    std::vector<Tensor> grads;
    for (auto* p : objective.params) grads.push_back(p->grad);
    for (std::size_t k = 0; k < objective.params.size(); ++k) {
      auto* p = objective.params[k];
      for (Index e = 0; e < p->value.size(); ++e) {
        double& v = p->value.data()[e];
        const double orig = v;
        const double h = 1e-5;
        v = orig + h;
        model.loss(feed);
        const double up = g.scalar(objective.loss);
        v = orig - h;
        model.loss(feed);
        const double down = g.scalar(objective.loss);
        v = orig;
        const double fd = (up - down) / (2 * h);
        const double an = grads[k].data()[e];
        if (std::abs(an) <= 1e-8 && std::abs(fd) <= 1e-8) continue;
        ++report.checked;
        report.worst = std::max(report.worst, std::abs(fd - an) / std::max(std::abs(fd), std::abs(an)));
      }
    }
  }
  g.freeze_detached(false);
  return report;
}

// Dataset with y = t and both arms balanced.
inline upbench::data::UpliftDataset outcome_equals_treatment(std::size_t n, Index k, std::uint64_t seed) {
  upbench::Rng rng(seed);
  upbench::data::UpliftDataset ds;
  ds.name = "y_equals_t";
  ds.x = Tensor(static_cast<Index>(n), k);
  for (Index i = 0; i < ds.x.size(); ++i) ds.x.data()[i] = rng.normal();
  for (Index j = 0; j < k; ++j) ds.feature_names.push_back("x" + std::to_string(j));
  for (std::size_t i = 0; i < n; ++i) {
    ds.t.push_back(rng.bernoulli(0.5));
    ds.y.push_back(ds.t.back());
  }
  return ds;
}

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace checks
