#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>

#include "upbench/numerics/graph.hpp"

namespace upbench::nn {

struct AdamWOptions {
  double lr = 1e-3;
  double weight_decay = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with decoupled weight decay. Moment tensors and step counters are
// kept per parameter, so disjoint parameter groups (e.g. a generator and a
// discriminator) can share one optimizer and be stepped separately.
class AdamW {
 public:
  struct Slot {
    Tensor first_moment;
    Tensor second_moment;
    std::uint64_t step = 0;
  };

  explicit AdamW(AdamWOptions options);

  // Applies one update to each parameter from its current grad. Throws
  // NonFiniteError (leaving every parameter untouched) if any gradient is
  // NaN/Inf.
  void step(std::span<Parameter* const> params);

  const AdamWOptions& options() const { return options_; }
  const Slot* slot(const Parameter* p) const;

 private:
  AdamWOptions options_;
  std::unordered_map<const Parameter*, Slot> slots_;
};

}  // namespace upbench::nn
