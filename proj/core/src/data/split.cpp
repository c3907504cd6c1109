#include "upbench/data/split.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "upbench/error.hpp"
#include "upbench/numerics/rng.hpp"

namespace upbench::data {

SplitStrategy parse_split_strategy(std::string_view text) {
  if (text == "three-way-random" || text == "three_way") return SplitStrategy::ThreeWayRandom;
  if (text == "fixed-test" || text == "fixed_test") return SplitStrategy::FixedTest;
  throw ConfigError("unknown split strategy '" + std::string(text) +
                    "' (expected three-way-random|fixed-test)");
}

std::string_view to_string(SplitStrategy strategy) {
  return strategy == SplitStrategy::ThreeWayRandom ? "three-way-random" : "fixed-test";
}

namespace {

std::size_t floor_part(std::size_t n, double ratio) {
  // The epsilon absorbs representation error in products like 1000 * 0.1.
  return static_cast<std::size_t>(std::floor(static_cast<double>(n) * ratio + 1e-9));
}

}  // namespace

SplitIndices split(std::size_t n, const SplitPlan& plan) {
  const std::size_t expected = plan.strategy == SplitStrategy::ThreeWayRandom ? 3 : 2;
  if (plan.ratios.size() != expected) {
    throw ConfigError("split strategy " + std::string(to_string(plan.strategy)) + " needs " +
                      std::to_string(expected) + " ratios");
  }
  double total = 0.0;
  for (double r : plan.ratios) {
    if (!(r >= 0.0 && r <= 1.0)) throw ConfigError("split ratios must lie in [0, 1]");
    total += r;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("split ratios must sum to 1");

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(Rng::derive(plan.seed, 0x5b1170));
  rng.shuffle(perm);

  const std::size_t valid_n = floor_part(n, plan.ratios[1]);
  const std::size_t test_n = expected == 3 ? floor_part(n, plan.ratios[2]) : 0;
  const std::size_t train_n = n - valid_n - test_n;
  if (train_n == 0 || valid_n == 0 || (expected == 3 && test_n == 0)) {
    throw DataError("split of " + std::to_string(n) + " rows leaves an empty part");
  }

  SplitIndices out;
  auto first = perm.begin();
  out.train.assign(first, first + static_cast<std::ptrdiff_t>(train_n));
  out.valid.assign(first + static_cast<std::ptrdiff_t>(train_n),
                   first + static_cast<std::ptrdiff_t>(train_n + valid_n));
  out.test.assign(first + static_cast<std::ptrdiff_t>(train_n + valid_n), perm.end());
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.valid.begin(), out.valid.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

std::vector<std::vector<std::size_t>> make_batches(std::span<const std::size_t> indices,
                                                   std::size_t batch_size,
                                                   std::uint64_t shuffle_seed) {
  if (batch_size == 0) throw ConfigError("batch size must be at least 1");
  std::vector<std::size_t> order(indices.begin(), indices.end());
  Rng rng(Rng::derive(shuffle_seed, 0xba7c4));
  rng.shuffle(order);
  std::vector<std::vector<std::size_t>> blocks;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t end = std::min(order.size(), start + batch_size);
    blocks.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                        order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return blocks;
}

}  // namespace upbench::data
