#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace upbench::data {

enum class SplitStrategy {
  ThreeWayRandom,  // train / valid / test from one dataset
  FixedTest,       // train / valid from one dataset, test supplied separately
};

SplitStrategy parse_split_strategy(std::string_view text);
std::string_view to_string(SplitStrategy strategy);

struct SplitPlan {
  std::uint64_t seed = 0;
  // Three fractions (train, valid, test) for ThreeWayRandom, two (train,
  // valid) for FixedTest. Must sum to 1.
  std::vector<double> ratios{0.8, 0.1, 0.1};
  SplitStrategy strategy = SplitStrategy::ThreeWayRandom;

  static SplitPlan three_way(std::uint64_t seed) { return {seed, {0.8, 0.1, 0.1}, SplitStrategy::ThreeWayRandom}; }
  static SplitPlan fixed_test(std::uint64_t seed) { return {seed, {0.9, 0.1}, SplitStrategy::FixedTest}; }
};

// Index sets of one split; each part is sorted ascending. `test` is empty for
// FixedTest plans.
struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> valid;
  std::vector<std::size_t> test;
};

// Seeded permutation of 0..n-1 cut by ratio: valid and test sizes are
// floor(n * ratio), the remainder goes to train. Throws if a part is empty or
// the ratios are invalid.
SplitIndices split(std::size_t n, const SplitPlan& plan);

// Seeded shuffle of `indices` cut into contiguous blocks of `batch_size`; the
// final short block is kept.
std::vector<std::vector<std::size_t>> make_batches(std::span<const std::size_t> indices,
                                                   std::size_t batch_size,
                                                   std::uint64_t shuffle_seed);

}  // namespace upbench::data
