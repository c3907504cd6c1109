#pragma once

#include <cstddef>
#include <string_view>

#include "upbench/data/dataset.hpp"

namespace upbench::data {

// Which columns must match for two rows to count as duplicates.
enum class DedupScope { Row, Features };

DedupScope parse_dedup_scope(std::string_view text);
std::string_view to_string(DedupScope scope);

struct DedupResult {
  UpliftDataset dataset;
  std::size_t removed = 0;
};

// Keeps the first occurrence of every group of bit-identical rows (features,
// treatment and outcome under DedupScope::Row; features only under
// DedupScope::Features), preserving the original relative order.
DedupResult deduplicate(const UpliftDataset& ds, DedupScope scope = DedupScope::Row);

}  // namespace upbench::data
