#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "upbench/data/dataset.hpp"

namespace upbench::data {

struct DatasetStats {
  std::size_t size = 0;
  std::size_t treated = 0;
  std::size_t control = 0;
  std::size_t feature_count = 0;
  double treatment_control_ratio = 0.0;  // treated / control
  double positive_ratio = 0.0;           // P(y = 1)
  double treated_positive_rate = 0.0;    // P(y = 1 | t = 1)
  double control_positive_rate = 0.0;    // P(y = 1 | t = 0)
  double average_uplift = 0.0;           // treated rate - control rate
  // average uplift / control rate; absent when the control rate is 0.
  std::optional<double> relative_average_uplift;
};

// Throws DataError unless both groups are non-empty.
DatasetStats compute_stats(const UpliftDataset& ds);

void to_json(nlohmann::json& j, const DatasetStats& s);

// Aligned text table, one column per named dataset; ratios printed with two
// decimals ("5.67:1", "4.70%").
std::string format_stats_table(const std::vector<std::pair<std::string, DatasetStats>>& columns);

}  // namespace upbench::data
