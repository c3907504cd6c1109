#include "upbench/data/stats.hpp"

#include <algorithm>
#include <cstdio>
#include <nlohmann/json.hpp>

#include "upbench/error.hpp"

namespace upbench::data {

DatasetStats compute_stats(const UpliftDataset& ds) {
  ds.validate();
  DatasetStats s;
  s.size = ds.size();
  s.feature_count = ds.feature_count();
  std::size_t treated_pos = 0;
  std::size_t control_pos = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.t[i]) {
      ++s.treated;
      treated_pos += ds.y[i];
    } else {
      ++s.control;
      control_pos += ds.y[i];
    }
  }
  if (s.treated == 0 || s.control == 0) {
    throw DataError("dataset '" + ds.name + "' needs both treated and control rows for statistics");
  }
  const auto ratio = [](std::size_t a, std::size_t b) {
    return static_cast<double>(a) / static_cast<double>(b);
  };
  s.treatment_control_ratio = ratio(s.treated, s.control);
  s.positive_ratio = ratio(treated_pos + control_pos, s.size);
  s.treated_positive_rate = ratio(treated_pos, s.treated);
  s.control_positive_rate = ratio(control_pos, s.control);
  s.average_uplift = s.treated_positive_rate - s.control_positive_rate;
  if (control_pos > 0) s.relative_average_uplift = s.average_uplift / s.control_positive_rate;
  return s;
}

void to_json(nlohmann::json& j, const DatasetStats& s) {
  j = nlohmann::json{
      {"size", s.size},
      {"treated", s.treated},
      {"control", s.control},
      {"feature_count", s.feature_count},
      {"treatment_control_ratio", s.treatment_control_ratio},
      {"positive_ratio", s.positive_ratio},
      {"treated_positive_rate", s.treated_positive_rate},
      {"control_positive_rate", s.control_positive_rate},
      {"average_uplift", s.average_uplift},
  };
  j["relative_average_uplift"] =
      s.relative_average_uplift ? nlohmann::json(*s.relative_average_uplift) : nlohmann::json();
}

namespace {

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), pattern, v);
  return buf;
}

std::string with_thousands(std::size_t v) {
  std::string digits = std::to_string(v);
  std::string out;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (i > 0 && (digits.size() - i) % 3 == 0) out.push_back(',');
    out.push_back(digits[i]);
  }
  return out;
}

}  // namespace

std::string format_stats_table(const std::vector<std::pair<std::string, DatasetStats>>& columns) {
  std::vector<std::string> labels = {"Dataset",
                                     "Size",
                                     "Ratio of Treatment to Control",
                                     "Positive Sample Ratio",
                                     "Relative Average Uplift",
                                     "Average Uplift",
                                     "Features Number"};
  std::vector<std::vector<std::string>> cells(labels.size());
  for (const auto& [name, s] : columns) {
    cells[0].push_back(name);
    cells[1].push_back(with_thousands(s.size));
    cells[2].push_back(fmt("%.2f:1", s.treatment_control_ratio));
    cells[3].push_back(fmt("%.2f%%", 100.0 * s.positive_ratio));
    cells[4].push_back(s.relative_average_uplift ? fmt("%.2f%%", 100.0 * *s.relative_average_uplift)
                                                 : std::string("n/a"));
    cells[5].push_back(fmt("%.2f%%", 100.0 * s.average_uplift));
    cells[6].push_back(std::to_string(s.feature_count));
  }
  std::size_t label_width = 0;
  for (const auto& l : labels) label_width = std::max(label_width, l.size());
  std::vector<std::size_t> widths(columns.size(), 0);
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
  }
  std::string out;
  for (std::size_t r = 0; r < labels.size(); ++r) {
    out += labels[r] + std::string(label_width - labels[r].size(), ' ');
    for (std::size_t c = 0; c < cells[r].size(); ++c) {
      out += " | " + std::string(widths[c] - cells[r][c].size(), ' ') + cells[r][c];
    }
    out += '\n';
  }
  return out;
}

}  // namespace upbench::data
