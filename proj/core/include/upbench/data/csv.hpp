#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "upbench/data/dataset.hpp"

namespace upbench::data {

// Column roles for CSV ingestion. With `features` empty, every column that is
// not the treatment, the outcome, the tau column or listed in `ignore` is a
// feature. A column named "tau_true" is attached as ground truth unless it is
// explicitly listed as a feature.
struct CsvSchema {
  std::vector<std::string> features;
  std::string treatment = "treatment";
  std::string outcome = "outcome";
  std::optional<std::string> tau_column;
  std::vector<std::string> ignore;
};

inline constexpr std::string_view kTauColumn = "tau_true";

UpliftDataset load_csv(const std::filesystem::path& path, const CsvSchema& schema);
UpliftDataset parse_csv(std::string_view text, const CsvSchema& schema, std::string name = "csv");

// Header row of feature names (x0.. when unnamed), "treatment", "outcome" and
// "tau_true" when present. Reals are written in shortest round-trip form.
void write_csv(const UpliftDataset& ds, std::ostream& out);
void write_csv(const UpliftDataset& ds, const std::filesystem::path& path);

// Shortest decimal representation that parses back to the same double.
std::string format_real(double value);

}  // namespace upbench::data
