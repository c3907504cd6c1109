#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "upbench/metrics/uplift_curve.hpp"
#include "upbench/models/model.hpp"
#include "upbench/runner/config.hpp"

namespace upbench::runner {

// Metric columns in table order: valid QINI/AUUC/WAU/LIFT, then test.
inline constexpr std::array<std::string_view, 8> kMetricColumns = {
    "valid_qini", "valid_auuc", "valid_wau", "valid_lift",
    "test_qini",  "test_auuc",  "test_wau",  "test_lift"};

struct TrainInfo {
  // Wall seconds per epoch of the selected trial. Machine dependent, so kept
  // out of the deterministic report and stored alongside it.
  std::optional<double> seconds;
  int epochs = 0;           // best epoch of the selected trial
  std::size_t params = 0;   // learnable scalars
};

// One (dataset, preprocessing combo, model, seed) cell.
struct ReportRow {
  std::string dataset;
  PreprocessCombo combo;
  std::string model;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string message;  // failure reason
  std::optional<std::size_t> best_trial;
  std::optional<models::ModelHyperparams> config;
  std::optional<metrics::EvalReport> valid;
  std::optional<metrics::EvalReport> test;
  TrainInfo train;
  std::size_t duplicates_removed = 0;
  // Spearman correlation of test predictions with the true uplift, when known.
  std::optional<double> rank_quality;

  std::optional<double> metric(std::string_view column) const;
  std::string key() const;
};

struct MetricSummary {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for one seed
};

// Seed aggregate of one (dataset, combo, model) group over its completed rows.
struct AggregateRow {
  std::string dataset;
  PreprocessCombo combo;
  std::string model;
  std::size_t seeds_ok = 0;
  std::size_t seeds_failed = 0;
  std::map<std::string, MetricSummary> metrics;
  std::optional<MetricSummary> seconds;
  MetricSummary epochs;
  MetricSummary params;
  std::optional<MetricSummary> rank_quality;
  // Seed whose selected model has the highest validation QINI.
  std::optional<std::uint64_t> best_seed;
};

struct BenchmarkReport {
  double k_percent = 30.0;
  std::vector<ReportRow> rows;

  // Recomputed from rows; order follows first appearance.
  std::vector<AggregateRow> aggregates() const;
};

// JSON with per-seed rows and seed aggregates. Wall time is written only when
// `with_timing` is set.
nlohmann::json to_json(const BenchmarkReport& report, bool with_timing = false);
BenchmarkReport report_from_json(const nlohmann::json& j);

// Per-row wall seconds keyed by ReportRow::key().
nlohmann::json timings_json(const BenchmarkReport& report);
void merge_timings(BenchmarkReport& report, const nlohmann::json& timings);

// One line per row; lossless.
std::string to_csv(const BenchmarkReport& report);
BenchmarkReport report_from_csv(std::string_view text);

// One table per (dataset, combo) with seed means; per column the best value
// is bold and the next two are underlined.
std::string to_markdown(const BenchmarkReport& report);

enum class PreprocessFactor { Dedup, FeatureNorm };

struct PreprocessDelta {
  std::string dataset;
  std::string model;
  std::string metric;
  PreprocessFactor factor;
  bool other_enabled;           // state of the toggle held fixed
  std::optional<double> delta;  // with minus without; empty when a cell is missing
};

// Seed-mean differences, per model and metric, between combos that differ
// in one toggle.
std::vector<PreprocessDelta> compare_preprocessing(const BenchmarkReport& report);
std::string deltas_to_markdown(const std::vector<PreprocessDelta>& deltas);
nlohmann::json deltas_to_json(const std::vector<PreprocessDelta>& deltas);

}  // namespace upbench::runner
