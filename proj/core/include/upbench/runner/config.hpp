#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "upbench/data/csv.hpp"
#include "upbench/data/preprocess.hpp"
#include "upbench/data/split.hpp"
#include "upbench/models/model.hpp"
#include "upbench/models/train.hpp"
#include "upbench/synthetic/generator.hpp"
#include "upbench/tuning/search.hpp"

namespace upbench::runner {

// Where a dataset comes from: CSV files with column roles, or a synthetic
// spec. `test_path` supplies a fixed test file for FixedTest split plans.
struct DatasetSource {
  enum class Kind { Csv, Synthetic };

  Kind kind = Kind::Synthetic;
  std::string name;
  std::filesystem::path train_path;
  std::optional<std::filesystem::path> test_path;
  data::CsvSchema schema;
  synthetic::SyntheticSpec synthetic;
};

struct PreprocessCombo {
  bool dedup = false;
  bool feature_norm = false;

  // "w/ID w/oFN" style label.
  std::string label() const;
  friend bool operator==(const PreprocessCombo&, const PreprocessCombo&) = default;
};

// The four combos in table order.
std::vector<PreprocessCombo> all_preprocess_combos();

struct RunConfig {
  std::vector<DatasetSource> datasets;
  std::vector<models::ModelKind> models;
  // Exactly one of a single combo or matrix mode.
  std::optional<PreprocessCombo> preprocessing;
  bool matrix = false;
  data::DedupScope dedup_scope = data::DedupScope::Row;
  data::SplitPlan split;  // seed is replaced per run seed
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::size_t budget = 30;
  tuning::SearchStrategy strategy = tuning::SearchStrategy::Random;
  tuning::SearchSpace space;
  models::TrainOptions train;
  // Depth and activation defaults applied to every sampled configuration.
  models::ModelHyperparams architecture;
  double k_percent = 30.0;
  std::filesystem::path output_dir;
  std::size_t workers = 1;
  bool save_checkpoints = true;

  std::vector<PreprocessCombo> combos() const;
  // Throws ConfigError describing the first problem.
  void validate() const;
};

// Paths in the config are resolved against `base_dir` when relative.
RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& config);

// BENCH_OUTPUT_DIR replaces output_dir, BENCH_WORKERS replaces workers.
void apply_env_overrides(RunConfig& config);

}  // namespace upbench::runner
