#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "upbench/models/model.hpp"
#include "upbench/runner/config.hpp"
#include "upbench/runner/report.hpp"
#include "upbench/tuning/search.hpp"

namespace upbench::runner {

// Writes `content` to a sibling temporary file and renames it over `path`.
void write_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

// Layout:
//   config.json            resolved config snapshot
//   trials/<cell>.jsonl    one JSON record per search trial
//   checkpoints/<cell>.*   selected model per cell
//   report.json            deterministic report (no wall time)
//   timings.json           wall seconds per row
//   report.csv, report.md  same rows, with timings
//   compare.md             preprocessing deltas
class RunDirectory {
 public:
  explicit RunDirectory(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }

  void write_config(const RunConfig& config) const;
  void write_trials(const std::string& cell, const std::vector<tuning::Trial>& trials) const;
  void write_checkpoint(const std::string& cell, models::UpliftModel& model) const;
  void write_report(const BenchmarkReport& report) const;

 private:
  std::filesystem::path root_;
};

// File-safe cell identifier, e.g. "synthetic__wID_woFN__TARNet__seed3".
std::string cell_id(const std::string& dataset, const PreprocessCombo& combo,
                    const std::string& model, std::uint64_t seed);

// report.json merged with timings.json when present.
BenchmarkReport load_run_report(const std::filesystem::path& run_dir);

}  // namespace upbench::runner
