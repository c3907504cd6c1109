#pragma once

#include <functional>
#include <string>

#include "upbench/data/dataset.hpp"
#include "upbench/runner/config.hpp"
#include "upbench/runner/report.hpp"

namespace upbench::runner {

// Ingested data of one source: the training file and, for fixed-test plans,
// the separate test file.
struct LoadedSource {
  data::UpliftDataset train;
  std::optional<data::UpliftDataset> test;
};

LoadedSource load_source(const DatasetSource& source);

// Called after each finished cell (from worker threads, serialized).
using ProgressCallback = std::function<void(const ReportRow&, std::size_t done, std::size_t total)>;

// Runs every (dataset, combo, model, seed) cell: dedup per the combo, split
// per seed, random/grid search, evaluation of the selected model. A failing
// cell is recorded with its message and does not stop the run. When
// config.output_dir is set the run directory is populated.
BenchmarkReport run_benchmark(const RunConfig& config, const ProgressCallback& progress = {});

}  // namespace upbench::runner
