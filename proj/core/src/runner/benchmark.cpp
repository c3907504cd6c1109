#include "upbench/runner/benchmark.hpp"

#include <atomic>
#include <mutex>
#include <optional>
#include <thread>

#include "upbench/data/csv.hpp"
#include "upbench/data/preprocess.hpp"
#include "upbench/data/split.hpp"
#include "upbench/error.hpp"
#include "upbench/runner/run_dir.hpp"
#include "upbench/synthetic/generator.hpp"
#include "upbench/tuning/search.hpp"

namespace upbench::runner {

LoadedSource load_source(const DatasetSource& source) {
  LoadedSource out;
  if (source.kind == DatasetSource::Kind::Synthetic) {
    out.train = synthetic::generate(source.synthetic);
    out.train.name = source.name;
    return out;
  }
  out.train = data::load_csv(source.train_path, source.schema);
  out.train.name = source.name;
  if (source.test_path) {
    out.test = data::load_csv(*source.test_path, source.schema);
    out.test->name = source.name + "-test";
    if (out.test->feature_names != out.train.feature_names) {
      throw DataError("train and test files of '" + source.name + "' have different features");
    }
  }
  return out;
}

namespace {

struct Prepared {
  LoadedSource data;
  std::size_t removed = 0;
};

struct Cell {
  std::size_t source;
  std::size_t combo;
  std::size_t model;
  std::size_t seed;
};

std::uint64_t model_stream(models::ModelKind kind) {
  for (std::size_t i = 0; i < models::kAllModelKinds.size(); ++i) {
    if (models::kAllModelKinds[i] == kind) return 0x100 + i;
  }
  return 0x100;
}

ReportRow run_cell(const RunConfig& config, const DatasetSource& source, const Prepared& prepared,
                   const PreprocessCombo& combo, models::ModelKind kind, std::uint64_t seed,
                   const RunDirectory* dir) {
  ReportRow row;
  row.dataset = source.name;
  row.combo = combo;
  row.model = std::string(models::to_string(kind));
  row.seed = seed;
  row.duplicates_removed = prepared.removed;
  const std::string cell = cell_id(row.dataset, combo, row.model, seed);
  try {
    data::SplitPlan plan = config.split;
    plan.seed = seed;
    const data::SplitIndices parts = data::split(prepared.data.train.size(), plan);
    const data::UpliftDataset train = prepared.data.train.subset(parts.train);
    const data::UpliftDataset valid = prepared.data.train.subset(parts.valid);
    const data::UpliftDataset test = plan.strategy == data::SplitStrategy::FixedTest
                                         ? *prepared.data.test
                                         : prepared.data.train.subset(parts.test);

    tuning::SearchOptions options;
    options.budget = config.budget;
    options.strategy = config.strategy;
    options.base_seed = Rng::derive(seed, model_stream(kind));
    options.workers = 1;
    options.train = config.train;
    options.feature_norm = combo.feature_norm;
    options.k_percent = config.k_percent;
    options.architecture = config.architecture;
    const tuning::SearchSplits splits{train, valid, test};
    tuning::SearchResult result = tuning::run_search(kind, splits, config.space, options);
    if (dir) dir->write_trials(cell, result.trials);

    const tuning::Trial* best = result.best_trial();
    if (!best) {
      row.message = result.failure;
      return row;
    }
    row.ok = true;
    row.best_trial = best->index;
    row.config = best->config;
    row.valid = best->valid;
    row.test = best->test;
    for (auto* r : {&row.valid, &row.test}) {
      if (*r) (*r)->seed = seed;
    }
    row.train.epochs = best->best_epoch;
    row.train.params = best->parameter_count;
    if (best->epochs_run > 0) row.train.seconds = best->seconds / best->epochs_run;
    if (test.tau_true) {
      const std::vector<double> uplift = result.best_model->predict_uplift(test.x);
      row.rank_quality = synthetic::oracle_rank_quality(uplift, *test.tau_true);
    }
    if (dir && config.save_checkpoints) dir->write_checkpoint(cell, *result.best_model);
  } catch (const std::exception& e) {
    row.ok = false;
    row.message = e.what();
    row.best_trial.reset();
    row.config.reset();
    row.valid.reset();
    row.test.reset();
    row.train = TrainInfo{};
    row.rank_quality.reset();
  }
  return row;
}

}  // namespace

BenchmarkReport run_benchmark(const RunConfig& config, const ProgressCallback& progress) {
  config.validate();
  std::optional<RunDirectory> dir;
  if (!config.output_dir.empty()) {
    dir.emplace(config.output_dir);
    dir->write_config(config);
  }

  const auto combos = config.combos();
  // Deduplication covers every ingested file and happens before splitting.
  std::vector<std::vector<Prepared>> prepared;
  for (const DatasetSource& source : config.datasets) {
    const LoadedSource loaded = load_source(source);
    auto& per_combo = prepared.emplace_back();
    for (const PreprocessCombo& combo : combos) {
      Prepared p;
      if (combo.dedup) {
        auto train = data::deduplicate(loaded.train, config.dedup_scope);
        p.data.train = std::move(train.dataset);
        p.removed = train.removed;
        if (loaded.test) {
          auto test = data::deduplicate(*loaded.test, config.dedup_scope);
          p.data.test = std::move(test.dataset);
          p.removed += test.removed;
        }
      } else {
        p.data = loaded;
      }
      per_combo.push_back(std::move(p));
    }
  }

  std::vector<Cell> cells;
  for (std::size_t s = 0; s < config.datasets.size(); ++s) {
    for (std::size_t c = 0; c < combos.size(); ++c) {
      for (std::size_t m = 0; m < config.models.size(); ++m) {
        for (std::size_t k = 0; k < config.seeds.size(); ++k) cells.push_back({s, c, m, k});
      }
    }
  }

  BenchmarkReport report;
  report.k_percent = config.k_percent;
  report.rows.resize(cells.size());
  std::atomic<std::size_t> next{0};
  std::mutex progress_mutex;
  std::size_t done = 0;
  const RunDirectory* dir_ptr = dir ? &*dir : nullptr;

  auto work = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      const Cell& cell = cells[i];
      report.rows[i] = run_cell(config, config.datasets[cell.source],
                                prepared[cell.source][cell.combo], combos[cell.combo],
                                config.models[cell.model], config.seeds[cell.seed], dir_ptr);
      std::lock_guard lock(progress_mutex);
      ++done;
      if (progress) progress(report.rows[i], done, cells.size());
    }
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min(config.workers, cells.size()));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }

  if (dir) dir->write_report(report);
  return report;
}

}  // namespace upbench::runner
