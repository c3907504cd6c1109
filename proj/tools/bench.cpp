// Command-line front end: run benchmarks, inspect data, render reports.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "upbench/data/csv.hpp"
#include "upbench/data/stats.hpp"
#include "upbench/error.hpp"
#include "upbench/runner/benchmark.hpp"
#include "upbench/runner/config.hpp"
#include "upbench/runner/report.hpp"
#include "upbench/runner/run_dir.hpp"
#include "upbench/synthetic/generator.hpp"

namespace {

using namespace upbench;

int cmd_run(const std::string& config_path, const std::string& output, std::size_t workers,
            bool quiet) {
  runner::RunConfig config = runner::load_run_config(config_path);
  runner::apply_env_overrides(config);
  if (!output.empty()) config.output_dir = output;
  if (workers > 0) config.workers = workers;
  if (config.output_dir.empty()) throw ConfigError("no output directory (config, --output or BENCH_OUTPUT_DIR)");

  runner::ProgressCallback progress;
  if (!quiet) {
    progress = [](const runner::ReportRow& row, std::size_t done, std::size_t total) {
      std::fprintf(stderr, "[%zu/%zu] %s %s %s seed %llu: ", done, total, row.dataset.c_str(),
                   row.combo.label().c_str(), row.model.c_str(),
                   static_cast<unsigned long long>(row.seed));
      if (row.ok) {
        std::fprintf(stderr, "valid qini %.4f, test qini %.4f\n", row.valid->qini, row.test->qini);
      } else {
        std::fprintf(stderr, "FAILED (%s)\n", row.message.c_str());
      }
    };
  }
  const runner::BenchmarkReport report = runner::run_benchmark(config, progress);
  std::cout << runner::to_markdown(report);
  std::size_t failed = 0;
  for (const auto& row : report.rows) failed += row.ok ? 0 : 1;
  std::cerr << "wrote " << config.output_dir.string() << " (" << report.rows.size() << " cells, "
            << failed << " failed)\n";
  return 0;
}

int cmd_stats(const std::vector<std::string>& paths, const data::CsvSchema& schema, bool json) {
  std::vector<std::pair<std::string, data::DatasetStats>> columns;
  for (const auto& path : paths) {
    const data::UpliftDataset ds = data::load_csv(path, schema);
    columns.emplace_back(std::filesystem::path(path).stem().string(), data::compute_stats(ds));
  }
  if (json) {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& [name, stats] : columns) out[name] = stats;
    std::cout << out.dump(2) << "\n";
  } else {
    std::cout << data::format_stats_table(columns);
  }
  return 0;
}

int cmd_synth(const std::string& spec_path, const std::string& out_path) {
  std::ifstream in(spec_path);
  if (!in) throw ConfigError("cannot open spec " + spec_path);
  synthetic::SyntheticSpec spec;
  try {
    spec = nlohmann::json::parse(in).get<synthetic::SyntheticSpec>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed synthetic spec: " + std::string(e.what()));
  }
  const data::UpliftDataset ds = synthetic::generate(spec);
  if (out_path.empty() || out_path == "-") {
    data::write_csv(ds, std::cout);
  } else {
    data::write_csv(ds, std::filesystem::path(out_path));
  }
  return 0;
}

int cmd_report(const std::string& run_dir, const std::string& format) {
  const runner::BenchmarkReport report = runner::load_run_report(run_dir);
  if (format == "md") {
    std::cout << runner::to_markdown(report);
  } else if (format == "csv") {
    std::cout << runner::to_csv(report);
  } else {
    std::cout << runner::to_json(report, true).dump(2) << "\n";
  }
  return 0;
}

int cmd_compare(const std::string& run_dir, const std::string& format) {
  const auto deltas = runner::compare_preprocessing(runner::load_run_report(run_dir));
  if (format == "json") {
    std::cout << runner::deltas_to_json(deltas).dump(2) << "\n";
  } else {
    std::cout << runner::deltas_to_markdown(deltas);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Uplift model benchmark harness"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a benchmark config");
  std::string config_path;
  std::string output;
  std::size_t workers = 0;
  bool quiet = false;
  run->add_option("--config", config_path, "Run config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--output", output, "Output directory (overrides config and env)");
  run->add_option("--workers", workers, "Worker threads (overrides config and env)");
  run->add_flag("--quiet", quiet, "No per-cell progress");

  auto* stats = app.add_subcommand("stats", "Dataset statistics table");
  std::vector<std::string> data_paths;
  data::CsvSchema schema;
  bool stats_json = false;
  stats->add_option("--data", data_paths, "CSV file(s)")->required()->check(CLI::ExistingFile);
  stats->add_option("--treatment", schema.treatment, "Treatment column")->capture_default_str();
  stats->add_option("--outcome", schema.outcome, "Outcome column")->capture_default_str();
  stats->add_option("--ignore", schema.ignore, "Columns to skip");
  stats->add_flag("--json", stats_json, "Print JSON");

  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset as CSV");
  std::string spec_path;
  std::string synth_out;
  synth->add_option("--spec", spec_path, "Synthetic spec (JSON)")->required()->check(CLI::ExistingFile);
  synth->add_option("--out", synth_out, "Output CSV (default stdout)");

  auto* report = app.add_subcommand("report", "Render the report of a run directory");
  std::string run_dir;
  std::string format = "md";
  report->add_option("--run", run_dir, "Run directory")->required()->check(CLI::ExistingDirectory);
  report->add_option("--format", format, "md | csv | json")
      ->check(CLI::IsMember({"md", "csv", "json"}))
      ->capture_default_str();

  auto* compare = app.add_subcommand("compare", "Preprocessing deltas of a run directory");
  std::string compare_dir;
  std::string compare_format = "md";
  compare->add_option("--run", compare_dir, "Run directory")->required()->check(CLI::ExistingDirectory);
  compare->add_option("--format", compare_format, "md | json")
      ->check(CLI::IsMember({"md", "json"}))
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config_path, output, workers, quiet);
    if (*stats) return cmd_stats(data_paths, schema, stats_json);
    if (*synth) return cmd_synth(spec_path, synth_out);
    if (*report) return cmd_report(run_dir, format);
    if (*compare) return cmd_compare(compare_dir, compare_format);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
