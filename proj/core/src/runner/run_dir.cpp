#include "upbench/runner/run_dir.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "upbench/error.hpp"
#include "upbench/models/checkpoint.hpp"

namespace upbench::runner {

void write_atomic(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string cell_id(const std::string& dataset, const PreprocessCombo& combo,
                    const std::string& model, std::uint64_t seed) {
  std::string id = dataset + "__" + (combo.dedup ? "wID" : "woID") + "_" +
                   (combo.feature_norm ? "wFN" : "woFN") + "__" + model + "__seed" +
                   std::to_string(seed);
  for (char& c : id) {
    const bool safe = std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
    if (!safe) c = '_';
  }
  return id;
}

RunDirectory::RunDirectory(std::filesystem::path root) : root_(std::move(root)) {
  std::filesystem::create_directories(root_);
}

void RunDirectory::write_config(const RunConfig& config) const {
  write_atomic(root_ / "config.json", to_json(config).dump(2) + "\n");
}

void RunDirectory::write_trials(const std::string& cell,
                                const std::vector<tuning::Trial>& trials) const {
  std::string lines;
  for (const auto& trial : trials) lines += nlohmann::json(trial).dump() + "\n";
  write_atomic(root_ / "trials" / (cell + ".jsonl"), lines);
}

void RunDirectory::write_checkpoint(const std::string& cell, models::UpliftModel& model) const {
  models::save_checkpoint(model, root_ / "checkpoints" / cell);
}

void RunDirectory::write_report(const BenchmarkReport& report) const {
  write_atomic(root_ / "report.json", to_json(report, false).dump(2) + "\n");
  write_atomic(root_ / "timings.json", timings_json(report).dump(2) + "\n");
  write_atomic(root_ / "report.csv", to_csv(report));
  write_atomic(root_ / "report.md", to_markdown(report));
  write_atomic(root_ / "compare.md", deltas_to_markdown(compare_preprocessing(report)));
}

BenchmarkReport load_run_report(const std::filesystem::path& run_dir) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(run_dir / "report.json"));
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed report.json: " + std::string(e.what()));
  }
  BenchmarkReport report = report_from_json(j);
  const auto timings = run_dir / "timings.json";
  if (std::filesystem::exists(timings)) {
    merge_timings(report, nlohmann::json::parse(read_file(timings)));
  }
  return report;
}

}  // namespace upbench::runner
