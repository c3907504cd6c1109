#include "upbench/runner/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>

#include <nlohmann/json.hpp>

#include "upbench/error.hpp"

namespace upbench::runner {

namespace {

using nlohmann::json;

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_relative() && !base.empty()) return base / path;
  return path;
}

DatasetSource parse_dataset(const json& j, const std::filesystem::path& base) {
  DatasetSource src;
  const std::string type = j.value("type", std::string("csv"));
  if (type == "synthetic") {
    src.kind = DatasetSource::Kind::Synthetic;
    src.synthetic = j.value("spec", json::object()).get<synthetic::SyntheticSpec>();
    src.name = j.value("name", src.synthetic.name);
    src.synthetic.name = src.name;
    return src;
  }
  if (type != "csv") throw ConfigError("unknown dataset type '" + type + "'");
  src.kind = DatasetSource::Kind::Csv;
  if (!j.contains("train")) throw ConfigError("csv dataset needs a 'train' path");
  src.train_path = resolve(base, j.at("train").get<std::string>());
  src.name = j.value("name", src.train_path.stem().string());
  if (j.contains("test") && !j["test"].is_null()) {
    src.test_path = resolve(base, j["test"].get<std::string>());
  }
  const json schema = j.value("schema", json::object());
  src.schema.features = schema.value("features", std::vector<std::string>{});
  src.schema.treatment = schema.value("treatment", src.schema.treatment);
  src.schema.outcome = schema.value("outcome", src.schema.outcome);
  src.schema.ignore = schema.value("ignore", std::vector<std::string>{});
  if (schema.contains("tau") && !schema["tau"].is_null()) {
    src.schema.tau_column = schema["tau"].get<std::string>();
  }
  return src;
}

json dataset_to_json(const DatasetSource& src) {
  if (src.kind == DatasetSource::Kind::Synthetic) {
    return {{"type", "synthetic"}, {"name", src.name}, {"spec", src.synthetic}};
  }
  json schema{{"features", src.schema.features},
              {"treatment", src.schema.treatment},
              {"outcome", src.schema.outcome},
              {"ignore", src.schema.ignore},
              {"tau", nullptr}};
  if (src.schema.tau_column) schema["tau"] = *src.schema.tau_column;
  json j{{"type", "csv"}, {"name", src.name}, {"train", src.train_path.string()},
         {"test", nullptr}, {"schema", schema}};
  if (src.test_path) j["test"] = src.test_path->string();
  return j;
}

}  // namespace

std::string PreprocessCombo::label() const {
  return std::string(dedup ? "w/ID" : "w/oID") + " " + (feature_norm ? "w/FN" : "w/oFN");
}

std::vector<PreprocessCombo> all_preprocess_combos() {
  return {{true, false}, {true, true}, {false, false}, {false, true}};
}

std::vector<PreprocessCombo> RunConfig::combos() const {
  if (matrix) return all_preprocess_combos();
  return {preprocessing.value_or(PreprocessCombo{})};
}

void RunConfig::validate() const {
  if (datasets.empty()) throw ConfigError("config names no dataset");
  if (models.empty()) throw ConfigError("config names no model");
  if (matrix && preprocessing) {
    throw ConfigError("preprocessing flags and matrix mode are mutually exclusive");
  }
  if (seeds.empty()) throw ConfigError("seed list is empty");
  if (budget < 1) throw ConfigError("search budget must be at least 1");
  if (train.max_epochs < 0) throw ConfigError("max_epochs must be non-negative");
  if (train.patience < 1) throw ConfigError("patience must be at least 1");
  if (workers < 1) throw ConfigError("workers must be at least 1");
  if (!(k_percent > 0.0 && k_percent <= 100.0)) throw ConfigError("k_percent must lie in (0, 100]");
  for (const auto& ds : datasets) {
    const bool fixed = split.strategy == data::SplitStrategy::FixedTest;
    if (ds.kind == DatasetSource::Kind::Csv && fixed && !ds.test_path) {
      throw ConfigError("dataset '" + ds.name + "' needs a test file for the fixed-test split");
    }
    if (ds.kind == DatasetSource::Kind::Synthetic && fixed) {
      throw ConfigError("synthetic datasets use the three-way split");
    }
  }
}

RunConfig parse_run_config(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig c;
  try {
    if (j.contains("dataset")) c.datasets.push_back(parse_dataset(j["dataset"], base_dir));
    if (j.contains("datasets")) {
      for (const auto& d : j["datasets"]) c.datasets.push_back(parse_dataset(d, base_dir));
    }
    for (const auto& m : j.value("models", json::array())) {
      c.models.push_back(models::parse_model_kind(m.get<std::string>()));
    }
    if (j.contains("preprocessing")) {
      const json& p = j["preprocessing"];
      if (p.is_string()) {
        if (p.get<std::string>() != "matrix") {
          throw ConfigError("preprocessing must be an object or \"matrix\"");
        }
        c.matrix = true;
      } else {
        c.preprocessing = PreprocessCombo{p.value("dedup", false), p.value("feature_norm", false)};
        if (p.value("matrix", false)) c.matrix = true;
      }
    }
    if (j.contains("matrix")) c.matrix = c.matrix || j["matrix"].get<bool>();
    c.dedup_scope = data::parse_dedup_scope(j.value("dedup_scope", std::string("row")));
    if (j.contains("split")) {
      const json& s = j["split"];
      c.split.strategy =
          data::parse_split_strategy(s.value("strategy", std::string("three-way-random")));
      c.split.ratios = c.split.strategy == data::SplitStrategy::FixedTest
                           ? std::vector<double>{0.9, 0.1}
                           : std::vector<double>{0.8, 0.1, 0.1};
      c.split.ratios = s.value("ratios", c.split.ratios);
    }
    if (j.contains("seeds")) c.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    const json search = j.value("search", json::object());
    c.budget = search.value("budget", c.budget);
    c.strategy = tuning::parse_search_strategy(search.value("strategy", std::string("random")));
    if (search.contains("space")) c.space = tuning::search_space_from_json(search["space"]);
    c.train.max_epochs = search.value("max_epochs", c.train.max_epochs);
    c.train.patience = search.value("patience", c.train.patience);
    c.train.metric =
        models::parse_stopping_metric(search.value("stopping_metric", std::string("valid-qini")));
    if (j.contains("architecture")) {
      c.architecture = j["architecture"].get<models::ModelHyperparams>();
    }
    c.k_percent = j.value("k_percent", c.k_percent);
    if (j.contains("output_dir")) c.output_dir = resolve(base_dir, j["output_dir"].get<std::string>());
    c.workers = j.value("workers", c.workers);
    c.save_checkpoints = j.value("save_checkpoints", c.save_checkpoints);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_run_config(j, path.parent_path());
}

json to_json(const RunConfig& c) {
  json datasets = json::array();
  for (const auto& d : c.datasets) datasets.push_back(dataset_to_json(d));
  json model_names = json::array();
  for (auto m : c.models) model_names.push_back(models::to_string(m));
  json j{{"datasets", datasets},
         {"models", model_names},
         {"dedup_scope", data::to_string(c.dedup_scope)},
         {"split", {{"strategy", data::to_string(c.split.strategy)}, {"ratios", c.split.ratios}}},
         {"seeds", c.seeds},
         {"search",
          {{"budget", c.budget},
           {"strategy", tuning::to_string(c.strategy)},
           {"space", c.space},
           {"max_epochs", c.train.max_epochs},
           {"patience", c.train.patience},
           {"stopping_metric", models::to_string(c.train.metric)}}},
         {"architecture", c.architecture},
         {"k_percent", c.k_percent},
         {"output_dir", c.output_dir.string()},
         {"workers", c.workers},
         {"save_checkpoints", c.save_checkpoints}};
  if (c.matrix) {
    j["preprocessing"] = "matrix";
  } else if (c.preprocessing) {
    j["preprocessing"] = {{"dedup", c.preprocessing->dedup},
                          {"feature_norm", c.preprocessing->feature_norm}};
  }
  return j;
}

void apply_env_overrides(RunConfig& config) {
  if (const char* dir = std::getenv("BENCH_OUTPUT_DIR"); dir && *dir) config.output_dir = dir;
  if (const char* w = std::getenv("BENCH_WORKERS"); w && *w) {
    std::size_t value = 0;
    const char* end = w + std::char_traits<char>::length(w);
    auto [ptr, ec] = std::from_chars(w, end, value);
    if (ec != std::errc() || ptr != end || value < 1) {
      throw ConfigError("BENCH_WORKERS must be a positive integer");
    }
    config.workers = value;
  }
}

}  // namespace upbench::runner
