#include "upbench/runner/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "upbench/data/csv.hpp"
#include "upbench/error.hpp"

namespace upbench::runner {

namespace {

using nlohmann::json;

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

MetricSummary summarize(const std::vector<double>& values) {
  MetricSummary s;
  if (values.empty()) return s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

json summary_json(const MetricSummary& s) { return {{"mean", s.mean}, {"std", s.std}}; }

json metrics_json(const metrics::EvalReport& r) {
  return {{"qini", r.qini}, {"auuc", r.auuc}, {"wau", r.wau}, {"lift", r.lift_at_k}};
}

metrics::EvalReport metrics_from_json(const json& j, const char* split, const ReportRow& row,
                                      double k_percent) {
  metrics::EvalReport r;
  r.qini = j.at("qini").get<double>();
  r.auuc = j.at("auuc").get<double>();
  r.wau = j.at("wau").get<double>();
  r.lift_at_k = j.at("lift").get<double>();
  r.k_percent = k_percent;
  r.split = split;
  r.model = row.model;
  r.seed = row.seed;
  return r;
}

// Splits CSV text into records of fields; handles quoted fields.
std::vector<std::vector<std::string>> csv_records(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        fields.push_back(std::move(field));
        records.push_back(std::move(fields));
      }
      fields.clear();
      field.clear();
      any = false;
    } else {
      field.push_back(c);
      any = true;
    }
  }
  if (quoted) throw DataError("unterminated quoted CSV field");
  if (any || !field.empty()) {
    fields.push_back(std::move(field));
    records.push_back(std::move(fields));
  }
  return records;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

double parse_double(const std::string& s, const char* column) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw DataError(std::string("bad number in column ") + column + ": '" + s + "'");
  }
  return v;
}

template <typename T>
T parse_integer(const std::string& s, const char* column) {
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw DataError(std::string("bad integer in column ") + column + ": '" + s + "'");
  }
  return v;
}

const std::vector<std::string> kCsvColumns = {
    "dataset", "dedup", "feature_norm", "model", "seed", "status", "best_trial",
    "rank", "batch_size", "lr", "weight_decay", "alpha", "representation_depth", "head_depth",
    "single_depth", "activation",
    "valid_qini", "valid_auuc", "valid_wau", "valid_lift",
    "test_qini", "test_auuc", "test_wau", "test_lift",
    "seconds", "epochs", "params", "duplicates_removed", "rank_quality", "k_percent", "message"};

std::string opt_real(const std::optional<double>& v) {
  return v ? data::format_real(*v) : std::string();
}

}  // namespace

std::optional<double> ReportRow::metric(std::string_view column) const {
  const bool is_valid = column.starts_with("valid_");
  const auto& r = is_valid ? valid : test;
  if (!r) return std::nullopt;
  const std::string_view name = column.substr(is_valid ? 6 : 5);
  if (name == "qini") return r->qini;
  if (name == "auuc") return r->auuc;
  if (name == "wau") return r->wau;
  if (name == "lift") return r->lift_at_k;
  return std::nullopt;
}

std::string ReportRow::key() const {
  return dataset + "|" + combo.label() + "|" + model + "|" + std::to_string(seed);
}

std::vector<AggregateRow> BenchmarkReport::aggregates() const {
  std::vector<AggregateRow> out;
  std::vector<std::vector<const ReportRow*>> members;
  for (const ReportRow& row : rows) {
    auto it = std::find_if(out.begin(), out.end(), [&](const AggregateRow& a) {
      return a.dataset == row.dataset && a.combo == row.combo && a.model == row.model;
    });
    if (it == out.end()) {
      AggregateRow agg;
      agg.dataset = row.dataset;
      agg.combo = row.combo;
      agg.model = row.model;
      out.push_back(std::move(agg));
      members.emplace_back();
      it = out.end() - 1;
    }
    members[static_cast<std::size_t>(it - out.begin())].push_back(&row);
  }
  for (std::size_t g = 0; g < out.size(); ++g) {
    AggregateRow& agg = out[g];
    std::vector<const ReportRow*> ok;
    for (const ReportRow* r : members[g]) {
      if (r->ok) {
        ok.push_back(r);
      } else {
        ++agg.seeds_failed;
      }
    }
    agg.seeds_ok = ok.size();
    if (ok.empty()) continue;
    for (std::string_view column : kMetricColumns) {
      std::vector<double> values;
      for (const ReportRow* r : ok) {
        if (auto v = r->metric(column)) values.push_back(*v);
      }
      if (!values.empty()) agg.metrics[std::string(column)] = summarize(values);
    }
    std::vector<double> seconds, epochs, params, quality;
    for (const ReportRow* r : ok) {
      if (r->train.seconds) seconds.push_back(*r->train.seconds);
      epochs.push_back(r->train.epochs);
      params.push_back(static_cast<double>(r->train.params));
      if (r->rank_quality) quality.push_back(*r->rank_quality);
    }
    if (seconds.size() == ok.size()) agg.seconds = summarize(seconds);
    agg.epochs = summarize(epochs);
    agg.params = summarize(params);
    if (!quality.empty()) agg.rank_quality = summarize(quality);
    const ReportRow* best = nullptr;
    for (const ReportRow* r : ok) {
      if (r->valid && (!best || r->valid->qini > best->valid->qini)) best = r;
    }
    if (best) agg.best_seed = best->seed;
  }
  return out;
}

json to_json(const BenchmarkReport& report, bool with_timing) {
  json rows = json::array();
  for (const ReportRow& r : report.rows) {
    json train{{"epochs", r.train.epochs}, {"params", r.train.params}};
    if (with_timing && r.train.seconds) train["seconds"] = *r.train.seconds;
    json row{{"dataset", r.dataset},
             {"preprocessing", r.combo.label()},
             {"dedup", r.combo.dedup},
             {"feature_norm", r.combo.feature_norm},
             {"model", r.model},
             {"seed", r.seed},
             {"status", r.ok ? "ok" : "failed"},
             {"message", r.message},
             {"best_trial", nullptr},
             {"config", nullptr},
             {"valid", nullptr},
             {"test", nullptr},
             {"train", train},
             {"duplicates_removed", r.duplicates_removed},
             {"rank_quality", nullptr}};
    if (r.best_trial) row["best_trial"] = *r.best_trial;
    if (r.config) row["config"] = *r.config;
    if (r.valid) row["valid"] = metrics_json(*r.valid);
    if (r.test) row["test"] = metrics_json(*r.test);
    if (r.rank_quality) row["rank_quality"] = *r.rank_quality;
    rows.push_back(std::move(row));
  }
  json aggregates = json::array();
  for (const AggregateRow& a : report.aggregates()) {
    json metrics = json::object();
    for (const auto& [name, s] : a.metrics) metrics[name] = summary_json(s);
    json agg{{"dataset", a.dataset},
             {"preprocessing", a.combo.label()},
             {"dedup", a.combo.dedup},
             {"feature_norm", a.combo.feature_norm},
             {"model", a.model},
             {"seeds_ok", a.seeds_ok},
             {"seeds_failed", a.seeds_failed},
             {"metrics", metrics},
             {"epochs", summary_json(a.epochs)},
             {"params", summary_json(a.params)},
             {"rank_quality", nullptr},
             {"best_seed", nullptr}};
    if (with_timing && a.seconds) agg["seconds"] = summary_json(*a.seconds);
    if (a.rank_quality) agg["rank_quality"] = summary_json(*a.rank_quality);
    if (a.best_seed) agg["best_seed"] = *a.best_seed;
    aggregates.push_back(std::move(agg));
  }
  return {{"schema_version", 1},
          {"k_percent", report.k_percent},
          {"dedup_stage", "before-split"},
          {"rows", rows},
          {"aggregates", aggregates}};
}

BenchmarkReport report_from_json(const json& j) {
  BenchmarkReport report;
  try {
    report.k_percent = j.value("k_percent", 30.0);
    for (const json& jr : j.at("rows")) {
      ReportRow r;
      r.dataset = jr.at("dataset").get<std::string>();
      r.combo = PreprocessCombo{jr.at("dedup").get<bool>(), jr.at("feature_norm").get<bool>()};
      r.model = jr.at("model").get<std::string>();
      r.seed = jr.at("seed").get<std::uint64_t>();
      r.ok = jr.at("status").get<std::string>() == "ok";
      r.message = jr.value("message", std::string());
      if (!jr.value("best_trial", json()).is_null()) r.best_trial = jr["best_trial"].get<std::size_t>();
      if (!jr.value("config", json()).is_null()) r.config = jr["config"].get<models::ModelHyperparams>();
      if (!jr.value("valid", json()).is_null()) {
        r.valid = metrics_from_json(jr["valid"], "valid", r, report.k_percent);
      }
      if (!jr.value("test", json()).is_null()) {
        r.test = metrics_from_json(jr["test"], "test", r, report.k_percent);
      }
      const json& train = jr.at("train");
      r.train.epochs = train.at("epochs").get<int>();
      r.train.params = train.at("params").get<std::size_t>();
      if (train.contains("seconds") && !train["seconds"].is_null()) {
        r.train.seconds = train["seconds"].get<double>();
      }
      r.duplicates_removed = jr.value("duplicates_removed", std::size_t{0});
      if (!jr.value("rank_quality", json()).is_null()) r.rank_quality = jr["rank_quality"].get<double>();
      report.rows.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed report: ") + e.what());
  }
  return report;
}

json timings_json(const BenchmarkReport& report) {
  json t = json::object();
  for (const ReportRow& r : report.rows) {
    if (r.train.seconds) t[r.key()] = *r.train.seconds;
  }
  return {{"clock", "steady"},
          {"unit", "seconds per epoch"},
          {"note", "wall time is machine dependent and not comparable across hosts"},
          {"rows", t}};
}

void merge_timings(BenchmarkReport& report, const json& timings) {
  const json rows = timings.value("rows", json::object());
  for (ReportRow& r : report.rows) {
    auto it = rows.find(r.key());
    if (it != rows.end()) r.train.seconds = it->get<double>();
  }
}

std::string to_csv(const BenchmarkReport& report) {
  std::ostringstream out;
  for (std::size_t i = 0; i < kCsvColumns.size(); ++i) out << (i ? "," : "") << kCsvColumns[i];
  out << '\n';
  for (const ReportRow& r : report.rows) {
    std::vector<std::string> f;
    f.push_back(csv_escape(r.dataset));
    f.push_back(r.combo.dedup ? "1" : "0");
    f.push_back(r.combo.feature_norm ? "1" : "0");
    f.push_back(csv_escape(r.model));
    f.push_back(std::to_string(r.seed));
    f.push_back(r.ok ? "ok" : "failed");
    f.push_back(r.best_trial ? std::to_string(*r.best_trial) : "");
    if (r.config) {
      const auto& c = *r.config;
      f.push_back(std::to_string(c.rank));
      f.push_back(std::to_string(c.batch_size));
      f.push_back(data::format_real(c.lr));
      f.push_back(data::format_real(c.weight_decay));
      f.push_back(data::format_real(c.alpha));
      f.push_back(std::to_string(c.representation_depth));
      f.push_back(std::to_string(c.head_depth));
      f.push_back(std::to_string(c.single_depth));
      f.push_back(c.activation == nn::Activation::Elu ? "elu" : "tanh");
    } else {
      f.insert(f.end(), 9, "");
    }
    for (std::string_view column : kMetricColumns) f.push_back(opt_real(r.metric(column)));
    f.push_back(opt_real(r.train.seconds));
    f.push_back(std::to_string(r.train.epochs));
    f.push_back(std::to_string(r.train.params));
    f.push_back(std::to_string(r.duplicates_removed));
    f.push_back(opt_real(r.rank_quality));
    f.push_back(data::format_real(report.k_percent));
    f.push_back(csv_escape(r.message));
    for (std::size_t i = 0; i < f.size(); ++i) out << (i ? "," : "") << f[i];
    out << '\n';
  }
  return out.str();
}

BenchmarkReport report_from_csv(std::string_view text) {
  const auto records = csv_records(text);
  if (records.empty()) throw DataError("report CSV has no header");
  if (records.front() != kCsvColumns) throw DataError("unexpected report CSV header");
  BenchmarkReport report;
  for (std::size_t line = 1; line < records.size(); ++line) {
    const auto& f = records[line];
    if (f.size() != kCsvColumns.size()) {
      throw DataError("report CSV row " + std::to_string(line) + " has " +
                      std::to_string(f.size()) + " fields");
    }
    auto col = [&](const char* name) -> const std::string& {
      const auto it = std::find(kCsvColumns.begin(), kCsvColumns.end(), name);
      return f[static_cast<std::size_t>(it - kCsvColumns.begin())];
    };
    report.k_percent = parse_double(col("k_percent"), "k_percent");
    ReportRow r;
    r.dataset = col("dataset");
    r.combo = PreprocessCombo{col("dedup") == "1", col("feature_norm") == "1"};
    r.model = col("model");
    r.seed = parse_integer<std::uint64_t>(col("seed"), "seed");
    r.ok = col("status") == "ok";
    if (!col("best_trial").empty()) r.best_trial = parse_integer<std::size_t>(col("best_trial"), "best_trial");
    if (!col("rank").empty()) {
      models::ModelHyperparams c;
      c.rank = parse_integer<int>(col("rank"), "rank");
      c.batch_size = parse_integer<int>(col("batch_size"), "batch_size");
      c.lr = parse_double(col("lr"), "lr");
      c.weight_decay = parse_double(col("weight_decay"), "weight_decay");
      c.alpha = parse_double(col("alpha"), "alpha");
      c.representation_depth = parse_integer<int>(col("representation_depth"), "representation_depth");
      c.head_depth = parse_integer<int>(col("head_depth"), "head_depth");
      c.single_depth = parse_integer<int>(col("single_depth"), "single_depth");
      c.activation = col("activation") == "tanh" ? nn::Activation::Tanh : nn::Activation::Elu;
      r.config = c;
    }
    for (const char* split : {"valid", "test"}) {
      const std::string prefix = std::string(split) + "_";
      if (col((prefix + "qini").c_str()).empty()) continue;
      metrics::EvalReport e;
      e.qini = parse_double(col((prefix + "qini").c_str()), "qini");
      e.auuc = parse_double(col((prefix + "auuc").c_str()), "auuc");
      e.wau = parse_double(col((prefix + "wau").c_str()), "wau");
      e.lift_at_k = parse_double(col((prefix + "lift").c_str()), "lift");
      e.k_percent = report.k_percent;
      e.split = split;
      e.model = r.model;
      e.seed = r.seed;
      (std::string(split) == "valid" ? r.valid : r.test) = e;
    }
    if (!col("seconds").empty()) r.train.seconds = parse_double(col("seconds"), "seconds");
    r.train.epochs = parse_integer<int>(col("epochs"), "epochs");
    r.train.params = parse_integer<std::size_t>(col("params"), "params");
    r.duplicates_removed = parse_integer<std::size_t>(col("duplicates_removed"), "duplicates_removed");
    if (!col("rank_quality").empty()) r.rank_quality = parse_double(col("rank_quality"), "rank_quality");
    r.message = col("message");
    report.rows.push_back(std::move(r));
  }
  return report;
}

std::string to_markdown(const BenchmarkReport& report) {
  const std::string k = data::format_real(report.k_percent);
  std::string header = "| Model | Valid QINI | Valid AUUC | Valid WAU | Valid LIFT@" + k +
                       " | Test QINI | Test AUUC | Test WAU | Test LIFT@" + k +
                       " | Time(s) | Epochs | Params |\n"
                       "|---|---|---|---|---|---|---|---|---|---|---|---|\n";
  const auto aggregates = report.aggregates();
  if (aggregates.empty()) return header;

  std::ostringstream out;
  std::vector<std::pair<std::string, PreprocessCombo>> tables;
  for (const auto& a : aggregates) {
    const std::pair<std::string, PreprocessCombo> key{a.dataset, a.combo};
    if (std::find(tables.begin(), tables.end(), key) == tables.end()) tables.push_back(key);
  }
  bool first = true;
  for (const auto& [dataset, combo] : tables) {
    std::vector<const AggregateRow*> group;
    for (const auto& a : aggregates) {
      if (a.dataset == dataset && a.combo == combo) group.push_back(&a);
    }
    std::size_t seeds = 0;
    for (const auto* a : group) seeds = std::max(seeds, a->seeds_ok + a->seeds_failed);
    if (!first) out << '\n';
    first = false;
    out << "### " << dataset << ", " << combo.label() << " (mean over " << seeds
        << (seeds == 1 ? " seed" : " seeds") << ")\n\n"
        << header;

    // Dense rank of displayed values per metric column, highest first.
    std::map<std::string, std::vector<std::string>> ranked;
    for (std::string_view column : kMetricColumns) {
      std::set<double, std::greater<>> values;
      for (const auto* a : group) {
        auto it = a->metrics.find(std::string(column));
        if (it != a->metrics.end()) values.insert(std::stod(fixed(it->second.mean, 4)));
      }
      for (double v : values) ranked[std::string(column)].push_back(fixed(v, 4));
    }
    for (const auto* a : group) {
      out << "| " << a->model;
      for (std::string_view column : kMetricColumns) {
        auto it = a->metrics.find(std::string(column));
        if (it == a->metrics.end()) {
          out << " | " << (a->seeds_ok == 0 ? "failed" : "-");
          continue;
        }
        const std::string cell = fixed(it->second.mean, 4);
        const auto& order = ranked[std::string(column)];
        const auto pos = std::find(order.begin(), order.end(), cell) - order.begin();
        if (pos == 0) {
          out << " | **" << cell << "**";
        } else if (pos <= 2) {
          out << " | <u>" << cell << "</u>";
        } else {
          out << " | " << cell;
        }
      }
      if (a->seeds_ok == 0) {
        out << " | - | - | - |\n";
        continue;
      }
      out << " | " << (a->seconds ? fixed(a->seconds->mean, 2) : std::string("-"));
      out << " | " << fixed(a->epochs.mean, a->epochs.mean == std::round(a->epochs.mean) ? 0 : 1);
      out << " | " << fixed(std::round(a->params.mean), 0) << " |\n";
    }
  }
  return out.str();
}

std::vector<PreprocessDelta> compare_preprocessing(const BenchmarkReport& report) {
  const auto aggregates = report.aggregates();
  auto find = [&](const std::string& dataset, const std::string& model,
                  PreprocessCombo combo) -> const AggregateRow* {
    for (const auto& a : aggregates) {
      if (a.dataset == dataset && a.model == model && a.combo == combo) return &a;
    }
    return nullptr;
  };
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const auto& a : aggregates) {
    const std::pair<std::string, std::string> key{a.dataset, a.model};
    if (std::find(pairs.begin(), pairs.end(), key) == pairs.end()) pairs.push_back(key);
  }

  std::vector<PreprocessDelta> out;
  for (const auto& [dataset, model] : pairs) {
    for (PreprocessFactor factor : {PreprocessFactor::Dedup, PreprocessFactor::FeatureNorm}) {
      for (bool other : {false, true}) {
        const PreprocessCombo with = factor == PreprocessFactor::Dedup
                                         ? PreprocessCombo{true, other}
                                         : PreprocessCombo{other, true};
        const PreprocessCombo without = factor == PreprocessFactor::Dedup
                                            ? PreprocessCombo{false, other}
                                            : PreprocessCombo{other, false};
        const AggregateRow* a = find(dataset, model, with);
        const AggregateRow* b = find(dataset, model, without);
        for (std::string_view column : kMetricColumns) {
          PreprocessDelta d{dataset, model, std::string(column), factor, other, std::nullopt};
          if (a && b) {
            auto ia = a->metrics.find(d.metric);
            auto ib = b->metrics.find(d.metric);
            if (ia != a->metrics.end() && ib != b->metrics.end()) {
              d.delta = ia->second.mean - ib->second.mean;
            }
          }
          out.push_back(std::move(d));
        }
      }
    }
  }
  return out;
}

namespace {

std::string factor_label(const PreprocessDelta& d) {
  if (d.factor == PreprocessFactor::Dedup) {
    return std::string("w/ID - w/oID at ") + (d.other_enabled ? "w/FN" : "w/oFN");
  }
  return std::string("w/FN - w/oFN at ") + (d.other_enabled ? "w/ID" : "w/oID");
}

}  // namespace

std::string deltas_to_markdown(const std::vector<PreprocessDelta>& deltas) {
  std::ostringstream out;
  out << "| Dataset | Model | Comparison | Metric | Delta |\n|---|---|---|---|---|\n";
  for (const auto& d : deltas) {
    std::string value = "absent";
    if (d.delta) value = (*d.delta >= 0 ? "+" : "") + fixed(*d.delta, 4);
    out << "| " << d.dataset << " | " << d.model << " | " << factor_label(d) << " | " << d.metric
        << " | " << value << " |\n";
  }
  return out.str();
}

json deltas_to_json(const std::vector<PreprocessDelta>& deltas) {
  json out = json::array();
  for (const auto& d : deltas) {
    out.push_back({{"dataset", d.dataset},
                   {"model", d.model},
                   {"metric", d.metric},
                   {"factor", d.factor == PreprocessFactor::Dedup ? "dedup" : "feature_norm"},
                   {"fixed", d.factor == PreprocessFactor::Dedup
                                 ? (d.other_enabled ? "w/FN" : "w/oFN")
                                 : (d.other_enabled ? "w/ID" : "w/oID")},
                   {"delta", d.delta ? json(*d.delta) : json(nullptr)}});
  }
  return out;
}

}  // namespace upbench::runner
