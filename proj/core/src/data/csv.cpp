#include "upbench/data/csv.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "upbench/error.hpp"

namespace upbench::data {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' ||
                        s.back() == '"')) {
    s.remove_suffix(1);
  }
  return s;
}

void split_fields(std::string_view line, std::vector<std::string_view>& out) {
  out.clear();
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return;
    }
    out.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

double parse_real(std::string_view field, std::size_t row, std::string_view column) {
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw DataError("row " + std::to_string(row) + ", column '" + std::string(column) +
                    "': cannot parse '" + std::string(field) + "' as a real");
  }
  return value;
}

std::uint8_t parse_binary(std::string_view field, std::size_t row, std::string_view column) {
  const double v = parse_real(field, row, column);
  if (v == 0.0) return 0;
  if (v == 1.0) return 1;
  throw DataError("row " + std::to_string(row) + ", column '" + std::string(column) +
                  "': value '" + std::string(field) + "' is not binary (0/1)");
}

}  // namespace

UpliftDataset parse_csv(std::string_view text, const CsvSchema& schema, std::string name) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  auto next_line = [&](std::string_view& line) {
    while (pos < text.size()) {
      std::size_t end = text.find('\n', pos);
      if (end == std::string_view::npos) end = text.size();
      line = text.substr(pos, end - pos);
      pos = end + 1;
      if (!trim(line).empty()) return true;
    }
    return false;
  };

  std::string_view header_line;
  if (!next_line(header_line)) throw DataError("csv '" + name + "' is empty");
  split_fields(header_line, fields);
  std::vector<std::string> header(fields.begin(), fields.end());
  std::unordered_map<std::string, std::size_t> column_index;
  for (std::size_t i = 0; i < header.size(); ++i) column_index.emplace(header[i], i);

  auto require = [&](const std::string& column) {
    auto it = column_index.find(column);
    if (it == column_index.end()) {
      throw DataError("csv '" + name + "': missing column '" + column + "'");
    }
    return it->second;
  };

  const std::size_t t_col = require(schema.treatment);
  const std::size_t y_col = require(schema.outcome);
  std::optional<std::size_t> tau_col;
  if (schema.tau_column) {
    tau_col = require(*schema.tau_column);
  } else if (auto it = column_index.find(std::string(kTauColumn));
             it != column_index.end() &&
             std::find(schema.features.begin(), schema.features.end(), kTauColumn) ==
                 schema.features.end()) {
    tau_col = it->second;
  }

  std::vector<std::size_t> feature_cols;
  std::vector<std::string> feature_names;
  if (!schema.features.empty()) {
    for (const auto& f : schema.features) {
      feature_cols.push_back(require(f));
      feature_names.push_back(f);
    }
  } else {
    for (const auto& ignored : schema.ignore) require(ignored);
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (i == t_col || i == y_col || (tau_col && i == *tau_col)) continue;
      if (std::find(schema.ignore.begin(), schema.ignore.end(), header[i]) != schema.ignore.end()) {
        continue;
      }
      feature_cols.push_back(i);
      feature_names.push_back(header[i]);
    }
  }
  if (feature_cols.empty()) throw DataError("csv '" + name + "': no feature columns");

  const std::size_t k = feature_cols.size();
  std::vector<double> values;
  UpliftDataset ds;
  ds.name = std::move(name);
  ds.feature_names = std::move(feature_names);
  std::vector<double> tau;

  std::string_view line;
  std::size_t row = 0;
  while (next_line(line)) {
    split_fields(line, fields);
    if (fields.size() != header.size()) {
      throw DataError("csv '" + ds.name + "': row " + std::to_string(row) + " has " +
                      std::to_string(fields.size()) + " fields, header has " +
                      std::to_string(header.size()));
    }
    for (std::size_t c : feature_cols) values.push_back(parse_real(fields[c], row, header[c]));
    ds.t.push_back(parse_binary(fields[t_col], row, header[t_col]));
    ds.y.push_back(parse_binary(fields[y_col], row, header[y_col]));
    if (tau_col) tau.push_back(parse_real(fields[*tau_col], row, header[*tau_col]));
    ++row;
  }

  ds.x = Eigen::Map<Tensor>(values.data(), static_cast<Index>(row), static_cast<Index>(k));
  if (tau_col) ds.tau_true = std::move(tau);
  return ds;
}

UpliftDataset load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open csv file '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  return parse_csv(text, schema, path.stem().string());
}

std::string format_real(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw DataError("cannot format real");
  return std::string(buf, ptr);
}

void write_csv(const UpliftDataset& ds, std::ostream& out) {
  ds.validate();
  const std::size_t k = ds.feature_count();
  for (std::size_t j = 0; j < k; ++j) {
    out << (ds.feature_names.empty() ? "x" + std::to_string(j) : ds.feature_names[j]) << ',';
  }
  out << "treatment,outcome";
  if (ds.tau_true) out << ',' << kTauColumn;
  out << '\n';
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      out << format_real(ds.x(static_cast<Index>(i), static_cast<Index>(j))) << ',';
    }
    out << static_cast<int>(ds.t[i]) << ',' << static_cast<int>(ds.y[i]);
    if (ds.tau_true) out << ',' << format_real((*ds.tau_true)[i]);
    out << '\n';
  }
}

void write_csv(const UpliftDataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write csv file '" + path.string() + "'");
  write_csv(ds, out);
}

}  // namespace upbench::data
