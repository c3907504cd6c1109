#include "upbench/models/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "upbench/error.hpp"

namespace upbench::models {

namespace {

constexpr char kMagic[4] = {'U', 'P', 'B', 'T'};
constexpr std::uint32_t kVersion = 1;

std::filesystem::path with_suffix(const std::filesystem::path& stem, const char* suffix) {
  return std::filesystem::path(stem.string() + suffix);
}

std::vector<std::pair<std::string, Tensor*>> named_tensors(UpliftModel& model) {
  std::vector<std::pair<std::string, Tensor*>> out;
  for (nn::Parameter* p : model.parameters().all()) out.emplace_back(p->name, &p->value);
  for (auto& entry : model.buffers()) out.push_back(entry);
  return out;
}

template <typename T>
void put(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw DataError("truncated checkpoint");
  return value;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

nlohmann::json checkpoint_manifest(UpliftModel& model) {
  nlohmann::json tensors = nlohmann::json::array();
  for (const auto& [name, tensor] : named_tensors(model)) {
    tensors.push_back({{"name", name}, {"rows", tensor->rows()}, {"cols", tensor->cols()}});
  }
  return {{"format", "upbench-checkpoint"},
          {"version", kVersion},
          {"model", to_string(model.kind())},
          {"features", model.feature_count()},
          {"feature_norm", model.feature_norm()},
          {"seed", model.seed()},
          {"hyperparams", model.hyperparams()},
          {"parameter_count", model.parameter_count()},
          {"telemetry",
           {{"epochs_run", model.telemetry.epochs_run},
            {"best_epoch", model.telemetry.best_epoch},
            {"seconds", model.telemetry.seconds}}},
          {"tensors", tensors}};
}

void save_checkpoint(UpliftModel& model, const std::filesystem::path& stem) {
  if (stem.has_parent_path()) std::filesystem::create_directories(stem.parent_path());
  std::ostringstream bin(std::ios::binary);
  bin.write(kMagic, sizeof(kMagic));
  const auto tensors = named_tensors(model);
  put(bin, kVersion);
  put(bin, static_cast<std::uint64_t>(tensors.size()));
  for (const auto& [name, tensor] : tensors) {
    put(bin, static_cast<std::uint32_t>(name.size()));
    bin.write(name.data(), static_cast<std::streamsize>(name.size()));
    put(bin, static_cast<std::uint64_t>(tensor->rows()));
    put(bin, static_cast<std::uint64_t>(tensor->cols()));
    bin.write(reinterpret_cast<const char*>(tensor->data()),
              static_cast<std::streamsize>(sizeof(double) * tensor->size()));
  }
  write_file_atomic(with_suffix(stem, ".bin"), bin.str());
  write_file_atomic(with_suffix(stem, ".json"), checkpoint_manifest(model).dump(2) + "\n");
}

std::unique_ptr<UpliftModel> load_checkpoint(const std::filesystem::path& stem) {
  const auto manifest_path = with_suffix(stem, ".json");
  std::ifstream manifest_in(manifest_path);
  if (!manifest_in) throw DataError("cannot open " + manifest_path.string());
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(manifest_in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed checkpoint manifest: " + std::string(e.what()));
  }
  auto model = build_model(parse_model_kind(manifest.at("model").get<std::string>()),
                           manifest.at("features").get<std::size_t>(),
                           manifest.at("hyperparams").get<ModelHyperparams>(),
                           manifest.at("feature_norm").get<bool>(),
                           manifest.at("seed").get<std::uint64_t>());
  if (manifest.contains("telemetry")) {
    const auto& tel = manifest["telemetry"];
    model->telemetry.epochs_run = tel.value("epochs_run", 0);
    model->telemetry.best_epoch = tel.value("best_epoch", 0);
    model->telemetry.seconds = tel.value("seconds", 0.0);
  }

  const auto bin_path = with_suffix(stem, ".bin");
  std::ifstream in(bin_path, std::ios::binary);
  if (!in) throw DataError("cannot open " + bin_path.string());
  char magic[4];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(magic)) != 0) {
    throw DataError("not a checkpoint: " + bin_path.string());
  }
  if (get<std::uint32_t>(in) != kVersion) throw DataError("unsupported checkpoint version");
  const auto count = get<std::uint64_t>(in);

  std::map<std::string, Tensor*> targets;
  for (auto& [name, tensor] : named_tensors(*model)) targets.emplace(name, tensor);
  if (count != targets.size()) throw DataError("checkpoint tensor count mismatch");
  for (std::uint64_t i = 0; i < count; ++i) {
    std::string name(get<std::uint32_t>(in), '\0');
    in.read(name.data(), static_cast<std::streamsize>(name.size()));
    const auto rows = static_cast<Index>(get<std::uint64_t>(in));
    const auto cols = static_cast<Index>(get<std::uint64_t>(in));
    auto it = targets.find(name);
    if (it == targets.end()) throw DataError("unexpected tensor '" + name + "' in checkpoint");
    Tensor& dst = *it->second;
    if (dst.rows() != rows || dst.cols() != cols) {
      throw DataError("shape mismatch for tensor '" + name + "'");
    }
    in.read(reinterpret_cast<char*>(dst.data()),
            static_cast<std::streamsize>(sizeof(double) * dst.size()));
    if (!in) throw DataError("truncated checkpoint");
  }
  return model;
}

}  // namespace upbench::models
