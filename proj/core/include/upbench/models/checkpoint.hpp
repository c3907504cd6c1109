#pragma once

#include <filesystem>
#include <memory>

#include <nlohmann/json_fwd.hpp>

#include "upbench/models/model.hpp"

namespace upbench::models {

// A checkpoint is a pair of files: `<stem>.bin` holding every named tensor
// (parameters and batch-norm statistics) and `<stem>.json`, a manifest with
// the model kind, feature count, hyperparameters, seed and tensor shapes.
// Both are written to a temporary name and renamed into place.
void save_checkpoint(UpliftModel& model, const std::filesystem::path& stem);

// Rebuilds the model from the manifest and loads its tensors. Throws
// DataError on a malformed or mismatched file.
std::unique_ptr<UpliftModel> load_checkpoint(const std::filesystem::path& stem);

nlohmann::json checkpoint_manifest(UpliftModel& model);

}  // namespace upbench::models
