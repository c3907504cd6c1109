#include "upbench/data/dataset.hpp"

#include <algorithm>

#include "upbench/error.hpp"

namespace upbench::data {

std::size_t UpliftDataset::treated_count() const {
  return static_cast<std::size_t>(std::count(t.begin(), t.end(), std::uint8_t{1}));
}

bool UpliftDataset::has_both_groups() const {
  const std::size_t treated = treated_count();
  return treated > 0 && treated < size();
}

UpliftDataset UpliftDataset::subset(std::span<const std::size_t> indices) const {
  UpliftDataset out;
  out.name = name;
  out.feature_names = feature_names;
  out.x = gather_rows(x, indices);
  out.t.reserve(indices.size());
  out.y.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= size()) throw DataError("subset index " + std::to_string(i) + " out of range");
    out.t.push_back(t[i]);
    out.y.push_back(y[i]);
  }
  if (tau_true) {
    std::vector<double> tau;
    tau.reserve(indices.size());
    for (std::size_t i : indices) tau.push_back((*tau_true)[i]);
    out.tau_true = std::move(tau);
  }
  return out;
}

void UpliftDataset::validate() const {
  const std::size_t n = size();
  if (y.size() != n || static_cast<std::size_t>(x.rows()) != n) {
    throw DataError("dataset '" + name + "': covariate, treatment and outcome lengths differ");
  }
  if (tau_true && tau_true->size() != n) {
    throw DataError("dataset '" + name + "': tau_true length differs from row count");
  }
  if (!feature_names.empty() && feature_names.size() != feature_count()) {
    throw DataError("dataset '" + name + "': feature name count differs from column count");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (t[i] > 1) throw DataError("non-binary treatment at row " + std::to_string(i));
    if (y[i] > 1) throw DataError("non-binary outcome at row " + std::to_string(i));
  }
}

Tensor gather_rows(const Tensor& x, std::span<const std::size_t> indices) {
  Tensor out(static_cast<Index>(indices.size()), x.cols());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    if (indices[r] >= static_cast<std::size_t>(x.rows())) {
      throw DataError("row index " + std::to_string(indices[r]) + " out of range");
    }
    out.row(static_cast<Index>(r)) = x.row(static_cast<Index>(indices[r]));
  }
  return out;
}

Tensor gather_column(const std::vector<std::uint8_t>& values,
                     std::span<const std::size_t> indices) {
  Tensor out(static_cast<Index>(indices.size()), 1);
  for (std::size_t r = 0; r < indices.size(); ++r) {
    out(static_cast<Index>(r), 0) = static_cast<double>(values.at(indices[r]));
  }
  return out;
}

Tensor treatment_column(const UpliftDataset& ds) {
  Tensor out(static_cast<Index>(ds.size()), 1);
  for (std::size_t i = 0; i < ds.size(); ++i) out(static_cast<Index>(i), 0) = ds.t[i];
  return out;
}

Tensor outcome_column(const UpliftDataset& ds) {
  Tensor out(static_cast<Index>(ds.size()), 1);
  for (std::size_t i = 0; i < ds.size(); ++i) out(static_cast<Index>(i), 0) = ds.y[i];
  return out;
}

bool operator==(const UpliftDataset& a, const UpliftDataset& b) {
  return a.feature_names == b.feature_names && a.x.rows() == b.x.rows() &&
         a.x.cols() == b.x.cols() && a.x == b.x && a.t == b.t && a.y == b.y &&
         a.tau_true == b.tau_true;
}

}  // namespace upbench::data
