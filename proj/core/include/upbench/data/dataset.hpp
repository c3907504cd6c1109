#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "upbench/numerics/tensor.hpp"

namespace upbench::data {

// Covariates, binary treatment and binary outcome for n instances, plus the
// true conditional uplift when the data is synthetic.
struct UpliftDataset {
  std::string name;
  std::vector<std::string> feature_names;
  Tensor x;                                   // n x k
  std::vector<std::uint8_t> t;                // n, values in {0,1}
  std::vector<std::uint8_t> y;                // n, values in {0,1}
  std::optional<std::vector<double>> tau_true;

  std::size_t size() const { return t.size(); }
  std::size_t feature_count() const { return static_cast<std::size_t>(x.cols()); }
  std::size_t treated_count() const;
  std::size_t control_count() const { return size() - treated_count(); }
  bool has_both_groups() const;

  // Rows at `indices`, in that order.
  UpliftDataset subset(std::span<const std::size_t> indices) const;

  // Throws DataError if lengths disagree or t/y leave {0,1}.
  void validate() const;
};

// n x 1 columns of the treatment / outcome vectors.
Tensor treatment_column(const UpliftDataset& ds);
Tensor outcome_column(const UpliftDataset& ds);
// Rows (or binary values) at `indices`, in that order.
Tensor gather_rows(const Tensor& x, std::span<const std::size_t> indices);
Tensor gather_column(const std::vector<std::uint8_t>& values, std::span<const std::size_t> indices);

bool operator==(const UpliftDataset& a, const UpliftDataset& b);

}  // namespace upbench::data
