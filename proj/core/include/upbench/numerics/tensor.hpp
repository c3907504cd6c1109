#pragma once

#include <Eigen/Dense>

#include <array>
#include <string>

namespace upbench {

// Dense row-major matrix of 64-bit reals. Every value in the library that
// flows through a computation graph is two dimensional; scalars are 1x1 and
// per-row quantities are n x 1 columns.
using Tensor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Index = Eigen::Index;

inline std::array<Index, 2> shape_of(const Tensor& t) { return {t.rows(), t.cols()}; }

inline std::string shape_string(const Tensor& t) {
  return "[" + std::to_string(t.rows()) + "x" + std::to_string(t.cols()) + "]";
}

inline bool all_finite(const Tensor& t) { return t.allFinite(); }

}  // namespace upbench
