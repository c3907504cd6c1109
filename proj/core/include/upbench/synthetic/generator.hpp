#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "upbench/data/dataset.hpp"

namespace upbench::synthetic {

enum class AssignmentMode { Rct, Confounded };

std::string_view to_string(AssignmentMode mode);
AssignmentMode parse_assignment_mode(std::string_view text);

// Logistic outcome model with known potential outcomes:
//   P(y=1 | x, t) = sigmoid(base_intercept + a.x + t * (uplift_intercept + b.x))
// x ~ N(0, I). Treatment is Bernoulli(p) in Rct mode and
// Bernoulli(sigmoid(c.x)) in Confounded mode. a, b and c are seeded Gaussian
// directions normalized to the given lengths.
struct SyntheticSpec {
  std::size_t n = 10000;
  std::size_t k = 10;
  AssignmentMode mode = AssignmentMode::Rct;
  double treatment_probability = 0.5;
  double confounding_scale = 1.0;
  double base_scale = 1.0;
  double uplift_scale = 1.0;
  double base_intercept = -1.0;
  double uplift_intercept = 0.0;
  // When set, uplift_intercept is solved for so that mean(tau_true) over the
  // sampled covariates equals this value.
  std::optional<double> target_average_uplift = 0.03;
  // Without noise y is the thresholded probability, a deterministic label.
  bool outcome_noise = true;
  std::uint64_t seed = 0;
  std::string name = "synthetic";
};

void to_json(nlohmann::json& j, const SyntheticSpec& spec);
void from_json(const nlohmann::json& j, SyntheticSpec& spec);

struct OutcomeModel {
  std::vector<double> base;          // a
  std::vector<double> uplift;        // b
  std::vector<double> confounding;   // c (Confounded mode only)
  double base_intercept = 0.0;
  double uplift_intercept = 0.0;
};

struct SyntheticData {
  data::UpliftDataset dataset;  // tau_true attached
  OutcomeModel model;
};

// Deterministic per seed. Throws ConfigError for n < 2, k < 1, a treatment
// probability outside (0, 1) or an unreachable target uplift.
SyntheticData generate_with_model(const SyntheticSpec& spec);
data::UpliftDataset generate(const SyntheticSpec& spec);

// Spearman rank correlation with average ranks for ties; 0 if either input
// is constant. Throws DataError on a length mismatch or fewer than 2 values.
double spearman(std::span<const double> a, std::span<const double> b);

// Agreement between predicted and true uplift rankings.
double oracle_rank_quality(std::span<const double> predicted, std::span<const double> tau_true);

}  // namespace upbench::synthetic
