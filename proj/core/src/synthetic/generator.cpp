#include "upbench/synthetic/generator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "upbench/error.hpp"
#include "upbench/numerics/rng.hpp"

namespace upbench::synthetic {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

std::vector<double> direction(Rng& rng, std::size_t k, double length) {
  std::vector<double> v(k);
  double norm = 0.0;
  for (double& e : v) {
    e = rng.normal();
    norm += e * e;
  }
  norm = std::sqrt(norm);
  for (double& e : v) e *= norm > 0.0 ? length / norm : 0.0;
  return v;
}

std::vector<double> project(const Tensor& x, const std::vector<double>& w) {
  std::vector<double> out(static_cast<std::size_t>(x.rows()), 0.0);
  for (Index i = 0; i < x.rows(); ++i) {
    double s = 0.0;
    for (Index j = 0; j < x.cols(); ++j) s += x(i, j) * w[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(i)] = s;
  }
  return out;
}

double mean_uplift(const std::vector<double>& base, const std::vector<double>& uplift,
                   double intercept) {
  double sum = 0.0;
  for (std::size_t i = 0; i < base.size(); ++i) {
    sum += sigmoid(base[i] + uplift[i] + intercept) - sigmoid(base[i]);
  }
  return sum / static_cast<double>(base.size());
}

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t m = i; m <= j; ++m) ranks[order[m]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

std::string_view to_string(AssignmentMode mode) {
  return mode == AssignmentMode::Rct ? "rct" : "confounded";
}

AssignmentMode parse_assignment_mode(std::string_view text) {
  if (text == "rct") return AssignmentMode::Rct;
  if (text == "confounded") return AssignmentMode::Confounded;
  throw ConfigError("unknown assignment mode '" + std::string(text) + "'");
}

void to_json(nlohmann::json& j, const SyntheticSpec& s) {
  j = nlohmann::json{{"n", s.n},
                     {"k", s.k},
                     {"mode", to_string(s.mode)},
                     {"treatment_probability", s.treatment_probability},
                     {"confounding_scale", s.confounding_scale},
                     {"base_scale", s.base_scale},
                     {"uplift_scale", s.uplift_scale},
                     {"base_intercept", s.base_intercept},
                     {"uplift_intercept", s.uplift_intercept},
                     {"target_average_uplift", nullptr},
                     {"outcome_noise", s.outcome_noise},
                     {"seed", s.seed},
                     {"name", s.name}};
  if (s.target_average_uplift) j["target_average_uplift"] = *s.target_average_uplift;
}

void from_json(const nlohmann::json& j, SyntheticSpec& s) {
  s = SyntheticSpec{};
  s.n = j.value("n", s.n);
  s.k = j.value("k", s.k);
  s.mode = parse_assignment_mode(j.value("mode", std::string("rct")));
  s.treatment_probability = j.value("treatment_probability", s.treatment_probability);
  s.confounding_scale = j.value("confounding_scale", s.confounding_scale);
  s.base_scale = j.value("base_scale", s.base_scale);
  s.uplift_scale = j.value("uplift_scale", s.uplift_scale);
  s.base_intercept = j.value("base_intercept", s.base_intercept);
  s.uplift_intercept = j.value("uplift_intercept", s.uplift_intercept);
  if (j.contains("target_average_uplift")) {
    const auto& v = j["target_average_uplift"];
    s.target_average_uplift = v.is_null() ? std::nullopt : std::optional<double>(v.get<double>());
  }
  s.outcome_noise = j.value("outcome_noise", s.outcome_noise);
  s.seed = j.value("seed", s.seed);
  s.name = j.value("name", s.name);
}

SyntheticData generate_with_model(const SyntheticSpec& spec) {
  if (spec.n < 2) throw ConfigError("synthetic data needs n >= 2");
  if (spec.k < 1) throw ConfigError("synthetic data needs k >= 1");
  if (spec.mode == AssignmentMode::Rct &&
      !(spec.treatment_probability > 0.0 && spec.treatment_probability < 1.0)) {
    throw ConfigError("treatment probability must lie in (0, 1)");
  }
  if (spec.target_average_uplift && !(std::abs(*spec.target_average_uplift) < 1.0)) {
    throw ConfigError("target average uplift must lie in (-1, 1)");
  }

  Rng weights_rng(Rng::derive(spec.seed, 0xa11));
  OutcomeModel model;
  model.base = direction(weights_rng, spec.k, spec.base_scale);
  model.uplift = direction(weights_rng, spec.k, spec.uplift_scale);
  if (spec.mode == AssignmentMode::Confounded) {
    model.confounding = direction(weights_rng, spec.k, spec.confounding_scale);
  }
  model.base_intercept = spec.base_intercept;
  model.uplift_intercept = spec.uplift_intercept;

  const auto n = static_cast<Index>(spec.n);
  const auto k = static_cast<Index>(spec.k);
  Rng x_rng(Rng::derive(spec.seed, 0xc0));
  Tensor x(n, k);
  for (Index i = 0; i < x.size(); ++i) x.data()[i] = x_rng.normal();

  std::vector<double> base = project(x, model.base);
  for (double& b : base) b += model.base_intercept;
  const std::vector<double> uplift = project(x, model.uplift);

  if (spec.target_average_uplift) {
    const double target = *spec.target_average_uplift;
    double lo = -40.0;
    double hi = 40.0;
    if (mean_uplift(base, uplift, lo) > target || mean_uplift(base, uplift, hi) < target) {
      throw ConfigError("target average uplift is unreachable");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
      const double mid = 0.5 * (lo + hi);
      (mean_uplift(base, uplift, mid) < target ? lo : hi) = mid;
    }
    model.uplift_intercept = 0.5 * (lo + hi);
  }

  data::UpliftDataset ds;
  ds.name = spec.name;
  for (std::size_t j = 0; j < spec.k; ++j) ds.feature_names.push_back("x" + std::to_string(j));
  ds.x = std::move(x);
  ds.t.resize(spec.n);
  ds.y.resize(spec.n);
  std::vector<double> tau(spec.n);

  Rng t_rng(Rng::derive(spec.seed, 0x7));
  Rng y_rng(Rng::derive(spec.seed, 0x9));
  const std::vector<double> propensity_logit =
      spec.mode == AssignmentMode::Confounded ? project(ds.x, model.confounding)
                                              : std::vector<double>();
  for (std::size_t i = 0; i < spec.n; ++i) {
    const double p_treat = spec.mode == AssignmentMode::Rct ? spec.treatment_probability
                                                            : sigmoid(propensity_logit[i]);
    ds.t[i] = t_rng.bernoulli(p_treat) ? 1 : 0;
    const double p0 = sigmoid(base[i]);
    const double p1 = sigmoid(base[i] + uplift[i] + model.uplift_intercept);
    tau[i] = p1 - p0;
    const double p = ds.t[i] ? p1 : p0;
    const double u = y_rng.uniform();
    ds.y[i] = spec.outcome_noise ? (u < p ? 1 : 0) : (p >= 0.5 ? 1 : 0);
  }
  ds.tau_true = std::move(tau);
  return SyntheticData{std::move(ds), std::move(model)};
}

data::UpliftDataset generate(const SyntheticSpec& spec) {
  return generate_with_model(spec).dataset;
}

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DataError("spearman: length mismatch");
  if (a.size() < 2) throw DataError("spearman: need at least two values");
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  const double mean = 0.5 * static_cast<double>(a.size() + 1);
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    const double da = ra[i] - mean;
    const double db = rb[i] - mean;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

double oracle_rank_quality(std::span<const double> predicted, std::span<const double> tau_true) {
  return spearman(predicted, tau_true);
}

}  // namespace upbench::synthetic
