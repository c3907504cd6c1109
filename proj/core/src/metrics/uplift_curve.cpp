#include "upbench/metrics/uplift_curve.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <nlohmann/json.hpp>
#include <numeric>
#include <ostream>

#include "upbench/data/csv.hpp"
#include "upbench/error.hpp"

namespace upbench::metrics {

RankedUpliftCurve rank_and_accumulate(std::span<const double> scores,
                                      std::span<const std::uint8_t> t,
                                      std::span<const std::uint8_t> y) {
  const std::size_t n = scores.size();
  if (t.size() != n || y.size() != n) {
    throw DataError("rank_and_accumulate: scores, treatment and outcome lengths differ");
  }
  bool has_treated = false;
  bool has_control = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(scores[i])) throw DataError("rank_and_accumulate: non-finite score");
    if (t[i] > 1 || y[i] > 1) throw DataError("rank_and_accumulate: non-binary label");
    (t[i] ? has_treated : has_control) = true;
  }
  if (!has_treated || !has_control) {
    throw DataError("metric undefined without both treated and control groups");
  }

  RankedUpliftCurve c;
  c.order.resize(n);
  std::iota(c.order.begin(), c.order.end(), std::size_t{0});
  std::stable_sort(c.order.begin(), c.order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  c.treated.resize(n);
  c.control.resize(n);
  c.treated_pos.resize(n);
  c.control_pos.resize(n);
  std::uint64_t nt = 0, nc = 0, yt = 0, yc = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t i = c.order[j];
    if (t[i]) {
      ++nt;
      yt += y[i];
    } else {
      ++nc;
      yc += y[i];
    }
    c.treated[j] = nt;
    c.control[j] = nc;
    c.treated_pos[j] = yt;
    c.control_pos[j] = yc;
  }
  return c;
}

namespace {

double qini_from_counts(std::uint64_t nt, std::uint64_t nc, std::uint64_t yt, std::uint64_t yc) {
  const double control_term =
      nc == 0 ? 0.0 : static_cast<double>(yc) * static_cast<double>(nt) / static_cast<double>(nc);
  return static_cast<double>(yt) - control_term;
}

double uplift_from_counts(std::uint64_t nt, std::uint64_t nc, std::uint64_t yt,
                          std::uint64_t yc) {
  if (nt == 0 || nc == 0) return 0.0;
  const double diff = static_cast<double>(yt) / static_cast<double>(nt) -
                      static_cast<double>(yc) / static_cast<double>(nc);
  return diff * static_cast<double>(nt + nc);
}

// Class codes for optimal ordering: treated-positive, control-negative,
// treated-negative, control-positive.
enum Cls { kTP, kCN, kTN, kCP };

double sequence_area(const std::array<std::uint64_t, 4>& counts, const std::array<Cls, 4>& seq) {
  const std::uint64_t n = counts[0] + counts[1] + counts[2] + counts[3];
  if (n == 0) return 0.0;
  std::uint64_t nt = 0, nc = 0, yt = 0, yc = 0;
  double prev = 0.0;
  double area = 0.0;
  for (Cls cls : seq) {
    for (std::uint64_t r = 0; r < counts[cls]; ++r) {
      switch (cls) {
        case kTP: ++nt; ++yt; break;
        case kCN: ++nc; break;
        case kTN: ++nt; break;
        case kCP: ++nc; ++yc; break;
      }
      const double q = qini_from_counts(nt, nc, yt, yc);
      area += 0.5 * (prev + q);
      prev = q;
    }
  }
  return area / static_cast<double>(n);
}

constexpr std::array<Cls, 4> kNegativesFirst = {kTP, kCN, kTN, kCP};
constexpr std::array<Cls, 4> kPositivesFirst = {kTP, kCN, kCP, kTN};

}  // namespace

double qini_at(const RankedUpliftCurve& c, std::size_t j) {
  if (j == 0) return 0.0;
  const std::size_t k = j - 1;
  return qini_from_counts(c.treated[k], c.control[k], c.treated_pos[k], c.control_pos[k]);
}

double uplift_at(const RankedUpliftCurve& c, std::size_t j) {
  if (j == 0) return 0.0;
  const std::size_t k = j - 1;
  return uplift_from_counts(c.treated[k], c.control[k], c.treated_pos[k], c.control_pos[k]);
}

double qini_area(const RankedUpliftCurve& c) {
  const std::size_t n = c.size();
  if (n == 0) return 0.0;
  double area = 0.0;
  double prev = 0.0;
  for (std::size_t j = 1; j <= n; ++j) {
    const double q = qini_at(c, j);
    area += 0.5 * (prev + q);
    prev = q;
  }
  return area / static_cast<double>(n);
}

double optimal_qini_area(std::uint64_t treated_pos, std::uint64_t treated_neg,
                         std::uint64_t control_pos, std::uint64_t control_neg) {
  std::array<std::uint64_t, 4> counts{};
  counts[kTP] = treated_pos;
  counts[kTN] = treated_neg;
  counts[kCP] = control_pos;
  counts[kCN] = control_neg;
  return std::max(sequence_area(counts, kNegativesFirst), sequence_area(counts, kPositivesFirst));
}

std::vector<std::size_t> optimal_qini_order(std::span<const std::uint8_t> t,
                                            std::span<const std::uint8_t> y) {
  if (t.size() != y.size()) throw DataError("optimal_qini_order: length mismatch");
  std::array<std::vector<std::size_t>, 4> rows;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const Cls cls = t[i] ? (y[i] ? kTP : kTN) : (y[i] ? kCP : kCN);
    rows[cls].push_back(i);
  }
  std::array<std::uint64_t, 4> counts{};
  for (int c = 0; c < 4; ++c) counts[c] = rows[c].size();
  const auto& seq = sequence_area(counts, kNegativesFirst) >= sequence_area(counts, kPositivesFirst)
                        ? kNegativesFirst
                        : kPositivesFirst;
  std::vector<std::size_t> order;
  order.reserve(t.size());
  for (Cls cls : seq) order.insert(order.end(), rows[cls].begin(), rows[cls].end());
  return order;
}

double qini_coefficient(const RankedUpliftCurve& c) {
  const std::size_t n = c.size();
  if (n == 0) return 0.0;
  const std::uint64_t nt = c.treated.back();
  const std::uint64_t nc = c.control.back();
  const std::uint64_t yt = c.treated_pos.back();
  const std::uint64_t yc = c.control_pos.back();
  const double random_area = 0.5 * qini_at(c, n);
  const double best = optimal_qini_area(yt, nt - yt, yc, nc - yc);
  const double denominator = best - random_area;
  const double scale = std::max({1.0, std::abs(best), std::abs(random_area)});
  if (denominator <= 1e-12 * scale) return 0.0;
  return (qini_area(c) - random_area) / denominator;
}

double auuc(const RankedUpliftCurve& c) {
  const std::size_t n = c.size();
  if (n == 0) return 0.0;
  double area = 0.0;
  double prev = 0.0;
  for (std::size_t j = 1; j <= n; ++j) {
    const double g = uplift_at(c, j);
    area += 0.5 * (prev + g);
    prev = g;
  }
  const double nn = static_cast<double>(n);
  area /= nn;
  return (area - 0.5 * uplift_at(c, n)) / nn;
}

double weighted_average_uplift(const RankedUpliftCurve& c, std::size_t bins) {
  if (bins == 0) throw ConfigError("weighted_average_uplift: bins must be positive");
  const std::size_t n = c.size();
  const std::size_t base = n / bins;
  const std::size_t extra = n % bins;
  double weighted = 0.0;
  double weight_total = 0.0;
  std::size_t end = 0;
  for (std::size_t b = 0; b < bins; ++b) {
    const std::size_t begin = end;
    end = begin + base + (b < extra ? 1 : 0);
    if (end == begin) continue;
    auto at = [&](const std::vector<std::uint64_t>& v, std::size_t prefix) {
      return prefix == 0 ? std::uint64_t{0} : v[prefix - 1];
    };
    const std::uint64_t nt = at(c.treated, end) - at(c.treated, begin);
    const std::uint64_t nc = at(c.control, end) - at(c.control, begin);
    if (nt == 0 || nc == 0) continue;
    const std::uint64_t yt = at(c.treated_pos, end) - at(c.treated_pos, begin);
    const std::uint64_t yc = at(c.control_pos, end) - at(c.control_pos, begin);
    const double u = static_cast<double>(yt) / static_cast<double>(nt) -
                     static_cast<double>(yc) / static_cast<double>(nc);
    weighted += u * static_cast<double>(nt);
    weight_total += static_cast<double>(nt);
  }
  return weight_total > 0.0 ? weighted / weight_total : 0.0;
}

std::size_t top_k_count(std::size_t n, double k_percent) {
  if (!(k_percent > 0.0 && k_percent <= 100.0)) {
    throw ConfigError("lift_at_k: k must lie in (0, 100]");
  }
  const double raw = k_percent * static_cast<double>(n) / 100.0;
  const auto m = static_cast<std::size_t>(std::ceil(raw - 1e-9));
  return std::clamp<std::size_t>(m, 1, n);
}

double lift_at_k(const RankedUpliftCurve& c, double k_percent) {
  const std::size_t n = c.size();
  if (n == 0) throw DataError("lift_at_k: empty curve");
  const std::size_t m = top_k_count(n, k_percent);
  const std::uint64_t nt = c.treated[m - 1];
  const std::uint64_t nc = c.control[m - 1];
  if (nt == 0 || nc == 0) {
    throw DataError("lift_at_k: top " + std::to_string(m) + " rows lack a treated or control row");
  }
  return static_cast<double>(c.treated_pos[m - 1]) / static_cast<double>(nt) -
         static_cast<double>(c.control_pos[m - 1]) / static_cast<double>(nc);
}

EvalReport evaluate(std::span<const double> scores, std::span<const std::uint8_t> t,
                    std::span<const std::uint8_t> y, double k_percent, std::size_t wau_bins) {
  const RankedUpliftCurve curve = rank_and_accumulate(scores, t, y);
  EvalReport r;
  r.qini = qini_coefficient(curve);
  r.auuc = auuc(curve);
  r.wau = weighted_average_uplift(curve, wau_bins);
  r.lift_at_k = lift_at_k(curve, k_percent);
  r.k_percent = k_percent;
  return r;
}

void to_json(nlohmann::json& j, const EvalReport& r) {
  j = nlohmann::json{{"qini", r.qini}, {"auuc", r.auuc}, {"wau", r.wau},
                     {"lift_at_k", r.lift_at_k}, {"k_percent", r.k_percent},
                     {"split", r.split}, {"model", r.model}, {"seed", r.seed}};
}

void from_json(const nlohmann::json& j, EvalReport& r) {
  j.at("qini").get_to(r.qini);
  j.at("auuc").get_to(r.auuc);
  j.at("wau").get_to(r.wau);
  j.at("lift_at_k").get_to(r.lift_at_k);
  r.k_percent = j.value("k_percent", 30.0);
  r.split = j.value("split", std::string());
  r.model = j.value("model", std::string());
  r.seed = j.value("seed", std::uint64_t{0});
}

void write_curve_csv(const RankedUpliftCurve& c, std::ostream& out) {
  out << "j,N_t,N_c,Y_t,Y_c,q,g\n";
  for (std::size_t j = 1; j <= c.size(); ++j) {
    out << j << ',' << c.treated[j - 1] << ',' << c.control[j - 1] << ',' << c.treated_pos[j - 1]
        << ',' << c.control_pos[j - 1] << ',' << data::format_real(qini_at(c, j)) << ','
        << data::format_real(uplift_at(c, j)) << '\n';
  }
}

}  // namespace upbench::metrics
