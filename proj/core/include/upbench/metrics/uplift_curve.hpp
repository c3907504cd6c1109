#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace upbench::metrics {

// Cumulative group counts after sorting rows by predicted uplift, highest
// first. Entry j-1 holds the totals over the top-j rows.
struct RankedUpliftCurve {
  std::vector<std::size_t> order;             // original row index at each rank
  std::vector<std::uint64_t> treated;         // N_t(j)
  std::vector<std::uint64_t> control;         // N_c(j)
  std::vector<std::uint64_t> treated_pos;     // Y_t(j)
  std::vector<std::uint64_t> control_pos;     // Y_c(j)

  std::size_t size() const { return order.size(); }
};

// Stable descending sort of `scores` (ties keep original index order) and
// prefix accumulation. Throws DataError on length mismatch, non-finite scores
// or a missing treated/control group.
RankedUpliftCurve rank_and_accumulate(std::span<const double> scores,
                                      std::span<const std::uint8_t> t,
                                      std::span<const std::uint8_t> y);

// Qini curve value at prefix j (1-based, j = 0 gives 0):
// q(j) = Y_t(j) - Y_c(j) * N_t(j) / N_c(j), the control term being 0 while
// N_c(j) = 0.
double qini_at(const RankedUpliftCurve& curve, std::size_t j);

// Uplift curve value g(j) = (Y_t/N_t - Y_c/N_c) * j, 0 while either group
// count is 0.
double uplift_at(const RankedUpliftCurve& curve, std::size_t j);

// Trapezoid area under the Qini curve over j/n for an arbitrary ordering of
// the four outcome classes, used for the optimal-ordering normalizer.
double qini_area(const RankedUpliftCurve& curve);

// Largest Qini area achievable by any ordering of rows with these group
// totals: treated positives, then control negatives, then the better of
// (treated negatives, control positives) and the reverse.
double optimal_qini_area(std::uint64_t treated_pos, std::uint64_t treated_neg,
                         std::uint64_t control_pos, std::uint64_t control_neg);

// Row ordering that attains optimal_qini_area for the given labels.
std::vector<std::size_t> optimal_qini_order(std::span<const std::uint8_t> t,
                                            std::span<const std::uint8_t> y);

// (area(q) - q(n)/2) / (area(q*) - q(n)/2); 0 when the denominator vanishes.
double qini_coefficient(const RankedUpliftCurve& curve);

// (area(g) - g(n)/2) / n with areas by trapezoid over j/n.
double auuc(const RankedUpliftCurve& curve);

// Treated-count weighted mean of per-bin uplift over `bins` contiguous,
// near-equal bins of the ranking; bins missing a group are skipped.
double weighted_average_uplift(const RankedUpliftCurve& curve, std::size_t bins = 10);

// Treated minus control positive rate within the top ceil(k * n / 100) rows.
// Throws DataError if that prefix lacks a group.
double lift_at_k(const RankedUpliftCurve& curve, double k_percent = 30.0);

// Shared bookkeeping used by lift_at_k.
std::size_t top_k_count(std::size_t n, double k_percent);

struct EvalReport {
  double qini = 0.0;
  double auuc = 0.0;
  double wau = 0.0;
  double lift_at_k = 0.0;
  double k_percent = 30.0;
  std::string split;
  std::string model;
  std::uint64_t seed = 0;
};

// All four metrics for one set of scores.
EvalReport evaluate(std::span<const double> scores, std::span<const std::uint8_t> t,
                    std::span<const std::uint8_t> y, double k_percent = 30.0,
                    std::size_t wau_bins = 10);

void to_json(nlohmann::json& j, const EvalReport& r);
void from_json(const nlohmann::json& j, EvalReport& r);

// CSV with columns j,N_t,N_c,Y_t,Y_c,q,g (j = 1..n).
void write_curve_csv(const RankedUpliftCurve& curve, std::ostream& out);

}  // namespace upbench::metrics
