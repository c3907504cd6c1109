#include <cmath>
#include <numeric>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "upbench/error.hpp"
#include "upbench/metrics/uplift_curve.hpp"
#include "upbench/numerics/rng.hpp"

namespace {

using namespace upbench::metrics;
using upbench::Rng;

struct Instance {
  std::vector<double> score;
  std::vector<std::uint8_t> t, y;

  std::vector<oracle::Row> rows() const {
    std::vector<oracle::Row> out;
    for (std::size_t i = 0; i < score.size(); ++i) out.push_back({score[i], t[i], y[i]});
    return out;
  }
  RankedUpliftCurve curve() const { return rank_and_accumulate(score, t, y); }
};

// Random instance with both groups present; `distinct` avoids score ties.
Instance random_instance(Rng& rng, std::size_t n, bool distinct = true) {
  Instance in;
  do {
    in.score.clear();
    in.t.clear();
    in.y.clear();
    const double p_treat = 0.2 + 0.6 * rng.uniform();
    for (std::size_t i = 0; i < n; ++i) {
      in.score.push_back(distinct ? rng.normal() : static_cast<double>(rng.below(5)));
      in.t.push_back(rng.bernoulli(p_treat));
      in.y.push_back(rng.bernoulli(in.t.back() ? 0.5 : 0.3));
    }
  } while (std::count(in.t.begin(), in.t.end(), 1) == 0 || std::count(in.t.begin(), in.t.end(), 0) == 0);
  return in;
}

TEST(RankAndAccumulate, HandAccumulation) {
  const std::vector<double> s{3, 2, 1};
  const std::vector<std::uint8_t> t{1, 0, 1}, y{1, 0, 1};
  const auto c = rank_and_accumulate(s, t, y);
  EXPECT_EQ(c.treated, (std::vector<std::uint64_t>{1, 1, 2}));
  EXPECT_EQ(c.control, (std::vector<std::uint64_t>{0, 1, 1}));
  EXPECT_EQ(c.treated_pos, (std::vector<std::uint64_t>{1, 1, 2}));
  EXPECT_EQ(c.control_pos, (std::vector<std::uint64_t>{0, 0, 0}));
}

TEST(RankAndAccumulate, TiesKeepIndexOrder) {
  const std::vector<double> s(6, 0.25);
  const std::vector<std::uint8_t> t{1, 0, 1, 0, 1, 0}, y{0, 1, 1, 0, 0, 1};
  const auto c = rank_and_accumulate(s, t, y);
  EXPECT_EQ(c.order, (std::vector<std::size_t>{0, 1, 2, 3, 4, 5}));
}

TEST(RankAndAccumulate, NegationReversesDistinctRanking) {
  Rng rng(2);
  auto in = random_instance(rng, 50);
  const auto fwd = in.curve();
  for (double& v : in.score) v = -v;
  auto rev = in.curve().order;
  std::reverse(rev.begin(), rev.end());
  EXPECT_EQ(rev, fwd.order);
}

TEST(RankAndAccumulate, CurveInvariants) {
  Rng rng(3);
  const auto in = random_instance(rng, 120, false);
  const auto c = in.curve();
  for (std::size_t j = 0; j < c.size(); ++j) {
    EXPECT_EQ(c.treated[j] + c.control[j], j + 1);
    EXPECT_LE(c.treated_pos[j], c.treated[j]);
    EXPECT_LE(c.control_pos[j], c.control[j]);
    if (j > 0) {
      EXPECT_GE(c.treated[j], c.treated[j - 1]);
      EXPECT_GE(c.control_pos[j], c.control_pos[j - 1]);
    }
  }
}

TEST(RankAndAccumulate, InvalidInputsRejected) {
  const std::vector<double> s{1, 2};
  const std::vector<std::uint8_t> both{1, 0}, treated{1, 1}, y{0, 1}, short_y{0};
  EXPECT_THROW(rank_and_accumulate(s, treated, y), upbench::DataError);
  EXPECT_THROW(rank_and_accumulate(s, both, short_y), upbench::DataError);
  const std::vector<double> nan{1, NAN};
  EXPECT_THROW(rank_and_accumulate(nan, both, y), upbench::DataError);
}

TEST(Qini, ControlTermZeroUntilControlSeen) {
  const std::vector<double> s{3, 2, 1};
  const std::vector<std::uint8_t> t{1, 0, 1}, y{1, 0, 1};
  const auto c = rank_and_accumulate(s, t, y);
  EXPECT_EQ(qini_at(c, 0), 0.0);
  EXPECT_EQ(qini_at(c, 1), 1.0);
  EXPECT_EQ(qini_at(c, 3), 2.0);
}

TEST(Qini, AllNegativeOutcomesGiveZero) {
  Rng rng(4);
  auto in = random_instance(rng, 80);
  std::fill(in.y.begin(), in.y.end(), 0);
  const auto c = in.curve();
  EXPECT_EQ(qini_coefficient(c), 0.0);
  EXPECT_EQ(auuc(c), 0.0);
  EXPECT_EQ(weighted_average_uplift(c), 0.0);
  EXPECT_EQ(lift_at_k(c), 0.0);
}

TEST(Qini, OptimalOrderingScoresOne) {
  Rng rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    auto in = random_instance(rng, 150);
    const auto order = optimal_qini_order(in.t, in.y);
    for (std::size_t r = 0; r < order.size(); ++r) in.score[order[r]] = static_cast<double>(order.size() - r);
    EXPECT_EQ(qini_coefficient(in.curve()), 1.0);
  }
}

TEST(Qini, MatchesBruteForceOracle) {
  Rng rng(6);
  for (int rep = 0; rep < 1000; ++rep) {
    const auto in = random_instance(rng, 2 + rng.below(199));
    const auto rows = in.rows();
    const auto c = in.curve();
    ASSERT_NEAR(qini_coefficient(c), oracle::qini(rows), 1e-9) << "rep " << rep;
    ASSERT_NEAR(auuc(c), oracle::auuc(rows), 1e-9) << "rep " << rep;
    ASSERT_NEAR(weighted_average_uplift(c), oracle::wau(rows), 1e-12) << "rep " << rep;
    const double lift = oracle::lift(rows);
    if (std::isnan(lift)) {
      ASSERT_THROW(lift_at_k(c), upbench::DataError);
    } else {
      ASSERT_NEAR(lift_at_k(c), lift, 1e-12) << "rep " << rep;
    }
  }
}

TEST(Qini, CoefficientNeverExceedsOne) {
  Rng rng(7);
  for (int rep = 0; rep < 300; ++rep) {
    const auto in = random_instance(rng, 5 + rng.below(100), rep % 2 == 0);
    EXPECT_LE(qini_coefficient(in.curve()), 1.0 + 1e-12);
  }
}

// With the control term scaled by the global ratio N_t(n)/N_c(n) the curve is
// linear in the prefix counts, so reversing the ranking mirrors it and the
// excess areas cancel exactly.
TEST(Qini, NegationFlipsGloballyScaledExcessArea) {
  Rng rng(8);
  auto excess = [](const RankedUpliftCurve& c) {
    const std::size_t n = c.size();
    const double ratio = static_cast<double>(c.treated[n - 1]) / static_cast<double>(c.control[n - 1]);
    double area = 0.0, prev = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double q = static_cast<double>(c.treated_pos[j]) - static_cast<double>(c.control_pos[j]) * ratio;
      area += 0.5 * (prev + q) / static_cast<double>(n);
      prev = q;
    }
    return area - 0.5 * prev;
  };
  for (int rep = 0; rep < 50; ++rep) {
    auto in = random_instance(rng, 60);
    const double fwd = excess(in.curve());
    for (double& v : in.score) v = -v;
    EXPECT_NEAR(fwd, -excess(in.curve()), 1e-9);
  }
}

// The prefix-ratio control term makes the curve nonlinear, so the sign flip
// is a tendency rather than an identity: a clearly good ranking reversed is
// clearly bad, but small excess areas can keep their sign.
TEST(Qini, NegationOfStrongRankingFlipsSign) {
  Rng rng(18);
  int checked = 0;
  for (int rep = 0; rep < 200; ++rep) {
    auto in = random_instance(rng, 100);
    const auto fwd = in.curve();
    const double line = 0.5 * qini_at(fwd, fwd.size());
    const double up = qini_area(fwd) - line;
    for (double& v : in.score) v = -v;
    const auto rev = in.curve();
    const double down = qini_area(rev) - 0.5 * qini_at(rev, rev.size());
    if (std::abs(up) < 2.0) continue;
    ++checked;
    EXPECT_LT(up * down, 0.0) << "rep " << rep;
  }
  EXPECT_GT(checked, 10);
}

TEST(Qini, OptimalAreaMatchesExhaustiveSearch) {
  Rng rng(9);
  for (int rep = 0; rep < 150; ++rep) {
    const auto in = random_instance(rng, 2 + rng.below(7));
    const auto rows = in.rows();
    std::uint64_t tp = 0, tn = 0, cp = 0, cn = 0;
    for (const auto& r : rows) (r.t ? (r.y ? tp : tn) : (r.y ? cp : cn))++;
    EXPECT_NEAR(optimal_qini_area(tp, tn, cp, cn), oracle::max_area_permutations(rows), 1e-12);
  }
}

TEST(Qini, OptimalAreaMatchesClassCountDp) {
  for (std::uint64_t tp = 0; tp <= 6; ++tp)
    for (std::uint64_t tn = 0; tn <= 6; ++tn)
      for (std::uint64_t cp = 0; cp <= 6; ++cp)
        for (std::uint64_t cn = 0; cn <= 6; ++cn) {
          if (tp + tn == 0 || cp + cn == 0) continue;
          ASSERT_NEAR(optimal_qini_area(tp, tn, cp, cn), oracle::max_area_dp(tp, tn, cp, cn), 1e-12)
              << tp << " " << tn << " " << cp << " " << cn;
        }
}

// The fixed block order treated-positive, control-negative, treated-negative,
// control-positive is not always optimal: placing control positives before
// treated negatives can be better once the control term saturates.
TEST(Qini, FixedBlockOrderIsNotAlwaysOptimal) {
  bool found = false;
  for (std::uint64_t tp = 0; tp <= 4 && !found; ++tp)
    for (std::uint64_t tn = 1; tn <= 4 && !found; ++tn)
      for (std::uint64_t cp = 1; cp <= 4 && !found; ++cp)
        for (std::uint64_t cn = 0; cn <= 4 && !found; ++cn) {
          std::vector<oracle::Row> rows;
          for (std::uint64_t i = 0; i < tp; ++i) rows.push_back({0, 1, 1});
          for (std::uint64_t i = 0; i < cn; ++i) rows.push_back({0, 0, 0});
          for (std::uint64_t i = 0; i < tn; ++i) rows.push_back({0, 1, 0});
          for (std::uint64_t i = 0; i < cp; ++i) rows.push_back({0, 0, 1});
          std::vector<std::size_t> order(rows.size());
          std::iota(order.begin(), order.end(), 0);
          const double fixed = oracle::qini_area_of(rows, order);
          found = fixed < oracle::max_area_dp(tp, tn, cp, cn) - 1e-9;
        }
  EXPECT_TRUE(found);
}

TEST(Auuc, PermutationNullIsCentred) {
  Rng rng(10);
  const std::size_t n = 200;
  std::vector<std::uint8_t> t(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = i % 2;
    y[i] = rng.bernoulli(0.4);
  }
  const std::vector<double> constant(n, 0.0);
  std::vector<double> values;
  for (int rep = 0; rep < 1000; ++rep) {
    rng.shuffle(y);  // outcomes exchangeable across rows and groups
    values.push_back(auuc(rank_and_accumulate(constant, t, y)));
  }
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / values.size();
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / (values.size() - 1));
  EXPECT_LT(std::abs(mean), 3.0 * sd / std::sqrt(1000.0)) << "mean " << mean << " sd " << sd;
}

TEST(Wau, SingleBinIsAverageUplift) {
  Rng rng(11);
  const auto in = random_instance(rng, 97);
  double yt = 0, nt = 0, yc = 0, nc = 0;
  for (std::size_t i = 0; i < in.t.size(); ++i) (in.t[i] ? yt : yc) += in.y[i], (in.t[i] ? nt : nc) += 1;
  EXPECT_NEAR(weighted_average_uplift(in.curve(), 1), yt / nt - yc / nc, 1e-12);
}

TEST(Wau, AllTreatedInOneBinGivesThatBinsUplift) {
  // Bin 1 (rows 0-4): treated 1,1,0 positives of 3 and control 1 of 2.
  // Bin 2 (rows 5-9): control only, so it is skipped.
  const std::vector<double> s{10, 9, 8, 7, 6, 5, 4, 3, 2, 1};
  const std::vector<std::uint8_t> t{1, 1, 1, 0, 0, 0, 0, 0, 0, 0};
  const std::vector<std::uint8_t> y{1, 1, 0, 1, 0, 1, 1, 1, 0, 0};
  EXPECT_NEAR(weighted_average_uplift(rank_and_accumulate(s, t, y), 2), 2.0 / 3.0 - 0.5, 1e-15);
}

TEST(LiftAtK, HandExample) {
  const std::vector<double> s{10, 9, 8, 7, 6, 5, 4, 3, 2, 1};
  const std::vector<std::uint8_t> t{1, 0, 1, 0, 1, 0, 1, 0, 1, 0};
  const std::vector<std::uint8_t> y{1, 0, 1, 1, 1, 1, 0, 0, 1, 1};
  const auto c = rank_and_accumulate(s, t, y);
  EXPECT_EQ(top_k_count(10, 30.0), 3u);
  EXPECT_DOUBLE_EQ(lift_at_k(c, 30.0), 1.0);
}

TEST(LiftAtK, AllNegativeTopGivesZero) {
  const std::vector<double> s{4, 3, 2, 1};
  const std::vector<std::uint8_t> t{1, 0, 1, 0}, y{0, 0, 1, 1};
  EXPECT_EQ(lift_at_k(rank_and_accumulate(s, t, y), 50.0), 0.0);
}

TEST(LiftAtK, FullPopulationIsAverageUplift) {
  Rng rng(12);
  const auto in = random_instance(rng, 61);
  EXPECT_NEAR(lift_at_k(in.curve(), 100.0), weighted_average_uplift(in.curve(), 1), 1e-12);
}

TEST(LiftAtK, TopBlockMissingGroupRejected) {
  const std::vector<double> s{4, 3, 2, 1};
  const std::vector<std::uint8_t> t{1, 1, 0, 0}, y{0, 1, 1, 1};
  EXPECT_THROW(lift_at_k(rank_and_accumulate(s, t, y), 50.0), upbench::DataError);
}

TEST(LiftAtK, CeilingRule) {
  EXPECT_EQ(top_k_count(10, 30.0), 3u);
  EXPECT_EQ(top_k_count(11, 30.0), 4u);
  EXPECT_EQ(top_k_count(100, 30.0), 30u);
  EXPECT_EQ(top_k_count(5, 1.0), 1u);
}

TEST(Evaluate, MonotoneTransformLeavesMetricsUnchanged) {
  Rng rng(13);
  const auto in = random_instance(rng, 150);
  const auto base = evaluate(in.score, in.t, in.y);
  std::vector<double> transformed;
  for (double v : in.score) transformed.push_back(std::exp(2.0 * v) - 7.0);
  const auto other = evaluate(transformed, in.t, in.y);
  EXPECT_EQ(base.qini, other.qini);
  EXPECT_EQ(base.auuc, other.auuc);
  EXPECT_EQ(base.wau, other.wau);
  EXPECT_EQ(base.lift_at_k, other.lift_at_k);
}

TEST(Evaluate, RowPermutationInvariantForDistinctScores) {
  Rng rng(14);
  const auto in = random_instance(rng, 90);
  std::vector<std::size_t> perm(in.score.size());
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(perm);
  Instance shuffled;
  for (std::size_t i : perm) {
    shuffled.score.push_back(in.score[i]);
    shuffled.t.push_back(in.t[i]);
    shuffled.y.push_back(in.y[i]);
  }
  const auto a = evaluate(in.score, in.t, in.y);
  const auto b = evaluate(shuffled.score, shuffled.t, shuffled.y);
  EXPECT_EQ(a.qini, b.qini);
  EXPECT_EQ(a.auuc, b.auuc);
  EXPECT_EQ(a.wau, b.wau);
}

TEST(Evaluate, JsonRoundTrip) {
  EvalReport r;
  r.qini = 0.125;
  r.auuc = -0.5;
  r.wau = 0.01;
  r.lift_at_k = 0.2;
  r.split = "test";
  r.model = "TARNet";
  r.seed = 7;
  const nlohmann::json j = r;
  const auto back = j.get<EvalReport>();
  EXPECT_EQ(back.qini, r.qini);
  EXPECT_EQ(back.model, r.model);
  EXPECT_EQ(back.seed, 7u);
}

TEST(CurveCsv, HasHeaderAndOneLinePerPrefix) {
  const std::vector<double> s{3, 2, 1};
  const std::vector<std::uint8_t> t{1, 0, 1}, y{1, 0, 1};
  std::ostringstream out;
  write_curve_csv(rank_and_accumulate(s, t, y), out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "j,N_t,N_c,Y_t,Y_c,q,g");
  std::getline(in, line);
  EXPECT_EQ(line.substr(0, 10), "1,1,0,1,0,");
  int lines = 1;
  while (std::getline(in, line)) ++lines;
  EXPECT_EQ(lines, 3);
}

}  // namespace
