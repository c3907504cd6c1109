#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <set>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "upbench/data/csv.hpp"
#include "upbench/data/dataset.hpp"
#include "upbench/data/preprocess.hpp"
#include "upbench/data/split.hpp"
#include "upbench/data/stats.hpp"
#include "upbench/error.hpp"
#include "upbench/numerics/rng.hpp"

namespace {

using namespace upbench::data;
using upbench::DataError;
using upbench::Rng;
using upbench::Tensor;

UpliftDataset make_dataset(std::vector<std::vector<double>> rows, std::vector<std::uint8_t> t,
                           std::vector<std::uint8_t> y) {
  UpliftDataset ds;
  ds.name = "toy";
  const auto k = rows.empty() ? 1 : rows.front().size();
  ds.x = Tensor(static_cast<upbench::Index>(rows.size()), static_cast<upbench::Index>(k));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < k; ++j) ds.x(i, j) = rows[i][j];
  for (std::size_t j = 0; j < k; ++j) ds.feature_names.push_back("f" + std::to_string(j));
  ds.t = std::move(t);
  ds.y = std::move(y);
  return ds;
}

UpliftDataset random_dataset(std::size_t n, std::size_t k, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<double>> rows(n, std::vector<double>(k));
  std::vector<std::uint8_t> t(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : rows[i]) v = rng.normal() * 1e3;
    t[i] = rng.bernoulli(0.5);
    y[i] = rng.bernoulli(0.3);
  }
  return make_dataset(rows, t, y);
}

const CsvSchema kSchema{{}, "treatment", "conversion", std::nullopt, {}};

TEST(LoadCsv, ThreeRowFileKeepsRowsInOrder) {
  const auto ds = parse_csv(
      "a,b,treatment,conversion\n"
      "1.5,2,1,0\n"
      "-3,4e-2,0,1\n"
      "0,7,1,1\n",
      kSchema);
  ASSERT_EQ(ds.size(), 3u);
  ASSERT_EQ(ds.feature_count(), 2u);
  EXPECT_EQ(ds.feature_names, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(ds.x(0, 0), 1.5);
  EXPECT_EQ(ds.x(1, 1), 0.04);
  EXPECT_EQ(ds.x(2, 1), 7.0);
  EXPECT_EQ(ds.t, (std::vector<std::uint8_t>{1, 0, 1}));
  EXPECT_EQ(ds.y, (std::vector<std::uint8_t>{0, 1, 1}));
  EXPECT_FALSE(ds.tau_true.has_value());
}

TEST(LoadCsv, ExplicitFeatureListAndIgnoredColumns) {
  CsvSchema schema = kSchema;
  schema.ignore = {"visit"};
  const auto ds = parse_csv("id,a,visit,treatment,conversion\n9,1,1,0,0\n8,2,0,1,1\n",
                            CsvSchema{{"a"}, "treatment", "conversion", std::nullopt, {}});
  EXPECT_EQ(ds.feature_names, std::vector<std::string>{"a"});
  const auto ds2 = parse_csv("a,visit,treatment,conversion\n1,1,0,0\n2,0,1,1\n", schema);
  EXPECT_EQ(ds2.feature_names, std::vector<std::string>{"a"});
}

TEST(LoadCsv, TauColumnAttachedAsGroundTruth) {
  const auto ds = parse_csv("a,treatment,conversion,tau_true\n1,1,0,0.25\n2,0,1,-0.5\n", kSchema);
  ASSERT_TRUE(ds.tau_true.has_value());
  EXPECT_EQ(*ds.tau_true, (std::vector<double>{0.25, -0.5}));
  EXPECT_EQ(ds.feature_count(), 1u);
}

TEST(LoadCsv, MissingColumnIsNamed) {
  try {
    parse_csv("a,treatment\n1,0\n", kSchema);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("conversion"), std::string::npos) << e.what();
  }
}

TEST(LoadCsv, NonBinaryValueReportsRowIndex) {
  try {
    parse_csv("a,treatment,conversion\n1,0,0\n2,1,1\n3,2,0\n", kSchema);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("row 2"), std::string::npos) << msg;
    EXPECT_NE(msg.find("treatment"), std::string::npos) << msg;
  }
  EXPECT_THROW(parse_csv("a,treatment,conversion\n1,0,0.5\n", kSchema), DataError);
}

TEST(LoadCsv, MalformedInputRejected) {
  EXPECT_THROW(parse_csv("", kSchema), DataError);
  EXPECT_THROW(parse_csv("a,treatment,conversion\n1,0\n", kSchema), DataError);
  EXPECT_THROW(parse_csv("a,treatment,conversion\nx,0,1\n", kSchema), DataError);
  EXPECT_THROW(load_csv("/nonexistent/file.csv", kSchema), DataError);
}

TEST(LoadCsv, WriteThenLoadRoundTrips) {
  auto ds = random_dataset(50, 4, 3);
  ds.x(0, 0) = 0.1 + 0.2;  // a value without a short exact decimal form
  ds.x(1, 1) = -1e-300;
  ds.tau_true = std::vector<double>(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) (*ds.tau_true)[i] = 1.0 / (3.0 + i);
  std::ostringstream out;
  write_csv(ds, out);
  CsvSchema schema{{}, "treatment", "outcome", std::nullopt, {}};
  auto back = parse_csv(out.str(), schema, "toy");
  EXPECT_EQ(back.feature_names, ds.feature_names);
  ASSERT_EQ(back.x.rows(), ds.x.rows());
  EXPECT_LE((back.x - ds.x).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(back.x, ds.x);  // shortest round-trip form is exact
  EXPECT_EQ(back.t, ds.t);
  EXPECT_EQ(back.y, ds.y);
  EXPECT_EQ(back.tau_true, ds.tau_true);
}

TEST(FormatReal, ParsesBackExactly) {
  for (double v : {0.0, 1.0, -2.5, 0.1, 1.0 / 3.0, 6.02214076e23, 5e-324}) {
    EXPECT_EQ(std::strtod(format_real(v).c_str(), nullptr), v) << format_real(v);
  }
}

TEST(Dataset, ValidateRejectsInconsistentShapes) {
  auto ds = make_dataset({{1}, {2}}, {0, 1}, {1, 0});
  EXPECT_NO_THROW(ds.validate());
  ds.y.push_back(1);
  EXPECT_THROW(ds.validate(), DataError);
  ds.y.pop_back();
  ds.t[0] = 2;
  EXPECT_THROW(ds.validate(), DataError);
}

TEST(Dataset, SubsetFollowsIndexOrder) {
  const auto ds = make_dataset({{1}, {2}, {3}}, {0, 1, 1}, {1, 0, 1});
  const std::vector<std::size_t> idx{2, 0};
  const auto sub = ds.subset(idx);
  EXPECT_EQ(sub.x(0, 0), 3.0);
  EXPECT_EQ(sub.x(1, 0), 1.0);
  EXPECT_EQ(sub.t, (std::vector<std::uint8_t>{1, 0}));
  const std::vector<std::size_t> bad{3};
  EXPECT_THROW(ds.subset(bad), DataError);
}

TEST(Deduplicate, NoDuplicatesUnchanged) {
  const auto ds = make_dataset({{1, 2}, {3, 4}}, {0, 1}, {0, 1});
  const auto r = deduplicate(ds);
  EXPECT_EQ(r.removed, 0u);
  EXPECT_EQ(r.dataset, ds);
}

TEST(Deduplicate, IdenticalRowsCollapseToFirst) {
  const auto ds = make_dataset({{5, 6}, {1, 2}, {5, 6}}, {1, 0, 1}, {0, 0, 0});
  const auto r = deduplicate(ds);
  EXPECT_EQ(r.removed, 1u);
  ASSERT_EQ(r.dataset.size(), 2u);
  EXPECT_EQ(r.dataset.x(0, 0), 5.0);
  EXPECT_EQ(r.dataset.x(1, 0), 1.0);
}

TEST(Deduplicate, DifferentOutcomeKeepsBoth) {
  const auto ds = make_dataset({{5, 6}, {5, 6}}, {1, 1}, {0, 1});
  EXPECT_EQ(deduplicate(ds).removed, 0u);
  EXPECT_EQ(deduplicate(ds, DedupScope::Features).removed, 1u);
}

TEST(Deduplicate, SignedZeroIsNotBitIdentical) {
  const auto ds = make_dataset({{0.0}, {-0.0}}, {1, 1}, {0, 0});
  EXPECT_EQ(deduplicate(ds).removed, 0u);
}

TEST(Deduplicate, Idempotent) {
  auto ds = random_dataset(40, 2, 8);
  for (std::size_t i = 0; i < 20; ++i) {
    ds.x.row(20 + i) = ds.x.row(i);
    ds.t[20 + i] = ds.t[i];
    ds.y[20 + i] = ds.y[i];
  }
  const auto once = deduplicate(ds);
  EXPECT_EQ(once.removed, 20u);
  const auto twice = deduplicate(once.dataset);
  EXPECT_EQ(twice.removed, 0u);
  EXPECT_EQ(twice.dataset, once.dataset);
}

TEST(Deduplicate, ScopeParsing) {
  EXPECT_EQ(parse_dedup_scope("row"), DedupScope::Row);
  EXPECT_EQ(parse_dedup_scope("features"), DedupScope::Features);
  EXPECT_THROW(parse_dedup_scope("fuzzy"), upbench::ConfigError);
}

TEST(Split, ExactDivision) {
  const auto s = split(1000, SplitPlan::three_way(0));
  EXPECT_EQ(s.train.size(), 800u);
  EXPECT_EQ(s.valid.size(), 100u);
  EXPECT_EQ(s.test.size(), 100u);
}

TEST(Split, RemainderGoesToTrain) {
  const auto s = split(1001, SplitPlan::three_way(0));
  EXPECT_EQ(s.train.size(), 801u);
  EXPECT_EQ(s.valid.size(), 100u);
  EXPECT_EQ(s.test.size(), 100u);
}

TEST(Split, FixedTestUsesNineToOne) {
  const auto s = split(1000, SplitPlan::fixed_test(3));
  EXPECT_EQ(s.train.size(), 900u);
  EXPECT_EQ(s.valid.size(), 100u);
  EXPECT_TRUE(s.test.empty());
}

TEST(Split, DeterministicPerSeed) {
  const auto a = split(500, SplitPlan::three_way(4));
  const auto b = split(500, SplitPlan::three_way(4));
  const auto c = split(500, SplitPlan::three_way(5));
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.valid, b.valid);
  EXPECT_EQ(a.test, b.test);
  EXPECT_NE(a.valid, c.valid);
}

TEST(Split, PartsPartitionAllIndices) {
  Rng sizes(99);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    for (int rep = 0; rep < 5; ++rep) {
      const std::size_t n = 10 + sizes.below(3000);
      const auto s = split(n, SplitPlan::three_way(seed));
      std::vector<std::size_t> all;
      for (const auto* part : {&s.train, &s.valid, &s.test}) {
        EXPECT_TRUE(std::is_sorted(part->begin(), part->end()));
        all.insert(all.end(), part->begin(), part->end());
      }
      std::sort(all.begin(), all.end());
      std::vector<std::size_t> expected(n);
      std::iota(expected.begin(), expected.end(), 0);
      EXPECT_EQ(all, expected) << "n=" << n << " seed=" << seed;
    }
  }
}

TEST(Split, EmptyPartOrBadRatiosRejected) {
  EXPECT_THROW(split(5, SplitPlan::three_way(0)), DataError);
  SplitPlan bad = SplitPlan::three_way(0);
  bad.ratios = {0.5, 0.2, 0.2};
  EXPECT_THROW(split(100, bad), upbench::ConfigError);
  bad.ratios = {0.9, 0.1};
  EXPECT_THROW(split(100, bad), upbench::ConfigError);
  EXPECT_THROW(parse_split_strategy("kfold"), upbench::ConfigError);
}

TEST(Batches, ShortFinalBlockKept) {
  std::vector<std::size_t> idx(10);
  std::iota(idx.begin(), idx.end(), 0);
  const auto blocks = make_batches(idx, 4, 7);
  ASSERT_EQ(blocks.size(), 3u);
  EXPECT_EQ(blocks[0].size(), 4u);
  EXPECT_EQ(blocks[1].size(), 4u);
  EXPECT_EQ(blocks[2].size(), 2u);
  std::set<std::size_t> seen;
  for (const auto& b : blocks) seen.insert(b.begin(), b.end());
  EXPECT_EQ(seen.size(), 10u);
}

TEST(Batches, SeededAndSingleBlockWhenLarge) {
  std::vector<std::size_t> idx(37);
  std::iota(idx.begin(), idx.end(), 100);
  EXPECT_EQ(make_batches(idx, 5, 1), make_batches(idx, 5, 1));
  EXPECT_NE(make_batches(idx, 5, 1), make_batches(idx, 5, 2));
  const auto one = make_batches(idx, 64, 1);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].size(), 37u);
  EXPECT_THROW(make_batches(idx, 0, 1), upbench::ConfigError);
}

TEST(Stats, ToySetAverageUplift) {
  const auto ds = make_dataset({{0}, {0}, {0}, {0}}, {1, 1, 0, 0}, {1, 0, 0, 0});
  const auto s = compute_stats(ds);
  EXPECT_DOUBLE_EQ(s.average_uplift, 0.5);
  EXPECT_DOUBLE_EQ(s.treatment_control_ratio, 1.0);
  EXPECT_DOUBLE_EQ(s.positive_ratio, 0.25);
  EXPECT_FALSE(s.relative_average_uplift.has_value());  // control rate is 0
}

TEST(Stats, RelativeUpliftAndJson) {
  const auto ds = make_dataset({{0}, {0}, {0}, {0}, {0}}, {1, 1, 1, 0, 0}, {1, 1, 0, 1, 0});
  const auto s = compute_stats(ds);
  EXPECT_DOUBLE_EQ(s.treated_positive_rate, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.control_positive_rate, 0.5);
  ASSERT_TRUE(s.relative_average_uplift.has_value());
  EXPECT_DOUBLE_EQ(*s.relative_average_uplift, (2.0 / 3.0 - 0.5) / 0.5);
  nlohmann::json j = s;
  EXPECT_EQ(j.at("size"), 5);
  const auto table = format_stats_table({{"toy", s}});
  EXPECT_NE(table.find("1.50:1"), std::string::npos) << table;
  EXPECT_NE(table.find("60.00%"), std::string::npos) << table;
}

TEST(Stats, EmptyGroupRejected) {
  const auto ds = make_dataset({{0}, {1}}, {1, 1}, {1, 0});
  EXPECT_THROW(compute_stats(ds), DataError);
}

TEST(Stats, RatiosStayValidAfterDedup) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto ds = random_dataset(200, 1, seed);
    for (upbench::Index i = 0; i < ds.x.rows(); ++i) ds.x(i, 0) = static_cast<double>(i % 7);
    const auto d = deduplicate(ds);
    const auto s = compute_stats(d.dataset);
    EXPECT_LT(s.size, ds.size());
    for (double v : {s.positive_ratio, s.treated_positive_rate, s.control_positive_rate}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
    EXPECT_GE(s.average_uplift, -1.0);
    EXPECT_LE(s.average_uplift, 1.0);
    EXPECT_GT(s.treatment_control_ratio, 0.0);
  }
}

}  // namespace
