#include "upbench/data/preprocess.hpp"

#include <bit>
#include <cstdint>
#include <unordered_set>
#include <vector>

#include "upbench/error.hpp"

namespace upbench::data {

DedupScope parse_dedup_scope(std::string_view text) {
  if (text == "row") return DedupScope::Row;
  if (text == "features") return DedupScope::Features;
  throw ConfigError("unknown dedup_scope '" + std::string(text) + "' (expected row|features)");
}

std::string_view to_string(DedupScope scope) {
  return scope == DedupScope::Row ? "row" : "features";
}

namespace {

struct RowKeyOps {
  const UpliftDataset* ds;
  bool with_labels;

  std::size_t operator()(std::size_t i) const {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](std::uint64_t v) {
      h ^= v + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
    };
    const auto row = ds->x.row(static_cast<Index>(i));
    for (Index j = 0; j < row.size(); ++j) mix(std::bit_cast<std::uint64_t>(row(j)));
    if (with_labels) mix((static_cast<std::uint64_t>(ds->t[i]) << 1) | ds->y[i]);
    return static_cast<std::size_t>(h);
  }

  bool operator()(std::size_t a, std::size_t b) const {
    if (with_labels && (ds->t[a] != ds->t[b] || ds->y[a] != ds->y[b])) return false;
    const auto ra = ds->x.row(static_cast<Index>(a));
    const auto rb = ds->x.row(static_cast<Index>(b));
    for (Index j = 0; j < ra.size(); ++j) {
      if (std::bit_cast<std::uint64_t>(ra(j)) != std::bit_cast<std::uint64_t>(rb(j))) return false;
    }
    return true;
  }
};

}  // namespace

DedupResult deduplicate(const UpliftDataset& ds, DedupScope scope) {
  ds.validate();
  RowKeyOps ops{&ds, scope == DedupScope::Row};
  std::unordered_set<std::size_t, RowKeyOps, RowKeyOps> seen(ds.size() * 2 + 1, ops, ops);
  std::vector<std::size_t> keep;
  keep.reserve(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (seen.insert(i).second) keep.push_back(i);
  }
  DedupResult out;
  out.removed = ds.size() - keep.size();
  out.dataset = out.removed == 0 ? ds : ds.subset(keep);
  return out;
}

}  // namespace upbench::data
