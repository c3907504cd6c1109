#pragma once

// Brute-force reference implementations used only by tests. Every quantity is
// recomputed from scratch from the raw (score, t, y) rows, without the
// prefix-sum machinery of the library.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

namespace oracle {

struct Row {
  double score;
  int t;
  int y;
};

// Position of each row in the descending order, ties by lower index first,
// found by counting (O(n^2)).
inline std::vector<std::size_t> ranked_indices(const std::vector<Row>& rows) {
  const std::size_t n = rows.size();
  std::vector<std::size_t> at(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t rank = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (rows[j].score > rows[i].score || (rows[j].score == rows[i].score && j < i)) ++rank;
    }
    at[rank] = i;
  }
  return at;
}

struct Counts {
  double nt = 0, nc = 0, yt = 0, yc = 0;
};

inline Counts count_range(const std::vector<Row>& rows, const std::vector<std::size_t>& order,
                          std::size_t begin, std::size_t end) {
  Counts c;
  for (std::size_t r = begin; r < end; ++r) {
    const Row& row = rows[order[r]];
    if (row.t) {
      c.nt += 1;
      c.yt += row.y;
    } else {
      c.nc += 1;
      c.yc += row.y;
    }
  }
  return c;
}

inline double qini_value(const Counts& c) { return c.yt - (c.nc > 0 ? c.yc * c.nt / c.nc : 0.0); }

inline double uplift_value(const Counts& c, std::size_t j) {
  if (c.nt == 0 || c.nc == 0) return 0.0;
  return (c.yt / c.nt - c.yc / c.nc) * static_cast<double>(j);
}

// Trapezoid area over j/n of q(j) for an explicit ordering.
inline double qini_area_of(const std::vector<Row>& rows, const std::vector<std::size_t>& order) {
  const std::size_t n = order.size();
  double area = 0.0;
  double prev = 0.0;
  for (std::size_t j = 1; j <= n; ++j) {
    const double q = qini_value(count_range(rows, order, 0, j));
    area += 0.5 * (prev + q) / static_cast<double>(n);
    prev = q;
  }
  return area;
}

// Best area over all 24 orders of the four (t, y) blocks.
inline double best_block_area(const std::vector<Row>& rows) {
  std::array<int, 4> classes{0, 1, 2, 3};  // (t,y): 0=(1,1) 1=(1,0) 2=(0,1) 3=(0,0)
  auto cls = [](const Row& r) { return r.t ? (r.y ? 0 : 1) : (r.y ? 2 : 3); };
  double best = -1e300;
  do {
    std::vector<std::size_t> order;
    for (int c : classes) {
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (cls(rows[i]) == c) order.push_back(i);
      }
    }
    best = std::max(best, qini_area_of(rows, order));
  } while (std::next_permutation(classes.begin(), classes.end()));
  return best;
}

inline double qini(const std::vector<Row>& rows) {
  const auto order = ranked_indices(rows);
  const std::size_t n = rows.size();
  const double random = 0.5 * qini_value(count_range(rows, order, 0, n));
  const double denom = best_block_area(rows) - random;
  if (std::abs(denom) < 1e-12) return 0.0;
  return (qini_area_of(rows, order) - random) / denom;
}

inline double auuc(const std::vector<Row>& rows) {
  const auto order = ranked_indices(rows);
  const std::size_t n = rows.size();
  double area = 0.0;
  double prev = 0.0;
  for (std::size_t j = 1; j <= n; ++j) {
    const double g = uplift_value(count_range(rows, order, 0, j), j);
    area += 0.5 * (prev + g) / static_cast<double>(n);
    prev = g;
  }
  return (area - 0.5 * uplift_value(count_range(rows, order, 0, n), n)) / static_cast<double>(n);
}

inline double wau(const std::vector<Row>& rows, std::size_t bins = 10) {
  const auto order = ranked_indices(rows);
  const std::size_t n = rows.size();
  double num = 0.0;
  double den = 0.0;
  std::size_t begin = 0;
  for (std::size_t b = 0; b < bins; ++b) {
    const std::size_t size = n / bins + (b < n % bins ? 1 : 0);
    const Counts c = count_range(rows, order, begin, begin + size);
    begin += size;
    if (c.nt == 0 || c.nc == 0) continue;
    num += (c.yt / c.nt - c.yc / c.nc) * c.nt;
    den += c.nt;
  }
  return den > 0 ? num / den : 0.0;
}

// NaN when the top rows lack a group.
inline double lift(const std::vector<Row>& rows, double k_percent = 30.0) {
  const auto order = ranked_indices(rows);
  const std::size_t n = rows.size();
  std::size_t m = 0;
  while (static_cast<double>(m) * 100.0 < k_percent * static_cast<double>(n) - 1e-7) ++m;
  m = std::clamp<std::size_t>(m, 1, n);
  const Counts c = count_range(rows, order, 0, m);
  if (c.nt == 0 || c.nc == 0) return std::nan("");
  return c.yt / c.nt - c.yc / c.nc;
}

// Exact maximum Qini area over every ordering of rows, by dynamic programming
// over how many rows of each (t, y) class have been placed. Rows within a
// class are interchangeable, so this covers all n! orderings.
inline double max_area_dp(std::uint64_t tp, std::uint64_t tn, std::uint64_t cp, std::uint64_t cn) {
  const std::uint64_t n = tp + tn + cp + cn;
  const auto idx = [&](std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d) {
    return ((a * (tn + 1) + b) * (cp + 1) + c) * (cn + 1) + d;
  };
  std::vector<double> best((tp + 1) * (tn + 1) * (cp + 1) * (cn + 1), -1e300);
  auto q = [](double a, double b, double c, double d) { return a - (c + d > 0 ? c * (a + b) / (c + d) : 0.0); };
  best[0] = 0.0;
  for (std::uint64_t a = 0; a <= tp; ++a)
    for (std::uint64_t b = 0; b <= tn; ++b)
      for (std::uint64_t c = 0; c <= cp; ++c)
        for (std::uint64_t d = 0; d <= cn; ++d) {
          const double cur = best[idx(a, b, c, d)];
          if (cur <= -1e299) continue;
          const double qc = q(a, b, c, d);
          auto relax = [&](std::uint64_t a2, std::uint64_t b2, std::uint64_t c2, std::uint64_t d2) {
            const double qn = q(a2, b2, c2, d2);
            double& slot = best[idx(a2, b2, c2, d2)];
            slot = std::max(slot, cur + 0.5 * (qc + qn) / static_cast<double>(n));
          };
          if (a < tp) relax(a + 1, b, c, d);
          if (b < tn) relax(a, b + 1, c, d);
          if (c < cp) relax(a, b, c + 1, d);
          if (d < cn) relax(a, b, c, d + 1);
        }
  return best[idx(tp, tn, cp, cn)];
}

// Exhaustive search over all n! orderings (n <= 8).
inline double max_area_permutations(const std::vector<Row>& rows) {
  std::vector<std::size_t> order(rows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  double best = -1e300;
  do {
    best = std::max(best, qini_area_of(rows, order));
  } while (std::next_permutation(order.begin(), order.end()));
  return best;
}

}  // namespace oracle
