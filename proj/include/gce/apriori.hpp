#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <unordered_set>
#include <vector>

#include "gce/dataset.hpp"
#include "gce/error.hpp"
#include "gce/itemset.hpp"
#include "gce/row_set.hpp"

namespace gce {

namespace detail {
// Slack for thresholds written as decimal literals (1/800 = 0.00125 is not
// exactly representable).
inline constexpr double kThresholdSlack = 1e-9;
} // namespace detail

// Smallest row count c with c / rows >= threshold.
inline std::size_t min_support_count(double threshold, std::size_t rows) noexcept {
  const double x = threshold * static_cast<double>(rows);
  const double c = std::ceil(x - detail::kThresholdSlack * std::max(1.0, x));
  return c < 1.0 ? 1 : static_cast<std::size_t>(c);
}

inline void check_threshold(double threshold, std::size_t rows) {
  if (!(threshold <= 1.0 + detail::kThresholdSlack))
    throw ConfigError("support_threshold", "must be at most 1");
  if (rows == 0 || threshold * static_cast<double>(rows) < 1.0 - detail::kThresholdSlack)
    throw ThresholdBelowFloor(threshold, rows);
}

// Restricts mining to a subset of features and rows. Empty `features` means
// every feature; a null `rows` means every row.
struct MiningScope {
  std::span<const std::uint32_t> features;
  const RowSet* rows = nullptr;
};

// Level-wise apriori over vertical row bitsets. Returns every itemset of
// length <= max_length whose support count within the scope is >= min_count,
// in CanonicalOrder.
inline std::vector<ItemSet> mine_frequent(const DiscretizedDataset& data, std::size_t min_count,
                                          std::size_t max_length, MiningScope scope = {}) {
  std::vector<ItemSet> result;
  if (max_length == 0 || min_count == 0) return result;
  const std::size_t n = data.row_count();

  std::vector<std::uint32_t> features;
  if (scope.features.empty()) {
    for (std::uint32_t f = 0; f < data.feature_count(); ++f) features.push_back(f);
  } else {
    features.assign(scope.features.begin(), scope.features.end());
    std::sort(features.begin(), features.end());
  }

  struct Frequent {
    ItemSet items;
    RowSet rows;
  };

  // Level 1.
  std::vector<Frequent> level;
  for (auto f : features) {
    std::vector<RowSet> by_value(data.cardinality(f), RowSet(n));
    for (std::size_t r = 0; r < n; ++r) {
      if (scope.rows && !scope.rows->test(r)) continue;
      by_value[data.value(r, f)].set(r);
    }
    for (std::uint32_t v = 0; v < by_value.size(); ++v) {
      if (by_value[v].count() >= min_count) level.push_back({ItemSet{Item{f, v}}, std::move(by_value[v])});
    }
  }

  for (std::size_t length = 1; !level.empty(); ++length) {
    for (const auto& fr : level) result.push_back(fr.items);
    if (length == max_length) break;

    std::unordered_set<ItemSet, ItemSetHash> known;
    known.reserve(level.size() * 2);
    for (const auto& fr : level) known.insert(fr.items);

    std::vector<Frequent> next;
    // Level is in lexicographic order, so itemsets sharing a (length-1)
    // prefix are contiguous.
    for (std::size_t i = 0; i < level.size(); ++i) {
      const auto& a = level[i].items;
      for (std::size_t j = i + 1; j < level.size(); ++j) {
        const auto& b = level[j].items;
        if (!std::equal(a.begin(), a.end() - 1, b.begin(), b.end() - 1)) break;
        if (a.back().feature == b.back().feature) continue;

        ItemSet candidate = a.with(b.back());
        bool closed = true;
        for (std::size_t drop = 0; drop + 2 < candidate.size() && closed; ++drop) {
          std::vector<Item> sub;
          for (std::size_t k = 0; k < candidate.size(); ++k)
            if (k != drop) sub.push_back(candidate[k]);
          closed = known.contains(ItemSet(std::move(sub)));
        }
        if (!closed) continue;
        if (RowSet::intersection_count(level[i].rows, level[j].rows) < min_count) continue;
        next.push_back({std::move(candidate), level[i].rows & level[j].rows});
      }
    }
    std::sort(next.begin(), next.end(),
              [](const Frequent& x, const Frequent& y) { return CanonicalOrder{}(x.items, y.items); });
    level = std::move(next);
  }
  return result;
}

// Frequent itemsets with support >= support_threshold (a fraction of all
// rows) and length <= max_length.
inline std::vector<ItemSet> apriori(const DiscretizedDataset& data, double support_threshold,
                                    std::size_t max_length) {
  check_threshold(support_threshold, data.row_count());
  if (max_length == 0) throw ConfigError("max_length", "must be positive");
  return mine_frequent(data, min_support_count(support_threshold, data.row_count()), max_length);
}

} // namespace gce
