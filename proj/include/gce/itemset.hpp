#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace gce {

// A "feature = value" predicate. `value` is a category index for categorical
// features and a bin index for continuous ones.
struct Item {
  std::uint32_t feature = 0;
  std::uint32_t value = 0;

  friend auto operator<=>(const Item&, const Item&) = default;
};

// Conjunction of items, sorted by feature with at most one item per feature.
class ItemSet {
public:
  ItemSet() = default;
  ItemSet(std::initializer_list<Item> items) : ItemSet(std::vector<Item>(items)) {}

  explicit ItemSet(std::vector<Item> items) : items_(std::move(items)) {
    std::sort(items_.begin(), items_.end());
    for (std::size_t i = 1; i < items_.size(); ++i) {
      if (items_[i].feature == items_[i - 1].feature)
        throw std::invalid_argument("itemset holds two items on feature " +
                                    std::to_string(items_[i].feature));
    }
  }

  std::size_t size() const noexcept { return items_.size(); }
  bool empty() const noexcept { return items_.empty(); }
  auto begin() const noexcept { return items_.begin(); }
  auto end() const noexcept { return items_.end(); }
  const Item& operator[](std::size_t i) const noexcept { return items_[i]; }
  const Item& back() const noexcept { return items_.back(); }
  std::span<const Item> items() const noexcept { return items_; }

  std::vector<std::uint32_t> features() const {
    std::vector<std::uint32_t> out;
    out.reserve(items_.size());
    for (const auto& it : items_) out.push_back(it.feature);
    return out;
  }

  std::optional<std::uint32_t> value_of(std::uint32_t feature) const noexcept {
    auto it = std::lower_bound(items_.begin(), items_.end(), Item{feature, 0},
                               [](const Item& a, const Item& b) { return a.feature < b.feature; });
    if (it == items_.end() || it->feature != feature) return std::nullopt;
    return it->value;
  }

  bool shares_feature(const ItemSet& other) const noexcept {
    auto a = items_.begin();
    auto b = other.items_.begin();
    while (a != items_.end() && b != other.items_.end()) {
      if (a->feature == b->feature) return true;
      if (a->feature < b->feature) ++a;
      else ++b;
    }
    return false;
  }

  bool same_features(const ItemSet& other) const noexcept {
    return std::equal(items_.begin(), items_.end(), other.items_.begin(), other.items_.end(),
                      [](const Item& a, const Item& b) { return a.feature == b.feature; });
  }

  // `row` holds one value index per feature.
  bool matches(std::span<const std::uint32_t> row) const noexcept {
    for (const auto& it : items_)
      if (row[it.feature] != it.value) return false;
    return true;
  }

  ItemSet with(Item extra) const {
    auto items = items_;
    items.push_back(extra);
    return ItemSet(std::move(items));
  }

  friend bool operator==(const ItemSet&, const ItemSet&) = default;

private:
  std::vector<Item> items_;
};

// Apriori output order: ascending length, then lexicographic by
// (feature, value) sequence.
struct CanonicalOrder {
  bool operator()(const ItemSet& a, const ItemSet& b) const noexcept {
    if (a.size() != b.size()) return a.size() < b.size();
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
  }
};

struct ItemSetHash {
  std::size_t operator()(const ItemSet& s) const noexcept {
    std::size_t h = 0x9e3779b97f4a7c15ull ^ s.size();
    for (const auto& it : s) {
      const std::uint64_t v = (std::uint64_t{it.feature} << 32) | it.value;
      h ^= std::hash<std::uint64_t>{}(v) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return h;
  }
};

} // namespace gce
