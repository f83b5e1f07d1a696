#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "gce/itemset.hpp"

namespace gce {

// Outer-If / Inner-If / Then recourse rule.
struct Triple {
  ItemSet outer;
  ItemSet inner;
  ItemSet then;
  std::size_t gen_index = 0;

  std::size_t width() const noexcept { return outer.size() + inner.size(); }

  // Outer and inner constrain disjoint features; then re-assigns exactly the
  // inner features with at least one different value.
  static bool valid(const ItemSet& outer, const ItemSet& inner, const ItemSet& then,
                    std::size_t eps2) noexcept {
    return !inner.empty() && outer.size() + inner.size() <= eps2 && !outer.shares_feature(inner) &&
           inner.same_features(then) && inner != then;
  }

  bool valid(std::size_t eps2) const noexcept { return valid(outer, inner, then, eps2); }

  bool covers(std::span<const std::uint32_t> row) const noexcept {
    return outer.matches(row) && inner.matches(row);
  }

  bool same_rule(const Triple& o) const noexcept {
    return outer == o.outer && inner == o.inner && then == o.then;
  }
};

} // namespace gce
