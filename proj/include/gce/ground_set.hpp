#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "gce/apriori.hpp"
#include "gce/dataset.hpp"
#include "gce/itemset.hpp"
#include "gce/row_set.hpp"
#include "gce/schema.hpp"
#include "gce/triple.hpp"

namespace gce {

enum class GenMethod { Original, RlReduction, ThenGeneration };

inline const char* to_string(GenMethod m) noexcept {
  switch (m) {
  case GenMethod::Original: return "original";
  case GenMethod::RlReduction: return "rl-reduction";
  case GenMethod::ThenGeneration: return "then-generation";
  }
  return "?";
}

inline std::optional<GenMethod> parse_gen_method(std::string_view s) noexcept {
  if (s == "original") return GenMethod::Original;
  if (s == "rl-reduction") return GenMethod::RlReduction;
  if (s == "then-generation") return GenMethod::ThenGeneration;
  return std::nullopt;
}

// The ground set V in generation order.
//
// iteration_count counts innermost-loop work: one per (outer, inner, then)
// cell visited, plus one per itemset scanned by the RL-Reduction pass.
// pair_visits counts the (outer, inner) pairs looked at, which the width and
// disjointness checks reject before any Then is scanned.
struct GroundSet {
  std::vector<Triple> triples;
  std::uint64_t iteration_count = 0;
  std::uint64_t pair_visits = 0;
  GenMethod method = GenMethod::Original;
  double q = 0.0; // Then-Generation threshold
  std::size_t rl_size = 0; // |RL| actually iterated

  std::size_t size() const noexcept { return triples.size(); }
};

// Candidate Outer-If conditions (sd) and Inner-If/Then conditions (rl). With
// no user-supplied subgroups and every feature actionable, both point at the
// same list.
struct CandidateSets {
  std::shared_ptr<const std::vector<ItemSet>> sd;
  std::shared_ptr<const std::vector<ItemSet>> rl;

  bool shared() const noexcept { return sd == rl; }
};

// Builds SD/RL from apriori output. RL keeps only itemsets over actionable
// features; `user_sd` replaces SD when given.
inline CandidateSets make_candidates(std::vector<ItemSet> frequent, const FeatureSchema& schema,
                                     std::optional<std::vector<ItemSet>> user_sd = std::nullopt) {
  auto all = std::make_shared<const std::vector<ItemSet>>(std::move(frequent));
  bool all_actionable = true;
  for (const auto& f : schema.features()) all_actionable = all_actionable && f.actionable;

  CandidateSets out;
  if (all_actionable) {
    out.rl = all;
  } else {
    std::vector<ItemSet> rl;
    for (const auto& s : *all) {
      bool ok = true;
      for (const auto& it : s) ok = ok && schema[it.feature].actionable;
      if (ok) rl.push_back(s);
    }
    out.rl = std::make_shared<const std::vector<ItemSet>>(std::move(rl));
  }
  out.sd = user_sd ? std::make_shared<const std::vector<ItemSet>>(std::move(*user_sd)) : all;
  return out;
}

namespace detail {

// Interns each itemset's feature combination as a small integer.
inline std::vector<std::uint32_t> feature_combination_ids(std::span<const ItemSet> sets) {
  std::map<std::vector<std::uint32_t>, std::uint32_t> ids;
  std::vector<std::uint32_t> out;
  out.reserve(sets.size());
  for (const auto& s : sets) {
    auto [it, inserted] = ids.emplace(s.features(), static_cast<std::uint32_t>(ids.size()));
    out.push_back(it->second);
  }
  return out;
}

template <class List>
bool has_duplicates(const List& sets) {
  std::unordered_set<ItemSet, ItemSetHash> seen;
  for (const auto& s : sets)
    if (!seen.insert(s).second) return true;
  return false;
}

struct TripleKeyHash {
  std::size_t operator()(const Triple& t) const noexcept {
    ItemSetHash h;
    return h(t.outer) * 31u ^ h(t.inner) * 17u ^ h(t.then);
  }
};
struct TripleKeyEq {
  bool operator()(const Triple& a, const Triple& b) const noexcept { return a.same_rule(b); }
};

// Emits triples in order, dropping repeats of an earlier rule when the
// candidate lists themselves contain duplicates.
class Emitter {
public:
  Emitter(GroundSet& out, bool dedup) : out_(out), dedup_(dedup) {}

  void emit(const ItemSet& outer, const ItemSet& inner, const ItemSet& then) {
    Triple t{outer, inner, then, out_.triples.size()};
    if (dedup_ && !seen_.insert(t).second) return;
    out_.triples.push_back(std::move(t));
  }

private:
  GroundSet& out_;
  bool dedup_;
  std::unordered_set<Triple, TripleKeyHash, TripleKeyEq> seen_;
};

} // namespace detail

// SD x RL x RL scan, outer-major. Pairs violating disjointness or the eps2
// width are rejected before the Then loop.
inline GroundSet generate_original(std::span<const ItemSet> sd, std::span<const ItemSet> rl,
                                   std::size_t eps2) {
  GroundSet out;
  out.method = GenMethod::Original;
  out.rl_size = rl.size();
  const auto combo = detail::feature_combination_ids(rl);
  detail::Emitter emitter(out, detail::has_duplicates(sd) || detail::has_duplicates(rl));

  for (const auto& outer : sd) {
    for (std::size_t i = 0; i < rl.size(); ++i) {
      ++out.pair_visits;
      const auto& inner = rl[i];
      if (outer.size() + inner.size() > eps2 || outer.shares_feature(inner)) continue;
      out.iteration_count += rl.size();
      for (std::size_t j = 0; j < rl.size(); ++j) {
        if (combo[j] != combo[i] || rl[j] == inner) continue;
        emitter.emit(outer, inner, rl[j]);
      }
    }
  }
  return out;
}

inline GroundSet generate_original(const CandidateSets& cands, std::size_t eps2) {
  return generate_original(*cands.sd, *cands.rl, eps2);
}

struct ReducedRl {
  std::vector<ItemSet> itemsets;
  std::uint64_t iterations = 0; // one per scanned itemset
  double alpha = 1.0;           // |reduced| / |rl|
};

// Drops itemsets whose feature combination occurs exactly once in rl: such
// an itemset can be neither an Inner-If with some Then nor a Then for some
// Inner-If. Relative order is kept.
inline ReducedRl rl_reduce(std::span<const ItemSet> rl) {
  ReducedRl out;
  const auto combo = detail::feature_combination_ids(rl);
  std::vector<std::uint32_t> count(rl.size(), 0);
  for (auto c : combo) ++count[c];
  out.iterations = rl.size();
  for (std::size_t i = 0; i < rl.size(); ++i)
    if (count[combo[i]] > 1) out.itemsets.push_back(rl[i]);
  out.alpha = rl.empty() ? 1.0 : static_cast<double>(out.itemsets.size()) / static_cast<double>(rl.size());
  return out;
}

// RL-Reduction followed by the original scan over SD x reduced-RL^2. SD is
// left as is.
inline GroundSet generate_rl_reduced(const CandidateSets& cands, std::size_t eps2) {
  auto reduced = rl_reduce(*cands.rl);
  GroundSet out = generate_original(*cands.sd, reduced.itemsets, eps2);
  out.method = GenMethod::RlReduction;
  out.iteration_count += reduced.iterations;
  return out;
}

// Then conditions mined per If pair: for each width-valid, feature-disjoint
// (outer, inner), drop the rows satisfying outer and inner, project onto the
// inner features, and run apriori at threshold q (relative to the remaining
// rows, floored at one row). Every full-width itemset that differs from inner
// becomes a Then, in apriori order.
inline GroundSet generate_then(const CandidateSets& cands, const DiscretizedDataset& data, double q,
                               std::size_t eps2) {
  check_threshold(q, data.row_count());
  const auto& sd = *cands.sd;
  const auto& rl = *cands.rl;
  const std::size_t n = data.row_count();

  GroundSet out;
  out.method = GenMethod::ThenGeneration;
  out.q = q;
  out.rl_size = rl.size();
  detail::Emitter emitter(out, detail::has_duplicates(sd) || detail::has_duplicates(rl));

  // rows per item, built lazily
  std::map<Item, RowSet> item_rows;
  auto rows_of = [&](const Item& it) -> const RowSet& {
    auto found = item_rows.find(it);
    if (found != item_rows.end()) return found->second;
    RowSet rs(n);
    for (std::size_t r = 0; r < n; ++r)
      if (data.value(r, it.feature) == it.value) rs.set(r);
    return item_rows.emplace(it, std::move(rs)).first->second;
  };

  for (const auto& outer : sd) {
    for (const auto& inner : rl) {
      ++out.pair_visits;
      if (outer.size() + inner.size() > eps2 || outer.shares_feature(inner)) continue;

      RowSet covered(n, true);
      for (const auto& it : outer) covered &= rows_of(it);
      for (const auto& it : inner) covered &= rows_of(it);
      const RowSet remaining = covered.complement();
      const std::size_t left = remaining.count();
      if (left == 0) continue;

      const auto features = inner.features();
      const auto mined =
          mine_frequent(data, min_support_count(q, left), inner.size(), MiningScope{features, &remaining});
      for (const auto& then : mined) {
        if (then.size() != inner.size() || then == inner) continue;
        ++out.iteration_count;
        emitter.emit(outer, inner, then);
      }
    }
  }
  return out;
}

} // namespace gce
