#pragma once

// Brute-force reference implementations and random instance generators.
// Nothing here calls into the code paths it is used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <tuple>
#include <vector>

#include "gce/gce.hpp"

namespace gce::testing {

using Rng = std::mt19937_64;

inline std::size_t uniform_int(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline DiscretizedDataset random_dataset(Rng& rng, std::size_t rows, std::size_t features, std::size_t max_card) {
  std::vector<std::size_t> card(features);
  for (auto& c : card) c = uniform_int(rng, 1, max_card);
  std::vector<std::uint32_t> cells;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t f = 0; f < features; ++f) cells.push_back(static_cast<std::uint32_t>(uniform_int(rng, 0, card[f] - 1)));
  return DiscretizedDataset(features, std::move(cells), std::move(card));
}

using ItemVec = std::vector<std::pair<std::uint32_t, std::uint32_t>>;

inline ItemVec to_vec(const ItemSet& s) {
  ItemVec v;
  for (const auto& it : s) v.emplace_back(it.feature, it.value);
  return v;
}

// Every itemset over every feature subset of size <= max_length, enumerated
// over the full value product and counted by a row scan.
inline std::set<ItemVec> power_set_frequent(const DiscretizedDataset& d, std::size_t min_count,
                                            std::size_t max_length) {
  std::set<ItemVec> out;
  const std::size_t F = d.feature_count();
  for (std::uint32_t mask = 1; mask < (1u << F); ++mask) {
    std::vector<std::uint32_t> feats;
    for (std::uint32_t f = 0; f < F; ++f)
      if (mask & (1u << f)) feats.push_back(f);
    if (feats.size() > max_length) continue;
    std::vector<std::uint32_t> vals(feats.size(), 0);
    for (;;) {
      std::size_t count = 0;
      for (std::size_t r = 0; r < d.row_count(); ++r) {
        bool all = true;
        for (std::size_t k = 0; k < feats.size(); ++k) all = all && d.value(r, feats[k]) == vals[k];
        count += all;
      }
      if (count >= min_count) {
        ItemVec v;
        for (std::size_t k = 0; k < feats.size(); ++k) v.emplace_back(feats[k], vals[k]);
        out.insert(v);
      }
      std::size_t k = 0;
      while (k < feats.size() && ++vals[k] == d.cardinality(feats[k])) vals[k++] = 0;
      if (k == feats.size()) break;
    }
  }
  return out;
}

inline std::set<ItemVec> as_set(const std::vector<ItemSet>& sets) {
  std::set<ItemVec> out;
  for (const auto& s : sets) out.insert(to_vec(s));
  return out;
}

using TripleKey = std::tuple<ItemVec, ItemVec, ItemVec>;

inline TripleKey key(const Triple& t) { return {to_vec(t.outer), to_vec(t.inner), to_vec(t.then)}; }

inline std::set<TripleKey> keys(const GroundSet& g) {
  std::set<TripleKey> out;
  for (const auto& t : g.triples) out.insert(key(t));
  return out;
}

// Triple validity written out from the definition.
inline bool valid_by_definition(const ItemVec& o, const ItemVec& i, const ItemVec& t, std::size_t eps2) {
  if (i.empty() || o.size() + i.size() > eps2) return false;
  for (const auto& a : o)
    for (const auto& b : i)
      if (a.first == b.first) return false;
  if (i.size() != t.size()) return false;
  bool changed = false;
  for (std::size_t k = 0; k < i.size(); ++k) {
    if (i[k].first != t[k].first) return false;
    changed = changed || i[k].second != t[k].second;
  }
  return changed;
}

inline std::set<TripleKey> brute_force_triples(const std::vector<ItemSet>& sd, const std::vector<ItemSet>& rl,
                                               std::size_t eps2) {
  std::set<TripleKey> out;
  for (const auto& o : sd)
    for (const auto& i : rl)
      for (const auto& t : rl)
        if (valid_by_definition(to_vec(o), to_vec(i), to_vec(t), eps2)) out.insert({to_vec(o), to_vec(i), to_vec(t)});
  return out;
}

inline bool row_matches(const DiscretizedDataset& d, std::size_t r, const ItemVec& items) {
  for (const auto& [f, v] : items)
    if (d.value(r, f) != v) return false;
  return true;
}

// Then conditions for one If pair by enumerating every value combination of
// the inner features and counting rows outside outer-and-inner.
inline std::set<ItemVec> brute_force_thens(const DiscretizedDataset& d, const ItemVec& outer, const ItemVec& inner,
                                           double q) {
  std::vector<std::size_t> keep;
  for (std::size_t r = 0; r < d.row_count(); ++r)
    if (!(row_matches(d, r, outer) && row_matches(d, r, inner))) keep.push_back(r);
  std::set<ItemVec> out;
  if (keep.empty()) return out;
  const double x = q * static_cast<double>(keep.size());
  const double need = std::max(1.0, std::ceil(x - 1e-9 * std::max(1.0, x)));
  std::vector<std::uint32_t> vals(inner.size(), 0);
  for (;;) {
    ItemVec cand;
    for (std::size_t k = 0; k < inner.size(); ++k) cand.emplace_back(inner[k].first, vals[k]);
    std::size_t count = 0;
    for (auto r : keep) count += row_matches(d, r, cand);
    if (count >= need && cand != inner) out.insert(cand);
    std::size_t k = 0;
    while (k < inner.size() && ++vals[k] == d.cardinality(inner[k].first)) vals[k++] = 0;
    if (k == inner.size()) break;
  }
  return out;
}

// Plain nested-vector forward pass.
inline std::array<double, 2> naive_forward(const std::vector<DenseLayer>& layers, std::vector<double> x) {
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& L = layers[l];
    std::vector<std::vector<double>> W(L.outputs, std::vector<double>(L.inputs));
    for (std::size_t o = 0; o < L.outputs; ++o)
      for (std::size_t i = 0; i < L.inputs; ++i) W[o][i] = L.weights[o * L.inputs + i];
    std::vector<double> y(L.outputs);
    for (std::size_t o = 0; o < L.outputs; ++o) {
      long double s = L.bias[o];
      for (std::size_t i = 0; i < L.inputs; ++i) s += static_cast<long double>(W[o][i]) * x[i];
      y[o] = static_cast<double>(s);
      if (l + 1 < layers.size() && y[o] < 0) y[o] = 0;
    }
    x = y;
  }
  const double z = std::exp(x[0]) + std::exp(x[1]);
  return {std::exp(x[0]) / z, std::exp(x[1]) / z};
}

// Random evaluated triples. Outer conditions come from a small pool so the
// eps3 constraint binds; coverage/correction sets are random subsets.
inline std::vector<EvaluatedTriple> random_evaluated(Rng& rng, std::size_t count, std::size_t affected,
                                                     std::size_t outer_pool = 4) {
  std::vector<EvaluatedTriple> out;
  for (std::size_t i = 0; i < count; ++i) {
    EvaluatedTriple e;
    e.triple.outer = ItemSet{Item{0, static_cast<std::uint32_t>(uniform_int(rng, 0, outer_pool - 1))}};
    e.triple.inner = ItemSet{Item{1, static_cast<std::uint32_t>(i)}};
    e.triple.then = ItemSet{Item{1, static_cast<std::uint32_t>(i + 1000)}};
    e.triple.gen_index = i;
    const double p_cover = std::uniform_real_distribution<double>(0.05, 0.5)(rng);
    const double p_fix = std::uniform_real_distribution<double>(0.2, 0.9)(rng);
    for (std::uint32_t a = 0; a < affected; ++a) {
      if (std::bernoulli_distribution(p_cover)(rng)) {
        e.covered.push_back(a);
        if (std::bernoulli_distribution(p_fix)(rng)) {
          e.corrected.push_back(a);
          e.cost.push_back(static_cast<double>(uniform_int(rng, 1, 3)));
        }
      }
    }
    e.feature_change = uniform_int(rng, 1, 3);
    e.feature_cost = static_cast<double>(e.feature_change);
    out.push_back(std::move(e));
  }
  return out;
}

inline std::size_t distinct_outers(const std::vector<const EvaluatedTriple*>& set) {
  std::set<ItemVec> outers;
  for (auto* t : set) outers.insert(to_vec(t->triple.outer));
  return outers.size();
}

inline bool feasible(const std::vector<const EvaluatedTriple*>& set, std::size_t eps1, std::size_t eps3) {
  return set.size() <= eps1 && distinct_outers(set) <= eps3;
}

// Exhaustively tries every single add, delete and exchange move on R and
// returns the best improvement found (<= 0 means none).
inline double best_single_move_gain(const std::vector<EvaluatedTriple>& ground, const std::vector<std::size_t>& members,
                                    std::size_t eps1, std::size_t eps3, const ObjectiveConfig& obj,
                                    std::size_t affected) {
  auto build = [&](const std::vector<std::size_t>& idx) {
    std::vector<const EvaluatedTriple*> s;
    for (auto i : idx) s.push_back(&ground[i]);
    return s;
  };
  const double base = objective(build(members), obj, affected);
  double best = -1e300;
  std::set<std::size_t> in(members.begin(), members.end());
  auto consider = [&](const std::vector<std::size_t>& idx) {
    auto s = build(idx);
    if (!feasible(s, eps1, eps3)) return;
    best = std::max(best, objective(s, obj, affected) - base);
  };
  for (std::size_t v = 0; v < ground.size(); ++v) {
    if (in.count(v)) continue;
    auto add = members;
    add.push_back(v);
    consider(add);
  }
  for (std::size_t p = 0; p < members.size(); ++p) {
    auto del = members;
    del.erase(del.begin() + static_cast<std::ptrdiff_t>(p));
    consider(del);
    for (std::size_t v = 0; v < ground.size(); ++v) {
      if (in.count(v)) continue;
      auto ex = del;
      ex.push_back(v);
      consider(ex);
    }
  }
  return best;
}

// Best objective over all feasible subsets (small ground sets only).
inline double brute_force_best(const std::vector<EvaluatedTriple>& ground, std::size_t eps1, std::size_t eps3,
                               const ObjectiveConfig& obj, std::size_t affected) {
  double best = 0.0;
  const std::size_t n = ground.size();
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    if (static_cast<std::size_t>(std::popcount(mask)) > eps1) continue;
    std::vector<const EvaluatedTriple*> s;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (1u << i)) s.push_back(&ground[i]);
    if (!feasible(s, eps1, eps3)) continue;
    best = std::max(best, objective(s, obj, affected));
  }
  return best;
}

// Random itemset lists drawn from a dataset's value space, sorted
// canonically and duplicate-free.
inline std::vector<ItemSet> random_itemsets(Rng& rng, std::size_t count, std::size_t features, std::size_t card,
                                            std::size_t max_len) {
  std::set<ItemSet, CanonicalOrder> pool;
  std::size_t attempts = 0;
  while (pool.size() < count && attempts++ < count * 50) {
    const std::size_t len = uniform_int(rng, 1, std::min(max_len, features));
    std::vector<std::uint32_t> feats(features);
    std::iota(feats.begin(), feats.end(), 0u);
    std::shuffle(feats.begin(), feats.end(), rng);
    std::vector<Item> items;
    for (std::size_t k = 0; k < len; ++k)
      items.push_back({feats[k], static_cast<std::uint32_t>(uniform_int(rng, 0, card - 1))});
    pool.insert(ItemSet(std::move(items)));
  }
  return {pool.begin(), pool.end()};
}

} // namespace gce::testing
