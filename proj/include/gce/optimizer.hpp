#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <unordered_map>
#include <vector>

#include "gce/evaluation.hpp"
#include "gce/objective.hpp"

namespace gce {

struct OptimizerConfig {
  std::size_t eps1 = 20; // max triples in R
  std::size_t eps3 = 10; // max distinct Outer-If conditions in R
  double delta = 1e-9;   // a move must improve the objective by more than this
  double bound_tolerance = 0.0;
  double wall_clock_budget = 300.0; // seconds; <= 0 disables the limit
  std::uint64_t seed = 0;
};

enum class Termination { Converged, BoundReached, BudgetExhausted, Skipped };

inline const char* to_string(Termination t) noexcept {
  switch (t) {
  case Termination::Converged: return "converged";
  case Termination::BoundReached: return "bound-reached";
  case Termination::BudgetExhausted: return "budget-exhausted";
  case Termination::Skipped: return "skipped";
  }
  return "?";
}

struct Move {
  enum class Kind { Init, Add, Delete, Exchange } kind = Kind::Init;
  std::size_t removed = 0; // position in R before the move (Delete, Exchange)
  std::size_t added = 0;   // index into the ground set (Init, Add, Exchange)
  double objective = 0.0;  // after the move
};

struct RecourseSet {
  std::vector<EvaluatedTriple> triples;
  std::vector<std::size_t> ground_indices; // positions of `triples` in the optimizer's ground set
  SetMetrics metrics;
  double objective_value = 0.0;
  Termination termination = Termination::Converged;
  std::vector<Move> moves;
  std::vector<TraceRow> trace;
};

// Keeps the s triples that correct the most individuals, ties broken by
// generation order. s >= |ground| returns the input untouched.
inline std::vector<EvaluatedTriple> v_select(std::vector<EvaluatedTriple> ground, std::size_t s) {
  if (s == 0) throw ConfigError("s", "must be at least 1");
  if (s >= ground.size()) return ground;
  std::stable_sort(ground.begin(), ground.end(), [](const EvaluatedTriple& a, const EvaluatedTriple& b) {
    if (a.corrected.size() != b.corrected.size()) return a.corrected.size() > b.corrected.size();
    return a.triple.gen_index < b.triple.gen_index;
  });
  ground.resize(s);
  return ground;
}

enum class GateDecision { Run, Skip };

// Stage 3 cannot push acc(R) past acc(V); skip it when acc(V) already falls
// short of the target.
inline GateDecision early_gate(double acc_of_v, double target) noexcept {
  return acc_of_v < target ? GateDecision::Skip : GateDecision::Run;
}

namespace detail {

// Incremental terms of the current solution. Adding is O(|corrected| +
// |covered|); removal rebuilds from the remaining members.
class SolutionState {
public:
  SolutionState(std::span<const EvaluatedTriple> ground, std::size_t affected)
      : ground_(ground), correct_count_(affected, 0), cover_count_(affected, 0),
        best_(affected, std::numeric_limits<double>::infinity()) {
    terms_.affected = affected;
  }

  void rebuild(std::span<const std::size_t> members) {
    std::fill(correct_count_.begin(), correct_count_.end(), 0);
    std::fill(cover_count_.begin(), cover_count_.end(), 0);
    std::fill(best_.begin(), best_.end(), std::numeric_limits<double>::infinity());
    const auto affected = terms_.affected;
    terms_ = SetTerms{};
    terms_.affected = affected;
    for (auto m : members) add(m);
  }

  void add(std::size_t v) {
    terms_ = with(v);
    const auto& t = ground_[v];
    for (std::size_t k = 0; k < t.corrected.size(); ++k) {
      const auto a = t.corrected[k];
      ++correct_count_[a];
      best_[a] = std::min(best_[a], t.cost[k]);
    }
    for (auto a : t.covered) ++cover_count_[a];
  }

  const SetTerms& terms() const noexcept { return terms_; }

  // Terms of the current solution plus ground[v].
  SetTerms with(std::size_t v) const {
    SetTerms s = terms_;
    const auto& t = ground_[v];
    ++s.size;
    for (std::size_t k = 0; k < t.corrected.size(); ++k) {
      const auto a = t.corrected[k];
      if (correct_count_[a] == 0) {
        ++s.corrected;
        s.cost_sum += t.cost[k];
      } else if (t.cost[k] < best_[a]) {
        s.cost_sum -= best_[a] - t.cost[k];
      }
    }
    for (auto a : t.covered) s.covered += cover_count_[a] == 0;
    s.incorrect += t.incorrect();
    s.feature_cost += t.feature_cost;
    s.feature_change += t.feature_change;
    return s;
  }

private:
  std::span<const EvaluatedTriple> ground_;
  std::vector<std::uint32_t> correct_count_;
  std::vector<std::uint32_t> cover_count_;
  std::vector<double> best_;
  SetTerms terms_;
};

} // namespace detail

// Local search over single additions, deletions and one-for-one exchanges,
// started from the best singleton. Moves are scanned in a fixed order
// (additions by ground position, deletions by solution position, exchanges
// lexicographically) and the first one that is feasible under eps1/eps3 and
// improves the objective by more than delta is taken.
inline RecourseSet maximize(std::span<const EvaluatedTriple> ground, const OptimizerConfig& cfg,
                            const ObjectiveConfig& obj, std::size_t affected, double acc_of_v,
                            Clock::time_point origin = Clock::now()) {
  if (ground.empty()) throw ConfigError("ground", "optimizer needs a non-empty ground set");
  if (cfg.eps1 == 0 || cfg.eps3 == 0) throw ConfigError("eps1/eps3", "must be positive");

  const auto start = Clock::now();
  const std::size_t n = ground.size();

  // Intern Outer-If conditions.
  std::vector<std::uint32_t> outer_id(n);
  {
    std::unordered_map<ItemSet, std::uint32_t, ItemSetHash> ids;
    for (std::size_t i = 0; i < n; ++i)
      outer_id[i] = ids.emplace(ground[i].triple.outer, static_cast<std::uint32_t>(ids.size())).first->second;
  }

  std::vector<std::size_t> members;
  std::vector<char> in_solution(n, 0);
  std::unordered_map<std::uint32_t, std::size_t> outer_uses;

  auto distinct_outers_with = [&](std::size_t v, std::ptrdiff_t removed_pos) {
    std::size_t distinct = outer_uses.size();
    if (removed_pos >= 0 && outer_uses.at(outer_id[members[static_cast<std::size_t>(removed_pos)]]) == 1)
      --distinct;
    const auto it = outer_uses.find(outer_id[v]);
    const bool present = it != outer_uses.end() &&
                         !(removed_pos >= 0 && it->second == 1 &&
                           outer_id[members[static_cast<std::size_t>(removed_pos)]] == outer_id[v]);
    return present ? distinct : distinct + 1;
  };

  auto insert_member = [&](std::size_t v) {
    members.push_back(v);
    in_solution[v] = 1;
    ++outer_uses[outer_id[v]];
  };
  auto erase_member = [&](std::size_t pos) {
    const auto v = members[pos];
    members.erase(members.begin() + static_cast<std::ptrdiff_t>(pos));
    in_solution[v] = 0;
    if (--outer_uses[outer_id[v]] == 0) outer_uses.erase(outer_id[v]);
  };

  RecourseSet out;
  detail::SolutionState state(ground, affected);

  // Best singleton, lowest index on ties.
  std::size_t best_v = 0;
  double best_f = -std::numeric_limits<double>::infinity();
  for (std::size_t v = 0; v < n; ++v) {
    const double f = objective_from_terms(state.with(v), obj);
    if (f > best_f) {
      best_f = f;
      best_v = v;
    }
  }
  insert_member(best_v);
  state.add(best_v);
  double current = best_f;
  out.moves.push_back({Move::Kind::Init, 0, best_v, current});

  auto record = [&] {
    const auto& t = state.terms();
    out.trace.push_back({seconds_since(origin), "stage3", out.moves.size(), members.size(), t.acc(),
                         t.corrected ? std::optional<double>(t.mean_cost()) : std::nullopt, current});
  };
  record();

  detail::SolutionState reduced(ground, affected);
  std::vector<std::size_t> rest;

  for (;;) {
    if (cfg.wall_clock_budget > 0 && seconds_since(start) > cfg.wall_clock_budget) {
      out.termination = Termination::BudgetExhausted;
      break;
    }

    bool moved = false;

    // (a) additions
    if (members.size() < cfg.eps1) {
      for (std::size_t v = 0; v < n && !moved; ++v) {
        if (in_solution[v] || distinct_outers_with(v, -1) > cfg.eps3) continue;
        const double f = objective_from_terms(state.with(v), obj);
        if (f > current + cfg.delta) {
          insert_member(v);
          state.add(v);
          current = f;
          out.moves.push_back({Move::Kind::Add, 0, v, f});
          moved = true;
        }
      }
    }

    // (b) deletions
    for (std::size_t pos = 0; pos < members.size() && !moved; ++pos) {
      rest = members;
      rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(pos));
      reduced.rebuild(rest);
      const double f = objective_from_terms(reduced.terms(), obj);
      if (f > current + cfg.delta) {
        erase_member(pos);
        state.rebuild(members);
        current = f;
        out.moves.push_back({Move::Kind::Delete, pos, 0, f});
        moved = true;
      }
    }

    // (c) exchanges
    for (std::size_t pos = 0; pos < members.size() && !moved; ++pos) {
      rest = members;
      rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(pos));
      reduced.rebuild(rest);
      for (std::size_t v = 0; v < n && !moved; ++v) {
        if (in_solution[v] || distinct_outers_with(v, static_cast<std::ptrdiff_t>(pos)) > cfg.eps3) continue;
        const double f = objective_from_terms(reduced.with(v), obj);
        if (f > current + cfg.delta) {
          erase_member(pos);
          insert_member(v);
          state.rebuild(members);
          current = f;
          out.moves.push_back({Move::Kind::Exchange, pos, v, f});
          moved = true;
        }
      }
    }

    if (!moved) {
      out.termination = Termination::Converged;
      break;
    }
    record();
    // acc(R) cannot pass acc(V); stop once a move gets there instead of
    // paying for a final scan that would only confirm it.
    if (state.terms().acc() >= acc_of_v - cfg.bound_tolerance) {
      out.termination = Termination::BoundReached;
      break;
    }
  }

  for (auto m : members) out.triples.push_back(ground[m]);
  out.ground_indices = members;
  out.metrics = metrics(out.triples, affected);
  out.objective_value = current;
  return out;
}

// Replays a move log onto an empty solution; returns ground indices.
inline std::vector<std::size_t> replay_moves(std::span<const Move> moves) {
  std::vector<std::size_t> members;
  for (const auto& m : moves) {
    switch (m.kind) {
    case Move::Kind::Init:
    case Move::Kind::Add: members.push_back(m.added); break;
    case Move::Kind::Delete: members.erase(members.begin() + static_cast<std::ptrdiff_t>(m.removed)); break;
    case Move::Kind::Exchange:
      members.erase(members.begin() + static_cast<std::ptrdiff_t>(m.removed));
      members.push_back(m.added);
      break;
    }
  }
  return members;
}

} // namespace gce
