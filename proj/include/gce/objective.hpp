#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <ranges>
#include <set>
#include <span>
#include <string>
#include <variant>

#include "gce/error.hpp"
#include "gce/evaluation.hpp"

namespace gce {

// acc(R) - lambda * cost(R), floored at zero.
struct SimplifiedObjective {
  double lambda = 0.0;
};

// lambda_incorrect * (u_incorrect - incorrectrecourse) + cover
//   + lambda_cost * (u_cost - featurecost) + lambda_change * (u_change - featurechange)
//
// incorrectrecourse sums |covered \ corrected| over triples, cover counts
// distinct covered individuals, featurecost and featurechange sum each
// triple's Then-vs-Inner-If change weight and count.
struct FourTermObjective {
  double lambda_incorrect = 1.0;
  double lambda_cost = 0.0;
  double lambda_change = 0.0;
  double u_incorrect = 1.0;
  double u_cost = 1.0;
  double u_change = 1.0;
};

using ObjectiveConfig = std::variant<SimplifiedObjective, FourTermObjective>;

// Normalizers at eps1 times the largest per-triple term, which keeps the
// objective non-negative on every set of at most eps1 triples.
inline FourTermObjective four_term_objective(std::span<const EvaluatedTriple> ground, std::size_t eps1,
                                             double lambda_incorrect, double lambda_cost, double lambda_change) {
  double max_incorrect = 0.0, max_cost = 0.0, max_change = 0.0;
  for (const auto& t : ground) {
    max_incorrect = std::max(max_incorrect, static_cast<double>(t.incorrect()));
    max_cost = std::max(max_cost, t.feature_cost);
    max_change = std::max(max_change, static_cast<double>(t.feature_change));
  }
  const auto e = static_cast<double>(eps1);
  return {lambda_incorrect,
          lambda_cost,
          lambda_change,
          std::max(1.0, e * max_incorrect),
          std::max(1.0, e * max_cost),
          std::max(1.0, e * max_change)};
}

// Aggregates every objective reads from a set.
struct SetTerms {
  std::size_t size = 0; // number of triples
  std::size_t affected = 0;
  std::size_t corrected = 0;
  double cost_sum = 0.0; // of per-individual cheapest costs
  std::size_t covered = 0;
  std::size_t incorrect = 0;
  double feature_cost = 0.0;
  std::size_t feature_change = 0;

  double acc() const noexcept {
    return affected ? 100.0 * static_cast<double>(corrected) / static_cast<double>(affected) : 0.0;
  }
  double mean_cost() const noexcept { return corrected ? cost_sum / static_cast<double>(corrected) : 0.0; }
};

// The empty set scores zero under both objectives.
inline double objective_from_terms(const SetTerms& s, const ObjectiveConfig& cfg) {
  if (s.size == 0) return 0.0;
  if (const auto* simple = std::get_if<SimplifiedObjective>(&cfg))
    return std::max(0.0, s.acc() - simple->lambda * s.mean_cost());

  const auto& f = std::get<FourTermObjective>(cfg);
  const double value = f.lambda_incorrect * (f.u_incorrect - static_cast<double>(s.incorrect)) +
                       static_cast<double>(s.covered) + f.lambda_cost * (f.u_cost - s.feature_cost) +
                       f.lambda_change * (f.u_change - static_cast<double>(s.feature_change));
  if (value < 0.0) throw NormalizerViolation("four-term objective is negative; normalizers too small");
  return value;
}

// Direct computation of the terms of a set, independent of any incremental
// bookkeeping.
template <std::ranges::input_range Range>
SetTerms set_terms(const Range& set, std::size_t affected) {
  SetTerms s;
  s.affected = affected;
  std::map<std::uint32_t, double> best;
  std::set<std::uint32_t> covered;
  for (const auto& e : set) {
    const auto& t = detail::deref(e);
    ++s.size;
    for (std::size_t k = 0; k < t.corrected.size(); ++k) {
      auto [it, inserted] = best.emplace(t.corrected[k], t.cost[k]);
      if (!inserted) it->second = std::min(it->second, t.cost[k]);
    }
    covered.insert(t.covered.begin(), t.covered.end());
    s.incorrect += t.incorrect();
    s.feature_cost += t.feature_cost;
    s.feature_change += t.feature_change;
  }
  s.corrected = best.size();
  for (const auto& [idx, c] : best) s.cost_sum += c;
  s.covered = covered.size();
  return s;
}

template <std::ranges::input_range Range>
double objective(const Range& set, const ObjectiveConfig& cfg, std::size_t affected) {
  return objective_from_terms(set_terms(set, affected), cfg);
}

} // namespace gce
