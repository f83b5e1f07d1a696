#pragma once

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <ranges>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "gce/dataset.hpp"
#include "gce/ground_set.hpp"
#include "gce/model.hpp"
#include "gce/row_set.hpp"
#include "gce/schema.hpp"
#include "gce/triple.hpp"

namespace gce {

// Per-feature cost of changing a feature. Empty means every feature costs 1.
struct CostTable {
  std::vector<double> weights;

  double weight(std::size_t feature) const noexcept { return weights.empty() ? 1.0 : weights[feature]; }
};

// A triple with its effect on the affected individuals. Indices are
// positions in X_aff, not dataset rows.
struct EvaluatedTriple {
  Triple triple;
  std::vector<std::uint32_t> covered;   // satisfy outer and inner
  std::vector<std::uint32_t> corrected; // subset of covered flipped to favorable
  std::vector<double> cost;             // parallel to corrected
  double feature_cost = 0.0;            // summed weight of features Then changes vs Inner-If
  std::size_t feature_change = 0;       // number of such features

  std::size_t incorrect() const noexcept { return covered.size() - corrected.size(); }
};

namespace detail {
inline const EvaluatedTriple& deref(const EvaluatedTriple& t) noexcept { return t; }
inline const EvaluatedTriple& deref(const EvaluatedTriple* t) noexcept { return *t; }
} // namespace detail

// Evaluates triples against a fixed X_aff. Immutable after construction, so
// evaluate() may run concurrently.
template <RecourseOracle Oracle>
class Evaluator {
public:
  Evaluator(const DiscretizedDataset& data, const AffectedSet& affected, const Oracle& oracle,
            const BinningSpec& binning, const FeatureSchema& schema, CostTable costs = {})
      : data_(data), affected_(affected), oracle_(oracle), binning_(binning), schema_(schema),
        costs_(std::move(costs)) {
    const std::size_t m = affected_.size();
    item_rows_.resize(data_.feature_count());
    for (std::size_t f = 0; f < data_.feature_count(); ++f) {
      item_rows_[f].assign(data_.cardinality(f), RowSet(m));
      for (std::size_t a = 0; a < m; ++a) item_rows_[f][data_.value(affected_.indices[a], f)].set(a);
    }
  }

  std::size_t affected_count() const noexcept { return affected_.size(); }

  EvaluatedTriple evaluate(const Triple& t) const {
    EvaluatedTriple out;
    out.triple = t;
    for (const auto& it : t.then) {
      if (t.inner.value_of(it.feature) != it.value) {
        out.feature_cost += costs_.weight(it.feature);
        ++out.feature_change;
      }
    }

    RowSet cover(affected_.size(), true);
    for (const auto& it : t.outer) cover &= item_rows_[it.feature][it.value];
    for (const auto& it : t.inner) cover &= item_rows_[it.feature][it.value];
    out.covered = cover.indices();

    std::vector<double> row;
    for (auto a : out.covered) {
      const auto& raw = data_.raw().rows[affected_.indices[a]];
      row.assign(raw.begin(), raw.end());
      detail::write_then(row, t.then, binning_, schema_);
      if (!oracle_.favorable(row)) continue;
      double c = 0.0;
      for (const auto& it : t.then)
        if (row[it.feature] != raw[it.feature]) c += costs_.weight(it.feature);
      out.corrected.push_back(a);
      out.cost.push_back(c);
    }
    return out;
  }

private:
  const DiscretizedDataset& data_;
  const AffectedSet& affected_;
  const Oracle& oracle_;
  const BinningSpec& binning_;
  const FeatureSchema& schema_;
  CostTable costs_;
  std::vector<std::vector<RowSet>> item_rows_; // [feature][value] over X_aff positions
};

template <RecourseOracle Oracle>
EvaluatedTriple evaluate_triple(const Triple& t, const AffectedSet& affected, const DiscretizedDataset& data,
                                const Oracle& oracle, const BinningSpec& binning, const FeatureSchema& schema,
                                const CostTable& costs = {}) {
  return Evaluator<Oracle>(data, affected, oracle, binning, schema, costs).evaluate(t);
}

// Recourse accuracy and cost of a set of evaluated triples.
struct SetMetrics {
  std::size_t corrected = 0; // individuals with at least one successful recourse
  std::size_t affected = 0;
  std::optional<double> cost; // mean over corrected individuals of their cheapest recourse

  double acc() const noexcept {
    return affected ? 100.0 * static_cast<double>(corrected) / static_cast<double>(affected) : 0.0;
  }
};

// Accepts a range of EvaluatedTriple or of pointers to them.
template <std::ranges::input_range Range>
SetMetrics metrics(const Range& set, std::size_t affected) {
  std::map<std::uint32_t, double> best;
  for (const auto& e : set) {
    const auto& t = detail::deref(e);
    for (std::size_t k = 0; k < t.corrected.size(); ++k) {
      auto [it, inserted] = best.emplace(t.corrected[k], t.cost[k]);
      if (!inserted) it->second = std::min(it->second, t.cost[k]);
    }
  }
  SetMetrics m;
  m.affected = affected;
  m.corrected = best.size();
  if (!best.empty()) {
    double sum = 0.0;
    for (const auto& [idx, c] : best) sum += c;
    m.cost = sum / static_cast<double>(best.size());
  }
  return m;
}

// Running union of corrected individuals with their cheapest cost; only
// grows.
class AccuracyAccumulator {
public:
  explicit AccuracyAccumulator(std::size_t affected)
      : best_(affected, std::numeric_limits<double>::infinity()) {}

  // Returns how many individuals this triple corrects for the first time.
  std::size_t add(const EvaluatedTriple& t) {
    std::size_t fresh = 0;
    for (std::size_t k = 0; k < t.corrected.size(); ++k) {
      double& b = best_[t.corrected[k]];
      if (b == std::numeric_limits<double>::infinity()) {
        ++fresh;
        b = t.cost[k];
        sum_ += b;
      } else if (t.cost[k] < b) {
        sum_ -= b - t.cost[k];
        b = t.cost[k];
      }
    }
    corrected_ += fresh;
    return fresh;
  }

  // How many individuals `t` would correct for the first time.
  std::size_t gain(const EvaluatedTriple& t) const noexcept {
    std::size_t fresh = 0;
    for (auto a : t.corrected) fresh += best_[a] == std::numeric_limits<double>::infinity();
    return fresh;
  }

  SetMetrics metrics() const {
    SetMetrics m{corrected_, best_.size(), std::nullopt};
    if (corrected_) m.cost = sum_ / static_cast<double>(corrected_);
    return m;
  }

private:
  std::vector<double> best_;
  std::size_t corrected_ = 0;
  double sum_ = 0.0;
};

// One sample of progress; the CSV trace is a list of these.
struct TraceRow {
  double wall_seconds = 0.0;
  std::string stage;
  std::size_t evaluated = 0;
  std::size_t kept = 0;
  double acc_percent = 0.0;
  std::optional<double> cost;
  std::optional<double> objective;
};

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point origin) {
  return std::chrono::duration<double>(Clock::now() - origin).count();
}

// r keeps every evaluated triple; r' keeps a triple only if it raises the
// accuracy of what has been kept so far.
enum class ReductionMode { AddAll, AccGainOnly };

struct VReduceOptions {
  std::size_t workers = 1;
  std::size_t trace_every = 100;
  Clock::time_point origin = Clock::now();
  std::string stage = "stage2";
};

struct VReduction {
  std::vector<EvaluatedTriple> kept;
  std::size_t evaluated = 0;
  SetMetrics metrics; // of the kept set; acc equals that of the evaluated prefix
  std::vector<TraceRow> trace;
};

// Evaluates the first min(budget, |V|) triples in generation order. Triples
// are evaluated in parallel blocks, and the keep/drop decision is replayed
// sequentially so the result does not depend on the worker count.
template <RecourseOracle Oracle>
VReduction v_reduce(const GroundSet& ground, std::size_t budget, ReductionMode mode,
                    const Evaluator<Oracle>& evaluator, const VReduceOptions& opts = {}) {
  if (budget == 0) throw ConfigError("budget", "must be at least 1");
  const std::size_t total = std::min(budget, ground.size());
  const std::size_t workers = std::max<std::size_t>(1, opts.workers);
  const std::size_t trace_every = std::max<std::size_t>(1, opts.trace_every);
  constexpr std::size_t kBlock = 2048;

  VReduction out;
  AccuracyAccumulator acc(evaluator.affected_count());
  std::vector<EvaluatedTriple> block;

  auto sample = [&] {
    const auto m = acc.metrics();
    out.trace.push_back({seconds_since(opts.origin), opts.stage, out.evaluated, out.kept.size(), m.acc(), m.cost,
                         std::nullopt});
  };
  sample();

  for (std::size_t start = 0; start < total; start += kBlock) {
    const std::size_t len = std::min(kBlock, total - start);
    block.assign(len, EvaluatedTriple{});
    auto work = [&](std::size_t w) {
      for (std::size_t k = w; k < len; k += workers) block[k] = evaluator.evaluate(ground.triples[start + k]);
    };
    if (workers == 1 || len < 64) {
      work(0);
    } else {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
    }

    for (auto& t : block) {
      ++out.evaluated;
      if (mode == ReductionMode::AddAll || acc.gain(t) > 0) {
        acc.add(t);
        out.kept.push_back(std::move(t));
      }
      if (out.evaluated % trace_every == 0) sample();
    }
  }
  if (out.evaluated % trace_every != 0 || out.evaluated == 0) sample();
  out.metrics = acc.metrics();
  return out;
}

} // namespace gce
