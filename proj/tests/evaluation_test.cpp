#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace gce;
using gce::testing::Rng;
using gce::testing::uniform_int;

namespace {

struct Loaded {
  Fixture fx;
  BinningSpec bins;
  DiscretizedDataset data;
  AffectedSet affected;
};

Loaded load_fixture(std::size_t rows = 300) {
  Loaded l{make_credit_fixture(rows), {}, {}, {}};
  l.bins = fit_bins(l.fx.data, l.fx.schema);
  l.data = discretize(l.fx.data, l.bins, l.fx.schema);
  l.affected = affected_set(l.fx.model, l.fx.data);
  return l;
}

EvaluatedTriple corrected_only(std::vector<std::uint32_t> idx, std::vector<double> cost) {
  EvaluatedTriple e;
  e.covered = idx;
  e.corrected = std::move(idx);
  e.cost = std::move(cost);
  return e;
}

} // namespace

TEST(EvaluateTriple, VacuousCoverage) {
  // toy: one categorical feature decides, the other is never "z" among affected
  Feature c;
  c.name = "c";
  c.categories = {"bad", "good"};
  Feature d;
  d.name = "d";
  d.categories = {"x", "y", "z"};
  const FeatureSchema schema({c, d});
  std::vector<ColumnSpan> enc{{"c", ColumnType::OneHot, 0, 2, 0, 1}, {"d", ColumnType::OneHot, 2, 3, 0, 1}};
  const auto model = linear_oracle(schema, enc, std::vector<double>{-1, 1, 0, 0, 0}, 0.0);
  RawDataset raw{{{0, 0}, {0, 1}, {1, 2}, {1, 0}}};
  const auto bins = fit_bins(raw, schema);
  const auto data = discretize(raw, bins, schema);
  const auto aff = affected_set(model, raw);
  ASSERT_EQ(aff.indices, (std::vector<std::uint32_t>{0, 1}));

  const Triple none{ItemSet{Item{1, 2}}, ItemSet{Item{0, 0}}, ItemSet{Item{0, 1}}, 0};
  const auto e = evaluate_triple(none, aff, data, model, bins, schema);
  EXPECT_TRUE(e.covered.empty());
  EXPECT_TRUE(e.corrected.empty());

  // flipping the decisive feature corrects everyone it covers at cost 1
  const Triple flip{ItemSet{}, ItemSet{Item{0, 0}}, ItemSet{Item{0, 1}}, 1};
  const auto f = evaluate_triple(flip, aff, data, model, bins, schema);
  EXPECT_EQ(f.covered, (std::vector<std::uint32_t>{0, 1}));
  EXPECT_EQ(f.corrected, f.covered);
  EXPECT_EQ(f.cost, (std::vector<double>{1, 1}));
  EXPECT_EQ(f.feature_change, 1u);

  CostTable weights{{2.5, 1.0}};
  const auto w = evaluate_triple(flip, aff, data, model, bins, schema, weights);
  EXPECT_EQ(w.cost, (std::vector<double>{2.5, 2.5}));
  EXPECT_DOUBLE_EQ(w.feature_cost, 2.5);
}

TEST(EvaluateTriple, MatchesDirectReprediction) {
  const auto l = load_fixture();
  const auto cands = make_candidates(apriori(l.data, 0.15, 6), l.fx.schema);
  const auto g = generate_rl_reduced(cands, 7);
  ASSERT_GT(g.size(), 50u);
  const Evaluator<ModelOracle> ev(l.data, l.affected, l.fx.model, l.bins, l.fx.schema);
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const auto& t = g.triples[uniform_int(rng, 0, g.size() - 1)];
    const auto e = ev.evaluate(t);
    std::vector<std::uint32_t> covered, corrected;
    std::vector<double> cost;
    for (std::uint32_t a = 0; a < l.affected.size(); ++a) {
      const auto r = l.affected.indices[a];
      if (!gce::testing::row_matches(l.data, r, gce::testing::to_vec(t.outer)) ||
          !gce::testing::row_matches(l.data, r, gce::testing::to_vec(t.inner)))
        continue;
      covered.push_back(a);
      const auto cf = apply_then(l.fx.data.rows[r], t, l.bins, l.fx.schema);
      if (!l.fx.model.favorable(cf)) continue;
      corrected.push_back(a);
      double c = 0;
      for (std::size_t f = 0; f < cf.size(); ++f) c += cf[f] != l.fx.data.rows[r][f];
      cost.push_back(c);
    }
    EXPECT_EQ(e.covered, covered);
    EXPECT_EQ(e.corrected, corrected);
    EXPECT_EQ(e.cost, cost);
  }
}

TEST(Metrics, EmptyAndRatio) {
  const std::vector<EvaluatedTriple> none;
  const auto m = metrics(none, 162);
  EXPECT_EQ(m.acc(), 0.0);
  EXPECT_FALSE(m.cost.has_value());

  std::vector<std::uint32_t> half(81);
  std::iota(half.begin(), half.end(), 0u);
  const std::vector<EvaluatedTriple> one{corrected_only(half, std::vector<double>(81, 1.0))};
  EXPECT_DOUBLE_EQ(metrics(one, 162).acc(), 50.0);
}

TEST(Metrics, PerIndividualMinimumCost) {
  const std::vector<EvaluatedTriple> set{corrected_only({0, 1}, {3, 1}), corrected_only({0, 2}, {1, 2})};
  const auto m = metrics(set, 4);
  EXPECT_DOUBLE_EQ(m.acc(), 75.0);
  EXPECT_DOUBLE_EQ(*m.cost, (1.0 + 1.0 + 2.0) / 3.0);
  // a triple that corrects nobody new at a lower cost leaves cost unchanged
  auto more = set;
  more.push_back(corrected_only({1, 2}, {5, 2}));
  EXPECT_DOUBLE_EQ(*metrics(more, 4).cost, *m.cost);
}

TEST(Metrics, AccMonotoneOnNestedSets) {
  Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const auto ground = gce::testing::random_evaluated(rng, 12, 40);
    std::vector<const EvaluatedTriple*> a, b;
    for (const auto& t : ground) {
      const int coin = static_cast<int>(uniform_int(rng, 0, 2));
      if (coin >= 1) b.push_back(&t);
      if (coin == 2) a.push_back(&t);
    }
    const auto ma = metrics(a, 40), mb = metrics(b, 40);
    EXPECT_LE(ma.corrected, mb.corrected);
    if (ma.corrected && mb.corrected) {
      // per-individual minimum only falls as the set grows
      std::map<std::uint32_t, double> best_a, best_b;
      for (auto* t : a)
        for (std::size_t k = 0; k < t->corrected.size(); ++k)
          best_a[t->corrected[k]] = std::min(best_a.count(t->corrected[k]) ? best_a[t->corrected[k]] : 1e9, t->cost[k]);
      for (auto* t : b)
        for (std::size_t k = 0; k < t->corrected.size(); ++k)
          best_b[t->corrected[k]] = std::min(best_b.count(t->corrected[k]) ? best_b[t->corrected[k]] : 1e9, t->cost[k]);
      for (auto [i, c] : best_a) EXPECT_LE(best_b[i], c);
    }
  }
}

TEST(VReduce, AddAllFullBudgetEqualsMetrics) {
  const auto l = load_fixture();
  const auto g = generate_original(make_candidates(apriori(l.data, 0.2, 6), l.fx.schema), 7);
  const Evaluator<ModelOracle> ev(l.data, l.affected, l.fx.model, l.bins, l.fx.schema);
  const auto red = v_reduce(g, g.size() + 10, ReductionMode::AddAll, ev, {2, 100});
  EXPECT_EQ(red.evaluated, g.size());
  EXPECT_EQ(red.kept.size(), g.size());
  std::vector<EvaluatedTriple> all;
  for (const auto& t : g.triples) all.push_back(ev.evaluate(t));
  const auto m = metrics(all, l.affected.size());
  EXPECT_EQ(red.metrics.corrected, m.corrected);
  EXPECT_DOUBLE_EQ(*red.metrics.cost, *m.cost);
  EXPECT_THROW(v_reduce(g, 0, ReductionMode::AddAll, ev), ConfigError);
}

TEST(VReduce, GainOnlyAgreesWithAddAllAtEveryPrefix) {
  const auto l = load_fixture();
  const auto g = generate_then(make_candidates(apriori(l.data, 0.15, 6), l.fx.schema), l.data, 1.0 / 300, 7);
  ASSERT_GT(g.size(), 300u);
  const Evaluator<ModelOracle> ev(l.data, l.affected, l.fx.model, l.bins, l.fx.schema);
  const std::size_t budget = g.size() - 7;
  const auto all = v_reduce(g, budget, ReductionMode::AddAll, ev, {1, 1});
  const auto gain = v_reduce(g, budget, ReductionMode::AccGainOnly, ev, {3, 1});
  ASSERT_EQ(all.trace.size(), gain.trace.size());
  for (std::size_t i = 0; i < all.trace.size(); ++i) {
    EXPECT_EQ(all.trace[i].evaluated, gain.trace[i].evaluated);
    EXPECT_EQ(all.trace[i].acc_percent, gain.trace[i].acc_percent);
    if (i) {
      EXPECT_GE(gain.trace[i].acc_percent, gain.trace[i - 1].acc_percent);
      EXPECT_GE(gain.trace[i].evaluated, gain.trace[i - 1].evaluated);
    }
  }
  EXPECT_EQ(gain.evaluated, budget);
  EXPECT_LE(gain.kept.size(), budget);
  EXPECT_LT(gain.kept.size(), all.kept.size());
  EXPECT_EQ(metrics(gain.kept, l.affected.size()).corrected, all.metrics.corrected);
  // each kept triple raised accuracy when it was added
  AccuracyAccumulator acc(l.affected.size());
  for (const auto& t : gain.kept) EXPECT_GT(acc.add(t), 0u);
}

TEST(VReduce, WorkerCountDoesNotChangeResult) {
  const auto l = load_fixture();
  const auto g = generate_then(make_candidates(apriori(l.data, 0.15, 6), l.fx.schema), l.data, 1.0 / 300, 7);
  const Evaluator<ModelOracle> ev(l.data, l.affected, l.fx.model, l.bins, l.fx.schema);
  const auto one = v_reduce(g, g.size(), ReductionMode::AccGainOnly, ev, {1, 50});
  const auto many = v_reduce(g, g.size(), ReductionMode::AccGainOnly, ev, {4, 50});
  ASSERT_EQ(one.kept.size(), many.kept.size());
  for (std::size_t i = 0; i < one.kept.size(); ++i) {
    EXPECT_EQ(one.kept[i].triple.gen_index, many.kept[i].triple.gen_index);
    EXPECT_EQ(one.kept[i].corrected, many.kept[i].corrected);
  }
}

TEST(Objective, Simplified) {
  std::vector<std::uint32_t> half(81);
  std::iota(half.begin(), half.end(), 0u);
  const std::vector<EvaluatedTriple> one{corrected_only(half, std::vector<double>(81, 2.5))};
  EXPECT_DOUBLE_EQ(objective(one, SimplifiedObjective{0.0}, 162), 50.0);
  EXPECT_DOUBLE_EQ(objective(one, SimplifiedObjective{1.0}, 162), 47.5);
  EXPECT_DOUBLE_EQ(objective(one, SimplifiedObjective{100.0}, 162), 0.0);
  const std::vector<EvaluatedTriple> none;
  EXPECT_EQ(objective(none, SimplifiedObjective{0.0}, 162), 0.0);
  EXPECT_EQ(objective(none, FourTermObjective{}, 162), 0.0);
}

TEST(Objective, FourTermHandComputed) {
  auto a = corrected_only({0, 1}, {1, 1});
  a.covered = {0, 1, 2, 3};
  a.feature_cost = 1, a.feature_change = 1;
  auto b = corrected_only({4}, {2});
  b.covered = {3, 4};
  b.feature_cost = 2, b.feature_change = 2;
  const std::vector<EvaluatedTriple> set{a, b};
  const FourTermObjective cfg{2.0, 0.5, 0.25, 10.0, 8.0, 6.0};
  // incorrect 2+1 = 3, cover |{0..4}| = 5, featurecost 3, featurechange 3
  const double want = 2.0 * (10 - 3) + 5 + 0.5 * (8 - 3) + 0.25 * (6 - 3);
  EXPECT_DOUBLE_EQ(objective(set, cfg, 10), want);
  EXPECT_THROW(objective(set, FourTermObjective{5.0, 0, 0, 1.0, 1, 1}, 10), NormalizerViolation);
}

TEST(Objective, FourTermNormalizersKeepItNonNegative) {
  Rng rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const auto ground = gce::testing::random_evaluated(rng, 15, 30);
    const std::size_t eps1 = uniform_int(rng, 1, 6);
    const auto cfg = four_term_objective(ground, eps1, 3.0, 2.0, 1.0);
    for (int k = 0; k < 20; ++k) {
      std::vector<const EvaluatedTriple*> s;
      const auto size = uniform_int(rng, 1, eps1);
      for (std::size_t i = 0; i < size; ++i) s.push_back(&ground[uniform_int(rng, 0, ground.size() - 1)]);
      EXPECT_GE(objective(s, cfg, 30), 0.0);
    }
  }
}
