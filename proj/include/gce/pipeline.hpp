#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "gce/apriori.hpp"
#include "gce/dataset.hpp"
#include "gce/error.hpp"
#include "gce/evaluation.hpp"
#include "gce/ground_set.hpp"
#include "gce/io.hpp"
#include "gce/model.hpp"
#include "gce/objective.hpp"
#include "gce/optimizer.hpp"
#include "gce/schema.hpp"

namespace gce {

enum class ObjectiveKind { Simplified, FourTerm };

struct RunConfig {
  std::string dataset;
  std::string schema;
  std::string model;
  double p = 0.3;
  GenMethod method = GenMethod::Original;
  std::optional<double> q; // Then-Generation only; unset means 1/|X|
  std::optional<std::size_t> r;
  std::optional<std::size_t> r_prime;
  std::optional<std::size_t> s;
  std::size_t eps1 = 20;
  std::size_t eps2 = 7;
  std::size_t eps3 = 10;
  ObjectiveKind objective = ObjectiveKind::Simplified;
  double lambda = 0.0;
  double lambda_incorrect = 1.0;
  double lambda_cost = 0.0;
  double lambda_change = 0.0;
  std::uint64_t seed = 0;
  double budget_seconds = 300.0;
  double target_acc = 0.0; // Stage 3 is skipped when acc(V) < target_acc
  double bound_tolerance = 0.0;
  double delta = 1e-9;
  std::string out = "out";
  std::optional<std::string> sd_file;
  std::optional<std::string> cost_table;
  std::size_t workers = 0; // 0 = hardware concurrency
  std::size_t trace_every = 100;
  std::string label;
};

// Structural checks that need no data. Thresholds against 1/|X| are checked
// once the dataset is loaded, still before any stage runs.
inline void validate(const RunConfig& c) {
  if (c.dataset.empty()) throw ConfigError("dataset", "required");
  if (c.schema.empty()) throw ConfigError("schema", "required");
  if (c.model.empty()) throw ConfigError("model", "required");
  if (!(c.p > 0.0 && c.p <= 1.0)) throw ConfigError("p", "must lie in (0, 1]");
  if (c.q && c.method != GenMethod::ThenGeneration) throw ConfigError("q", "only valid with then-generation");
  if (c.q && !(*c.q > 0.0 && *c.q <= 1.0)) throw ConfigError("q", "must lie in (0, 1]");
  if (c.r && c.r_prime) throw ConfigError("r", "r and r' are mutually exclusive");
  if ((c.r && *c.r == 0) || (c.r_prime && *c.r_prime == 0)) throw ConfigError("r", "must be at least 1");
  if (c.s && *c.s == 0) throw ConfigError("s", "must be at least 1");
  if (c.eps1 == 0) throw ConfigError("eps1", "must be at least 1");
  if (c.eps2 < 2) throw ConfigError("eps2", "must be at least 2");
  if (c.eps3 == 0) throw ConfigError("eps3", "must be at least 1");
  if (c.lambda < 0 || c.lambda_incorrect < 0 || c.lambda_cost < 0 || c.lambda_change < 0)
    throw ConfigError("lambda", "must be non-negative");
  if (c.trace_every == 0) throw ConfigError("trace_every", "must be at least 1");
}

inline GenMethod parse_method_or_throw(const std::string& s) {
  const bool rl = s.find("rl-reduction") != std::string::npos;
  const bool then = s.find("then-generation") != std::string::npos;
  if (rl && then)
    throw ConfigError("method", "rl-reduction and then-generation cannot be combined in one run");
  auto m = parse_gen_method(s);
  if (!m) throw ConfigError("method", "expected original, rl-reduction or then-generation; got '" + s + "'");
  return *m;
}

// Named settings per dataset and generation method. `q` stays unset for
// Then-Generation, which means 1/|X|.
inline void apply_preset(RunConfig& c, const std::string& name) {
  c.r.reset();
  c.r_prime.reset();
  c.q.reset();
  if (name == "german-original") {
    c.method = GenMethod::Original, c.p = 0.305;
  } else if (name == "german-rl-reduction") {
    c.method = GenMethod::RlReduction, c.p = 0.245, c.r = 5000;
  } else if (name == "german-then-generation") {
    c.method = GenMethod::ThenGeneration, c.p = 0.48, c.r = 5000;
  } else if (name == "heloc-original") {
    c.method = GenMethod::Original, c.p = 0.318;
  } else if (name == "heloc-rl-reduction") {
    c.method = GenMethod::RlReduction, c.p = 0.245, c.r = 5000;
  } else if (name == "heloc-then-generation") {
    c.method = GenMethod::ThenGeneration, c.p = 0.48, c.r = 5000;
  } else if (name == "fixture") {
    c.method = GenMethod::Original, c.p = 0.08, c.r_prime = 5000;
  } else {
    throw ConfigError("preset", "unknown preset '" + name + "'");
  }
}

inline json config_to_json(const RunConfig& c) {
  json j{{"dataset", c.dataset},
         {"schema", c.schema},
         {"model", c.model},
         {"p", c.p},
         {"method", to_string(c.method)},
         {"eps1", c.eps1},
         {"eps2", c.eps2},
         {"eps3", c.eps3},
         {"objective", c.objective == ObjectiveKind::Simplified ? "simplified" : "four-term"},
         {"lambda", c.lambda},
         {"seed", c.seed},
         {"budget_seconds", c.budget_seconds},
         {"target_acc", c.target_acc},
         {"bound_tolerance", c.bound_tolerance},
         {"delta", c.delta}};
  if (c.objective == ObjectiveKind::FourTerm)
    j["lambdas"] = {c.lambda_incorrect, c.lambda_cost, c.lambda_change};
  if (c.q) j["q"] = *c.q;
  if (c.r) j["r"] = *c.r;
  if (c.r_prime) j["r_prime"] = *c.r_prime;
  if (c.s) j["s"] = *c.s;
  if (c.sd_file) j["sd_file"] = *c.sd_file;
  if (c.cost_table) j["cost_table"] = *c.cost_table;
  if (!c.label.empty()) j["label"] = c.label;
  return j;
}

inline RunConfig config_from_json(const json& j) {
  RunConfig c;
  try {
    if (j.contains("preset")) apply_preset(c, j.at("preset").get<std::string>());
    c.dataset = j.value("dataset", c.dataset);
    c.schema = j.value("schema", c.schema);
    c.model = j.value("model", c.model);
    c.p = j.value("p", c.p);
    if (j.contains("method")) c.method = parse_method_or_throw(j.at("method").get<std::string>());
    if (j.contains("q")) c.q = j.at("q").get<double>();
    if (j.contains("r")) c.r = j.at("r").get<std::size_t>();
    if (j.contains("r_prime")) c.r_prime = j.at("r_prime").get<std::size_t>();
    if (j.contains("s")) c.s = j.at("s").get<std::size_t>();
    c.eps1 = j.value("eps1", c.eps1);
    c.eps2 = j.value("eps2", c.eps2);
    c.eps3 = j.value("eps3", c.eps3);
    if (j.contains("objective")) {
      const auto o = j.at("objective").get<std::string>();
      if (o == "simplified") c.objective = ObjectiveKind::Simplified;
      else if (o == "four-term") c.objective = ObjectiveKind::FourTerm;
      else throw ConfigError("objective", "expected simplified or four-term");
    }
    c.lambda = j.value("lambda", c.lambda);
    if (j.contains("lambdas")) {
      const auto l = j.at("lambdas").get<std::vector<double>>();
      if (l.size() != 3) throw ConfigError("lambdas", "expected three values");
      c.lambda_incorrect = l[0], c.lambda_cost = l[1], c.lambda_change = l[2];
    }
    c.seed = j.value("seed", c.seed);
    c.budget_seconds = j.value("budget_seconds", c.budget_seconds);
    c.target_acc = j.value("target_acc", c.target_acc);
    c.bound_tolerance = j.value("bound_tolerance", c.bound_tolerance);
    c.delta = j.value("delta", c.delta);
    c.out = j.value("out", c.out);
    if (j.contains("sd_file")) c.sd_file = j.at("sd_file").get<std::string>();
    if (j.contains("cost_table")) c.cost_table = j.at("cost_table").get<std::string>();
    c.workers = j.value("workers", c.workers);
    c.trace_every = j.value("trace_every", c.trace_every);
    c.label = j.value("label", c.label);
  } catch (const json::exception& e) {
    throw ConfigError("config", e.what());
  }
  validate(c);
  return c;
}

// User subgroups: a JSON array of {feature: category label | bin index}.
inline std::vector<ItemSet> load_subgroups(const std::string& path, const FeatureSchema& schema) {
  const auto j = read_json(path);
  std::vector<ItemSet> out;
  try {
    for (const auto& group : j) {
      std::vector<Item> items;
      for (const auto& [name, value] : group.items()) {
        const auto f = schema.index_of(name);
        if (!f) throw ConfigError("sd_file", "unknown feature '" + name + "'");
        std::uint32_t v = 0;
        if (value.is_string()) {
          const auto idx = schema.category_index(*f, value.get<std::string>());
          if (!idx) throw ConfigError("sd_file", "unknown category for '" + name + "'");
          v = *idx;
        } else {
          v = value.get<std::uint32_t>();
          if (v >= schema[*f].cardinality()) throw ConfigError("sd_file", "value out of range for '" + name + "'");
        }
        items.push_back({static_cast<std::uint32_t>(*f), v});
      }
      if (items.empty()) throw ConfigError("sd_file", "empty subgroup");
      out.emplace_back(std::move(items));
    }
  } catch (const json::exception& e) {
    throw ConfigError("sd_file", e.what());
  }
  return out;
}

// {feature: weight}; unlisted features cost 1.
inline CostTable load_cost_table(const std::string& path, const FeatureSchema& schema) {
  const auto j = read_json(path);
  CostTable t;
  t.weights.assign(schema.size(), 1.0);
  try {
    for (const auto& [name, w] : j.items()) {
      const auto f = schema.index_of(name);
      if (!f) throw ConfigError("cost_table", "unknown feature '" + name + "'");
      const double v = w.get<double>();
      if (!(v >= 0.0)) throw ConfigError("cost_table", "negative weight for '" + name + "'");
      t.weights[*f] = v;
    }
  } catch (const json::exception& e) {
    throw ConfigError("cost_table", e.what());
  }
  return t;
}

struct RunReport {
  std::string status = "ok";
  std::string failed_stage;
  std::string error;
  double load_seconds = 0.0;
  double stage1_seconds = 0.0;
  double stage2_seconds = 0.0;
  double stage3_seconds = 0.0;
  std::size_t rows = 0;
  std::size_t affected = 0;
  std::size_t sd_size = 0;
  std::size_t rl_size = 0;
  std::optional<double> alpha;
  std::size_t ground_size = 0;
  std::uint64_t iteration_count = 0;
  std::uint64_t pair_visits = 0;
  std::size_t evaluated = 0;
  std::size_t kept = 0;
  std::size_t selected = 0;
  SetMetrics ground_metrics; // of the evaluated (prefix of the) ground set
  SetMetrics selected_metrics;
  SetMetrics final_metrics;
  double objective_value = 0.0;
  Termination termination = Termination::Skipped;
  std::vector<TraceRow> trace;
};

inline json report_to_json(const RunReport& r, const RunConfig& c) {
  json j{{"status", r.status},
         {"seconds", {{"load", r.load_seconds}, {"stage1", r.stage1_seconds}, {"stage2", r.stage2_seconds},
                      {"stage3", r.stage3_seconds}}},
         {"rows", r.rows},
         {"affected", r.affected},
         {"sd_size", r.sd_size},
         {"rl_size", r.rl_size},
         {"ground_size", r.ground_size},
         {"iteration_count", r.iteration_count},
         {"pair_visits", r.pair_visits},
         {"evaluated", r.evaluated},
         {"kept", r.kept},
         {"selected", r.selected},
         {"ground", metrics_to_json(r.ground_metrics)},
         {"selected_ground", metrics_to_json(r.selected_metrics)},
         {"final", metrics_to_json(r.final_metrics)},
         {"objective", r.objective_value},
         {"termination", to_string(r.termination)},
         {"config", config_to_json(c)}};
  if (r.alpha) j["alpha"] = *r.alpha;
  if (r.status != "ok") {
    j["failed_stage"] = r.failed_stage;
    j["error"] = r.error;
  }
  return j;
}

// A stage threw; artifacts written so far stay on disk and report.json is
// flagged as failed.
class StageFailure : public Error {
public:
  StageFailure(std::string stage, const std::string& what)
      : Error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

private:
  std::string stage_;
};

namespace detail {

inline void write_trace(const std::vector<TraceRow>& trace, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  write_trace_header(out);
  for (const auto& row : trace) write_trace_row(out, row);
}

} // namespace detail

// Stage 1 -> Stage 2 -> gate -> Stage 3. Writes groundset.json, trace.csv,
// rules.json, rules.txt and report.json under cfg.out.
inline RunReport run(const RunConfig& cfg) {
  validate(cfg);
  const auto origin = Clock::now();
  RunReport rep;
  const std::filesystem::path out_dir(cfg.out);
  std::filesystem::create_directories(out_dir);
  const std::size_t workers =
      cfg.workers ? cfg.workers : std::max<std::size_t>(1, std::thread::hardware_concurrency());

  // Input problems are configuration errors, not stage failures.
  const auto schema = load_schema(cfg.schema);
  const auto raw = load_dataset(cfg.dataset, schema);
  if (raw.empty()) throw ConfigError("dataset", "no rows");
  const auto model = load_model(cfg.model, schema);
  std::optional<std::vector<ItemSet>> user_sd;
  if (cfg.sd_file) user_sd = load_subgroups(*cfg.sd_file, schema);
  CostTable costs;
  if (cfg.cost_table) costs = load_cost_table(*cfg.cost_table, schema);

  try {
    check_threshold(cfg.p, raw.size());
  } catch (const Error& e) {
    throw ConfigError("p", e.what());
  }
  const double q = cfg.q.value_or(1.0 / static_cast<double>(raw.size()));
  if (cfg.method == GenMethod::ThenGeneration) {
    try {
      check_threshold(q, raw.size());
    } catch (const Error& e) {
      throw ConfigError("q", e.what());
    }
  }

  std::string stage = "load";
  auto fail = [&](const std::exception& e) {
    rep.status = "failed";
    rep.failed_stage = stage;
    rep.error = e.what();
    rep.trace.push_back({seconds_since(origin), stage, rep.evaluated, rep.kept, 0.0, std::nullopt, std::nullopt});
    detail::write_trace(rep.trace, out_dir / "trace.csv");
    write_json(report_to_json(rep, cfg), (out_dir / "report.json").string());
    throw StageFailure(stage, e.what());
  };

  BinningSpec binning;
  DiscretizedDataset data;
  AffectedSet affected;
  GroundSet ground;
  std::vector<EvaluatedTriple> evaluated;
  RecourseSet result;
  try {
    binning = fit_bins(raw, schema);
    data = discretize(raw, binning, schema);
    affected = affected_set(model, raw);
    rep.rows = raw.size();
    rep.affected = affected.size();
    rep.load_seconds = seconds_since(origin);

    stage = "stage1";
    auto t1 = Clock::now();
    auto cands = make_candidates(apriori(data, cfg.p, cfg.eps2 - 1), schema, std::move(user_sd));
    rep.sd_size = cands.sd->size();
    rep.rl_size = cands.rl->size();
    switch (cfg.method) {
    case GenMethod::Original: ground = generate_original(cands, cfg.eps2); break;
    case GenMethod::RlReduction:
      ground = generate_rl_reduced(cands, cfg.eps2);
      rep.alpha = rep.rl_size ? static_cast<double>(ground.rl_size) / static_cast<double>(rep.rl_size) : 1.0;
      break;
    case GenMethod::ThenGeneration: ground = generate_then(cands, data, q, cfg.eps2); break;
    }
    rep.stage1_seconds = seconds_since(t1);
    rep.ground_size = ground.size();
    rep.iteration_count = ground.iteration_count;
    rep.pair_visits = ground.pair_visits;
    rep.trace.push_back({seconds_since(origin), "stage1", 0, ground.size(), 0.0, std::nullopt, std::nullopt});
    write_json(ground_set_to_json(ground, schema, binning), (out_dir / "groundset.json").string());

    stage = "stage2";
    auto t2 = Clock::now();
    Evaluator<ModelOracle> evaluator(data, affected, model, binning, schema, costs);
    if (!ground.triples.empty()) {
      const std::size_t budget = cfg.r ? *cfg.r : cfg.r_prime ? *cfg.r_prime : ground.size();
      const auto mode = cfg.r_prime ? ReductionMode::AccGainOnly : ReductionMode::AddAll;
      auto red = v_reduce(ground, budget, mode, evaluator, {workers, cfg.trace_every, origin, "stage2"});
      rep.evaluated = red.evaluated;
      rep.kept = red.kept.size();
      rep.ground_metrics = red.metrics;
      rep.trace.insert(rep.trace.end(), red.trace.begin(), red.trace.end());
      evaluated = std::move(red.kept);
    } else {
      rep.ground_metrics.affected = affected.size();
    }
    if (cfg.s) evaluated = v_select(std::move(evaluated), *cfg.s);
    rep.selected = evaluated.size();
    rep.selected_metrics = metrics(evaluated, affected.size());
    rep.stage2_seconds = seconds_since(t2);

    stage = "stage3";
    auto t3 = Clock::now();
    result.metrics.affected = affected.size();
    if (!evaluated.empty() && early_gate(rep.selected_metrics.acc(), cfg.target_acc) == GateDecision::Run) {
      ObjectiveConfig obj = SimplifiedObjective{cfg.lambda};
      if (cfg.objective == ObjectiveKind::FourTerm)
        obj = four_term_objective(evaluated, cfg.eps1, cfg.lambda_incorrect, cfg.lambda_cost, cfg.lambda_change);
      OptimizerConfig ocfg{cfg.eps1, cfg.eps3, cfg.delta, cfg.bound_tolerance, cfg.budget_seconds, cfg.seed};
      result = maximize(evaluated, ocfg, obj, affected.size(), rep.selected_metrics.acc(), origin);
      rep.trace.insert(rep.trace.end(), result.trace.begin(), result.trace.end());
    } else {
      result.termination = Termination::Skipped;
    }
    rep.stage3_seconds = seconds_since(t3);
    rep.final_metrics = result.metrics;
    rep.objective_value = result.objective_value;
    rep.termination = result.termination;
  } catch (const StageFailure&) {
    throw;
  } catch (const std::exception& e) {
    fail(e);
  }

  // Rules file carries no timings so identical configs give identical bytes.
  json rules{{"config", config_to_json(cfg)},
             {"termination", to_string(result.termination)},
             {"metrics", metrics_to_json(result.metrics)},
             {"objective", result.objective_value},
             {"ground", {{"method", to_string(ground.method)}, {"size", ground.size()},
                         {"evaluated", rep.evaluated}, {"kept", rep.kept}, {"selected", rep.selected},
                         {"acc_percent", rep.selected_metrics.acc()}}},
             {"triples", json::array()}};
  for (const auto& t : result.triples) rules["triples"].push_back(evaluated_triple_to_json(t, schema, binning));
  write_json(rules, (out_dir / "rules.json").string());
  {
    std::ofstream txt(out_dir / "rules.txt");
    write_rules_text(txt, result, schema, binning);
  }
  detail::write_trace(rep.trace, out_dir / "trace.csv");
  write_json(report_to_json(rep, cfg), (out_dir / "report.json").string());
  return rep;
}

// Runs every config into <out>/run<k> and merges their traces into one table
// with a leading run/label/method key.
inline std::vector<RunReport> compare(std::vector<RunConfig> configs, const std::string& out) {
  if (configs.size() < 2) throw ConfigError("configs", "compare needs at least two runs");
  for (const auto& c : configs) {
    if (c.dataset != configs.front().dataset || c.model != configs.front().model ||
        c.schema != configs.front().schema)
      throw IncompatibleRuns("all compared runs must share dataset, schema and model");
  }
  std::filesystem::create_directories(out);
  std::vector<RunReport> reports;
  std::ofstream merged(std::filesystem::path(out) / "compare.csv");
  merged << "run,label,method,";
  write_trace_header(merged);
  for (std::size_t k = 0; k < configs.size(); ++k) {
    auto& c = configs[k];
    c.out = (std::filesystem::path(out) / ("run" + std::to_string(k))).string();
    auto rep = run(c);
    const std::string label = c.label.empty() ? to_string(c.method) : c.label;
    for (const auto& row : rep.trace) {
      merged << k << ',' << label << ',' << to_string(c.method) << ',';
      write_trace_row(merged, row);
    }
    reports.push_back(std::move(rep));
  }
  return reports;
}

} // namespace gce
