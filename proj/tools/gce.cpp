// Command-line driver: run one pipeline, compare several, or write the
// synthetic fixture.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gce/gce.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitStage = 3;

struct RunFlags {
  std::optional<std::string> config, preset, dataset, schema, model, method, q, objective, out, sd_file, cost_table,
      label;
  std::optional<double> p, lambda, budget, target, bound_tolerance;
  std::optional<std::size_t> r, r_prime, s, eps1, eps2, eps3, workers, trace_every;
  std::optional<std::uint64_t> seed;
  std::vector<double> lambdas;
};

void add_run_flags(CLI::App& cmd, RunFlags& f) {
  cmd.add_option("--config", f.config, "JSON run config; flags override its fields");
  cmd.add_option("--preset", f.preset, "named preset (german-*, heloc-*, fixture)");
  cmd.add_option("--dataset", f.dataset, "headered CSV");
  cmd.add_option("--schema", f.schema, "schema sidecar (JSON)");
  cmd.add_option("--model", f.model, "weights file (JSON)");
  cmd.add_option("--p", f.p, "apriori support threshold for SD/RL");
  cmd.add_option("--method", f.method, "original | rl-reduction | then-generation");
  cmd.add_option("--q", f.q, "Then-Generation threshold, or 'floor' for 1/|X|");
  auto* r = cmd.add_option("--r", f.r, "evaluate the first r triples and keep them all");
  auto* rp = cmd.add_option("--r-prime", f.r_prime, "evaluate the first r' triples, keep accuracy gains only");
  r->excludes(rp);
  cmd.add_option("--s", f.s, "keep the s most accurate triples before optimization");
  cmd.add_option("--eps1", f.eps1, "max triples in the recourse set");
  cmd.add_option("--eps2", f.eps2, "max Outer-If + Inner-If width");
  cmd.add_option("--eps3", f.eps3, "max distinct subgroup descriptors");
  cmd.add_option("--lambda", f.lambda, "cost weight of the simplified objective");
  cmd.add_option("--objective", f.objective, "simplified | four-term");
  cmd.add_option("--lambdas", f.lambdas, "four-term weights: incorrect cost change")->expected(3);
  cmd.add_option("--seed", f.seed, "seed (echoed into outputs)");
  cmd.add_option("--budget-seconds", f.budget, "Stage 3 wall-clock budget");
  cmd.add_option("--target-acc", f.target, "skip Stage 3 when acc(V) is below this percentage");
  cmd.add_option("--bound-tolerance", f.bound_tolerance, "stop Stage 3 within this many points of acc(V)");
  cmd.add_option("--out", f.out, "output directory");
  cmd.add_option("--sd-file", f.sd_file, "JSON list of user subgroups for Outer-If");
  cmd.add_option("--cost-table", f.cost_table, "JSON {feature: weight}");
  cmd.add_option("--workers", f.workers, "evaluation threads (0 = all cores)");
  cmd.add_option("--trace-every", f.trace_every, "trace sampling interval in evaluations");
  cmd.add_option("--label", f.label, "run label in compare tables");
}

gce::RunConfig build_config(const RunFlags& f) {
  gce::RunConfig c;
  if (f.config) c = gce::config_from_json(gce::read_json(*f.config));
  if (f.preset) gce::apply_preset(c, *f.preset);
  if (f.dataset) c.dataset = *f.dataset;
  if (f.schema) c.schema = *f.schema;
  if (f.model) c.model = *f.model;
  if (f.p) c.p = *f.p;
  if (f.method) c.method = gce::parse_method_or_throw(*f.method);
  if (f.q) {
    if (*f.q == "floor") {
      c.q.reset();
    } else {
      try {
        c.q = std::stod(*f.q);
      } catch (const std::exception&) {
        throw gce::ConfigError("q", "expected a number or 'floor'");
      }
    }
  }
  if (f.q && c.method != gce::GenMethod::ThenGeneration)
    throw gce::ConfigError("q", "only valid with then-generation");
  if (f.r) c.r = *f.r, c.r_prime.reset();
  if (f.r_prime) c.r_prime = *f.r_prime, c.r.reset();
  if (f.s) c.s = *f.s;
  if (f.eps1) c.eps1 = *f.eps1;
  if (f.eps2) c.eps2 = *f.eps2;
  if (f.eps3) c.eps3 = *f.eps3;
  if (f.lambda) c.lambda = *f.lambda;
  if (f.objective) {
    if (*f.objective == "simplified") c.objective = gce::ObjectiveKind::Simplified;
    else if (*f.objective == "four-term") c.objective = gce::ObjectiveKind::FourTerm;
    else throw gce::ConfigError("objective", "expected simplified or four-term");
  }
  if (!f.lambdas.empty()) c.lambda_incorrect = f.lambdas[0], c.lambda_cost = f.lambdas[1], c.lambda_change = f.lambdas[2];
  if (f.seed) c.seed = *f.seed;
  if (f.budget) c.budget_seconds = *f.budget;
  if (f.target) c.target_acc = *f.target;
  if (f.bound_tolerance) c.bound_tolerance = *f.bound_tolerance;
  if (f.out) c.out = *f.out;
  if (f.sd_file) c.sd_file = *f.sd_file;
  if (f.cost_table) c.cost_table = *f.cost_table;
  if (f.workers) c.workers = *f.workers;
  if (f.trace_every) c.trace_every = *f.trace_every;
  if (f.label) c.label = *f.label;
  gce::validate(c);
  return c;
}

void print_report(const gce::RunReport& r) {
  std::cout << "rows " << r.rows << ", affected " << r.affected << "\n"
            << "stage1 " << r.stage1_seconds << " s: |SD| " << r.sd_size << ", |RL| " << r.rl_size << ", |V| "
            << r.ground_size << ", iterations " << r.iteration_count << "\n"
            << "stage2 " << r.stage2_seconds << " s: evaluated " << r.evaluated << ", kept " << r.kept
            << ", selected " << r.selected << ", acc(V) " << r.selected_metrics.acc() << "%\n"
            << "stage3 " << r.stage3_seconds << " s: acc(R) " << r.final_metrics.acc() << "%, cost "
            << (r.final_metrics.cost ? std::to_string(*r.final_metrics.cost) : std::string("n/a")) << ", "
            << gce::to_string(r.termination) << "\n";
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Global counterfactual explanations: two-level recourse sets for black-box classifiers"};
  app.require_subcommand(1);

  RunFlags run_flags;
  auto* run_cmd = app.add_subcommand("run", "generate, evaluate and optimize a recourse set");
  add_run_flags(*run_cmd, run_flags);

  std::vector<std::string> compare_configs;
  std::string compare_out = "compare";
  auto* compare_cmd = app.add_subcommand("compare", "run several configs and merge their traces");
  compare_cmd->add_option("--config", compare_configs, "JSON run config (repeat)")->required();
  compare_cmd->add_option("--out", compare_out, "output directory");

  std::string fixture_out = "data/fixtures";
  std::size_t fixture_rows = 300;
  std::uint64_t fixture_seed = 7;
  auto* fixture_cmd = app.add_subcommand("fixture", "write the synthetic credit fixture");
  fixture_cmd->add_option("--out", fixture_out, "output directory");
  fixture_cmd->add_option("--rows", fixture_rows, "number of rows");
  fixture_cmd->add_option("--seed", fixture_seed, "generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run_cmd) {
      const auto cfg = build_config(run_flags);
      print_report(gce::run(cfg));
    } else if (*compare_cmd) {
      std::vector<gce::RunConfig> configs;
      for (const auto& path : compare_configs) configs.push_back(gce::config_from_json(gce::read_json(path)));
      for (const auto& r : gce::compare(std::move(configs), compare_out)) print_report(r);
    } else if (*fixture_cmd) {
      gce::write_fixture(gce::make_credit_fixture(fixture_rows, fixture_seed), fixture_out);
      std::cout << "fixture written to " << fixture_out << "\n";
    }
  } catch (const gce::StageFailure& e) {
    std::cerr << "stage failure: " << e.what() << "\n";
    return kExitStage;
  } catch (const gce::Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  return EXIT_SUCCESS;
}
