#pragma once

#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "gce/dataset.hpp"
#include "gce/error.hpp"
#include "gce/evaluation.hpp"
#include "gce/ground_set.hpp"
#include "gce/optimizer.hpp"
#include "gce/schema.hpp"

namespace gce {

inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// "housing = own", "20 <= age < 30", or "70 <= age <= 75" for the closed
// last bin.
inline std::string describe(const Item& item, const FeatureSchema& schema, const BinningSpec& binning) {
  const auto& f = schema[item.feature];
  if (f.kind == FeatureKind::Categorical) return f.name + " = " + f.categories[item.value];
  const auto& b = binning.bins(item.feature);
  const bool last = item.value + 1 == b.count();
  return format_number(b.edges[item.value]) + " <= " + f.name + (last ? " <= " : " < ") +
         format_number(b.edges[item.value + 1]);
}

inline std::string describe(const ItemSet& set, const FeatureSchema& schema, const BinningSpec& binning) {
  std::string out;
  for (const auto& it : set) {
    if (!out.empty()) out += " AND ";
    out += describe(it, schema, binning);
  }
  return out;
}

inline std::string describe(const Triple& t, const FeatureSchema& schema, const BinningSpec& binning) {
  return "If " + describe(t.outer, schema, binning) + ":\n  If " + describe(t.inner, schema, binning) +
         "\n  Then " + describe(t.then, schema, binning);
}

// Items are written as [feature name, value index] pairs.
inline json itemset_to_json(const ItemSet& set, const FeatureSchema& schema) {
  json arr = json::array();
  for (const auto& it : set) arr.push_back(json::array({schema[it.feature].name, it.value}));
  return arr;
}

inline ItemSet itemset_from_json(const json& arr, const FeatureSchema& schema) {
  std::vector<Item> items;
  for (const auto& e : arr) {
    const auto name = e.at(0).get<std::string>();
    const auto f = schema.index_of(name);
    if (!f) throw FormatError("unknown feature '" + name + "'");
    const auto v = e.at(1).get<std::uint32_t>();
    if (v >= schema[*f].cardinality()) throw FormatError("value index out of range for '" + name + "'");
    items.push_back({static_cast<std::uint32_t>(*f), v});
  }
  return ItemSet(std::move(items));
}

inline json ground_set_to_json(const GroundSet& g, const FeatureSchema& schema, const BinningSpec& binning) {
  json triples = json::array();
  for (const auto& t : g.triples) {
    triples.push_back({{"gen_index", t.gen_index},
                       {"outer", itemset_to_json(t.outer, schema)},
                       {"inner", itemset_to_json(t.inner, schema)},
                       {"then", itemset_to_json(t.then, schema)},
                       {"text", {describe(t.outer, schema, binning), describe(t.inner, schema, binning),
                                 describe(t.then, schema, binning)}}});
  }
  json out{{"method", to_string(g.method)},
           {"iteration_count", g.iteration_count},
           {"pair_visits", g.pair_visits},
           {"rl_size", g.rl_size},
           {"size", g.size()},
           {"triples", std::move(triples)}};
  if (g.method == GenMethod::ThenGeneration) out["q"] = g.q;
  return out;
}

inline GroundSet ground_set_from_json(const json& j, const FeatureSchema& schema) {
  GroundSet g;
  try {
    auto method = parse_gen_method(j.at("method").get<std::string>());
    if (!method) throw FormatError("unknown generation method");
    g.method = *method;
    g.iteration_count = j.at("iteration_count").get<std::uint64_t>();
    g.pair_visits = j.value("pair_visits", std::uint64_t{0});
    g.rl_size = j.value("rl_size", std::size_t{0});
    g.q = j.value("q", 0.0);
    for (const auto& tj : j.at("triples")) {
      Triple t{itemset_from_json(tj.at("outer"), schema), itemset_from_json(tj.at("inner"), schema),
               itemset_from_json(tj.at("then"), schema), tj.at("gen_index").get<std::size_t>()};
      if (!g.triples.empty() && t.gen_index <= g.triples.back().gen_index)
        throw FormatError("gen_index must be strictly increasing");
      g.triples.push_back(std::move(t));
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed ground set: ") + e.what());
  }
  return g;
}

inline void write_json(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

inline json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError("'" + path + "': " + e.what());
  }
}

inline void write_trace_header(std::ostream& out) {
  out << "wall_seconds,stage,evaluated,kept,acc_percent,cost,objective\n";
}

inline void write_trace_row(std::ostream& out, const TraceRow& r) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", r.wall_seconds);
  out << buf << ',' << r.stage << ',' << r.evaluated << ',' << r.kept << ',';
  std::snprintf(buf, sizeof buf, "%.4f", r.acc_percent);
  out << buf << ',';
  if (r.cost) out << format_number(*r.cost);
  out << ',';
  if (r.objective) out << format_number(*r.objective);
  out << '\n';
}

inline json evaluated_triple_to_json(const EvaluatedTriple& e, const FeatureSchema& schema,
                                     const BinningSpec& binning) {
  double cost = 0.0;
  for (auto c : e.cost) cost += c;
  json j{{"gen_index", e.triple.gen_index},
         {"outer", describe(e.triple.outer, schema, binning)},
         {"inner", describe(e.triple.inner, schema, binning)},
         {"then", describe(e.triple.then, schema, binning)},
         {"covered", e.covered.size()},
         {"corrected", e.corrected.size()}};
  if (!e.corrected.empty()) j["mean_cost"] = cost / static_cast<double>(e.corrected.size());
  return j;
}

inline json metrics_to_json(const SetMetrics& m) {
  json j{{"acc_percent", m.acc()}, {"corrected", m.corrected}, {"affected", m.affected}};
  j["cost"] = m.cost ? json(*m.cost) : json(nullptr);
  return j;
}

// Human-readable two-level recourse set.
inline void write_rules_text(std::ostream& out, const RecourseSet& r, const FeatureSchema& schema,
                             const BinningSpec& binning) {
  // group by Outer-If in first-appearance order
  std::vector<const ItemSet*> outers;
  for (const auto& t : r.triples) {
    bool seen = false;
    for (auto* o : outers) seen = seen || *o == t.triple.outer;
    if (!seen) outers.push_back(&t.triple.outer);
  }
  for (auto* o : outers) {
    out << "If " << describe(*o, schema, binning) << ":\n";
    for (const auto& t : r.triples) {
      if (t.triple.outer != *o) continue;
      out << "  If " << describe(t.triple.inner, schema, binning) << "\n    Then "
          << describe(t.triple.then, schema, binning) << "    [covered " << t.covered.size() << ", corrected "
          << t.corrected.size() << "]\n";
    }
  }
  out << "\nrecourse accuracy: " << format_number(r.metrics.acc()) << "% (" << r.metrics.corrected << "/"
      << r.metrics.affected << ")\n";
  out << "recourse cost: " << (r.metrics.cost ? format_number(*r.metrics.cost) : std::string("n/a")) << "\n";
  out << "objective: " << format_number(r.objective_value) << "\n";
  out << "termination: " << to_string(r.termination) << "\n";
}

} // namespace gce
