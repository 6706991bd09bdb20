#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "metadecomp/metadecomp.hpp"

namespace metadecomp::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Exit status for an error: 2 for bad or unsupported input, 3 for a size
/// cap, 1 for anything else.
inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument:
    case ErrorKind::kParse:
    case ErrorKind::kDisconnected:
    case ErrorKind::kNotAcyclic:
    case ErrorKind::kSchema:
    case ErrorKind::kUnknownCardinality: return 2;
    case ErrorKind::kCapExceeded:
    case ErrorKind::kWidthOverflow: return 3;
    case ErrorKind::kInternal: return 1;
  }
  return 1;
}

/// Result of one command on one query: JSON by default, or text for the dot,
/// sql and csv formats.
struct Report {
  int code = 0;
  Json json;
  std::optional<std::string> text;
};

struct CardOptions {
  std::string cards;
  std::string data;
  double sigma = 0;
  std::uint64_t seed = 42;
};

struct CommandOptions {
  std::string query;
  std::string batch;
  std::string format = "json";
  std::size_t limit = 0;
  CardOptions card;
  std::string local = "exact";
  bool rebranch = true;
  int fanout_limit = -1;
  std::string root;
  std::string plan_file;
  std::string plan_expr;
  std::string mode = "global";
  int show_rows = 20;
};

namespace detail {

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::kInvalidArgument, "cannot write " + path);
  f << text;
}

inline CardinalityProvider cards_for(const Hypergraph& h, const CardOptions& o, const std::string& fallback_cards = "") {
  CardinalityProvider cards;
  std::string file = !fallback_cards.empty() ? fallback_cards : o.cards;
  if (!file.empty()) cards = load_cards(file, h);
  else if (!o.data.empty()) cards = true_cardinalities(h, load_database(h, o.data));
  else fail(ErrorKind::kInvalidArgument, "cardinalities are required: pass --cards FILE or --data DIR");
  return perturb_cards(cards, o.sigma, o.seed);
}

inline Json counters_json(const OptimizerResult& r, const CardinalityProvider& cards) {
  return {{"dp_states", r.dp_states}, {"dp_transitions", r.dp_transitions}, {"estimated_lookups", cards.estimated_lookups()}};
}

/// Plan report shared by optimize and oracle. The width is recomputed from
/// the plan itself rather than trusted from the optimizer.
inline Report plan_report(const QueryPlan& plan, double cost, const Hypergraph& h, const CardinalityProvider& cards,
                          const std::string& emit, Json extra) {
  Report rep;
  if (emit == "sql") {
    rep.text = plan_to_sql(plan, h);
    return rep;
  }
  if (emit == "dot") {
    rep.text = plan_to_dot(plan, h);
    return rep;
  }
  auto valid = check_plan(plan, h);
  if (!valid) fail(ErrorKind::kInternal, "emitted plan is invalid: " + valid.detail);
  auto tree = join_tree_from_plan(plan, h);
  rep.json = {{"plan", plan.to_string(h)},
              {"cost", cost},
              {"width", width(plan, h)},
              {"join_tree", tree ? Json(tree->canonical(h)) : Json(nullptr)},
              {"tree", plan_to_json(plan, h, &cards)}};
  for (auto& [k, v] : extra.items()) rep.json[k] = v;
  return rep;
}

inline QueryPlan plan_from_options(const CommandOptions& o, const Hypergraph& h) {
  if (!o.plan_expr.empty()) return parse_plan_expr(o.plan_expr, h);
  if (!o.plan_file.empty()) return load_plan(o.plan_file, h);
  fail(ErrorKind::kInvalidArgument, "a plan is required: pass --plan FILE or --plan-expr EXPR");
}

}  // namespace detail

inline Report cmd_check(const std::string& path, const CommandOptions&) {
  Hypergraph h = load_query(path);
  bool acyclic = gyo_is_acyclic(h);
  Report rep;
  rep.code = acyclic ? 0 : 2;
  rep.json = {{"acyclic", acyclic},
              {"relations", h.num_relations()},
              {"attributes", h.num_attributes()},
              {"output", h.attr_list(h.output())},
              {"boolean", h.is_boolean()}};
  return rep;
}

inline Report cmd_meta(const std::string& path, const CommandOptions& o) {
  Hypergraph h = load_query(path);
  MetaDecomposition m = build_meta(h);
  Report rep;
  if (o.format == "dot") {
    rep.text = meta_to_dot(m, h);
    return rep;
  }
  auto v = validate_meta(m, h);
  rep.json = meta_to_json(m, h);
  rep.json["valid"] = v.ok;
  if (!v.ok) {
    rep.json["violation"] = v.condition + ": " + v.detail;
    rep.code = 1;
  }
  return rep;
}

inline Report cmd_enumerate(const std::string& path, const CommandOptions& o) {
  Hypergraph h = load_query(path);
  MetaDecomposition m = build_meta(h);
  Report rep;
  if (o.format == "count") {
    if (o.limit == 0) {
      rep.json = {{"count", *count_join_trees(h, m)}};
    } else {
      auto c = count_join_trees(h, m, o.limit);
      rep.json = {{"count", c ? *c : static_cast<std::uint64_t>(o.limit)}};
      if (!c) rep.json["truncated"] = true;
    }
    return rep;
  }
  Counters counters;
  JoinTreeEnumerator e(h, m, &counters);
  JoinTree t;
  std::size_t n = 0;
  bool truncated = false;
  Json trees = Json::array();
  std::string dot;
  while (e.next(t)) {
    if (o.limit != 0 && n == o.limit) {
      truncated = true;
      break;
    }
    ++n;
    if (o.format == "dot") dot += join_tree_to_dot(t, h, "T" + std::to_string(n));
    else trees.push_back({{"canonical", t.canonical(h)}, {"tree", join_tree_to_json(t, h)}});
  }
  if (o.format == "dot") {
    rep.text = dot;
    return rep;
  }
  rep.json = {{"count", n}, {"truncated", truncated}, {"ops", counters.ops}, {"trees", trees}};
  return rep;
}

inline Report cmd_optimize(const std::string& path, const CommandOptions& o, const std::string& cards_file = "") {
  Hypergraph h = load_query(path);
  MetaDecomposition m = build_meta(h);
  CardinalityProvider cards = detail::cards_for(h, o.card, cards_file);
  OptimizerOptions opt;
  opt.local = o.local == "greedy" ? LocalMode::kGreedy : LocalMode::kExact;
  opt.rebranch = o.rebranch;
  opt.exact_fanout_limit = o.fanout_limit >= 0 ? o.fanout_limit : global_caps().exact_fanout;
  if (!o.root.empty()) {
    auto r = h.find_relation(o.root);
    if (!r) fail(ErrorKind::kInvalidArgument, "unknown root relation " + o.root);
    opt.root_relation = *r;
  }
  OptimizerResult res = optimize(m, h, cards, opt);
  Json extra = {{"warnings", res.warnings},
                {"counters", detail::counters_json(res, cards)},
                {"options",
                 {{"local", o.local}, {"rebranch", o.rebranch}, {"fanout_limit", opt.exact_fanout_limit},
                  {"sigma", o.card.sigma}, {"seed", o.card.seed}}}};
  return detail::plan_report(res.plan, res.cost, h, cards, o.format, extra);
}

inline Report cmd_width(const std::string& path, const CommandOptions& o) {
  Hypergraph h = load_query(path);
  QueryPlan p = detail::plan_from_options(o, h);
  Report rep;
  auto valid = check_plan(p, h);
  if (!valid) {
    rep.code = 2;
    rep.json = {{"plan", p.to_string(h)}, {"valid", false}, {"violation", valid.detail}};
    return rep;
  }
  Json nodes = Json::array();
  for (const auto& nw : width_report(p, h)) {
    std::vector<std::string> rels;
    nw.relations.for_each([&](RelId r) { rels.push_back(h.relation_name(r)); });
    nodes.push_back({{"relations", rels}, {"interface", h.attr_list(nw.interface)}, {"width", nw.width}});
  }
  auto tree = join_tree_from_plan(p, h);
  rep.json = {{"plan", p.to_string(h)},
              {"valid", true},
              {"width", width(p, h)},
              {"join_tree", tree ? Json(tree->canonical(h)) : Json(nullptr)},
              {"nodes", nodes}};
  return rep;
}

inline Report cmd_oracle(const std::string& path, const CommandOptions& o, const std::string& cards_file = "") {
  Hypergraph h = load_query(path);
  if (o.mode == "trees") {
    std::vector<std::string> names;
    for (const auto& parent : oracle_join_trees(h)) names.push_back(JoinTree::from_parents(h, parent).canonical(h));
    std::sort(names.begin(), names.end());
    Report rep;
    rep.json = {{"count", names.size()}, {"trees", names}};
    return rep;
  }
  CardinalityProvider cards = detail::cards_for(h, o.card, cards_file);
  CostedPlan best = o.mode == "width1" ? oracle_width1_dp(h, cards) : oracle_global_dp(h, cards);
  return detail::plan_report(best.plan, best.cost, h, cards, o.format, {{"mode", o.mode}});
}

inline Report cmd_exec(const std::string& path, const CommandOptions& o) {
  Hypergraph h = load_query(path);
  if (o.card.data.empty()) fail(ErrorKind::kInvalidArgument, "exec needs --data DIR");
  MicroDatabase db = load_database(h, o.card.data);
  QueryPlan p;
  if (!o.plan_expr.empty() || !o.plan_file.empty()) {
    p = detail::plan_from_options(o, h);
  } else {
    CardinalityProvider cards = true_cardinalities(h, db);
    p = optimize(build_meta(h), h, cards).plan;
  }
  ExecutionResult ex = execute(p, h, db);
  int w = width(p, h);
  double n = static_cast<double>(db.max_rows());
  Json nodes = Json::array();
  for (const auto& ne : ex.nodes) {
    std::vector<std::string> rels;
    ne.relations.for_each([&](RelId r) { rels.push_back(h.relation_name(r)); });
    nodes.push_back({{"relations", rels}, {"rows", ne.rows}, {"interface_rows", ne.interface_rows}});
  }
  std::vector<std::string> schema;
  for (AttrId a : ex.schema) schema.push_back(h.attribute_name(a));
  Json rows = Json::array();
  for (std::size_t i = 0; i < ex.rows.size() && static_cast<int>(i) < o.show_rows; ++i) rows.push_back(ex.rows[i]);
  Report rep;
  rep.json = {{"plan", p.to_string(h)},
              {"width", w},
              {"N", db.max_rows()},
              {"result_rows", ex.rows.size()},
              {"max_intermediate", ex.max_intermediate},
              {"max_interface", ex.max_interface},
              {"bound", std::pow(n, w)},
              {"within_bound", static_cast<double>(ex.max_interface) <= std::pow(n, w)},
              {"nodes", nodes},
              {"schema", schema},
              {"rows", rows}};
  return rep;
}

struct GenCommand {
  std::string preset = "random";
  int n = 6;
  std::uint64_t seed = 42;
  int fanout = 4;
  double bias = 0.5;
  int attrs = -1;
  int rows = 100;
  double sigma = 0;
  std::vector<std::string> emit;
};

inline Hypergraph generate(const std::string& preset, int n, std::uint64_t seed, int fanout, double bias, int attrs) {
  if (preset == "star") return gen_star(n);
  if (preset == "chain") return gen_chain(n);
  if (preset == "dense") return gen_acyclic_dense(n, attrs >= 0 ? attrs : n, seed);
  if (preset == "random") {
    GenOptions g;
    g.n = n;
    g.fanout_max = fanout;
    g.shared_attr_bias = bias;
    g.seed = seed;
    return gen_acyclic(g);
  }
  fail(ErrorKind::kInvalidArgument, "unknown preset " + preset);
}

inline Report cmd_gen(const GenCommand& g) {
  Hypergraph h = generate(g.preset, g.n, g.seed, g.fanout, g.bias, g.attrs);
  Report rep;
  if (g.emit.empty()) {
    rep.json = query_to_json(h);
    return rep;
  }
  const std::string& qpath = g.emit[0];
  bool json_query = qpath.size() >= 5 && qpath.compare(qpath.size() - 5, 5, ".json") == 0;
  detail::write_text(qpath, json_query ? query_to_json(h).dump(2) + "\n" : query_to_text(h));
  Json files = Json::array({qpath});
  if (g.emit.size() >= 2) {
    MicroDatabase db = gen_database(h, g.rows, g.seed);
    CardinalityProvider cards = perturb_cards(true_cardinalities(h, db), g.sigma, g.seed);
    detail::write_text(g.emit[1], cards_to_json(cards, h).dump(2) + "\n");
    files.push_back(g.emit[1]);
    if (g.emit.size() >= 3) {
      save_database(db, h, g.emit[2]);
      files.push_back(g.emit[2]);
    }
  }
  rep.json = {{"preset", g.preset}, {"n", g.n}, {"seed", g.seed}, {"rows", g.rows}, {"sigma", g.sigma},
              {"version", kVersion}, {"files", files}};
  return rep;
}

struct BenchCommand {
  std::string preset = "random";
  int n_min = 3;
  int n_max = 7;
  int count = 10;
  std::uint64_t seed = 1;
  int fanout = 4;
  double bias = 0.5;
  int rows = 50;
  double sigma = 0;
};

/// One bench row per generated instance; the summary goes to `err`.
inline Report cmd_bench(const BenchCommand& b, std::ostream& err) {
  if (b.n_min < 1 || b.n_max < b.n_min || b.count < 1) fail(ErrorKind::kInvalidArgument, "bench needs 1 <= n-min <= n-max and count >= 1");
  std::ostringstream csv;
  csv << "instance,preset,n,seed,metaOptCost,globalOptCost,ratio,width1Count,noisyTrueCost,regression,dpStates,dpTransitions\n";
  std::vector<double> ratios, regressions;
  int dominance_violations = 0, invalid = 0, index = 0;
  for (int n = b.n_min; n <= b.n_max; ++n) {
    for (int k = 0; k < b.count; ++k, ++index) {
      std::uint64_t seed = b.seed + static_cast<std::uint64_t>(index);
      Hypergraph h = generate(b.preset, n, seed, b.fanout, b.bias, -1);
      MetaDecomposition m = build_meta(h);
      CardinalityProvider truth = true_cardinalities(h, gen_database(h, b.rows, seed));
      OptimizerResult meta = optimize(m, h, truth);
      CostedPlan global = oracle_global_dp(h, truth);
      auto trees = count_join_trees(h, m);
      double ratio = global.cost / meta.cost;
      if (ratio > 1.0) ++dominance_violations;
      double noisy_cost = meta.cost;
      if (b.sigma > 0) {
        OptimizerResult noisy = optimize(m, h, perturb_cards(truth, b.sigma, seed), {});
        if (!check_plan(noisy.plan, h) || width(noisy.plan, h) > 1) ++invalid;
        noisy_cost = cost(noisy.plan, truth);
      }
      double regression = noisy_cost / meta.cost;
      ratios.push_back(ratio);
      regressions.push_back(regression);
      csv << index << "," << b.preset << "," << n << "," << seed << "," << meta.cost << "," << global.cost << "," << ratio
          << "," << (trees ? std::to_string(*trees) : std::string("overflow")) << "," << noisy_cost << "," << regression
          << "," << meta.dp_states << "," << meta.dp_transitions << "\n";
    }
  }
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::size_t k = v.size() / 2;
    return v.size() % 2 ? v[k] : (v[k - 1] + v[k]) / 2;
  };
  err << "instances=" << ratios.size() << " median_ratio=" << median(ratios)
      << " min_ratio=" << *std::min_element(ratios.begin(), ratios.end())
      << " dominance_violations=" << dominance_violations;
  if (b.sigma > 0)
    err << " sigma=" << b.sigma << " median_regression=" << median(regressions)
        << " max_regression=" << *std::max_element(regressions.begin(), regressions.end()) << " invalid_plans=" << invalid;
  err << " seed=" << b.seed << " version=" << kVersion << "\n";
  Report rep;
  rep.code = dominance_violations || invalid ? 1 : 0;
  rep.text = csv.str();
  return rep;
}

namespace detail {

inline void print(const Report& rep, std::ostream& out) {
  if (rep.text) out << *rep.text;
  else out << rep.json.dump(2) << "\n";
}

template <typename F>
int guarded(std::ostream& err, F&& f, Report* rep) {
  try {
    *rep = f();
    return rep->code;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    rep->code = exit_code(e.kind());
    rep->json = {{"error", to_string(e.kind())}, {"message", e.what()}};
    return rep->code;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    rep->code = 1;
    rep->json = {{"error", "internal"}, {"message", e.what()}};
    return 1;
  }
}

inline bool is_query_file(const std::filesystem::path& p) {
  std::string name = p.filename().string();
  auto ends = [&](const std::string& suffix) {
    return name.size() >= suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  if (ends(".cards.json") || ends(".plan.json")) return false;
  return ends(".json") || ends(".q") || ends(".txt");
}

/// Runs `f` on every query file of `dir` in name order and prints one JSON
/// line per instance. For each query `x.json`, a sibling `x.cards.json` is
/// passed along when present.
template <typename F>
int run_batch(const std::string& dir, std::ostream& out, std::ostream& err, F&& f) {
  std::vector<std::filesystem::path> files;
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec))
    if (entry.is_regular_file() && is_query_file(entry.path())) files.push_back(entry.path());
  if (ec) {
    err << "error: cannot read directory " << dir << "\n";
    return 2;
  }
  std::sort(files.begin(), files.end());
  int worst = 0;
  for (const auto& file : files) {
    std::string stem = file.filename().string();
    stem = stem.substr(0, stem.find('.'));
    auto cards = file.parent_path() / (stem + ".cards.json");
    std::string cards_path = std::filesystem::exists(cards) ? cards.string() : "";
    Report rep;
    int code = guarded(err, [&] { return f(file.string(), cards_path); }, &rep);
    worst = std::max(worst, code);
    Json line = {{"instance", file.filename().string()}, {"exit", code}};
    if (rep.text) line["text"] = *rep.text;
    else line["report"] = rep.json;
    out << line.dump() << "\n";
  }
  return worst;
}

}  // namespace detail

/// Entry point of the command-line tool. Writes reports to `out` and
/// diagnostics to `err`, and returns the process exit status.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Meta-decomposition toolkit for acyclic join queries", "metadecomp"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  std::string caps;
  app.add_option("--caps", caps, "Size caps as key=value pairs, overriding METADECOMP_CAPS");

  CommandOptions o;
  auto add_query = [&](CLI::App* s) {
    s->add_option("query", o.query, "Query file (JSON or text)");
    s->add_option("--batch", o.batch, "Run on every query file of a directory");
  };
  auto add_cards = [&](CLI::App* s) {
    s->add_option("--cards", o.card.cards, "Cardinality table (JSON)");
    s->add_option("--data", o.card.data, "Directory of CSV tables; true cardinalities are computed from it");
    s->add_option("--sigma", o.card.sigma, "Log-normal misestimation applied to the cardinalities")->check(CLI::NonNegativeNumber);
    s->add_option("--seed", o.card.seed, "Seed for the misestimation noise");
  };

  auto* check = app.add_subcommand("check", "Test acyclicity (exit 2 when cyclic)");
  add_query(check);
  auto* meta = app.add_subcommand("meta", "Build the meta-decomposition");
  add_query(meta);
  meta->add_option("--format", o.format)->check(CLI::IsMember({"json", "dot"}));
  auto* enumerate = app.add_subcommand("enumerate", "Enumerate join trees");
  add_query(enumerate);
  enumerate->add_option("--limit", o.limit, "Stop after this many trees (0 = no limit)");
  enumerate->add_option("--format", o.format)->check(CLI::IsMember({"json", "dot", "count"}));
  auto* opt = app.add_subcommand("optimize", "Find the cheapest width-1 plan");
  add_query(opt);
  add_cards(opt);
  opt->add_option("--local", o.local, "Local join ordering")->check(CLI::IsMember({"exact", "greedy"}));
  opt->add_flag("--rebranch,!--no-rebranch", o.rebranch, "Search re-branched and re-rooted join trees (default on)");
  opt->add_option("--emit,--format", o.format)->check(CLI::IsMember({"json", "sql", "dot"}));
  opt->add_option("--fanout-limit", o.fanout_limit, "Largest local problem solved exactly");
  opt->add_option("--root", o.root, "Only consider join trees rooted at this relation");
  auto* wid = app.add_subcommand("width", "Width and interfaces of a plan");
  add_query(wid);
  wid->add_option("--plan", o.plan_file, "Plan file (JSON or bracket form)");
  wid->add_option("--plan-expr", o.plan_expr, "Plan in bracket form, e.g. ((R1,R2),R3)");
  auto* orc = app.add_subcommand("oracle", "Brute-force references");
  add_query(orc);
  add_cards(orc);
  orc->add_option("--mode", o.mode)->check(CLI::IsMember({"global", "width1", "trees"}));
  orc->add_option("--emit,--format", o.format)->check(CLI::IsMember({"json", "sql", "dot"}));
  auto* ex = app.add_subcommand("exec", "Execute a plan on CSV tables");
  add_query(ex);
  ex->add_option("--data", o.card.data, "Directory holding <relation>.csv")->required();
  ex->add_option("--plan", o.plan_file, "Plan file; default is the optimized plan");
  ex->add_option("--plan-expr", o.plan_expr, "Plan in bracket form");
  ex->add_option("--show", o.show_rows, "Result rows to include in the report");

  GenCommand g;
  auto* gen = app.add_subcommand("gen", "Generate a query, cardinalities and tables");
  gen->add_option("--preset", g.preset)->check(CLI::IsMember({"star", "chain", "random", "dense"}));
  gen->add_option("--n", g.n)->check(CLI::Range(1, 64));
  gen->add_option("--seed", g.seed);
  gen->add_option("--fanout", g.fanout)->check(CLI::PositiveNumber);
  gen->add_option("--bias", g.bias)->check(CLI::Range(0.0, 1.0));
  gen->add_option("--attrs", g.attrs, "Extra attributes for the dense preset");
  gen->add_option("--rows", g.rows, "Largest table size")->check(CLI::PositiveNumber);
  gen->add_option("--sigma", g.sigma, "Misestimation applied to the emitted cardinalities")->check(CLI::NonNegativeNumber);
  gen->add_option("--emit", g.emit, "QUERY [CARDS [DATA_DIR]]")->expected(1, 3);

  BenchCommand b;
  auto* bench = app.add_subcommand("bench", "Compare the width-1 optimum with the global optimum (CSV)");
  bench->add_option("--preset", b.preset)->check(CLI::IsMember({"star", "chain", "random", "dense"}));
  bench->add_option("--n-min", b.n_min);
  bench->add_option("--n-max", b.n_max);
  bench->add_option("--count", b.count, "Instances per size");
  bench->add_option("--seed", b.seed);
  bench->add_option("--fanout", b.fanout);
  bench->add_option("--bias", b.bias);
  bench->add_option("--rows", b.rows);
  bench->add_option("--sigma", b.sigma)->check(CLI::NonNegativeNumber);
  bench->add_option("--format", o.format)->check(CLI::IsMember({"csv"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  if (!caps.empty()) {
    Report rep;
    int code = detail::guarded(err, [&] {
      Caps c = global_caps();
      c.apply(caps);
      set_global_caps(c);
      return Report{};
    }, &rep);
    if (code) return code;
  }

  using QueryFn = std::function<Report(const std::string&, const std::string&)>;
  QueryFn fn;
  if (check->parsed()) fn = [&](const std::string& q, const std::string&) { return cmd_check(q, o); };
  else if (meta->parsed()) fn = [&](const std::string& q, const std::string&) { return cmd_meta(q, o); };
  else if (enumerate->parsed()) fn = [&](const std::string& q, const std::string&) { return cmd_enumerate(q, o); };
  else if (opt->parsed()) fn = [&](const std::string& q, const std::string& c) { return cmd_optimize(q, o, c); };
  else if (wid->parsed()) fn = [&](const std::string& q, const std::string&) { return cmd_width(q, o); };
  else if (orc->parsed()) fn = [&](const std::string& q, const std::string& c) { return cmd_oracle(q, o, c); };
  else if (ex->parsed()) fn = [&](const std::string& q, const std::string&) { return cmd_exec(q, o); };

  Report rep;
  int code = 0;
  if (fn) {
    if (!o.batch.empty()) return detail::run_batch(o.batch, out, err, fn);
    if (o.query.empty()) {
      err << "error: a query file or --batch DIR is required\n";
      return 2;
    }
    code = detail::guarded(err, [&] { return fn(o.query, ""); }, &rep);
  } else if (gen->parsed()) {
    code = detail::guarded(err, [&] { return cmd_gen(g); }, &rep);
  } else {
    code = detail::guarded(err, [&] { return cmd_bench(b, err); }, &rep);
  }
  if (rep.text || code == 0 || rep.json.contains("acyclic") || rep.json.contains("valid")) detail::print(rep, out);
  return code;
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"metadecomp"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace metadecomp::cli
