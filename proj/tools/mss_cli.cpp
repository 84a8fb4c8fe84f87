// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 MSS Contributors

// mss: search, evaluate and tune the structural similarity metric.
// Exit codes: 0 success, 1 usage/config error, 2 data error.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "mss/error.hpp"
#include "mss/eval.hpp"
#include "mss/io.hpp"
#include "mss/mathml.hpp"
#include "mss/optimizer.hpp"
#include "mss/parallel.hpp"
#include "mss/search.hpp"

namespace fs = std::filesystem;
using namespace mss;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitData = 2;

struct Options {
  std::string config;
  std::size_t n = 10;
  bool n_given = false;
  std::string query;
  std::string hitlists;
  std::optional<std::uint64_t> seed;
  unsigned jobs = default_jobs();
  int max_generations = 25;
  std::string out;
  std::string file;
};

struct Workspace {
  RunConfig run;
  MetricConfig metric;
  fs::path out;
};

Workspace open_workspace(const Options& o) {
  if (o.config.empty()) throw ConfigError("--config is required");
  Workspace w;
  w.run = load_run_config(o.config);
  w.metric = load_metric_config(w.run.params_file);
  w.out = o.out.empty() ? w.run.output_dir : fs::path(o.out);
  std::error_code ec;
  fs::create_directories(w.out, ec);
  if (ec) throw ConfigError("cannot create output directory " + w.out.string() + ": " + ec.message());
  return w;
}

void write_pair(const fs::path& dir, const std::string& stem, const std::string& csv, const Json& json) {
  write_text_file(dir / (stem + ".csv"), csv);
  write_text_file(dir / (stem + ".json"), json.dump(2) + "\n");
}

int cmd_search(const Options& o) {
  const Workspace w = open_workspace(o);
  if (o.query.empty()) throw ConfigError("--query is required");
  const Query query = load_query(o.query);
  const Corpus corpus = load_corpus(w.run.corpus_dir, w.metric.classifier);
  const SearchEngine engine(corpus, w.metric.commutative, o.jobs);
  const HitList hits = engine.search(query, w.metric.params, o.n);
  const std::vector<HitList> lists{hits};
  write_pair(w.out, "hits_" + query.query_id, hitlists_to_csv(lists), hitlists_to_json(lists));
  std::cout << hitlists_to_csv(lists);
  return 0;
}

int cmd_evaluate(const Options& o) {
  const Workspace w = open_workspace(o);
  const auto truths = load_ground_truth(w.run.truth_file);
  std::vector<HitList> lists;
  if (!o.hitlists.empty()) {
    lists = load_hitlists_csv(o.hitlists);
  } else {
    const Corpus corpus = load_corpus(w.run.corpus_dir, w.metric.classifier);
    const auto queries = load_queries(w.run.queries_dir);
    std::map<std::string, std::size_t, std::less<>> sizes;
    for (const auto& q : queries) sizes[q.query_id] = o.n;
    if (!o.n_given)
      for (const auto& t : truths)
        if (sizes.count(t.query_id)) sizes[t.query_id] = t.ranked_ids.size();
    lists = SearchEngine(corpus, w.metric.commutative, o.jobs).batch_search(queries, w.metric.params, sizes);
    write_pair(w.out, "hitlists", hitlists_to_csv(lists), hitlists_to_json(lists));
  }
  const CriticalValueTable table(o.seed.value_or(w.run.mc_seed));
  const EvalReport report = evaluate(lists, truths, &table);
  write_pair(w.out, "eval_report", eval_report_to_csv(report), to_json(report));
  std::cout << eval_report_to_csv(report);
  return 0;
}

struct TuningInputs {
  Workspace w;
  ParamSpace space;
  std::vector<GroundTruth> truths;
  std::vector<Query> queries;
};

TuningInputs load_tuning(const Options& o) {
  TuningInputs t{open_workspace(o), {}, {}, {}};
  t.space = load_param_space(t.w.run.space_file);
  t.truths = load_ground_truth(t.w.run.truth_file);
  t.queries = load_queries(t.w.run.queries_dir);
  return t;
}

void report_warnings(const std::vector<OptimizationRun>& runs) {
  for (const auto& r : runs)
    if (!r.converged) std::cerr << "warning: " << r.warning << "\n";
}

int cmd_optimize(const Options& o) {
  TuningInputs t = load_tuning(o);
  const Corpus corpus = load_corpus(t.w.run.corpus_dir, t.w.metric.classifier);
  const SearchEngine engine(corpus, t.w.metric.commutative, 1);
  TuningProblem problem(engine, t.queries, t.truths, o.jobs);
  OptimizerOptions opts;
  opts.weights = t.w.run.weights;
  opts.generation_cap = o.max_generations;
  const ModelSelection sel = optimize_all(t.space, t.w.metric.params, problem, opts);
  for (const auto& r : sel.runs)
    write_pair(t.w.out, "optimization_" + std::string(to_string(r.model)), optimization_run_to_csv(r), to_json(r));
  write_pair(t.w.out, "optimization_summary", model_selection_to_csv(sel), to_json(sel));
  report_warnings(sel.runs);
  std::cout << model_selection_to_csv(sel);
  std::cout << "best model: " << to_string(sel.best().model) << "\n";
  return 0;
}

int cmd_xval(const Options& o) {
  TuningInputs t = load_tuning(o);
  const Corpus corpus = load_corpus(t.w.run.corpus_dir, t.w.metric.classifier);
  const SearchEngine engine(corpus, t.w.metric.commutative, 1);
  OptimizerOptions opts;
  opts.weights = t.w.run.weights;
  opts.generation_cap = o.max_generations;
  const auto report = cross_validate(t.queries, t.truths, engine, t.space, t.w.metric.params,
                                     o.seed.value_or(t.w.run.split_seed), opts, {}, o.jobs);
  write_pair(t.w.out, "xval", cross_validation_to_csv(report), to_json(report));
  report_warnings(report.full_runs);
  report_warnings(report.training_runs);
  std::cout << cross_validation_to_csv(report);
  return 0;
}

int cmd_parse(const Options& o) {
  const ExprTree tree = parse_file(o.file);
  std::cout << "expression: " << to_string(tree) << "\n"
            << "class: " << to_string(classify(tree)) << "\n"
            << "height: " << tree.height() << "\n"
            << "nodes: " << tree.node_count() << "\n"
            << "markup: " << to_markup(tree) << "\n";
  return 0;
}

int cmd_critical_values(const Options& o) {
  std::uint64_t seed = kDefaultMonteCarloSeed;
  fs::path out = o.out;
  if (!o.config.empty()) {
    const RunConfig run = load_run_config(o.config);
    seed = run.mc_seed;
    if (out.empty()) out = run.output_dir;
  }
  if (o.seed) seed = *o.seed;
  if (out.empty()) throw ConfigError("--out or --config is required");
  CriticalValueTable table(seed);
  table.fill_all();
  write_pair(out, "critical_values", critical_values_to_csv(table), to_json(table));
  std::cout << critical_values_to_csv(table);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structural similarity search over Content MathML"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", o.config, "Run config JSON");
    cmd->add_option("--out", o.out, "Output directory (overrides output_dir)");
    cmd->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);
  };

  auto* search = app.add_subcommand("search", "Rank the corpus against one query");
  add_common(search);
  search->add_option("--query", o.query, "Query MathML file")->required();
  search->add_option("--n", o.n, "Hit list size")->check(CLI::PositiveNumber);

  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score hit lists against the ground truth");
  add_common(evaluate_cmd);
  evaluate_cmd->add_option("--hitlists", o.hitlists, "External hit list CSV (query_id,rank,doc_id[,score])");
  auto* n_opt = evaluate_cmd->add_option("--n", o.n, "Hit list size (default: truth size per query)")
                    ->check(CLI::PositiveNumber);
  evaluate_cmd->add_option("--seed", o.seed, "Monte Carlo seed for critical values");

  auto* optimize = app.add_subcommand("optimize", "Tune parameters for every decay model");
  add_common(optimize);
  optimize->add_option("--max-generations", o.max_generations, "Generation cap per model")->check(CLI::PositiveNumber);

  auto* xval = app.add_subcommand("xval", "Cross-validated tuning report");
  add_common(xval);
  xval->add_option("--seed", o.seed, "Query split seed");
  xval->add_option("--max-generations", o.max_generations, "Generation cap per model")->check(CLI::PositiveNumber);

  auto* parse = app.add_subcommand("parse", "Print the parsed form of a MathML file");
  parse->add_option("file", o.file, "MathML file")->required();

  auto* crit = app.add_subcommand("critical-values", "Tabulate rank-correlation critical values");
  add_common(crit);
  crit->add_option("--seed", o.seed, "Monte Carlo seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  o.n_given = n_opt->count() > 0;

  try {
    if (search->parsed()) return cmd_search(o);
    if (evaluate_cmd->parsed()) return cmd_evaluate(o);
    if (optimize->parsed()) return cmd_optimize(o);
    if (xval->parsed()) return cmd_xval(o);
    if (parse->parsed()) return cmd_parse(o);
    if (crit->parsed()) return cmd_critical_values(o);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitConfig;
}
