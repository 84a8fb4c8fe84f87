// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 MSS Contributors

#include "mss/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "mss/error.hpp"
#include "mss/parallel.hpp"

namespace mss {

std::vector<double> ParamRange::trial_values() const {
  std::vector<double> out;
  if (!(step > 0) || min > max) return out;
  const auto count = static_cast<long>(std::floor((max - min) / step + 1e-9));
  for (long i = 0; i <= count; ++i) out.push_back(min + static_cast<double>(i) * step);
  return out;
}

namespace {

// A parameter's own admissible range, ignoring constraints between weights
// and the decay-model dependence of the rate upper bound.
bool in_own_range(std::string_view name, double v) {
  if (!std::isfinite(v)) return false;
  if (name == "delta" || name == "theta") return v >= 0 && v < 1;
  if (name == "zeta") return v >= 0 && v <= 1;
  if (name == "mu" || name == "epsilon") return v > 0 && v < 1;
  if (name == "omega") return v > 1;
  if (name == "dp_rate" || name == "cp_rate") return v >= 0;
  return v > 0;  // weights
}

}  // namespace

ParamSpace::ParamSpace(std::vector<ParamRange> ranges) : ranges_(std::move(ranges)) {
  const auto names = MetricParams::numeric_names();
  std::set<std::string, std::less<>> seen;
  for (const auto& r : ranges_) {
    if (std::find(names.begin(), names.end(), r.name) == names.end())
      throw ConfigError("parameter space: unknown parameter '" + r.name + "'");
    if (!seen.insert(r.name).second) throw ConfigError("parameter space: '" + r.name + "' listed twice");
    if (!std::isfinite(r.min) || !std::isfinite(r.max) || !std::isfinite(r.step))
      throw ConfigError("parameter space: non-finite bound for '" + r.name + "'");
    if (r.min > r.max) throw ConfigError("parameter space: min > max for '" + r.name + "'");
    if (!(r.step > 0)) throw ConfigError("parameter space: step must be > 0 for '" + r.name + "'");
    for (double v : r.trial_values())
      if (!in_own_range(r.name, v))
        throw ConfigError("parameter space: trial value " + std::to_string(v) + " out of range for '" + r.name +
                          "'");
  }
}

ParamSpace ParamSpace::defaults() {
  return ParamSpace({
      {"omega", 1.5, 5.0, 0.5},
      {"mu", 0.1, 0.9, 0.1},
      {"zeta", 0.0, 0.9, 0.1},
      {"delta", 0.0, 0.9, 0.1},
      {"theta", 0.0, 0.9, 0.1},
      {"dp_rate", 0.1, 0.9, 0.1},
      {"cp_rate", 0.1, 0.9, 0.1},
      {"epsilon", 0.05, 0.05, 1.0},
      {"w_eq", 1.0, 2.0, 0.25},
      {"w_ineq", 1.0, 1.5, 0.25},
      {"w_expr", 1.0, 1.0, 1.0},
  });
}

const ParamRange* ParamSpace::find(std::string_view name) const {
  for (const auto& r : ranges_)
    if (r.name == name) return &r;
  return nullptr;
}

double ParamSpace::grid_size() const {
  double size = 1.0;
  for (const auto& r : ranges_) size *= static_cast<double>(r.trial_values().size());
  return size;
}

void ObjectiveWeights::validate() const {
  for (double w : {overall_recall, top10_recall, rho, tau})
    if (!(w >= 0) || !std::isfinite(w)) throw ConfigError("objective weights must be finite and >= 0");
  if (overall_recall + top10_recall + rho + tau <= 0) throw ConfigError("objective weights are all zero");
}

double objective(const MetricAverages& a, const ObjectiveWeights& w) {
  const double total = w.overall_recall + w.top10_recall + w.rho + w.tau;
  if (!(total > 0)) throw ConfigError("objective weights are all zero");
  const double sum = w.overall_recall * a.overall_recall + w.top10_recall * a.top10_recall +
                     w.rho * (a.rho + 1.0) / 2.0 + w.tau * (a.tau + 1.0) / 2.0;
  return sum / total;
}

double objective(const EvalReport& report, const ObjectiveWeights& w) { return objective(report.averages, w); }

// ---------------------------------------------------------------------------

TuningProblem::TuningProblem(const SearchEngine& engine, std::vector<Query> queries,
                             std::span<const GroundTruth> truths, unsigned jobs)
    : engine_(engine), queries_(std::move(queries)), jobs_(jobs) {
  if (queries_.empty()) throw DataError("tuning needs at least one query");
  std::unordered_map<std::string_view, const GroundTruth*> by_id;
  for (const auto& t : truths) by_id.emplace(t.query_id, &t);
  for (const auto& q : queries_) {
    auto it = by_id.find(q.query_id);
    if (it == by_id.end()) throw DataError("no ground truth for query '" + q.query_id + "'");
    it->second->validate();
    truths_.push_back(*it->second);
    prepared_.push_back(engine_.prepare(q.tree));
  }
}

namespace {

MetricParams::Values similarity_key(const MetricParams& p) {
  auto v = p.values();
  v.w_eq = v.w_ineq = v.w_expr = 0;
  return v;
}

bool same_values(const MetricParams::Values& a, const MetricParams::Values& b) {
  return a.delta == b.delta && a.zeta == b.zeta && a.mu == b.mu && a.theta == b.theta && a.omega == b.omega &&
         a.decay_model == b.decay_model && a.dp_rate == b.dp_rate && a.cp_rate == b.cp_rate &&
         a.epsilon == b.epsilon && a.w_eq == b.w_eq && a.w_ineq == b.w_ineq && a.w_expr == b.w_expr;
}

}  // namespace

EvalReport TuningProblem::evaluate(const MetricParams& params) {
  ++evaluations_;
  const auto key = similarity_key(params);
  if (!cached_key_ || !same_values(*cached_key_, key)) {
    cached_sims_.assign(queries_.size(), {});
    parallel_for(queries_.size(), jobs_,
                 [&](std::size_t i) { cached_sims_[i] = engine_.similarities(prepared_[i], params); });
    cached_key_ = key;
  }
  std::vector<HitList> hitlists;
  hitlists.reserve(queries_.size());
  for (std::size_t i = 0; i < queries_.size(); ++i) {
    if (hook_) hook_(phase_, queries_[i].query_id);
    hitlists.push_back(
        engine_.rank(queries_[i].query_id, cached_sims_[i], params, truths_[i].ranked_ids.size()));
  }
  return mss::evaluate(hitlists, truths_);
}

// ---------------------------------------------------------------------------

SweepResult sweep_parameter(std::string_view name, const ParamSpace& space, const MetricParams& current,
                            TuningProblem& problem, const ObjectiveWeights& weights) {
  const ParamRange* range = space.find(name);
  if (range == nullptr) throw ConfigError("parameter '" + std::string(name) + "' is not in the space");

  std::vector<double> candidates = range->trial_values();
  candidates.push_back(current.get(name));
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end(),
                               [](double a, double b) { return std::abs(a - b) <= 1e-12; }),
                   candidates.end());

  SweepResult best;
  best.parameter = std::string(name);
  bool have = false;
  for (double v : candidates) {
    std::optional<MetricParams> trial;
    try {
      trial = current.with(name, v);
    } catch (const ConfigError&) {
      continue;  // e.g. w_ineq above the incumbent w_eq
    }
    const EvalReport report = problem.evaluate(*trial);
    const double obj = objective(report, weights);
    ++best.trials;
    if (!have || obj > best.best_objective) {
      have = true;
      best.best_value = v;
      best.best_objective = obj;
      best.averages = report.averages;
    }
  }
  if (!have) throw ConfigError("no admissible value for '" + std::string(name) + "'");
  return best;
}

GenerationRecord run_generation(const MetricParams& current, const ParamSpace& space, TuningProblem& problem,
                                const ObjectiveWeights& weights, int generation_index) {
  GenerationRecord gen;
  gen.generation_index = generation_index;
  gen.best_params = current;
  if (space.ranges().empty()) {
    const EvalReport report = problem.evaluate(current);
    gen.objective = objective(report, weights);
    gen.averages = report.averages;
    return gen;
  }
  for (const auto& range : space.ranges()) {
    SweepResult s = sweep_parameter(range.name, space, gen.best_params, problem, weights);
    gen.best_params = gen.best_params.with(range.name, s.best_value);
    gen.objective = s.best_objective;
    gen.averages = s.averages;
    gen.sweeps.push_back(std::move(s));
  }
  return gen;
}

const MetricParams& OptimizationRun::best_params() const {
  return generations.empty() ? seed_params : generations.back().best_params;
}

double OptimizationRun::final_objective() const {
  return generations.empty() ? seed_objective : generations.back().objective;
}

OptimizationRun optimize_model(DecayKind model, const ParamSpace& space, const MetricParams& seed,
                               TuningProblem& problem, const OptimizerOptions& options) {
  options.weights.validate();
  if (options.generation_cap < 1) throw ConfigError("generation cap must be >= 1");

  OptimizationRun run;
  run.model = model;
  run.seed_params = seed.with_decay(model);
  const EvalReport seed_report = problem.evaluate(run.seed_params);
  run.seed_objective = objective(seed_report, options.weights);
  run.seed_averages = seed_report.averages;

  MetricParams current = run.seed_params;
  for (int g = 1; g <= options.generation_cap; ++g) {
    GenerationRecord gen = run_generation(current, space, problem, options.weights, g);
    const bool stalled = g > 1 && gen.objective <= run.generations.back().objective + options.tolerance;
    current = gen.best_params;
    run.generations.push_back(std::move(gen));
    if (stalled) {
      run.converged = true;
      break;
    }
  }
  if (!run.converged)
    run.warning = std::string(to_string(model)) + ": no convergence within " + std::to_string(options.generation_cap) +
                  " generations";
  return run;
}

ModelSelection optimize_all(const ParamSpace& space, const MetricParams& seed, TuningProblem& problem,
                            const OptimizerOptions& options) {
  ModelSelection out;
  for (DecayKind kind : kDecayKinds) {
    out.runs.push_back(optimize_model(kind, space, seed, problem, options));
    if (out.runs.back().final_objective() > out.runs[out.best_index].final_objective())
      out.best_index = out.runs.size() - 1;
  }
  return out;
}

// ---------------------------------------------------------------------------

QuerySplit split_queries(std::span<const std::string> query_ids, std::uint64_t seed) {
  std::vector<std::string> ids(query_ids.begin(), query_ids.end());
  std::sort(ids.begin(), ids.end());
  std::mt19937_64 rng(seed);
  for (std::size_t i = ids.size(); i > 1; --i) std::swap(ids[i - 1], ids[rng() % i]);
  const std::size_t train = (ids.size() + 1) / 2;
  QuerySplit split;
  split.training.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(train));
  split.test.assign(ids.begin() + static_cast<std::ptrdiff_t>(train), ids.end());
  std::sort(split.training.begin(), split.training.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

CrossValidationReport cross_validate(std::span<const Query> queries, std::span<const GroundTruth> truths,
                                     const SearchEngine& engine, const ParamSpace& space, const MetricParams& seed,
                                     std::uint64_t split_seed, const OptimizerOptions& options,
                                     const EvaluationHook& hook, unsigned jobs) {
  if (queries.size() < 2) throw ConfigError("cross-validation needs at least two queries");

  CrossValidationReport report;
  report.split_seed = split_seed;
  std::vector<std::string> ids;
  for (const auto& q : queries) ids.push_back(q.query_id);
  report.split = split_queries(ids, split_seed);

  const std::unordered_set<std::string> test_ids(report.split.test.begin(), report.split.test.end());
  std::vector<Query> all(queries.begin(), queries.end());
  std::vector<Query> training;
  std::vector<Query> test;
  for (const auto& q : queries) (test_ids.count(q.query_id) ? test : training).push_back(q);

  auto counting = [&](EvalPhase phase, std::string_view id) {
    if (phase == EvalPhase::Training && test_ids.count(std::string(id))) ++report.test_evaluations_during_training;
    if (hook) hook(phase, id);
  };

  // Without CV: tune and report on every query.
  TuningProblem full(engine, all, truths, jobs);
  full.set_hook(hook, EvalPhase::Testing);
  const ModelSelection full_sel = optimize_all(space, seed, full, options);
  report.full_runs = full_sel.runs;

  TuningProblem train_problem(engine, training, truths, jobs);
  train_problem.set_hook(counting, EvalPhase::Training);
  const ModelSelection train_sel = optimize_all(space, seed, train_problem, options);
  report.training_runs = train_sel.runs;

  TuningProblem test_problem(engine, test, truths, jobs);
  test_problem.set_hook(counting, EvalPhase::Testing);

  for (std::size_t m = 0; m < kDecayKinds.size(); ++m) {
    const auto& f = full_sel.runs[m];
    report.rows.push_back({f.model, false, f.best_params(), f.generations.back().averages, f.final_objective()});
    const auto& t = train_sel.runs[m];
    const EvalReport held_out = test_problem.evaluate(t.best_params());
    report.rows.push_back(
        {t.model, true, t.best_params(), held_out.averages, objective(held_out, options.weights)});
  }
  return report;
}

}  // namespace mss
