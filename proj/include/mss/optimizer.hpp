// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 MSS Contributors

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mss/eval.hpp"
#include "mss/metric.hpp"
#include "mss/search.hpp"

namespace mss {

/// Equal-increment trial values for one metric parameter.
struct ParamRange {
  std::string name;
  double min = 0;
  double max = 0;
  double step = 1;

  /// min, min+step, ... up to max (inclusive, with 1e-9 slack).
  std::vector<double> trial_values() const;
};

/// Ordered list of swept parameters; the order is the sweep order.
class ParamSpace {
 public:
  ParamSpace() = default;
  /// Throws ConfigError on unknown or repeated names, min > max, step <= 0,
  /// or a trial value outside the parameter's own range.
  explicit ParamSpace(std::vector<ParamRange> ranges);

  /// omega, mu, zeta, delta, theta, dp_rate, cp_rate, epsilon, w_eq, w_ineq, w_expr.
  static ParamSpace defaults();

  std::span<const ParamRange> ranges() const noexcept { return ranges_; }
  const ParamRange* find(std::string_view name) const;
  /// Product of trial-value counts.
  double grid_size() const;

 private:
  std::vector<ParamRange> ranges_;
};

/// Weights of the four averaged metrics in the scalar objective.
struct ObjectiveWeights {
  double overall_recall = 1.0;
  double top10_recall = 1.0;
  double rho = 1.0;
  double tau = 1.0;

  /// Throws ConfigError on a negative weight or an all-zero set.
  void validate() const;
};

/// Weighted mean of (recall, top-10 recall, (rho+1)/2, (tau+1)/2), in [0,1].
double objective(const MetricAverages& averages, const ObjectiveWeights& weights);
double objective(const EvalReport& report, const ObjectiveWeights& weights);

enum class EvalPhase { Training, Testing };

/// Called once per query evaluation.
using EvaluationHook = std::function<void(EvalPhase phase, std::string_view query_id)>;

/// A fixed query set with ground truth over a search engine: evaluates
/// parameter sets end to end (search, truncate to truth size, score).
class TuningProblem {
 public:
  /// Throws DataError when a query has no ground truth.
  TuningProblem(const SearchEngine& engine, std::vector<Query> queries, std::span<const GroundTruth> truths,
                unsigned jobs = 1);

  EvalReport evaluate(const MetricParams& params);

  void set_hook(EvaluationHook hook, EvalPhase phase = EvalPhase::Training) {
    hook_ = std::move(hook);
    phase_ = phase;
  }
  std::span<const Query> queries() const noexcept { return queries_; }
  std::span<const GroundTruth> truths() const noexcept { return truths_; }
  /// Number of evaluate() calls so far.
  std::size_t evaluations() const noexcept { return evaluations_; }

 private:
  const SearchEngine& engine_;
  std::vector<Query> queries_;
  std::vector<PreparedTree> prepared_;
  std::vector<GroundTruth> truths_;  // aligned with queries_
  unsigned jobs_;
  EvaluationHook hook_;
  EvalPhase phase_ = EvalPhase::Training;
  std::size_t evaluations_ = 0;

  // Similarities do not depend on the class weights; sweeping a weight
  // reuses the last computed matrix.
  std::optional<MetricParams::Values> cached_key_;
  std::vector<std::vector<double>> cached_sims_;
};

struct OptimizerOptions {
  ObjectiveWeights weights;
  int generation_cap = 25;
  double tolerance = 1e-9;
};

struct SweepResult {
  std::string parameter;
  double best_value = 0;
  double best_objective = 0;
  MetricAverages averages;
  std::size_t trials = 0;  // evaluated candidate values
};

/// Tries every trial value of `name` (plus the incumbent value) with all
/// other parameters held at `current`; candidates that violate the metric's
/// invariants are skipped. Returns the argmax; ties go to the smallest value.
SweepResult sweep_parameter(std::string_view name, const ParamSpace& space, const MetricParams& current,
                            TuningProblem& problem, const ObjectiveWeights& weights);

struct GenerationRecord {
  int generation_index = 0;  // 1-based
  MetricParams best_params;
  double objective = 0;
  MetricAverages averages;
  std::vector<SweepResult> sweeps;  // in sweep order, each committed before the next
};

/// One coordinate-descent pass over every parameter in `space`.
GenerationRecord run_generation(const MetricParams& current, const ParamSpace& space, TuningProblem& problem,
                                const ObjectiveWeights& weights, int generation_index);

struct OptimizationRun {
  DecayKind model = DecayKind::Exponential;
  MetricParams seed_params;
  double seed_objective = 0;
  MetricAverages seed_averages;
  std::vector<GenerationRecord> generations;
  bool converged = false;
  std::string warning;

  const MetricParams& best_params() const;
  double final_objective() const;
};

/// Runs generations until one fails to improve on its predecessor by more
/// than `tolerance`, or until `generation_cap` generations have run (then
/// converged = false and `warning` is set).
OptimizationRun optimize_model(DecayKind model, const ParamSpace& space, const MetricParams& seed,
                               TuningProblem& problem, const OptimizerOptions& options);

struct ModelSelection {
  std::vector<OptimizationRun> runs;  // one per decay model, in kDecayKinds order
  std::size_t best_index = 0;

  const OptimizationRun& best() const { return runs.at(best_index); }
};

/// optimize_model for all four decay models; the best final objective wins,
/// earlier models win ties.
ModelSelection optimize_all(const ParamSpace& space, const MetricParams& seed, TuningProblem& problem,
                            const OptimizerOptions& options);

struct QuerySplit {
  std::vector<std::string> training;  // ceil(n/2) ids
  std::vector<std::string> test;
};

/// Seeded random halving of the query ids (sorted before shuffling, so the
/// split depends only on the id set and the seed).
QuerySplit split_queries(std::span<const std::string> query_ids, std::uint64_t seed);

struct CrossValidationRow {
  DecayKind model = DecayKind::Exponential;
  bool cross_validated = false;  // false: trained and evaluated on all queries
  MetricParams params;
  MetricAverages averages;
  double objective = 0;
};

struct CrossValidationReport {
  std::uint64_t split_seed = 0;
  QuerySplit split;
  std::vector<CrossValidationRow> rows;  // per model: without CV, then with CV
  std::vector<OptimizationRun> full_runs;
  std::vector<OptimizationRun> training_runs;
  /// Evaluations of held-out queries observed while training; always 0.
  std::size_t test_evaluations_during_training = 0;
};

/// Throws ConfigError with fewer than two queries.
CrossValidationReport cross_validate(std::span<const Query> queries, std::span<const GroundTruth> truths,
                                     const SearchEngine& engine, const ParamSpace& space, const MetricParams& seed,
                                     std::uint64_t split_seed, const OptimizerOptions& options,
                                     const EvaluationHook& hook = {}, unsigned jobs = 1);

}  // namespace mss
