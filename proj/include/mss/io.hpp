// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 MSS Contributors

// JSON and CSV readers/writers for configs, hit lists, ground truth and
// reports. Writers are deterministic: same values, same bytes.

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mss/eval.hpp"
#include "mss/mathml.hpp"
#include "mss/metric.hpp"
#include "mss/optimizer.hpp"
#include "mss/search.hpp"

namespace mss {

using Json = nlohmann::ordered_json;

/// Shortest text that parses back to the same double.
std::string format_number(double value);

std::string read_text_file(const std::filesystem::path& file);
/// Creates parent directories as needed.
void write_text_file(const std::filesystem::path& file, std::string_view text);

/// Throws DataError on unreadable or malformed JSON.
Json load_json(const std::filesystem::path& file);

// ---------------------------------------------------------------------------
// Metric configuration

Json to_json(const MetricParams& params);
/// Missing fields keep their defaults; unknown fields are a ConfigError.
MetricParams metric_params_from_json(const Json& json);

/// Parameters plus the symbol sets that may share their file under the keys
/// "commutative", "equality" and "inequality" (lists of "cd:name").
struct MetricConfig {
  MetricParams params;
  SymbolSet commutative = default_commutative_symbols();
  ClassifierConfig classifier = ClassifierConfig::standard();
};

Json to_json(const MetricConfig& config);
MetricConfig metric_config_from_json(const Json& json);
MetricConfig load_metric_config(const std::filesystem::path& file);

Json to_json(const ParamSpace& space);
/// {"parameters": [{"name", "min", "max", "step"}, ...]} in sweep order.
ParamSpace param_space_from_json(const Json& json);
ParamSpace load_param_space(const std::filesystem::path& file);

Json to_json(const ObjectiveWeights& weights);
ObjectiveWeights objective_weights_from_json(const Json& json);

struct RunConfig {
  std::filesystem::path corpus_dir;
  std::filesystem::path queries_dir;
  std::filesystem::path truth_file;
  std::filesystem::path params_file;
  std::filesystem::path space_file;
  ObjectiveWeights weights;
  std::uint64_t split_seed = 1;
  std::uint64_t mc_seed = kDefaultMonteCarloSeed;
  std::filesystem::path output_dir;
};

/// Relative paths resolve against the config file's directory. Throws
/// ConfigError on a missing field or a referenced path that does not exist;
/// output_dir need not exist.
RunConfig load_run_config(const std::filesystem::path& file);

// ---------------------------------------------------------------------------
// Hit lists and ground truth

/// Header `query_id,rank,doc_id,score`; one row per hit.
std::string hitlists_to_csv(std::span<const HitList> lists);
Json hitlists_to_json(std::span<const HitList> lists);

/// Accepts lists produced elsewhere: optional header, optional score column,
/// ranks per query contiguous from 1 in any row order. Throws DataError.
std::vector<HitList> parse_hitlists_csv(std::string_view text);
std::vector<HitList> load_hitlists_csv(const std::filesystem::path& file);

/// `query_id,rank,doc_id`, optional header, ranks contiguous from 1.
std::vector<GroundTruth> parse_ground_truth_csv(std::string_view text);
std::vector<GroundTruth> load_ground_truth(const std::filesystem::path& file);
std::string ground_truth_to_csv(std::span<const GroundTruth> truths);

// ---------------------------------------------------------------------------
// Reports

/// One row per query, then an "average" row.
std::string eval_report_to_csv(const EvalReport& report);
Json to_json(const EvalReport& report);
Json to_json(const MetricAverages& averages);

Json to_json(const CriticalValueTable& table);
std::string critical_values_to_csv(const CriticalValueTable& table);

Json to_json(const OptimizationRun& run);
/// Per generation: generation, objective and the four averaged metrics.
std::string optimization_run_to_csv(const OptimizationRun& run);
Json to_json(const ModelSelection& selection);
/// One row per model in the layout of the cross-validation table.
std::string model_selection_to_csv(const ModelSelection& selection);

Json to_json(const CrossValidationReport& report);
/// Columns: Model, Validation, Ave. Overall Recall, Ave. Top 10 Recall,
/// Ave. ρ Correlation, Ave. τ Correlation.
std::string cross_validation_to_csv(const CrossValidationReport& report);

}  // namespace mss
