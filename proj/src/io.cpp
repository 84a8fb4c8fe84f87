// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 MSS Contributors

#include "mss/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <system_error>

#include "mss/error.hpp"

namespace mss {

namespace fs = std::filesystem;

std::string format_number(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::string read_text_file(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw DataError("cannot read " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const fs::path& file, std::string_view text) {
  if (file.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(file.parent_path(), ec);
    if (ec) throw DataError("cannot create " + file.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw DataError("cannot write " + file.string());
}

Json load_json(const fs::path& file) {
  const std::string text = read_text_file(file);
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    throw DataError(file.string() + ": " + e.what());
  }
}

namespace {

double number_field(const Json& j, const std::string& key) {
  const auto& v = j.at(key);
  if (!v.is_number()) throw ConfigError("'" + key + "' must be a number");
  return v.get<double>();
}

std::uint64_t unsigned_field(const Json& j, const std::string& key) {
  const auto& v = j.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
    throw ConfigError("'" + key + "' must be a non-negative integer");
  return v.get<std::uint64_t>();
}

void require_object(const Json& j, std::string_view what) {
  if (!j.is_object()) throw ConfigError(std::string(what) + " must be a JSON object");
}

SymbolSet symbol_set_from_json(const Json& j, const std::string& key) {
  if (!j.is_array()) throw ConfigError("'" + key + "' must be a list of \"cd:name\" strings");
  std::vector<std::string> items;
  for (const auto& e : j) {
    if (!e.is_string()) throw ConfigError("'" + key + "' must be a list of \"cd:name\" strings");
    items.push_back(e.get<std::string>());
  }
  return SymbolSet::from_strings(items);
}

// Wraps nlohmann's lookup errors as ConfigError.
template <typename F>
auto config_guard(std::string_view what, F&& f) {
  try {
    return f();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string(what) + ": " + e.what());
  }
}

}  // namespace

// ---------------------------------------------------------------------------

Json to_json(const MetricParams& p) {
  const auto& v = p.values();
  Json j;
  j["delta"] = v.delta;
  j["zeta"] = v.zeta;
  j["mu"] = v.mu;
  j["theta"] = v.theta;
  j["omega"] = v.omega;
  j["decay_model"] = std::string(to_string(v.decay_model));
  j["dp_rate"] = v.dp_rate;
  j["cp_rate"] = v.cp_rate;
  j["epsilon"] = v.epsilon;
  j["w_eq"] = v.w_eq;
  j["w_ineq"] = v.w_ineq;
  j["w_expr"] = v.w_expr;
  return j;
}

MetricParams metric_params_from_json(const Json& j) {
  require_object(j, "metric parameters");
  return config_guard("metric parameters", [&] {
    MetricParams base;
    MetricParams::Values v = base.values();
    for (const auto& [key, value] : j.items()) {
      if (key == "decay_model") {
        if (!value.is_string()) throw ConfigError("'decay_model' must be a string");
        v.decay_model = parse_decay_kind(value.get<std::string>());
      } else if (key == "commutative" || key == "equality" || key == "inequality") {
        continue;
      } else {
        const auto names = MetricParams::numeric_names();
        if (std::find(names.begin(), names.end(), key) == names.end())
          throw ConfigError("unknown metric parameter '" + key + "'");
        const double x = number_field(j, key);
        if (key == "delta") v.delta = x;
        else if (key == "zeta") v.zeta = x;
        else if (key == "mu") v.mu = x;
        else if (key == "theta") v.theta = x;
        else if (key == "omega") v.omega = x;
        else if (key == "dp_rate") v.dp_rate = x;
        else if (key == "cp_rate") v.cp_rate = x;
        else if (key == "epsilon") v.epsilon = x;
        else if (key == "w_eq") v.w_eq = x;
        else if (key == "w_ineq") v.w_ineq = x;
        else if (key == "w_expr") v.w_expr = x;
      }
    }
    return MetricParams(v);
  });
}

Json to_json(const MetricConfig& c) {
  Json j = to_json(c.params);
  j["commutative"] = c.commutative.to_strings();
  j["equality"] = c.classifier.equality.to_strings();
  j["inequality"] = c.classifier.inequality.to_strings();
  return j;
}

MetricConfig metric_config_from_json(const Json& j) {
  MetricConfig c;
  c.params = metric_params_from_json(j);
  if (j.contains("commutative")) c.commutative = symbol_set_from_json(j["commutative"], "commutative");
  if (j.contains("equality")) c.classifier.equality = symbol_set_from_json(j["equality"], "equality");
  if (j.contains("inequality")) c.classifier.inequality = symbol_set_from_json(j["inequality"], "inequality");
  return c;
}

MetricConfig load_metric_config(const fs::path& file) {
  try {
    return metric_config_from_json(load_json(file));
  } catch (const ConfigError& e) {
    throw ConfigError(file.string() + ": " + e.what());
  }
}

Json to_json(const ParamSpace& space) {
  Json list = Json::array();
  for (const auto& r : space.ranges()) {
    Json e;
    e["name"] = r.name;
    e["min"] = r.min;
    e["max"] = r.max;
    e["step"] = r.step;
    list.push_back(std::move(e));
  }
  Json j;
  j["parameters"] = std::move(list);
  return j;
}

ParamSpace param_space_from_json(const Json& j) {
  require_object(j, "parameter space");
  return config_guard("parameter space", [&] {
    const auto& list = j.at("parameters");
    if (!list.is_array()) throw ConfigError("'parameters' must be a list");
    std::vector<ParamRange> ranges;
    for (const auto& e : list) {
      require_object(e, "parameter range");
      if (!e.at("name").is_string()) throw ConfigError("parameter range 'name' must be a string");
      ParamRange r{e.at("name").get<std::string>(), number_field(e, "min"), number_field(e, "max"), 1.0};
      r.step = e.contains("step") ? number_field(e, "step") : 1.0;
      ranges.push_back(std::move(r));
    }
    return ParamSpace(std::move(ranges));
  });
}

ParamSpace load_param_space(const fs::path& file) {
  try {
    return param_space_from_json(load_json(file));
  } catch (const ConfigError& e) {
    throw ConfigError(file.string() + ": " + e.what());
  }
}

Json to_json(const ObjectiveWeights& w) {
  Json j;
  j["overall_recall"] = w.overall_recall;
  j["top10_recall"] = w.top10_recall;
  j["rho"] = w.rho;
  j["tau"] = w.tau;
  return j;
}

ObjectiveWeights objective_weights_from_json(const Json& j) {
  require_object(j, "objective weights");
  ObjectiveWeights w;
  for (const auto& [key, value] : j.items()) {
    if (!value.is_number()) throw ConfigError("objective weight '" + key + "' must be a number");
    const double x = value.get<double>();
    if (key == "overall_recall") w.overall_recall = x;
    else if (key == "top10_recall") w.top10_recall = x;
    else if (key == "rho") w.rho = x;
    else if (key == "tau") w.tau = x;
    else throw ConfigError("unknown objective weight '" + key + "'");
  }
  w.validate();
  return w;
}

RunConfig load_run_config(const fs::path& file) {
  Json j;
  try {
    j = load_json(file);
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
  require_object(j, "run config");
  const fs::path base = file.parent_path();
  auto path_field = [&](const char* key, bool must_exist) {
    if (!j.contains(key) || !j[key].is_string())
      throw ConfigError(file.string() + ": missing string field '" + key + "'");
    fs::path p = j[key].get<std::string>();
    if (p.is_relative()) p = base / p;
    p = p.lexically_normal();
    if (must_exist && !fs::exists(p)) throw ConfigError(file.string() + ": " + key + " not found: " + p.string());
    return p;
  };
  RunConfig c;
  c.corpus_dir = path_field("corpus_dir", true);
  c.queries_dir = path_field("queries_dir", true);
  c.truth_file = path_field("truth_file", true);
  c.params_file = path_field("params_file", true);
  c.space_file = path_field("space_file", true);
  c.output_dir = path_field("output_dir", false);
  config_guard("run config", [&] {
    if (j.contains("weights")) c.weights = objective_weights_from_json(j["weights"]);
    if (j.contains("seeds")) {
      const auto& s = j["seeds"];
      require_object(s, "seeds");
      if (s.contains("split_seed")) c.split_seed = unsigned_field(s, "split_seed");
      if (s.contains("mc_seed")) c.mc_seed = unsigned_field(s, "mc_seed");
    }
    return 0;
  });
  return c;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

struct CsvRow {
  std::size_t line;
  std::vector<std::string> fields;
};

std::vector<CsvRow> parse_csv(std::string_view text, std::string_view what) {
  std::vector<CsvRow> rows;
  std::size_t line = 1;
  std::size_t i = 0;
  while (i < text.size()) {
    CsvRow row{line, {}};
    std::string field;
    bool done = false;
    while (!done) {
      if (i < text.size() && text[i] == '"') {
        ++i;
        for (;;) {
          if (i >= text.size())
            throw DataError(std::string(what) + ": unterminated quote at line " + std::to_string(row.line));
          if (text[i] == '"') {
            if (i + 1 < text.size() && text[i + 1] == '"') {
              field += '"';
              i += 2;
              continue;
            }
            ++i;
            break;
          }
          if (text[i] == '\n') ++line;
          field += text[i++];
        }
      }
      while (i < text.size() && text[i] != ',' && text[i] != '\n') field += text[i++];
      if (!field.empty() && field.back() == '\r') field.pop_back();
      row.fields.push_back(std::move(field));
      field.clear();
      if (i >= text.size()) {
        done = true;
      } else if (text[i] == ',') {
        ++i;
      } else {
        ++i;
        ++line;
        done = true;
      }
    }
    const bool blank = row.fields.size() == 1 && row.fields[0].find_first_not_of(" \t") == std::string::npos;
    if (!blank) rows.push_back(std::move(row));
  }
  return rows;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::size_t parse_rank(const std::string& s, std::string_view what, std::size_t line) {
  std::size_t rank = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), rank);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || rank == 0)
    throw DataError(std::string(what) + ": bad rank '" + s + "' at line " + std::to_string(line));
  return rank;
}

double parse_score(const std::string& s, std::string_view what, std::size_t line) {
  double v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw DataError(std::string(what) + ": bad score '" + s + "' at line " + std::to_string(line));
  return v;
}

// Rows keyed by query, each a rank -> (doc_id, score) map; checks ranks are
// contiguous from 1 and doc ids are not repeated within a query.
struct RankedRows {
  std::map<std::string, std::map<std::size_t, std::pair<std::string, double>>> by_query;
};

RankedRows collect_ranked(std::string_view text, std::string_view what, std::size_t min_fields,
                          std::size_t max_fields) {
  auto rows = parse_csv(text, what);
  if (!rows.empty() && !rows.front().fields.empty() && trim(rows.front().fields[0]) == "query_id")
    rows.erase(rows.begin());
  RankedRows out;
  for (auto& row : rows) {
    if (row.fields.size() < min_fields || row.fields.size() > max_fields)
      throw DataError(std::string(what) + ": expected " + std::to_string(min_fields) +
                      (min_fields == max_fields ? "" : "-" + std::to_string(max_fields)) + " fields at line " +
                      std::to_string(row.line));
    for (auto& f : row.fields) f = trim(std::move(f));
    const std::size_t rank = parse_rank(row.fields[1], what, row.line);
    const double score = row.fields.size() > 3 && !row.fields[3].empty()
                             ? parse_score(row.fields[3], what, row.line)
                             : 0.0;
    if (row.fields[0].empty() || row.fields[2].empty())
      throw DataError(std::string(what) + ": empty id at line " + std::to_string(row.line));
    auto& ranks = out.by_query[row.fields[0]];
    if (!ranks.emplace(rank, std::make_pair(row.fields[2], score)).second)
      throw DataError(std::string(what) + ": rank " + std::to_string(rank) + " repeated for query '" +
                      row.fields[0] + "'");
  }
  for (const auto& [qid, ranks] : out.by_query) {
    if (ranks.rbegin()->first != ranks.size())
      throw DataError(std::string(what) + ": ranks for query '" + qid + "' are not contiguous from 1");
  }
  return out;
}

}  // namespace

std::string hitlists_to_csv(std::span<const HitList> lists) {
  std::string out = "query_id,rank,doc_id,score\n";
  for (const auto& l : lists)
    for (std::size_t i = 0; i < l.hits.size(); ++i)
      out += csv_field(l.query_id) + "," + std::to_string(i + 1) + "," + csv_field(l.hits[i].doc_id) + "," +
             format_number(l.hits[i].score) + "\n";
  return out;
}

Json hitlists_to_json(std::span<const HitList> lists) {
  Json arr = Json::array();
  for (const auto& l : lists) {
    Json hits = Json::array();
    for (std::size_t i = 0; i < l.hits.size(); ++i)
      hits.push_back(Json{{"rank", i + 1}, {"doc_id", l.hits[i].doc_id}, {"score", l.hits[i].score}});
    arr.push_back(Json{{"query_id", l.query_id}, {"n", l.n}, {"hits", std::move(hits)}});
  }
  return arr;
}

std::vector<HitList> parse_hitlists_csv(std::string_view text) {
  const auto rows = collect_ranked(text, "hit list CSV", 3, 4);
  std::vector<HitList> out;
  for (const auto& [qid, ranks] : rows.by_query) {
    HitList l{qid, ranks.size(), {}};
    std::set<std::string_view> seen;
    for (const auto& [rank, hit] : ranks) {
      if (!seen.insert(hit.first).second)
        throw DataError("hit list CSV: doc '" + hit.first + "' listed twice for query '" + qid + "'");
      l.hits.push_back({hit.first, hit.second});
    }
    out.push_back(std::move(l));
  }
  return out;
}

std::vector<HitList> load_hitlists_csv(const fs::path& file) {
  try {
    return parse_hitlists_csv(read_text_file(file));
  } catch (const DataError& e) {
    throw DataError(file.string() + ": " + e.what());
  }
}

std::vector<GroundTruth> parse_ground_truth_csv(std::string_view text) {
  const auto rows = collect_ranked(text, "ground truth CSV", 3, 3);
  std::vector<GroundTruth> out;
  for (const auto& [qid, ranks] : rows.by_query) {
    GroundTruth t{qid, {}};
    for (const auto& [rank, item] : ranks) t.ranked_ids.push_back(item.first);
    t.validate();
    out.push_back(std::move(t));
  }
  if (out.empty()) throw DataError("ground truth CSV: no rows");
  return out;
}

std::vector<GroundTruth> load_ground_truth(const fs::path& file) {
  try {
    return parse_ground_truth_csv(read_text_file(file));
  } catch (const DataError& e) {
    throw DataError(file.string() + ": " + e.what());
  }
}

std::string ground_truth_to_csv(std::span<const GroundTruth> truths) {
  std::string out = "query_id,rank,doc_id\n";
  for (const auto& t : truths)
    for (std::size_t i = 0; i < t.ranked_ids.size(); ++i)
      out += csv_field(t.query_id) + "," + std::to_string(i + 1) + "," + csv_field(t.ranked_ids[i]) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Reports

Json to_json(const MetricAverages& a) {
  Json j;
  j["overall_recall"] = a.overall_recall;
  j["top10_recall"] = a.top10_recall;
  j["rho"] = a.rho;
  j["tau"] = a.tau;
  j["rho_sig_95"] = a.rho_sig_95;
  j["rho_sig_99"] = a.rho_sig_99;
  j["tau_sig_95"] = a.tau_sig_95;
  j["tau_sig_99"] = a.tau_sig_99;
  return j;
}

std::string eval_report_to_csv(const EvalReport& report) {
  std::string out =
      "query_id,overall_recall,top10_recall,rho,tau,rho_sig_95,rho_sig_99,tau_sig_95,tau_sig_99\n";
  auto flag = [](bool b) { return b ? "1" : "0"; };
  for (const auto& r : report.rows)
    out += csv_field(r.query_id) + "," + format_number(r.overall_recall) + "," + format_number(r.top10_recall) +
           "," + format_number(r.rho) + "," + format_number(r.tau) + "," + flag(r.rho_sig_95) + "," +
           flag(r.rho_sig_99) + "," + flag(r.tau_sig_95) + "," + flag(r.tau_sig_99) + "\n";
  const auto& a = report.averages;
  out += "average," + format_number(a.overall_recall) + "," + format_number(a.top10_recall) + "," +
         format_number(a.rho) + "," + format_number(a.tau) + "," + format_number(a.rho_sig_95) + "," +
         format_number(a.rho_sig_99) + "," + format_number(a.tau_sig_95) + "," + format_number(a.tau_sig_99) +
         "\n";
  return out;
}

Json to_json(const EvalReport& report) {
  Json rows = Json::array();
  for (const auto& r : report.rows) {
    Json j;
    j["query_id"] = r.query_id;
    j["overall_recall"] = r.overall_recall;
    j["top10_recall"] = r.top10_recall;
    j["rho"] = r.rho;
    j["tau"] = r.tau;
    j["rho_sig_95"] = r.rho_sig_95;
    j["rho_sig_99"] = r.rho_sig_99;
    j["tau_sig_95"] = r.tau_sig_95;
    j["tau_sig_99"] = r.tau_sig_99;
    rows.push_back(std::move(j));
  }
  Json j;
  j["rows"] = std::move(rows);
  j["averages"] = to_json(report.averages);
  return j;
}

Json to_json(const CriticalValueTable& table) {
  Json entries = Json::array();
  for (const auto& [key, e] : table.entries())
    entries.push_back(Json{{"statistic", key.first == Statistic::Rho ? "rho" : "tau"},
                           {"n", key.second},
                           {"p95", e.p95},
                           {"p99", e.p99}});
  Json j;
  j["seed"] = table.seed();
  j["samples"] = table.samples();
  j["entries"] = std::move(entries);
  return j;
}

std::string critical_values_to_csv(const CriticalValueTable& table) {
  std::string out = "statistic,n,p95,p99\n";
  for (const auto& [key, e] : table.entries())
    out += std::string(key.first == Statistic::Rho ? "rho" : "tau") + "," + std::to_string(key.second) + "," +
           format_number(e.p95) + "," + format_number(e.p99) + "\n";
  return out;
}

Json to_json(const OptimizationRun& run) {
  Json gens = Json::array();
  for (const auto& g : run.generations) {
    Json sweeps = Json::array();
    for (const auto& s : g.sweeps)
      sweeps.push_back(Json{{"parameter", s.parameter},
                            {"value", s.best_value},
                            {"objective", s.best_objective},
                            {"trials", s.trials}});
    Json jg;
    jg["generation"] = g.generation_index;
    jg["objective"] = g.objective;
    jg["averages"] = to_json(g.averages);
    jg["params"] = to_json(g.best_params);
    jg["sweeps"] = std::move(sweeps);
    gens.push_back(std::move(jg));
  }
  Json j;
  j["model"] = std::string(to_string(run.model));
  j["converged"] = run.converged;
  j["warning"] = run.warning;
  j["seed_objective"] = run.seed_objective;
  j["seed_averages"] = to_json(run.seed_averages);
  j["seed_params"] = to_json(run.seed_params);
  j["final_objective"] = run.final_objective();
  j["best_params"] = to_json(run.best_params());
  j["generations"] = std::move(gens);
  return j;
}

namespace {

const char* const kTableMetricHeader = "Ave. Overall Recall,Ave. Top 10 Recall,Ave. ρ Correlation,Ave. τ Correlation";

std::string metric_cells(const MetricAverages& a) {
  return format_number(a.overall_recall) + "," + format_number(a.top10_recall) + "," + format_number(a.rho) + "," +
         format_number(a.tau);
}

std::string model_label(DecayKind kind) {
  std::string s(to_string(kind));
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

}  // namespace

std::string optimization_run_to_csv(const OptimizationRun& run) {
  std::string out = std::string("generation,objective,") + kTableMetricHeader + "\n";
  out += "0," + format_number(run.seed_objective) + "," + metric_cells(run.seed_averages) + "\n";
  for (const auto& g : run.generations)
    out += std::to_string(g.generation_index) + "," + format_number(g.objective) + "," + metric_cells(g.averages) +
           "\n";
  return out;
}

Json to_json(const ModelSelection& selection) {
  Json models = Json::array();
  for (const auto& r : selection.runs)
    models.push_back(Json{{"model", std::string(to_string(r.model))},
                          {"generations", r.generations.size()},
                          {"converged", r.converged},
                          {"seed_objective", r.seed_objective},
                          {"final_objective", r.final_objective()}});
  Json j;
  j["best_model"] = std::string(to_string(selection.best().model));
  j["best_objective"] = selection.best().final_objective();
  j["best_params"] = to_json(selection.best().best_params());
  j["models"] = std::move(models);
  return j;
}

std::string model_selection_to_csv(const ModelSelection& selection) {
  std::string out = std::string("Model,Generations,Converged,Objective,") + kTableMetricHeader + "\n";
  for (const auto& r : selection.runs) {
    const MetricAverages& a = r.generations.empty() ? r.seed_averages : r.generations.back().averages;
    out += model_label(r.model) + "," + std::to_string(r.generations.size()) + "," +
           (r.converged ? "true" : "false") + "," + format_number(r.final_objective()) + "," + metric_cells(a) +
           "\n";
  }
  return out;
}

Json to_json(const CrossValidationReport& report) {
  Json rows = Json::array();
  for (const auto& r : report.rows)
    rows.push_back(Json{{"model", std::string(to_string(r.model))},
                        {"cross_validated", r.cross_validated},
                        {"objective", r.objective},
                        {"averages", to_json(r.averages)},
                        {"params", to_json(r.params)}});
  Json j;
  j["split_seed"] = report.split_seed;
  j["training_queries"] = report.split.training;
  j["test_queries"] = report.split.test;
  j["test_evaluations_during_training"] = report.test_evaluations_during_training;
  j["rows"] = std::move(rows);
  return j;
}

std::string cross_validation_to_csv(const CrossValidationReport& report) {
  std::string out = std::string("Model,Validation,") + kTableMetricHeader + "\n";
  for (const auto& r : report.rows)
    out += model_label(r.model) + "," + (r.cross_validated ? "With CV" : "Without CV") + "," +
           metric_cells(r.averages) + "\n";
  return out;
}

}  // namespace mss
