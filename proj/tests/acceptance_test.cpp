// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 MSS Contributors

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "mss/eval.hpp"
#include "mss/io.hpp"
#include "mss/metric.hpp"
#include "mss/optimizer.hpp"
#include "mss/search.hpp"
#include "test_support.hpp"

using namespace mss;
using namespace mss::testing;
namespace fs = std::filesystem;

namespace {

// Tolerances and limits.
constexpr double kIdentityTol = 1e-9;
constexpr int kIdentityParamSets = 20;
constexpr double kIdentitySeconds = 10.0;

constexpr int kRangePairs = 10000;
constexpr int kRangeMaxHeight = 5;
constexpr int kRangeMaxFanout = 4;
constexpr double kAssignmentTol = 1e-12;  // summation order only
constexpr double kRangeSeconds = 60.0;

constexpr int kDecayMaxK = 20;

constexpr double kGoldenTol = 1e-12;

constexpr int kExactN = 5;
constexpr double kMonteCarloTol = 0.02;

constexpr double kSweepTol = 0.0;  // committed objectives must not drop at all
constexpr int kGenerationCap = 25;
constexpr double kOptimizeSeconds = 15.0 * 60.0;

constexpr double kFirstHalfShare = 0.5;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

std::string fmt(double x) { return format_number(x); }

// ---------------------------------------------------------------------------
// Bundled data, optimized once and shared by the criteria that need it.

struct Bundle {
  fs::path data = MSS_DATA_DIR;
  RunConfig run;
  MetricConfig metric;
  ParamSpace space = ParamSpace::defaults();
  Corpus corpus;
  std::vector<Query> queries;
  std::vector<GroundTruth> truths;

  Bundle()
      : run(load_run_config(data / "config.json")),
        metric(load_metric_config(run.params_file)),
        space(load_param_space(run.space_file)),
        corpus(load_corpus(run.corpus_dir, metric.classifier)),
        queries(load_queries(run.queries_dir)),
        truths(load_ground_truth(run.truth_file)) {}

  OptimizerOptions options() const {
    OptimizerOptions o;
    o.weights = run.weights;
    o.generation_cap = kGenerationCap;
    return o;
  }
};

struct Tuned {
  ModelSelection first;
  ModelSelection second;
  double seconds = 0;
  CrossValidationReport xval;
  std::size_t training_evals_of_test = 0;
  std::size_t training_evals = 0;
  std::size_t testing_evals_of_test = 0;
  std::string error;
};

Tuned tune(const Bundle& b) {
  Tuned t;
  try {
    const auto start = Clock::now();
    const SearchEngine engine(b.corpus, b.metric.commutative);
    TuningProblem p1(engine, b.queries, b.truths);
    t.first = optimize_all(b.space, b.metric.params, p1, b.options());
    TuningProblem p2(engine, b.queries, b.truths, 2);
    t.second = optimize_all(b.space, b.metric.params, p2, b.options());
    t.seconds = seconds_since(start);

    std::vector<std::string> ids;
    for (const auto& q : b.queries) ids.push_back(q.query_id);
    const QuerySplit split = split_queries(ids, b.run.split_seed);
    const std::unordered_set<std::string> test(split.test.begin(), split.test.end());
    auto hook = [&](EvalPhase phase, std::string_view id) {
      const bool held_out = test.count(std::string(id)) > 0;
      if (phase == EvalPhase::Training) {
        ++t.training_evals;
        if (held_out) ++t.training_evals_of_test;
      } else if (held_out) {
        ++t.testing_evals_of_test;
      }
    };
    t.xval = cross_validate(b.queries, b.truths, engine, b.space, b.metric.params, b.run.split_seed, b.options(),
                            hook);
  } catch (const std::exception& e) {
    t.error = e.what();
  }
  return t;
}

// ---------------------------------------------------------------------------

Outcome identity(const Bundle& b) {
  Outcome o;
  const auto start = Clock::now();
  std::vector<PreparedTree> trees;
  for (const auto& d : b.corpus.documents()) trees.emplace_back(d.tree, b.metric.commutative);
  for (const auto& q : b.queries) trees.emplace_back(q.tree, b.metric.commutative);
  TreeGenerator gen(101);
  double worst = 0;
  std::size_t checks = 0;
  for (DecayKind kind : kDecayKinds)
    for (int i = 0; i < kIdentityParamSets; ++i) {
      const MetricParams p = gen.params(kind);
      for (const auto& t : trees) {
        const double err = std::abs(sim(t, t, p) - 1.0);
        worst = std::max(worst, err);
        ++checks;
        if (!(err <= kIdentityTol)) o.fail(to_string(t.tree()) + " under " + std::string(to_string(kind)));
      }
    }
  const double secs = seconds_since(start);
  if (secs >= kIdentitySeconds) o.fail("took " + fmt(secs) + " s");
  if (o.pass)
    o.detail = std::to_string(checks) + " checks, max |sim-1| " + fmt(worst) + ", " + fmt(secs) + " s";
  return o;
}

Outcome range_and_bound() {
  Outcome o;
  const auto start = Clock::now();
  TreeGenerator gen(202, kRangeMaxHeight, kRangeMaxFanout);
  std::size_t matchings = 0;
  for (int i = 0; i < kRangePairs; ++i) {
    const ExprTree q = gen.tree();
    const ExprTree d = gen.tree();
    if (q.height() > kRangeMaxHeight || d.height() > kRangeMaxHeight) {
      o.fail("generated tree too tall");
      break;
    }
    const MetricParams p = gen.params(kDecayKinds[static_cast<std::size_t>(i) % kDecayKinds.size()]);
    const double s = sim(q, d, p);
    if (!(s >= 0.0 && s <= 1.0)) o.fail("sim " + fmt(s) + " for " + to_string(q) + " vs " + to_string(d));
    // Argument matching at the roots, or on fresh lists when either side is a leaf.
    std::vector<ExprTree> qa, da;
    if (!q.is_leaf() && !d.is_leaf()) {
      qa.assign(q.args().begin(), q.args().end());
      da.assign(d.args().begin(), d.args().end());
    } else {
      qa = gen.list(kRangeMaxFanout);
      da = gen.list(kRangeMaxFanout);
    }
    const double greedy = arg_list_sim_greedy(qa, da, p, default_commutative_symbols());
    const double exact = arg_list_sim_exact(qa, da, p, default_commutative_symbols());
    if (std::min(qa.size(), da.size()) > 0) ++matchings;
    if (greedy > exact + kAssignmentTol) o.fail("greedy " + fmt(greedy) + " > exact " + fmt(exact));
  }
  const double secs = seconds_since(start);
  if (secs >= kRangeSeconds) o.fail("took " + fmt(secs) + " s");
  if (matchings < kRangePairs / 4) o.fail("only " + std::to_string(matchings) + " non-empty matchings");
  if (o.pass)
    o.detail = std::to_string(kRangePairs) + " pairs, " + std::to_string(matchings) + " non-empty matchings, " +
               fmt(secs) + " s";
  return o;
}

Outcome ordering(const Bundle& b, const Tuned& t) {
  Outcome o;
  if (!t.error.empty()) {
    o.fail(t.error);
    return o;
  }
  const PreparedTree newton(parse_file(b.data / "fixtures/newton.xml"), b.metric.commutative);
  const PreparedTree coulomb(parse_file(b.data / "fixtures/coulomb.xml"), b.metric.commutative);
  const PreparedTree flat(parse_file(b.data / "fixtures/flat_sum.xml"), b.metric.commutative);
  std::vector<MetricParams> sets;
  for (const auto& r : t.first.runs) sets.push_back(r.best_params());
  for (const auto& r : t.xval.training_runs) sets.push_back(r.best_params());
  double min_gap = std::numeric_limits<double>::infinity();
  for (const auto& p : sets) {
    const double c = sim(newton, coulomb, p);
    const double f = sim(newton, flat, p);
    min_gap = std::min(min_gap, c - f);
    if (!(c > f)) o.fail(std::string(to_string(p.decay_kind())) + ": coulomb " + fmt(c) + " <= flat " + fmt(f));
  }
  if (o.pass) o.detail = std::to_string(sets.size()) + " optimized sets, min margin " + fmt(min_gap);
  return o;
}

Outcome decay_contracts(const Bundle& b) {
  Outcome o;
  std::vector<double> rates, epsilons{b.metric.params.epsilon()};
  for (const auto& r : b.space.ranges()) {
    if (r.name == "dp_rate" || r.name == "cp_rate")
      for (double v : r.trial_values()) rates.push_back(v);
    if (r.name == "epsilon") epsilons = r.trial_values();
  }
  std::sort(rates.begin(), rates.end());
  rates.erase(std::unique(rates.begin(), rates.end()), rates.end());
  std::size_t checks = 0;
  for (DecayKind kind : kDecayKinds)
    for (double rate : rates)
      for (double eps : epsilons) {
        const DecayModel m{kind, rate};
        const std::string where = std::string(to_string(kind)) + " rate " + fmt(rate) + " eps " + fmt(eps);
        if (decay(m, 0, eps) != 1.0) o.fail(where + ": decay(0) != 1");
        for (int k = 0; k <= kDecayMaxK; ++k, ++checks) {
          const double v = decay(m, k, eps);
          if (k > 0 && v > decay(m, k - 1, eps)) o.fail(where + ": increases at k=" + std::to_string(k));
          if (kind != DecayKind::Exponential && v < eps) o.fail(where + ": below floor at k=" + std::to_string(k));
        }
      }
  if (o.pass)
    o.detail = std::to_string(rates.size()) + " rates x " + std::to_string(epsilons.size()) +
               " floors x 4 models, " + std::to_string(checks) + " points";
  return o;
}

HitList ranked(const std::vector<std::string>& ids) {
  HitList h{"q", ids.size(), {}};
  double score = 1.0;
  for (const auto& id : ids) h.hits.push_back({id, score -= 0.01});
  return h;
}

std::vector<std::string> labels(int n) {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.push_back("d" + std::to_string(i));
  return out;
}

Outcome golden_correlations() {
  Outcome o;
  auto expect = [&](const std::string& what, double got, double want) {
    if (!(std::abs(got - want) <= kGoldenTol)) o.fail(what + " = " + fmt(got) + ", expected " + fmt(want));
  };
  for (int n = 2; n <= 20; ++n) {
    const GroundTruth truth{"q", labels(n)};
    std::vector<std::string> rev(truth.ranked_ids.rbegin(), truth.ranked_ids.rend());
    const std::string tag = " n=" + std::to_string(n);
    expect("identical rho" + tag, spearman_rho(ranked(truth.ranked_ids), truth), 1.0);
    expect("identical tau" + tag, kendall_tau(ranked(truth.ranked_ids), truth), 1.0);
    expect("reversed rho" + tag, spearman_rho(ranked(rev), truth), -1.0);
    expect("reversed tau" + tag, kendall_tau(ranked(rev), truth), -1.0);
  }
  const GroundTruth five{"q", labels(5)};
  expect("rho one swap n=5", spearman_rho(ranked({"d0", "d1", "d3", "d2", "d4"}), five), 0.9);
  const GroundTruth four{"q", labels(4)};
  expect("tau one swap n=4", kendall_tau(ranked({"d0", "d2", "d1", "d3"}), four), 2.0 / 3.0);
  if (o.pass) o.detail = "identical/reversed n=2..20, rho 0.9 and tau 2/3 fixtures";
  return o;
}

// Smallest attainable c with P(stat >= c) <= alpha over all n! orderings.
double exhaustive_critical(Statistic stat, int n, double alpha) {
  const GroundTruth truth{"q", labels(n)};
  std::vector<std::size_t> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  std::map<double, long, std::greater<>> counts;
  long total = 0;
  do {
    std::vector<std::string> ids;
    for (std::size_t p : perm) ids.push_back(truth.ranked_ids[p]);
    const HitList h = ranked(ids);
    const double s = stat == Statistic::Rho ? spearman_rho(h, truth) : kendall_tau(h, truth);
    ++counts[std::round(s * 1e9) / 1e9];
    ++total;
  } while (std::next_permutation(perm.begin(), perm.end()));
  double critical = std::numeric_limits<double>::infinity();
  long tail = 0;
  for (const auto& [value, count] : counts) {
    tail += count;
    if (static_cast<double>(tail) > alpha * static_cast<double>(total)) break;
    critical = value;
  }
  return critical;
}

Outcome critical_values(const Bundle& b) {
  Outcome o;
  std::ostringstream detail;
  for (Statistic stat : {Statistic::Rho, Statistic::Tau})
    for (auto [level, alpha] : {std::pair{Confidence::P95, 0.05}, std::pair{Confidence::P99, 0.01}}) {
      const double exact = exhaustive_critical(stat, kExactN, alpha);
      const double mc = critical_value(stat, kExactN, level, b.run.mc_seed);
      const std::string name = std::string(stat == Statistic::Rho ? "rho" : "tau") +
                               (level == Confidence::P95 ? "95" : "99");
      const bool both_inf = std::isinf(exact) && std::isinf(mc);
      if (!both_inf && !(std::abs(exact - mc) <= kMonteCarloTol))
        o.fail(name + " n=5: exhaustive " + fmt(exact) + ", monte carlo " + fmt(mc));
      detail << name << " " << fmt(exact) << "/" << fmt(mc) << " ";
    }
  CriticalValueTable table(b.run.mc_seed);
  table.fill_all();
  for (const auto& [key, entry] : table.entries())
    if (!(entry.p99 >= entry.p95))
      o.fail("n=" + std::to_string(key.second) + ": p99 " + fmt(entry.p99) + " < p95 " + fmt(entry.p95));
  if (table.entries().size() != 2u * (kMaxCriticalN - kMinCriticalN + 1)) o.fail("table incomplete");
  if (o.pass)
    o.detail = "n=5 exhaustive/mc: " + detail.str() + "; p99 >= p95 for n=" + std::to_string(kMinCriticalN) + ".." +
               std::to_string(kMaxCriticalN);
  return o;
}

Outcome optimizer_behaviour(const Tuned& t) {
  Outcome o;
  if (!t.error.empty()) {
    o.fail(t.error);
    return o;
  }
  std::ostringstream gens;
  for (const auto& r : t.first.runs) {
    const std::string model(to_string(r.model));
    double last = r.seed_objective;
    for (const auto& g : r.generations)
      for (const auto& s : g.sweeps) {
        if (s.best_objective < last - kSweepTol)
          o.fail(model + " gen " + std::to_string(g.generation_index) + " " + s.parameter + " dropped");
        last = s.best_objective;
      }
    if (!r.converged || static_cast<int>(r.generations.size()) > kGenerationCap) o.fail(model + " did not converge");
    gens << model << " " << r.generations.size() << " ";
  }
  if (to_json(t.first).dump() != to_json(t.second).dump()) o.fail("rerun differs");
  if (t.seconds >= kOptimizeSeconds) o.fail("took " + fmt(t.seconds) + " s");
  if (o.pass) o.detail = "generations: " + gens.str() + "; rerun bit-identical; " + fmt(t.seconds) + " s for two runs";
  return o;
}

Outcome improvement_shape(const Tuned& t) {
  Outcome o;
  if (!t.error.empty()) {
    o.fail(t.error);
    return o;
  }
  const OptimizationRun& best = t.first.best();
  const double seed = best.seed_objective;
  const double final = best.final_objective();
  if (!(final > seed)) o.fail("final " + fmt(final) + " <= seed " + fmt(seed));
  double last = seed;
  for (const auto& g : best.generations) {
    if (g.objective < last) o.fail("generation " + std::to_string(g.generation_index) + " dropped");
    last = g.objective;
  }
  const std::size_t half = std::max<std::size_t>(1, best.generations.size() / 2);
  const double early = best.generations[half - 1].objective - seed;
  const double total = final - seed;
  const double share = total > 0 ? early / total : 0.0;
  if (!(share >= kFirstHalfShare)) o.fail("first half share " + fmt(share));
  if (o.pass)
    o.detail = std::string(to_string(best.model)) + " " + fmt(seed) + " -> " + fmt(final) + ", first " +
               std::to_string(half) + " of " + std::to_string(best.generations.size()) +
               " generations give " + fmt(std::round(share * 1000) / 10) + "%";
  return o;
}

Outcome xval_hygiene(const Bundle& b, const Tuned& t) {
  Outcome o;
  if (!t.error.empty()) {
    o.fail(t.error);
    return o;
  }
  const auto& r = t.xval;
  const std::set<std::string> train(r.split.training.begin(), r.split.training.end());
  const std::set<std::string> test(r.split.test.begin(), r.split.test.end());
  std::set<std::string> all;
  for (const auto& q : b.queries) all.insert(q.query_id);
  std::set<std::string> both = train;
  both.insert(test.begin(), test.end());
  if (train.size() + test.size() != both.size()) o.fail("split overlaps");
  if (both != all) o.fail("split not exhaustive");
  if (train.size() != (all.size() + 1) / 2) o.fail("training half has " + std::to_string(train.size()));

  if (r.rows.size() != 2 * kDecayKinds.size()) o.fail("report has " + std::to_string(r.rows.size()) + " rows");
  for (std::size_t i = 0; i < r.rows.size(); ++i)
    if (r.rows[i].model != kDecayKinds[i / 2] || r.rows[i].cross_validated != (i % 2 == 1)) o.fail("row order");

  ScratchDir dir("acceptance");
  write_text_file(dir.path() / "xval.csv", cross_validation_to_csv(r));
  const std::string csv = read_text_file(dir.path() / "xval.csv");
  if (csv.rfind("Model,Validation,Ave. Overall Recall,Ave. Top 10 Recall,Ave. ρ Correlation,Ave. τ Correlation\n",
                0) != 0)
    o.fail("unexpected header");
  if (std::count(csv.begin(), csv.end(), '\n') != 9) o.fail("csv line count");
  if (csv.find("Logarithmic,With CV,") == std::string::npos) o.fail("missing Logarithmic With CV row");

  if (t.training_evals_of_test != 0 || r.test_evaluations_during_training != 0)
    o.fail(std::to_string(t.training_evals_of_test) + " held-out evaluations during training");
  if (t.training_evals == 0 || t.testing_evals_of_test == 0) o.fail("instrumentation saw no evaluations");
  if (o.pass)
    o.detail = std::to_string(train.size()) + "/" + std::to_string(test.size()) + " split, " +
               std::to_string(t.training_evals) + " training evaluations, 0 on held-out queries";
  return o;
}

}  // namespace

int main() {
  std::vector<std::pair<std::string, Outcome>> results;
  auto guarded = [](const std::function<Outcome()>& f) {
    try {
      return f();
    } catch (const std::exception& e) {
      Outcome o;
      o.fail(std::string("exception: ") + e.what());
      return o;
    }
  };

  Bundle b;
  results.emplace_back("identity", guarded([&] { return identity(b); }));
  results.emplace_back("range and matching bound", guarded([&] { return range_and_bound(); }));
  const Tuned t = tune(b);
  results.emplace_back("structural ordering", guarded([&] { return ordering(b, t); }));
  results.emplace_back("decay contracts", guarded([&] { return decay_contracts(b); }));
  results.emplace_back("correlation golden values", guarded([&] { return golden_correlations(); }));
  results.emplace_back("critical values", guarded([&] { return critical_values(b); }));
  results.emplace_back("optimizer monotonicity and convergence", guarded([&] { return optimizer_behaviour(t); }));
  results.emplace_back("improvement shape", guarded([&] { return improvement_shape(t); }));
  results.emplace_back("cross-validation hygiene", guarded([&] { return xval_hygiene(b, t); }));

  bool all = true;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& [name, o] = results[i];
    std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, name.c_str(), o.detail.c_str());
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
