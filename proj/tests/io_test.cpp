// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 MSS Contributors

#include <gtest/gtest.h>

#include <random>

#include "mss/error.hpp"
#include "mss/io.hpp"
#include "test_support.hpp"

using namespace mss;
using namespace mss::testing;

TEST(Numbers, ShortestRoundTrip) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int i = 0; i < 2000; ++i) {
    const double x = u(rng);
    EXPECT_EQ(std::stod(format_number(x)), x);
  }
  EXPECT_EQ(format_number(0.5), "0.5");
  EXPECT_EQ(format_number(1.0), "1");
}

TEST(MetricParamsJson, RoundTripsEveryField) {
  TreeGenerator gen(8);
  for (DecayKind kind : kDecayKinds)
    for (int i = 0; i < 25; ++i) {
      const MetricParams p = gen.params(kind);
      EXPECT_EQ(metric_params_from_json(Json::parse(to_json(p).dump())), p);
    }
  const Json j = to_json(MetricParams());
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  EXPECT_EQ(keys, (std::vector<std::string>{"delta", "zeta", "mu", "theta", "omega", "decay_model", "dp_rate",
                                            "cp_rate", "epsilon", "w_eq", "w_ineq", "w_expr"}));
}

TEST(MetricParamsJson, RejectsUnknownAndInvalid) {
  EXPECT_THROW(metric_params_from_json(Json::parse(R"({"omga": 2})")), ConfigError);
  EXPECT_THROW(metric_params_from_json(Json::parse(R"({"omega": 0.5})")), ConfigError);
  EXPECT_THROW(metric_params_from_json(Json::parse(R"({"omega": "2"})")), ConfigError);
  EXPECT_THROW(metric_params_from_json(Json::parse(R"({"decay_model": "cubic"})")), ConfigError);
  EXPECT_THROW(metric_params_from_json(Json::parse("[1]")), ConfigError);
}

TEST(MetricConfigJson, SymbolSetsLoadFromTheSameDocument) {
  const auto c = metric_config_from_json(Json::parse(
      R"({"mu": 0.3, "commutative": ["arith1:plus"], "equality": ["relation1:eq", "relation1:approx"],
          "inequality": ["relation1:lt"]})"));
  EXPECT_EQ(c.params.mu(), 0.3);
  EXPECT_EQ(c.commutative.size(), 1u);
  EXPECT_TRUE(c.classifier.equality.contains("relation1", "approx"));
  EXPECT_FALSE(c.classifier.inequality.contains("relation1", "geq"));
  const auto back = metric_config_from_json(Json::parse(to_json(c).dump()));
  EXPECT_EQ(back.commutative.to_strings(), c.commutative.to_strings());
  EXPECT_EQ(back.classifier.equality.to_strings(), c.classifier.equality.to_strings());
  EXPECT_THROW(metric_config_from_json(Json::parse(R"({"commutative": ["plus"]})")), ConfigError);
}

TEST(ParamSpaceJson, RoundTripAndErrors) {
  const ParamSpace d = ParamSpace::defaults();
  const ParamSpace back = param_space_from_json(Json::parse(to_json(d).dump()));
  ASSERT_EQ(back.ranges().size(), d.ranges().size());
  for (std::size_t i = 0; i < d.ranges().size(); ++i) {
    EXPECT_EQ(back.ranges()[i].name, d.ranges()[i].name);
    EXPECT_EQ(back.ranges()[i].trial_values(), d.ranges()[i].trial_values());
  }
  EXPECT_THROW(param_space_from_json(Json::parse(R"({"parameters": [{"name": "mu", "min": 0.5}]})")), ConfigError);
  EXPECT_THROW(param_space_from_json(Json::parse(R"({"params": []})")), ConfigError);
  EXPECT_THROW(param_space_from_json(Json::parse(R"({"parameters": [{"name": "mu", "min": 0.1, "max": 1.2,
      "step": 0.1}]})")),
               ConfigError);
}

TEST(ObjectiveWeightsJson, ParsesAndValidates) {
  const auto w = objective_weights_from_json(Json::parse(R"({"overall_recall": 2, "tau": 0})"));
  EXPECT_EQ(w.overall_recall, 2.0);
  EXPECT_EQ(w.top10_recall, 1.0);
  EXPECT_EQ(w.tau, 0.0);
  EXPECT_THROW(objective_weights_from_json(Json::parse(R"({"recall": 1})")), ConfigError);
  EXPECT_THROW(objective_weights_from_json(
                   Json::parse(R"({"overall_recall": 0, "top10_recall": 0, "rho": 0, "tau": 0})")),
               ConfigError);
}

TEST(RunConfig, ResolvesRelativePathsAndChecksExistence) {
  ScratchDir dir("io_config");
  dir.write("c/corpus/a.xml", "<math><ci>x</ci></math>");
  dir.write("c/queries/q.xml", "<math><ci>x</ci></math>");
  dir.write("c/truth.csv", "q,1,a\n");
  dir.write("c/params.json", "{}");
  dir.write("c/space.json", R"({"parameters": []})");
  dir.write("c/run.json", R"({"corpus_dir": "corpus", "queries_dir": "queries", "truth_file": "truth.csv",
      "params_file": "params.json", "space_file": "space.json", "output_dir": "out",
      "seeds": {"split_seed": 5, "mc_seed": 6}, "weights": {"rho": 2}})");
  const RunConfig c = load_run_config(dir.path() / "c/run.json");
  EXPECT_EQ(c.corpus_dir, (dir.path() / "c/corpus").lexically_normal());
  EXPECT_EQ(c.output_dir, (dir.path() / "c/out").lexically_normal());
  EXPECT_EQ(c.split_seed, 5u);
  EXPECT_EQ(c.mc_seed, 6u);
  EXPECT_EQ(c.weights.rho, 2.0);

  dir.write("c/bad.json", R"({"corpus_dir": "missing", "queries_dir": "queries", "truth_file": "truth.csv",
      "params_file": "params.json", "space_file": "space.json", "output_dir": "out"})");
  EXPECT_THROW(load_run_config(dir.path() / "c/bad.json"), ConfigError);
  dir.write("c/short.json", R"({"corpus_dir": "corpus"})");
  EXPECT_THROW(load_run_config(dir.path() / "c/short.json"), ConfigError);
  EXPECT_THROW(load_run_config(dir.path() / "c/none.json"), ConfigError);
}

TEST(HitListCsv, RoundTripsAndQuotes) {
  const std::vector<HitList> lists{{"q1", 3, {{"a", 0.75}, {"dir/b,c", 0.1 + 0.2}}}, {"q2", 1, {{"x\"y", 1.0}}}};
  const std::string csv = hitlists_to_csv(lists);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "query_id,rank,doc_id,score");
  auto back = parse_hitlists_csv(csv);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].hits, lists[0].hits);
  EXPECT_EQ(back[1].hits, lists[1].hits);
  EXPECT_EQ(hitlists_to_csv(back), csv);
}

TEST(HitListCsv, AcceptsExternalListsWithoutScoresOrHeader) {
  const auto lists = parse_hitlists_csv("q2,2,b\r\nq1,1,z\nq2,1,a\n\n");
  ASSERT_EQ(lists.size(), 2u);
  EXPECT_EQ(lists[0].query_id, "q1");
  ASSERT_EQ(lists[1].hits.size(), 2u);
  EXPECT_EQ(lists[1].hits[0].doc_id, "a");
  EXPECT_EQ(lists[1].hits[1].doc_id, "b");
  EXPECT_EQ(lists[1].hits[1].score, 0.0);
}

TEST(HitListCsv, RejectsBrokenInput) {
  EXPECT_THROW(parse_hitlists_csv("q,1,a\nq,3,b\n"), DataError);   // gap
  EXPECT_THROW(parse_hitlists_csv("q,1,a\nq,1,b\n"), DataError);   // repeated rank
  EXPECT_THROW(parse_hitlists_csv("q,1,a\nq,2,a\n"), DataError);   // repeated doc
  EXPECT_THROW(parse_hitlists_csv("q,zero,a\n"), DataError);
  EXPECT_THROW(parse_hitlists_csv("q,1\n"), DataError);
  EXPECT_THROW(parse_hitlists_csv("q,1,a,high\n"), DataError);
  EXPECT_THROW(parse_hitlists_csv("q,1,\"a\n"), DataError);
}

TEST(GroundTruthCsv, ParsesSortsAndRoundTrips) {
  const auto truths = parse_ground_truth_csv("query_id,rank,doc_id\nq1,2,b\nq1,1,a\nq0,1,z\n");
  ASSERT_EQ(truths.size(), 2u);
  EXPECT_EQ(truths[0].query_id, "q0");
  EXPECT_EQ(truths[1].ranked_ids, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(parse_ground_truth_csv(ground_truth_to_csv(truths))[1].ranked_ids, truths[1].ranked_ids);
  EXPECT_THROW(parse_ground_truth_csv("q,1,a,0.5\n"), DataError);
  EXPECT_THROW(parse_ground_truth_csv("query_id,rank,doc_id\n"), DataError);
  EXPECT_THROW(parse_ground_truth_csv("q,2,a\n"), DataError);
}

TEST(Reports, EvalCsvHasFieldColumnsAndAverageRow) {
  const std::vector<GroundTruth> truths{{"q1", {"a", "b", "c", "d"}}};
  const std::vector<HitList> lists{{"q1", 4, {{"a", 1}, {"b", 0.9}, {"c", 0.8}, {"d", 0.7}}}};
  const CriticalValueTable table;
  const EvalReport report = evaluate(lists, truths, &table);
  const std::string csv = eval_report_to_csv(report);
  EXPECT_EQ(csv,
            "query_id,overall_recall,top10_recall,rho,tau,rho_sig_95,rho_sig_99,tau_sig_95,tau_sig_99\n"
            "q1,1,1,1,1,1,0,1,0\n"
            "average,1,1,1,1,1,0,1,0\n");
  EXPECT_EQ(eval_report_to_csv(evaluate(lists, truths, &table)), csv);
  const Json j = to_json(report);
  EXPECT_EQ(j["rows"][0]["rho_sig_95"], true);
  EXPECT_EQ(j["averages"]["overall_recall"], 1.0);
}

TEST(Reports, CrossValidationCsvHeader) {
  CrossValidationReport r;
  r.rows.push_back({DecayKind::Logarithmic, true, MetricParams(), {}, 0.0});
  const std::string csv = cross_validation_to_csv(r);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "Model,Validation,Ave. Overall Recall,Ave. Top 10 Recall,Ave. ρ Correlation,Ave. τ Correlation");
  EXPECT_NE(csv.find("Logarithmic,With CV,0,0,0,0"), std::string::npos);
}
