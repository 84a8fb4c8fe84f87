// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 MSS Contributors

#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mss/mathml.hpp"
#include "mss/metric.hpp"

namespace mss {

struct DocumentRecord {
  std::string doc_id;  // path relative to the corpus root, extension dropped
  std::filesystem::path source_path;
  ExprTree tree;
  FormulaClass formula_class;
};

/// Immutable, doc_id-ordered document collection.
class Corpus {
 public:
  /// Sorts by doc_id. Throws DataError on an empty list or a duplicate id.
  explicit Corpus(std::vector<DocumentRecord> documents);

  std::span<const DocumentRecord> documents() const noexcept { return docs_; }
  std::size_t size() const noexcept { return docs_.size(); }
  const DocumentRecord* find(std::string_view doc_id) const;

 private:
  std::vector<DocumentRecord> docs_;
};

struct Query {
  std::string query_id;
  ExprTree tree;
};

/// Parses every `.xml` / `.mathml` file below `directory`. All-or-nothing:
/// any unreadable or unparsable file fails the whole load with a DataError
/// that lists each failing file and its cause.
Corpus load_corpus(const std::filesystem::path& directory,
                   const ClassifierConfig& classifier = ClassifierConfig::standard());

/// Same discovery and error rules as load_corpus; ids sorted.
std::vector<Query> load_queries(const std::filesystem::path& directory);

/// Single query file; its id is the file stem.
Query load_query(const std::filesystem::path& file);

struct Hit {
  std::string doc_id;
  double score;

  friend bool operator==(const Hit&, const Hit&) = default;
};

struct HitList {
  std::string query_id;
  std::size_t n = 0;
  std::vector<Hit> hits;  // score descending, ties by ascending doc_id

  friend bool operator==(const HitList&, const HitList&) = default;
};

/// Exhaustive scorer over a corpus. The corpus must outlive the engine.
class SearchEngine {
 public:
  explicit SearchEngine(const Corpus& corpus, SymbolSet commutative = default_commutative_symbols(),
                        unsigned jobs = 1);

  const Corpus& corpus() const noexcept { return corpus_; }
  const SymbolSet& commutative() const noexcept { return commutative_; }
  PreparedTree prepare(const ExprTree& query) const { return PreparedTree(query, commutative_); }

  /// Unweighted sim against every document, in corpus order.
  std::vector<double> similarities(const PreparedTree& query, const MetricParams& params) const;

  /// Applies class weights to `sims` (corpus order), sorts and truncates to n.
  HitList rank(std::string query_id, std::span<const double> sims, const MetricParams& params,
               std::size_t n) const;

  HitList search(const Query& query, const MetricParams& params, std::size_t n) const;

  /// One list per query, in input order. Throws ConfigError when a query has
  /// no entry in `n_per_query`.
  std::vector<HitList> batch_search(std::span<const Query> queries, const MetricParams& params,
                                    const std::map<std::string, std::size_t, std::less<>>& n_per_query) const;

 private:
  const Corpus& corpus_;
  SymbolSet commutative_;
  unsigned jobs_;
  std::vector<PreparedTree> prepared_;
};

HitList search(const Query& query, const Corpus& corpus, const MetricParams& params, std::size_t n);

std::vector<HitList> batch_search(std::span<const Query> queries, const Corpus& corpus,
                                  const MetricParams& params,
                                  const std::map<std::string, std::size_t, std::less<>>& n_per_query);

}  // namespace mss
