// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 MSS Contributors

#include "mss/search.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <system_error>

#include "mss/error.hpp"
#include "mss/parallel.hpp"

namespace mss {

namespace fs = std::filesystem;

Corpus::Corpus(std::vector<DocumentRecord> documents) : docs_(std::move(documents)) {
  if (docs_.empty()) throw DataError("empty corpus");
  std::sort(docs_.begin(), docs_.end(),
            [](const DocumentRecord& a, const DocumentRecord& b) { return a.doc_id < b.doc_id; });
  for (std::size_t i = 1; i < docs_.size(); ++i)
    if (docs_[i].doc_id == docs_[i - 1].doc_id) throw DataError("duplicate doc_id '" + docs_[i].doc_id + "'");
}

const DocumentRecord* Corpus::find(std::string_view doc_id) const {
  auto it = std::lower_bound(docs_.begin(), docs_.end(), doc_id,
                             [](const DocumentRecord& d, std::string_view id) { return d.doc_id < id; });
  return (it != docs_.end() && it->doc_id == doc_id) ? &*it : nullptr;
}

namespace {

struct LoadedExpression {
  std::string id;
  fs::path path;
  ExprTree tree;
};

bool is_expression_file(const fs::path& p) {
  const auto ext = p.extension().string();
  return ext == ".xml" || ext == ".mathml";
}

std::vector<LoadedExpression> load_directory(const fs::path& directory, std::string_view what) {
  std::error_code ec;
  if (!fs::is_directory(directory, ec))
    throw DataError(std::string(what) + " directory not found: " + directory.string());

  std::vector<fs::path> files;
  for (auto it = fs::recursive_directory_iterator(directory, ec); !ec && it != fs::recursive_directory_iterator();
       it.increment(ec)) {
    if (it->is_regular_file() && is_expression_file(it->path())) files.push_back(it->path());
  }
  if (ec) throw DataError("cannot list " + directory.string() + ": " + ec.message());
  if (files.empty()) throw DataError("empty " + std::string(what) + ": no .xml/.mathml files in " + directory.string());
  std::sort(files.begin(), files.end());

  std::vector<LoadedExpression> out;
  std::string failures;
  for (const auto& file : files) {
    auto id = fs::relative(file, directory).replace_extension().generic_string();
    try {
      out.push_back({std::move(id), file, parse_file(file)});
    } catch (const Error& e) {
      failures += "\n  ";
      failures += e.what();
    }
  }
  if (!failures.empty()) throw DataError(std::string(what) + " load failed:" + failures);
  return out;
}

}  // namespace

Corpus load_corpus(const fs::path& directory, const ClassifierConfig& classifier) {
  std::vector<DocumentRecord> docs;
  for (auto& e : load_directory(directory, "corpus")) {
    const FormulaClass c = classify(e.tree, classifier);
    docs.push_back({std::move(e.id), std::move(e.path), std::move(e.tree), c});
  }
  return Corpus(std::move(docs));
}

std::vector<Query> load_queries(const fs::path& directory) {
  std::vector<Query> queries;
  for (auto& e : load_directory(directory, "query set")) queries.push_back({std::move(e.id), std::move(e.tree)});
  std::sort(queries.begin(), queries.end(), [](const Query& a, const Query& b) { return a.query_id < b.query_id; });
  for (std::size_t i = 1; i < queries.size(); ++i)
    if (queries[i].query_id == queries[i - 1].query_id)
      throw DataError("duplicate query_id '" + queries[i].query_id + "'");
  return queries;
}

Query load_query(const fs::path& file) { return {file.stem().string(), parse_file(file)}; }

// ---------------------------------------------------------------------------

SearchEngine::SearchEngine(const Corpus& corpus, SymbolSet commutative, unsigned jobs)
    : corpus_(corpus), commutative_(std::move(commutative)), jobs_(jobs) {
  prepared_.reserve(corpus_.size());
  for (const auto& d : corpus_.documents()) prepared_.emplace_back(d.tree, commutative_);
}

std::vector<double> SearchEngine::similarities(const PreparedTree& query, const MetricParams& params) const {
  std::vector<double> sims(prepared_.size(), 0.0);
  parallel_for(prepared_.size(), jobs_, [&](std::size_t i) { sims[i] = sim(query, prepared_[i], params); });
  return sims;
}

HitList SearchEngine::rank(std::string query_id, std::span<const double> sims, const MetricParams& params,
                           std::size_t n) const {
  if (n == 0) throw ConfigError("hit list size n must be >= 1");
  if (sims.size() != corpus_.size()) throw std::invalid_argument("rank: one similarity per document expected");
  const auto docs = corpus_.documents();
  std::vector<double> scores(sims.size());
  for (std::size_t i = 0; i < sims.size(); ++i) scores[i] = sims[i] * params.class_weight(docs[i].formula_class);

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t keep = std::min(n, order.size());
  // Corpus order is doc_id order, so index order breaks score ties.
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                    [&](std::size_t a, std::size_t b) { return scores[a] != scores[b] ? scores[a] > scores[b] : a < b; });

  HitList out{std::move(query_id), n, {}};
  out.hits.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) out.hits.push_back({docs[order[i]].doc_id, scores[order[i]]});
  return out;
}

HitList SearchEngine::search(const Query& query, const MetricParams& params, std::size_t n) const {
  if (n == 0) throw ConfigError("hit list size n must be >= 1");
  return rank(query.query_id, similarities(prepare(query.tree), params), params, n);
}

std::vector<HitList> SearchEngine::batch_search(
    std::span<const Query> queries, const MetricParams& params,
    const std::map<std::string, std::size_t, std::less<>>& n_per_query) const {
  std::vector<std::size_t> sizes;
  sizes.reserve(queries.size());
  for (const auto& q : queries) {
    auto it = n_per_query.find(q.query_id);
    if (it == n_per_query.end()) throw ConfigError("no hit list size configured for query '" + q.query_id + "'");
    sizes.push_back(it->second);
  }
  std::vector<HitList> out;
  out.reserve(queries.size());
  for (std::size_t i = 0; i < queries.size(); ++i) out.push_back(search(queries[i], params, sizes[i]));
  return out;
}

HitList search(const Query& query, const Corpus& corpus, const MetricParams& params, std::size_t n) {
  return SearchEngine(corpus).search(query, params, n);
}

std::vector<HitList> batch_search(std::span<const Query> queries, const Corpus& corpus, const MetricParams& params,
                                  const std::map<std::string, std::size_t, std::less<>>& n_per_query) {
  return SearchEngine(corpus).batch_search(queries, params, n_per_query);
}

}  // namespace mss
