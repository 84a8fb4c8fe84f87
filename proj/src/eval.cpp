// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 MSS Contributors

#include "mss/eval.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <random>
#include <unordered_map>
#include <unordered_set>

#include "mss/error.hpp"

namespace mss {

void GroundTruth::validate() const {
  if (ranked_ids.empty()) throw DataError("ground truth for '" + query_id + "' is empty");
  std::unordered_set<std::string_view> seen;
  for (const auto& id : ranked_ids)
    if (!seen.insert(id).second) throw DataError("ground truth for '" + query_id + "' repeats '" + id + "'");
}

namespace {

std::size_t overlap(std::span<const Hit> hits, std::span<const std::string> ids) {
  std::unordered_set<std::string_view> wanted(ids.begin(), ids.end());
  std::size_t found = 0;
  for (const auto& h : hits) found += wanted.erase(h.doc_id);
  return found;
}

void require_pairs(const GroundTruth& truth) {
  if (truth.ranked_ids.size() < 2)
    throw DataError("rank correlation undefined for '" + truth.query_id + "': fewer than 2 ground-truth items");
}

}  // namespace

double overall_recall(const HitList& hits, const GroundTruth& truth) {
  truth.validate();
  return static_cast<double>(overlap(hits.hits, truth.ranked_ids)) / static_cast<double>(truth.ranked_ids.size());
}

double top10_recall(const HitList& hits, const GroundTruth& truth) {
  truth.validate();
  const std::size_t m = std::min<std::size_t>(10, truth.ranked_ids.size());
  const std::size_t h = std::min<std::size_t>(10, hits.hits.size());
  const auto top_hits = std::span<const Hit>(hits.hits).first(h);
  const auto top_truth = std::span<const std::string>(truth.ranked_ids).first(m);
  return static_cast<double>(overlap(top_hits, top_truth)) / static_cast<double>(m);
}

std::vector<double> assigned_ranks(const HitList& hits, const GroundTruth& truth) {
  std::unordered_map<std::string_view, std::size_t> position;
  for (std::size_t i = 0; i < hits.hits.size(); ++i) position.emplace(hits.hits[i].doc_id, i + 1);

  std::vector<double> ranks(truth.ranked_ids.size(), 0.0);
  std::size_t misses = 0;
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    auto it = position.find(truth.ranked_ids[i]);
    if (it != position.end()) {
      ranks[i] = static_cast<double>(it->second);
    } else {
      ranks[i] = -1.0;
      ++misses;
    }
  }
  // Average of |hits|+1 .. |hits|+misses.
  const double shared = static_cast<double>(hits.hits.size()) + (static_cast<double>(misses) + 1.0) / 2.0;
  for (auto& r : ranks)
    if (r < 0) r = shared;
  return ranks;
}

double spearman_rho(const HitList& hits, const GroundTruth& truth) {
  truth.validate();
  require_pairs(truth);
  const auto ranks = assigned_ranks(hits, truth);
  const double n = static_cast<double>(ranks.size());
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    const double d = static_cast<double>(i + 1) - ranks[i];
    sum_sq += d * d;
  }
  return std::clamp(1.0 - 6.0 * sum_sq / (n * (n * n - 1.0)), -1.0, 1.0);
}

double kendall_tau(const HitList& hits, const GroundTruth& truth) {
  truth.validate();
  require_pairs(truth);
  const auto ranks = assigned_ranks(hits, truth);
  long concordant = 0;
  long discordant = 0;
  for (std::size_t i = 0; i < ranks.size(); ++i)
    for (std::size_t j = i + 1; j < ranks.size(); ++j) {
      // Truth order has i before j.
      if (ranks[i] < ranks[j]) ++concordant;
      else if (ranks[i] > ranks[j]) ++discordant;
    }
  const double n = static_cast<double>(ranks.size());
  return static_cast<double>(concordant - discordant) / (n * (n - 1.0) / 2.0);
}

// ---------------------------------------------------------------------------
// Critical values

namespace {

double alpha_of(Confidence level) { return level == Confidence::P95 ? 0.05 : 0.01; }

void check_n(int n) {
  if (n < kMinCriticalN || n > kMaxCriticalN)
    throw ConfigError("critical values are tabulated for 4 <= n <= 60, got n = " + std::to_string(n));
}

// Both statistics are decreasing functions of an integer "disorder" key:
// sum of squared rank differences for rho, inversion count for tau.
double statistic_from_key(Statistic stat, int n, std::uint64_t key) {
  const double nd = n;
  const double k = static_cast<double>(key);
  if (stat == Statistic::Rho) return 1.0 - 6.0 * k / (nd * (nd * nd - 1.0));
  return 1.0 - 4.0 * k / (nd * (nd - 1.0));
}

std::uint64_t max_key(Statistic stat, int n) {
  const auto u = static_cast<std::uint64_t>(n);
  return stat == Statistic::Rho ? u * (u * u - 1) / 3 : u * (u - 1) / 2;
}

std::vector<std::uint64_t> key_histogram(Statistic stat, int n, std::uint64_t seed, std::size_t samples) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(stat)};
  std::mt19937_64 rng(seq);
  std::vector<std::uint64_t> histogram(max_key(stat, n) + 1, 0);
  std::vector<int> perm(static_cast<std::size_t>(n));
  for (std::size_t s = 0; s < samples; ++s) {
    for (int i = 0; i < n; ++i) perm[i] = i;
    for (int i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng() % static_cast<std::uint64_t>(i + 1)]);
    std::uint64_t key = 0;
    if (stat == Statistic::Rho) {
      for (int i = 0; i < n; ++i) {
        const auto d = static_cast<std::int64_t>(i - perm[i]);
        key += static_cast<std::uint64_t>(d * d);
      }
    } else {
      std::uint64_t seen = 0;  // n <= 60 fits one word
      for (int i = 0; i < n; ++i) {
        const auto v = static_cast<unsigned>(perm[i]);
        key += static_cast<std::uint64_t>(std::popcount(seen >> (v + 1)));
        seen |= std::uint64_t{1} << v;
      }
    }
    ++histogram[key];
  }
  return histogram;
}

double threshold(const std::vector<std::uint64_t>& histogram, Statistic stat, int n, std::size_t samples,
                 double alpha) {
  const double budget = alpha * static_cast<double>(samples);
  std::uint64_t tail = 0;
  double critical = std::numeric_limits<double>::infinity();
  for (std::uint64_t key = 0; key < histogram.size(); ++key) {
    if (histogram[key] == 0) continue;
    tail += histogram[key];
    if (static_cast<double>(tail) > budget) break;
    critical = statistic_from_key(stat, n, key);
  }
  return critical;
}

CriticalValueTable::Entry compute_entry(Statistic stat, int n, std::uint64_t seed, std::size_t samples) {
  const auto histogram = key_histogram(stat, n, seed, samples);
  return {threshold(histogram, stat, n, samples, 0.05), threshold(histogram, stat, n, samples, 0.01)};
}

}  // namespace

double critical_value(Statistic stat, int n, Confidence level, std::uint64_t seed, std::size_t samples) {
  check_n(n);
  if (samples == 0) throw ConfigError("critical_value: need at least one Monte Carlo sample");
  const auto histogram = key_histogram(stat, n, seed, samples);
  return threshold(histogram, stat, n, samples, alpha_of(level));
}

double CriticalValueTable::lookup(Statistic stat, int n, Confidence level) const {
  check_n(n);
  const auto key = std::make_pair(stat, n);
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(key); it != cache_.end())
      return level == Confidence::P95 ? it->second.p95 : it->second.p99;
  }
  const Entry e = compute_entry(stat, n, seed_, samples_);
  std::lock_guard lock(mutex_);
  const Entry& stored = cache_.emplace(key, e).first->second;
  return level == Confidence::P95 ? stored.p95 : stored.p99;
}

void CriticalValueTable::fill_all() {
  for (Statistic stat : {Statistic::Rho, Statistic::Tau})
    for (int n = kMinCriticalN; n <= kMaxCriticalN; ++n) lookup(stat, n, Confidence::P95);
}

void CriticalValueTable::set(Statistic stat, int n, Entry entry) {
  check_n(n);
  std::lock_guard lock(mutex_);
  cache_[{stat, n}] = entry;
}

std::map<std::pair<Statistic, int>, CriticalValueTable::Entry> CriticalValueTable::entries() const {
  std::lock_guard lock(mutex_);
  return cache_;
}

// ---------------------------------------------------------------------------

EvalReport evaluate(std::span<const HitList> hitlists, std::span<const GroundTruth> truths,
                    const CriticalValueTable* critical_values) {
  std::unordered_map<std::string_view, const GroundTruth*> by_id;
  for (const auto& t : truths) by_id.emplace(t.query_id, &t);

  EvalReport report;
  std::string unmatched;
  for (const auto& h : hitlists) {
    auto it = by_id.find(h.query_id);
    if (it == by_id.end()) {
      unmatched += unmatched.empty() ? "" : ", ";
      unmatched += h.query_id;
      continue;
    }
    const GroundTruth& truth = *it->second;
    QueryMetrics row;
    row.query_id = h.query_id;
    row.overall_recall = overall_recall(h, truth);
    row.top10_recall = top10_recall(h, truth);
    row.rho = spearman_rho(h, truth);
    row.tau = kendall_tau(h, truth);
    const int n = static_cast<int>(truth.ranked_ids.size());
    if (critical_values != nullptr && n >= kMinCriticalN && n <= kMaxCriticalN) {
      row.rho_sig_95 = std::abs(row.rho) >= critical_values->lookup(Statistic::Rho, n, Confidence::P95);
      row.rho_sig_99 = std::abs(row.rho) >= critical_values->lookup(Statistic::Rho, n, Confidence::P99);
      row.tau_sig_95 = std::abs(row.tau) >= critical_values->lookup(Statistic::Tau, n, Confidence::P95);
      row.tau_sig_99 = std::abs(row.tau) >= critical_values->lookup(Statistic::Tau, n, Confidence::P99);
    }
    report.rows.push_back(std::move(row));
  }
  if (!unmatched.empty()) throw DataError("no ground truth for query id(s): " + unmatched);

  std::sort(report.rows.begin(), report.rows.end(),
            [](const QueryMetrics& a, const QueryMetrics& b) { return a.query_id < b.query_id; });
  if (report.rows.empty()) return report;

  auto& avg = report.averages;
  for (const auto& r : report.rows) {
    avg.overall_recall += r.overall_recall;
    avg.top10_recall += r.top10_recall;
    avg.rho += r.rho;
    avg.tau += r.tau;
    avg.rho_sig_95 += r.rho_sig_95;
    avg.rho_sig_99 += r.rho_sig_99;
    avg.tau_sig_95 += r.tau_sig_95;
    avg.tau_sig_99 += r.tau_sig_99;
  }
  const double count = static_cast<double>(report.rows.size());
  for (double* v : {&avg.overall_recall, &avg.top10_recall, &avg.rho, &avg.tau, &avg.rho_sig_95, &avg.rho_sig_99,
                    &avg.tau_sig_95, &avg.tau_sig_99})
    *v /= count;
  return report;
}

}  // namespace mss
