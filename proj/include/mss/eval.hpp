// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 MSS Contributors

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <mutex>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mss/search.hpp"

namespace mss {

/// Expert-ranked relevant documents for one query, most relevant first.
struct GroundTruth {
  std::string query_id;
  std::vector<std::string> ranked_ids;

  /// Throws DataError when empty or when an id repeats.
  void validate() const;
};

double overall_recall(const HitList& hits, const GroundTruth& truth);

/// Share of the truth's top m = min(10, |truth|) found among the first 10 hits.
double top10_recall(const HitList& hits, const GroundTruth& truth);

/// Rank assigned to each truth item (in truth order): its 1-based position in
/// the full hit list, irrelevant hits included. Items missing from the hit
/// list share the average of the positions |hits|+1 .. |hits|+m, m = misses.
std::vector<double> assigned_ranks(const HitList& hits, const GroundTruth& truth);

/// 1 - 6 sum(d^2) / (n(n^2-1)) over the truth items, clamped to [-1, 1]
/// (positions beyond n can push the raw formula below -1).
/// Throws DataError when |truth| < 2.
double spearman_rho(const HitList& hits, const GroundTruth& truth);

/// (concordant - discordant) / (n(n-1)/2); pairs tied in assigned rank count
/// as neither. Throws DataError when |truth| < 2.
double kendall_tau(const HitList& hits, const GroundTruth& truth);

// ---------------------------------------------------------------------------
// Significance

enum class Statistic { Rho, Tau };
enum class Confidence { P95, P99 };

inline constexpr int kMinCriticalN = 4;
inline constexpr int kMaxCriticalN = 60;
inline constexpr std::uint64_t kDefaultMonteCarloSeed = 0x5eed2011;
inline constexpr std::size_t kDefaultMonteCarloSamples = 100000;

/// One-sided critical value: the smallest attainable statistic c with
/// P(null statistic >= c) <= alpha, estimated from `samples` uniformly random
/// permutations. When no attainable value qualifies (tiny n at 99%) the
/// result is +infinity, so nothing is significant at that level.
/// Throws ConfigError for n outside [4, 60].
double critical_value(Statistic stat, int n, Confidence level, std::uint64_t seed = kDefaultMonteCarloSeed,
                      std::size_t samples = kDefaultMonteCarloSamples);

/// Lazily filled cache of critical values; safe to share between threads.
class CriticalValueTable {
 public:
  struct Entry {
    double p95;
    double p99;
  };

  explicit CriticalValueTable(std::uint64_t seed = kDefaultMonteCarloSeed,
                              std::size_t samples = kDefaultMonteCarloSamples)
      : seed_(seed), samples_(samples) {}

  double lookup(Statistic stat, int n, Confidence level) const;
  /// Computes every (statistic, n) entry not yet cached.
  void fill_all();
  void set(Statistic stat, int n, Entry entry);
  std::map<std::pair<Statistic, int>, Entry> entries() const;

  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t samples() const noexcept { return samples_; }

 private:
  std::uint64_t seed_;
  std::size_t samples_;
  mutable std::mutex mutex_;
  mutable std::map<std::pair<Statistic, int>, Entry> cache_;
};

// ---------------------------------------------------------------------------
// Reports

struct QueryMetrics {
  std::string query_id;
  double overall_recall = 0;
  double top10_recall = 0;
  double rho = 0;
  double tau = 0;
  bool rho_sig_95 = false;
  bool rho_sig_99 = false;
  bool tau_sig_95 = false;
  bool tau_sig_99 = false;
};

/// Column means; significance columns become the fraction of significant queries.
struct MetricAverages {
  double overall_recall = 0;
  double top10_recall = 0;
  double rho = 0;
  double tau = 0;
  double rho_sig_95 = 0;
  double rho_sig_99 = 0;
  double tau_sig_95 = 0;
  double tau_sig_99 = 0;
};

struct EvalReport {
  std::vector<QueryMetrics> rows;  // sorted by query_id
  MetricAverages averages;
};

/// Scores each hit list against the truth with the same query_id. Throws
/// DataError naming any hit list without a truth. Significance flags compare
/// |rho| and |tau| with the table's critical values at that query's truth
/// size; they stay false without a table or when n is outside [4, 60].
EvalReport evaluate(std::span<const HitList> hitlists, std::span<const GroundTruth> truths,
                    const CriticalValueTable* critical_values = nullptr);

}  // namespace mss
