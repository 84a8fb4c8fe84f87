// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 MSS Contributors

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mss/mathml.hpp"

namespace mss {

// ---------------------------------------------------------------------------
// Match-depth decay

enum class DecayKind { Exponential, Linear, Quadratic, Logarithmic };

/// Fixed model order; also the tie-break order when picking a best model.
inline constexpr std::array<DecayKind, 4> kDecayKinds{DecayKind::Exponential, DecayKind::Linear,
                                                      DecayKind::Quadratic, DecayKind::Logarithmic};

std::string_view to_string(DecayKind kind);
/// Accepts "exponential", "linear", "quadratic", "logarithmic".
DecayKind parse_decay_kind(std::string_view name);

struct DecayModel {
  DecayKind kind = DecayKind::Exponential;
  /// a for exponential (0 < a <= 1); b, c, d for the others (>= 0).
  double rate = 0.5;
};

/// Similarity multiplier for a match rooted k levels deep.
///
///   exponential   a^k
///   linear        max(1 - b*k, eps)
///   quadratic     max(1 - c*k^2, eps)
///   logarithmic   max(1 - d*ln(k+1), eps)
///
/// The exponential model has no floor.
double decay(const DecayModel& model, int k, double epsilon);

// ---------------------------------------------------------------------------
// Parameters

/// Every tunable of the similarity metric. Ranges are checked on construction
/// and on every `with()`; a violation throws ConfigError.
class MetricParams {
 public:
  struct Values {
    double delta = 0.5;  // unequal constants, [0,1)
    double zeta = 0.5;   // distinct variables, [0,1]
    double mu = 0.5;     // different functions in one CD, (0,1)
    double theta = 0.5;  // constant vs variable, [0,1)
    double omega = 2.0;  // function boost, > 1
    DecayKind decay_model = DecayKind::Exponential;
    double dp_rate = 0.5;  // query nested in document
    double cp_rate = 0.5;  // document nested in query
    double epsilon = 0.05;
    double w_eq = 1.0;
    double w_ineq = 1.0;
    double w_expr = 1.0;
  };

  MetricParams() : MetricParams(Values{}) {}
  explicit MetricParams(const Values& values);

  const Values& values() const noexcept { return v_; }
  double delta() const noexcept { return v_.delta; }
  double zeta() const noexcept { return v_.zeta; }
  double mu() const noexcept { return v_.mu; }
  double theta() const noexcept { return v_.theta; }
  double omega() const noexcept { return v_.omega; }
  DecayKind decay_kind() const noexcept { return v_.decay_model; }
  double epsilon() const noexcept { return v_.epsilon; }
  DecayModel dp_model() const noexcept { return {v_.decay_model, v_.dp_rate}; }
  DecayModel cp_model() const noexcept { return {v_.decay_model, v_.cp_rate}; }
  double class_weight(FormulaClass c) const noexcept;

  /// Numeric parameter names accepted by get()/with(), in declaration order.
  static std::span<const std::string_view> numeric_names();
  double get(std::string_view name) const;
  MetricParams with(std::string_view name, double value) const;
  MetricParams with_decay(DecayKind kind) const;

  friend bool operator==(const MetricParams& a, const MetricParams& b);

 private:
  Values v_;
};

/// plus, times, and, or, eq, neq, gcd, lcm, union, intersect in their
/// standard content dictionaries.
const SymbolSet& default_commutative_symbols();

// ---------------------------------------------------------------------------
// Argument-list matching over a precomputed pairwise score matrix.

inline constexpr std::size_t kExactOracleBound = 6;

/// Row-major pairwise similarities; rows are the query's arguments.
class ScoreMatrix {
 public:
  ScoreMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }

 private:
  std::size_t rows_, cols_;
  std::vector<double> data_;
};

/// Sum over the first min(p,q) positional pairs.
double ordered_assignment(const ScoreMatrix& scores);
/// Each of the first min(p,q) rows takes its best unused column; ties go to
/// the lowest column index.
double greedy_assignment(const ScoreMatrix& scores);
/// Maximum over all injective maps of the shorter side into the longer.
/// Throws std::invalid_argument when min(p,q) exceeds `bound`.
double exact_assignment(const ScoreMatrix& scores, std::size_t bound = kExactOracleBound);

// ---------------------------------------------------------------------------
// Similarity

/// Flattened, pre-classified copy of an ExprTree for repeated scoring.
/// Keeps the source tree alive; cheap to share read-only across threads.
class PreparedTree {
 public:
  explicit PreparedTree(ExprTree tree, const SymbolSet& commutative = default_commutative_symbols());

  const ExprTree& tree() const noexcept { return tree_; }
  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  friend class SimilarityKernel;

  struct Node {
    NodeKind kind;
    const std::string* text;  // value, name, or symbol name
    const std::string* cd;    // symbols only
    bool commutative;
    int height;
    std::uint32_t child_begin;  // into children_: head first, then arguments
    std::uint32_t child_count;
  };

  std::uint32_t flatten(const ExprTree& t, const SymbolSet& commutative);

  ExprTree tree_;
  std::vector<Node> nodes_;  // preorder: every child index exceeds its parent's
  std::vector<std::uint32_t> children_;
};

/// Both arguments must be leaves (throws std::invalid_argument otherwise).
double leaf_sim(const ExprTree& a, const ExprTree& b, const MetricParams& params);

double arg_list_sim_ordered(std::span<const ExprTree> query_args, std::span<const ExprTree> doc_args,
                            const MetricParams& params,
                            const SymbolSet& commutative = default_commutative_symbols());
double arg_list_sim_greedy(std::span<const ExprTree> query_args, std::span<const ExprTree> doc_args,
                           const MetricParams& params,
                           const SymbolSet& commutative = default_commutative_symbols());
double arg_list_sim_exact(std::span<const ExprTree> query_args, std::span<const ExprTree> doc_args,
                          const MetricParams& params,
                          const SymbolSet& commutative = default_commutative_symbols(),
                          std::size_t bound = kExactOracleBound);

/// Recursive similarity of a query tree to a document tree, in [0,1].
///
/// The score is the best of every (query subtree, document subtree) pairing
/// of like shape: two leaves compare with leaf_sim, two applications with
/// the root-aligned weighted sum
///
///   omega/(p+omega) * sim(heads) + 1/(p+omega) * argument match
///
/// where p is the query-side argument count. A pairing whose document side
/// sits k levels deep is scaled by the dp decay at k; whose query side sits
/// k levels deep, by the cp decay at k. Argument lists are matched in order
/// when both heads are non-commutative symbols and greedily otherwise.
double sim(const PreparedTree& query, const PreparedTree& doc, const MetricParams& params);
double sim(const ExprTree& query, const ExprTree& doc, const MetricParams& params,
           const SymbolSet& commutative = default_commutative_symbols());

/// sim scaled by the document's formula-class weight.
double score_document(const PreparedTree& query, const PreparedTree& doc, FormulaClass doc_class,
                      const MetricParams& params);
double score_document(const ExprTree& query, const ExprTree& doc, FormulaClass doc_class,
                      const MetricParams& params,
                      const SymbolSet& commutative = default_commutative_symbols());

}  // namespace mss
