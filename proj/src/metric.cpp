// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 MSS Contributors

#include "mss/metric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mss/error.hpp"

namespace mss {

std::string_view to_string(DecayKind kind) {
  switch (kind) {
    case DecayKind::Exponential: return "exponential";
    case DecayKind::Linear: return "linear";
    case DecayKind::Quadratic: return "quadratic";
    case DecayKind::Logarithmic: return "logarithmic";
  }
  return "?";
}

DecayKind parse_decay_kind(std::string_view name) {
  for (DecayKind k : kDecayKinds)
    if (to_string(k) == name) return k;
  throw ConfigError("unknown decay model '" + std::string(name) + "'");
}

double decay(const DecayModel& model, int k, double epsilon) {
  if (k < 0) throw std::invalid_argument("decay: negative depth");
  if (k == 0) return 1.0;
  const double kd = static_cast<double>(k);
  switch (model.kind) {
    case DecayKind::Exponential: return std::pow(model.rate, kd);
    case DecayKind::Linear: return std::max(1.0 - model.rate * kd, epsilon);
    case DecayKind::Quadratic: return std::max(1.0 - model.rate * kd * kd, epsilon);
    case DecayKind::Logarithmic: return std::max(1.0 - model.rate * std::log(kd + 1.0), epsilon);
  }
  return 1.0;
}

// ---------------------------------------------------------------------------
// MetricParams

namespace {

constexpr std::array<std::string_view, 11> kNumericNames{
    "delta", "zeta", "mu", "theta", "omega", "dp_rate", "cp_rate", "epsilon", "w_eq", "w_ineq", "w_expr"};

void require(bool ok, std::string_view name, double value, std::string_view range) {
  if (!ok || !std::isfinite(value))
    throw ConfigError(std::string(name) + " = " + std::to_string(value) + " outside " + std::string(range));
}

double* field(MetricParams::Values& v, std::string_view name) {
  if (name == "delta") return &v.delta;
  if (name == "zeta") return &v.zeta;
  if (name == "mu") return &v.mu;
  if (name == "theta") return &v.theta;
  if (name == "omega") return &v.omega;
  if (name == "dp_rate") return &v.dp_rate;
  if (name == "cp_rate") return &v.cp_rate;
  if (name == "epsilon") return &v.epsilon;
  if (name == "w_eq") return &v.w_eq;
  if (name == "w_ineq") return &v.w_ineq;
  if (name == "w_expr") return &v.w_expr;
  throw ConfigError("unknown metric parameter '" + std::string(name) + "'");
}

}  // namespace

MetricParams::MetricParams(const Values& v) : v_(v) {
  require(v.delta >= 0 && v.delta < 1, "delta", v.delta, "[0,1)");
  require(v.zeta >= 0 && v.zeta <= 1, "zeta", v.zeta, "[0,1]");
  require(v.mu > 0 && v.mu < 1, "mu", v.mu, "(0,1)");
  require(v.theta >= 0 && v.theta < 1, "theta", v.theta, "[0,1)");
  require(v.omega > 1, "omega", v.omega, "(1,inf)");
  if (v.decay_model == DecayKind::Exponential) {
    require(v.dp_rate > 0 && v.dp_rate <= 1, "dp_rate", v.dp_rate, "(0,1] for the exponential model");
    require(v.cp_rate > 0 && v.cp_rate <= 1, "cp_rate", v.cp_rate, "(0,1] for the exponential model");
  } else {
    require(v.dp_rate >= 0, "dp_rate", v.dp_rate, "[0,inf)");
    require(v.cp_rate >= 0, "cp_rate", v.cp_rate, "[0,inf)");
  }
  require(v.epsilon > 0 && v.epsilon < 1, "epsilon", v.epsilon, "(0,1)");
  require(v.w_expr > 0, "w_expr", v.w_expr, "(0,inf)");
  require(v.w_ineq >= v.w_expr, "w_ineq", v.w_ineq, "[w_expr,inf)");
  require(v.w_eq >= v.w_ineq, "w_eq", v.w_eq, "[w_ineq,inf)");
}

double MetricParams::class_weight(FormulaClass c) const noexcept {
  switch (c) {
    case FormulaClass::Equation: return v_.w_eq;
    case FormulaClass::Inequality: return v_.w_ineq;
    case FormulaClass::NonFormula: return v_.w_expr;
  }
  return v_.w_expr;
}

std::span<const std::string_view> MetricParams::numeric_names() { return kNumericNames; }

double MetricParams::get(std::string_view name) const {
  Values copy = v_;
  return *field(copy, name);
}

MetricParams MetricParams::with(std::string_view name, double value) const {
  Values copy = v_;
  *field(copy, name) = value;
  return MetricParams(copy);
}

MetricParams MetricParams::with_decay(DecayKind kind) const {
  Values copy = v_;
  copy.decay_model = kind;
  return MetricParams(copy);
}

bool operator==(const MetricParams& a, const MetricParams& b) {
  const auto& x = a.v_;
  const auto& y = b.v_;
  return x.delta == y.delta && x.zeta == y.zeta && x.mu == y.mu && x.theta == y.theta &&
         x.omega == y.omega && x.decay_model == y.decay_model && x.dp_rate == y.dp_rate &&
         x.cp_rate == y.cp_rate && x.epsilon == y.epsilon && x.w_eq == y.w_eq && x.w_ineq == y.w_ineq &&
         x.w_expr == y.w_expr;
}

const SymbolSet& default_commutative_symbols() {
  static const SymbolSet set{{"arith1", "plus"}, {"arith1", "times"}, {"logic1", "and"},
                             {"logic1", "or"},   {"relation1", "eq"}, {"relation1", "neq"},
                             {"arith1", "gcd"},  {"arith1", "lcm"},   {"set1", "union"},
                             {"set1", "intersect"}};
  return set;
}

// ---------------------------------------------------------------------------
// Assignment

double ordered_assignment(const ScoreMatrix& s) {
  const std::size_t n = std::min(s.rows(), s.cols());
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += s(i, i);
  return total;
}

double greedy_assignment(const ScoreMatrix& s) {
  const std::size_t n = std::min(s.rows(), s.cols());
  std::vector<bool> used(s.cols(), false);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t pick = s.cols();
    double best = -1.0;
    for (std::size_t j = 0; j < s.cols(); ++j) {
      if (!used[j] && s(i, j) > best) {
        best = s(i, j);
        pick = j;
      }
    }
    used[pick] = true;
    total += best;
  }
  return total;
}

namespace {

// Rows of `short_side` are mapped to distinct rows of the other side.
double best_injection(std::size_t depth, std::size_t short_n, std::size_t long_n, std::vector<bool>& used,
                      const auto& score) {
  if (depth == short_n) return 0.0;
  double best = 0.0;
  for (std::size_t j = 0; j < long_n; ++j) {
    if (used[j]) continue;
    used[j] = true;
    best = std::max(best, score(depth, j) + best_injection(depth + 1, short_n, long_n, used, score));
    used[j] = false;
  }
  return best;
}

}  // namespace

double exact_assignment(const ScoreMatrix& s, std::size_t bound) {
  const std::size_t n = std::min(s.rows(), s.cols());
  if (n > bound)
    throw std::invalid_argument("exact_assignment: " + std::to_string(n) + " pairs exceed the oracle bound " +
                                std::to_string(bound));
  if (s.rows() <= s.cols()) {
    std::vector<bool> used(s.cols(), false);
    return best_injection(0, s.rows(), s.cols(), used, [&](std::size_t i, std::size_t j) { return s(i, j); });
  }
  std::vector<bool> used(s.rows(), false);
  return best_injection(0, s.cols(), s.rows(), used, [&](std::size_t j, std::size_t i) { return s(i, j); });
}

// ---------------------------------------------------------------------------
// PreparedTree

PreparedTree::PreparedTree(ExprTree tree, const SymbolSet& commutative) : tree_(std::move(tree)) {
  nodes_.reserve(tree_.node_count());
  children_.reserve(tree_.node_count());
  flatten(tree_, commutative);
}

std::uint32_t PreparedTree::flatten(const ExprTree& t, const SymbolSet& commutative) {
  const auto index = static_cast<std::uint32_t>(nodes_.size());
  Node node{t.kind(), nullptr, nullptr, false, t.height(), 0, 0};
  switch (t.kind()) {
    case NodeKind::Constant: node.text = &t.as_constant().value; break;
    case NodeKind::Variable: node.text = &t.as_variable().name; break;
    case NodeKind::Symbol:
      node.text = &t.as_symbol().name;
      node.cd = &t.as_symbol().cd;
      node.commutative = commutative.contains(t.as_symbol());
      break;
    case NodeKind::Apply: break;
  }
  nodes_.push_back(node);
  if (t.kind() != NodeKind::Apply) return index;

  // Reserve a contiguous child block before recursing so grandchildren land after it.
  const auto args = t.args();
  const auto begin = static_cast<std::uint32_t>(children_.size());
  const auto count = static_cast<std::uint32_t>(args.size() + 1);
  children_.resize(children_.size() + count);
  nodes_[index].child_begin = begin;
  nodes_[index].child_count = count;
  children_[begin] = flatten(t.head(), commutative);
  for (std::uint32_t i = 0; i < args.size(); ++i) children_[begin + 1 + i] = flatten(args[i], commutative);
  return index;
}

// ---------------------------------------------------------------------------
// Leaf similarity

namespace {

struct LeafView {
  NodeKind kind;
  const std::string* text;
  const std::string* cd;
};

double leaf_score(const LeafView& a, const LeafView& b, const MetricParams& p) {
  const bool a_sym = a.kind == NodeKind::Symbol;
  const bool b_sym = b.kind == NodeKind::Symbol;
  if (a_sym || b_sym) {
    if (!(a_sym && b_sym)) return 0.0;
    if (*a.cd != *b.cd) return 0.0;
    return *a.text == *b.text ? 1.0 : p.mu();
  }
  if (a.kind != b.kind) return p.theta();
  if (*a.text == *b.text) return 1.0;
  return a.kind == NodeKind::Constant ? p.delta() : p.zeta();
}

LeafView view_of(const ExprTree& t) {
  switch (t.kind()) {
    case NodeKind::Constant: return {t.kind(), &t.as_constant().value, nullptr};
    case NodeKind::Variable: return {t.kind(), &t.as_variable().name, nullptr};
    case NodeKind::Symbol: return {t.kind(), &t.as_symbol().name, &t.as_symbol().cd};
    case NodeKind::Apply: break;
  }
  throw std::invalid_argument("leaf_sim: expected a leaf, got an application");
}

}  // namespace

double leaf_sim(const ExprTree& a, const ExprTree& b, const MetricParams& params) {
  return leaf_score(view_of(a), view_of(b), params);
}

// ---------------------------------------------------------------------------
// Similarity kernel
//
// For every pair (q, d) of query/document nodes, processed children-first,
// keeps a depth profile P[i][j]: the best like-shaped root-aligned score
// between a subtree i levels below q and a subtree j levels below d. Then
// sim(q, d) = max over i, j of cp_decay(i) * dp_decay(j) * P[i][j].
// Decay is therefore applied once per absolute depth, never compounded.

class SimilarityKernel {
 public:
  using Node = PreparedTree::Node;

  SimilarityKernel(const PreparedTree& q, const PreparedTree& d, const MetricParams& p)
      : qt_(q), dt_(d), p_(p), nq_(q.nodes_.size()), nd_(d.nodes_.size()) {}

  double run() {
    const int hq = qt_.nodes_[0].height;
    const int hd = dt_.nodes_[0].height;
    cp_.resize(static_cast<std::size_t>(hq) + 1);
    dp_.resize(static_cast<std::size_t>(hd) + 1);
    for (int k = 0; k <= hq; ++k) cp_[k] = decay(p_.cp_model(), k, p_.epsilon());
    for (int k = 0; k <= hd; ++k) dp_[k] = decay(p_.dp_model(), k, p_.epsilon());

    sims_.assign(nq_ * nd_, 0.0);
    offsets_.resize(nq_ * nd_);
    std::size_t total = 0;
    for (std::size_t a = 0; a < nq_; ++a)
      for (std::size_t b = 0; b < nd_; ++b) {
        offsets_[a * nd_ + b] = total;
        total += static_cast<std::size_t>(qt_.nodes_[a].height + 1) * (dt_.nodes_[b].height + 1);
      }
    profile_.assign(total, kNone);

    for (std::size_t a = nq_; a-- > 0;)
      for (std::size_t b = nd_; b-- > 0;) fill(a, b);
    return sims_[0];
  }

 private:
  static constexpr double kNone = -1.0;

  const Node& qn(std::uint32_t i) const { return qt_.nodes_[i]; }
  const Node& dn(std::uint32_t i) const { return dt_.nodes_[i]; }
  std::uint32_t qchild(const Node& n, std::uint32_t k) const { return qt_.children_[n.child_begin + k]; }
  std::uint32_t dchild(const Node& n, std::uint32_t k) const { return dt_.children_[n.child_begin + k]; }

  double* profile(std::size_t a, std::size_t b) { return profile_.data() + offsets_[a * nd_ + b]; }

  double root_aligned(std::uint32_t a, std::uint32_t b) {
    const Node& x = qn(a);
    const Node& y = dn(b);
    const bool x_leaf = x.kind != NodeKind::Apply;
    const bool y_leaf = y.kind != NodeKind::Apply;
    if (x_leaf && y_leaf) return leaf_score({x.kind, x.text, x.cd}, {y.kind, y.text, y.cd}, p_);
    if (x_leaf != y_leaf) return kNone;

    const std::uint32_t xh = qchild(x, 0);
    const std::uint32_t yh = dchild(y, 0);
    const Node& fx = qn(xh);
    const Node& fy = dn(yh);
    const double head = (fx.kind != NodeKind::Apply && fy.kind != NodeKind::Apply)
                            ? leaf_score({fx.kind, fx.text, fx.cd}, {fy.kind, fy.text, fy.cd}, p_)
                            : sims_[xh * nd_ + yh];

    const std::size_t p = x.child_count - 1;
    const std::size_t q = y.child_count - 1;
    ScoreMatrix scores(p, q);
    for (std::uint32_t i = 0; i < p; ++i)
      for (std::uint32_t j = 0; j < q; ++j) scores(i, j) = sims_[qchild(x, i + 1) * nd_ + dchild(y, j + 1)];
    const bool unordered = fx.kind == NodeKind::Symbol && fy.kind == NodeKind::Symbol &&
                           (fx.commutative || fy.commutative);
    const double args = unordered ? greedy_assignment(scores) : ordered_assignment(scores);

    const double omega = p_.omega();
    const double denom = static_cast<double>(p) + omega;
    return (omega / denom) * head + args / denom;
  }

  void fill(std::uint32_t a, std::uint32_t b) {
    const Node& x = qn(a);
    const Node& y = dn(b);
    const std::size_t cols = static_cast<std::size_t>(y.height) + 1;
    double* out = profile(a, b);
    out[0] = root_aligned(a, b);

    // Query side one level deeper: inherit from (child of q, d).
    for (std::uint32_t k = 0; k < x.child_count; ++k) {
      const std::uint32_t c = qchild(x, k);
      const double* in = profile(c, b);
      const std::size_t rows_c = static_cast<std::size_t>(qn(c).height) + 1;
      for (std::size_t i = 0; i < rows_c; ++i)
        for (std::size_t j = 0; j < cols; ++j) out[(i + 1) * cols + j] = std::max(out[(i + 1) * cols + j], in[i * cols + j]);
    }
    // Document side one level deeper along row 0.
    for (std::uint32_t k = 0; k < y.child_count; ++k) {
      const std::uint32_t c = dchild(y, k);
      const double* in = profile(a, c);
      const std::size_t cols_c = static_cast<std::size_t>(dn(c).height) + 1;
      for (std::size_t j = 0; j < cols_c; ++j) out[j + 1] = std::max(out[j + 1], in[j]);
    }

    double best = 0.0;
    const std::size_t rows = static_cast<std::size_t>(x.height) + 1;
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j)
        if (out[i * cols + j] > kNone) best = std::max(best, cp_[i] * dp_[j] * out[i * cols + j]);
    sims_[a * nd_ + b] = std::clamp(best, 0.0, 1.0);
  }

  const PreparedTree& qt_;
  const PreparedTree& dt_;
  const MetricParams& p_;
  std::size_t nq_, nd_;
  std::vector<double> cp_, dp_;
  std::vector<double> sims_;
  std::vector<std::size_t> offsets_;
  std::vector<double> profile_;
};

double sim(const PreparedTree& query, const PreparedTree& doc, const MetricParams& params) {
  return SimilarityKernel(query, doc, params).run();
}

double sim(const ExprTree& query, const ExprTree& doc, const MetricParams& params, const SymbolSet& commutative) {
  return sim(PreparedTree(query, commutative), PreparedTree(doc, commutative), params);
}

double score_document(const PreparedTree& query, const PreparedTree& doc, FormulaClass doc_class,
                      const MetricParams& params) {
  return sim(query, doc, params) * params.class_weight(doc_class);
}

double score_document(const ExprTree& query, const ExprTree& doc, FormulaClass doc_class,
                      const MetricParams& params, const SymbolSet& commutative) {
  return sim(query, doc, params, commutative) * params.class_weight(doc_class);
}

// ---------------------------------------------------------------------------
// Argument lists over full trees

namespace {

ScoreMatrix pairwise(std::span<const ExprTree> xs, std::span<const ExprTree> ys, const MetricParams& params,
                     const SymbolSet& commutative) {
  std::vector<PreparedTree> px, py;
  px.reserve(xs.size());
  py.reserve(ys.size());
  for (const auto& x : xs) px.emplace_back(x, commutative);
  for (const auto& y : ys) py.emplace_back(y, commutative);
  ScoreMatrix m(xs.size(), ys.size());
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t j = 0; j < ys.size(); ++j) m(i, j) = sim(px[i], py[j], params);
  return m;
}

}  // namespace

double arg_list_sim_ordered(std::span<const ExprTree> query_args, std::span<const ExprTree> doc_args,
                            const MetricParams& params, const SymbolSet& commutative) {
  const std::size_t n = std::min(query_args.size(), doc_args.size());
  return ordered_assignment(pairwise(query_args.first(n), doc_args.first(n), params, commutative));
}

double arg_list_sim_greedy(std::span<const ExprTree> query_args, std::span<const ExprTree> doc_args,
                           const MetricParams& params, const SymbolSet& commutative) {
  return greedy_assignment(pairwise(query_args, doc_args, params, commutative));
}

double arg_list_sim_exact(std::span<const ExprTree> query_args, std::span<const ExprTree> doc_args,
                          const MetricParams& params, const SymbolSet& commutative, std::size_t bound) {
  if (std::min(query_args.size(), doc_args.size()) > bound)
    throw std::invalid_argument("arg_list_sim_exact: lists exceed the oracle bound");
  return exact_assignment(pairwise(query_args, doc_args, params, commutative), bound);
}

}  // namespace mss
