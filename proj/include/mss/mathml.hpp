// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 MSS Contributors

#pragma once

#include <cstddef>
#include <filesystem>
#include <initializer_list>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace mss {

struct Constant {
  std::string value;  // normalized cn text
  std::string type;   // cn type attribute, empty when absent
};

struct Variable {
  std::string name;
};

struct Symbol {
  std::string name;
  std::string cd;
};

enum class NodeKind { Constant, Variable, Symbol, Apply };

/// Immutable parse tree of a Strict Content MathML expression.
///
/// Leaves are constants (`cn`), variables (`ci`) and function symbols
/// (`csymbol`). An application node holds a head (a symbol or, rarely, a
/// nested application) and an ordered argument list. Binding constructs are
/// stored as applications whose leading arguments are the bound variables;
/// `bound_count()` remembers how many so markup can be written back.
///
/// Copies share structure; nodes are never mutated after construction.
class ExprTree {
 public:
  static ExprTree constant(std::string value, std::string type = {});
  static ExprTree variable(std::string name);
  static ExprTree symbol(std::string name, std::string cd);
  static ExprTree apply(ExprTree head, std::vector<ExprTree> args);
  static ExprTree bind(ExprTree binder, std::vector<ExprTree> bound_vars, ExprTree body);

  NodeKind kind() const noexcept;
  bool is_leaf() const noexcept { return kind() != NodeKind::Apply; }

  const Constant& as_constant() const;
  const Variable& as_variable() const;
  const Symbol& as_symbol() const;

  // Application accessors; throw std::logic_error on leaves.
  const ExprTree& head() const;
  std::span<const ExprTree> args() const;
  std::size_t bound_count() const;

  int height() const noexcept;
  std::size_t node_count() const noexcept;

  friend bool operator==(const ExprTree& a, const ExprTree& b);

 private:
  struct Node;
  struct ApplyData;
  explicit ExprTree(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  static ExprTree make_apply(ExprTree head, std::vector<ExprTree> args, std::size_t bound);

  std::shared_ptr<const Node> node_;
};

enum class FormulaClass { Equation, Inequality, NonFormula };

std::string_view to_string(FormulaClass c);

/// Set of function symbols identified by (content dictionary, name).
class SymbolSet {
 public:
  SymbolSet() = default;
  SymbolSet(std::initializer_list<std::pair<std::string, std::string>> entries);

  void insert(std::string cd, std::string name);
  bool contains(const Symbol& s) const;
  bool contains(std::string_view cd, std::string_view name) const;
  std::size_t size() const noexcept { return entries_.size(); }

  /// Entries as "cd:name" strings in sorted order.
  std::vector<std::string> to_strings() const;
  /// Parses "cd:name" strings; throws ConfigError on a missing separator.
  static SymbolSet from_strings(std::span<const std::string> items);

 private:
  std::set<std::pair<std::string, std::string>, std::less<>> entries_;
};

struct ClassifierConfig {
  SymbolSet equality;
  SymbolSet inequality;

  /// relation1 eq / relation1 neq, lt, gt, leq, geq.
  static const ClassifierConfig& standard();
};

/// Parses one expression. Throws ParseError (malformed XML or bad structure)
/// or UnsupportedConstruct (element outside the supported vocabulary).
ExprTree parse_expression(std::string_view xml_text);

/// Reads and parses a file; errors carry the file path in their message.
ExprTree parse_file(const std::filesystem::path& path);

inline int height(const ExprTree& tree) { return tree.height(); }

FormulaClass classify(const ExprTree& tree,
                      const ClassifierConfig& config = ClassifierConfig::standard());

/// Canonical markup: no whitespace, `cn` type written only when present.
std::string to_markup(const ExprTree& tree);

/// Compact functional notation for logs and diagnostics, e.g. `plus(x, 2)`.
std::string to_string(const ExprTree& tree);

}  // namespace mss
