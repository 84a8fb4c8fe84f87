// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 MSS Contributors

#include "mss/mathml.hpp"

#include <expat.h>

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "mss/error.hpp"

namespace mss {

struct ExprTree::ApplyData {
  ExprTree head;
  std::vector<ExprTree> args;
  std::size_t bound = 0;
};

struct ExprTree::Node {
  std::variant<Constant, Variable, Symbol, ApplyData> data;
  int height = 0;
  std::size_t count = 1;
};

ExprTree ExprTree::constant(std::string value, std::string type) {
  return ExprTree(std::make_shared<const Node>(Node{Constant{std::move(value), std::move(type)}}));
}

ExprTree ExprTree::variable(std::string name) {
  return ExprTree(std::make_shared<const Node>(Node{Variable{std::move(name)}}));
}

ExprTree ExprTree::symbol(std::string name, std::string cd) {
  return ExprTree(std::make_shared<const Node>(Node{Symbol{std::move(name), std::move(cd)}}));
}

ExprTree ExprTree::make_apply(ExprTree head, std::vector<ExprTree> args, std::size_t bound) {
  int h = head.height();
  std::size_t count = 1 + head.node_count();
  for (const auto& a : args) {
    h = std::max(h, a.height());
    count += a.node_count();
  }
  Node node{ApplyData{std::move(head), std::move(args), bound}, h + 1, count};
  return ExprTree(std::make_shared<const Node>(std::move(node)));
}

ExprTree ExprTree::apply(ExprTree head, std::vector<ExprTree> args) {
  return make_apply(std::move(head), std::move(args), 0);
}

ExprTree ExprTree::bind(ExprTree binder, std::vector<ExprTree> bound_vars, ExprTree body) {
  const std::size_t bound = bound_vars.size();
  bound_vars.push_back(std::move(body));
  return make_apply(std::move(binder), std::move(bound_vars), bound);
}

NodeKind ExprTree::kind() const noexcept {
  return static_cast<NodeKind>(node_->data.index());
}

const Constant& ExprTree::as_constant() const { return std::get<Constant>(node_->data); }
const Variable& ExprTree::as_variable() const { return std::get<Variable>(node_->data); }
const Symbol& ExprTree::as_symbol() const { return std::get<Symbol>(node_->data); }

const ExprTree& ExprTree::head() const {
  if (const auto* a = std::get_if<ApplyData>(&node_->data)) return a->head;
  throw std::logic_error("head() on a leaf node");
}

std::span<const ExprTree> ExprTree::args() const {
  if (const auto* a = std::get_if<ApplyData>(&node_->data)) return a->args;
  throw std::logic_error("args() on a leaf node");
}

std::size_t ExprTree::bound_count() const {
  if (const auto* a = std::get_if<ApplyData>(&node_->data)) return a->bound;
  throw std::logic_error("bound_count() on a leaf node");
}

int ExprTree::height() const noexcept { return node_->height; }
std::size_t ExprTree::node_count() const noexcept { return node_->count; }

bool operator==(const ExprTree& a, const ExprTree& b) {
  if (a.node_ == b.node_) return true;
  if (a.kind() != b.kind() || a.height() != b.height() || a.node_count() != b.node_count()) return false;
  switch (a.kind()) {
    case NodeKind::Constant:
      return a.as_constant().value == b.as_constant().value && a.as_constant().type == b.as_constant().type;
    case NodeKind::Variable:
      return a.as_variable().name == b.as_variable().name;
    case NodeKind::Symbol:
      return a.as_symbol().name == b.as_symbol().name && a.as_symbol().cd == b.as_symbol().cd;
    case NodeKind::Apply:
      break;
  }
  if (a.bound_count() != b.bound_count() || !(a.head() == b.head())) return false;
  auto xs = a.args();
  auto ys = b.args();
  return std::equal(xs.begin(), xs.end(), ys.begin(), ys.end());
}

std::string_view to_string(FormulaClass c) {
  switch (c) {
    case FormulaClass::Equation: return "equation";
    case FormulaClass::Inequality: return "inequality";
    case FormulaClass::NonFormula: return "non-formula";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// SymbolSet

SymbolSet::SymbolSet(std::initializer_list<std::pair<std::string, std::string>> entries) {
  for (const auto& [cd, name] : entries) insert(cd, name);
}

void SymbolSet::insert(std::string cd, std::string name) {
  entries_.emplace(std::move(cd), std::move(name));
}

bool SymbolSet::contains(const Symbol& s) const { return contains(s.cd, s.name); }

bool SymbolSet::contains(std::string_view cd, std::string_view name) const {
  return entries_.find(std::pair<std::string, std::string>(cd, name)) != entries_.end();
}

std::vector<std::string> SymbolSet::to_strings() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [cd, name] : entries_) out.push_back(cd + ":" + name);
  return out;
}

SymbolSet SymbolSet::from_strings(std::span<const std::string> items) {
  SymbolSet set;
  for (const auto& item : items) {
    const auto colon = item.find(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == item.size())
      throw ConfigError("symbol '" + item + "' is not of the form cd:name");
    set.insert(item.substr(0, colon), item.substr(colon + 1));
  }
  return set;
}

const ClassifierConfig& ClassifierConfig::standard() {
  static const ClassifierConfig config{
      SymbolSet{{"relation1", "eq"}},
      SymbolSet{{"relation1", "neq"}, {"relation1", "lt"}, {"relation1", "gt"},
                {"relation1", "leq"}, {"relation1", "geq"}},
  };
  return config;
}

FormulaClass classify(const ExprTree& tree, const ClassifierConfig& config) {
  if (tree.kind() != NodeKind::Apply || tree.head().kind() != NodeKind::Symbol)
    return FormulaClass::NonFormula;
  const Symbol& head = tree.head().as_symbol();
  if (config.equality.contains(head)) return FormulaClass::Equation;
  if (config.inequality.contains(head)) return FormulaClass::Inequality;
  return FormulaClass::NonFormula;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

struct XmlElement {
  std::string name;  // local name, namespace prefix stripped
  std::vector<std::pair<std::string, std::string>> attrs;
  std::vector<std::unique_ptr<XmlElement>> children;
  std::string text;
  std::size_t offset = 0;

  const std::string* attr(std::string_view key) const {
    for (const auto& [k, v] : attrs)
      if (k == key) return &v;
    return nullptr;
  }
};

std::string local_name(const char* qname) {
  std::string_view s(qname);
  const auto colon = s.rfind(':');
  return std::string(colon == std::string_view::npos ? s : s.substr(colon + 1));
}

struct DomBuilder {
  XML_Parser parser = nullptr;
  std::unique_ptr<XmlElement> root;
  std::vector<XmlElement*> stack;

  static void on_start(void* data, const XML_Char* name, const XML_Char** atts) {
    auto* self = static_cast<DomBuilder*>(data);
    auto el = std::make_unique<XmlElement>();
    el->name = local_name(name);
    el->offset = static_cast<std::size_t>(XML_GetCurrentByteIndex(self->parser));
    for (int i = 0; atts[i] != nullptr; i += 2) el->attrs.emplace_back(local_name(atts[i]), atts[i + 1]);
    XmlElement* raw = el.get();
    if (self->stack.empty()) {
      self->root = std::move(el);
    } else {
      self->stack.back()->children.push_back(std::move(el));
    }
    self->stack.push_back(raw);
  }

  static void on_end(void* data, const XML_Char*) { static_cast<DomBuilder*>(data)->stack.pop_back(); }

  static void on_text(void* data, const XML_Char* s, int len) {
    auto* self = static_cast<DomBuilder*>(data);
    if (!self->stack.empty()) self->stack.back()->text.append(s, static_cast<std::size_t>(len));
  }
};

std::unique_ptr<XmlElement> parse_dom(std::string_view xml) {
  DomBuilder builder;
  std::unique_ptr<XML_ParserStruct, decltype(&XML_ParserFree)> parser(XML_ParserCreate("UTF-8"),
                                                                       &XML_ParserFree);
  if (!parser) throw std::bad_alloc();
  builder.parser = parser.get();
  XML_SetUserData(parser.get(), &builder);
  XML_SetElementHandler(parser.get(), &DomBuilder::on_start, &DomBuilder::on_end);
  XML_SetCharacterDataHandler(parser.get(), &DomBuilder::on_text);
  if (XML_Parse(parser.get(), xml.data(), static_cast<int>(xml.size()), XML_TRUE) == XML_STATUS_ERROR) {
    const auto offset = XML_GetCurrentByteIndex(parser.get());
    throw ParseError(std::string("malformed XML: ") + XML_ErrorString(XML_GetErrorCode(parser.get())),
                     offset < 0 ? 0 : static_cast<std::size_t>(offset));
  }
  if (!builder.root) throw ParseError("no root element", 0);
  return std::move(builder.root);
}

std::string trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; };
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

// Collapses internal whitespace runs so "1 . 5" style formatting noise is kept
// lexically but line breaks inside tokens do not matter.
std::string normalize_token(std::string_view s) {
  std::string out;
  bool pending_space = false;
  for (char c : trim(s)) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      pending_space = true;
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

bool is_annotation(const XmlElement& e) { return e.name == "annotation" || e.name == "annotation-xml"; }

void reject_text(const XmlElement& e) {
  if (!trim(e.text).empty()) throw ParseError("unexpected text inside <" + e.name + ">", e.offset);
}

ExprTree convert(const XmlElement& e);

ExprTree convert_token(const XmlElement& e) {
  if (!e.children.empty())
    throw ParseError("<" + e.name + "> must contain only text", e.children.front()->offset);
  std::string text = normalize_token(e.text);
  if (text.empty()) throw ParseError("empty <" + e.name + ">", e.offset);
  if (e.name == "ci") return ExprTree::variable(std::move(text));
  if (e.name == "cn") {
    const std::string* type = e.attr("type");
    return ExprTree::constant(std::move(text), type ? *type : std::string());
  }
  const std::string* cd = e.attr("cd");
  if (cd == nullptr || cd->empty()) throw ParseError("<csymbol> without a cd attribute", e.offset);
  return ExprTree::symbol(std::move(text), *cd);
}

ExprTree convert_head(const XmlElement& e) {
  if (e.name == "csymbol" || e.name == "apply") return convert(e);
  if (e.name == "ci" || e.name == "cn" || e.name == "bind")
    throw ParseError("application head must be <csymbol> or <apply>, found <" + e.name + ">", e.offset);
  return convert(e);  // reports the unsupported element
}

ExprTree convert(const XmlElement& e) {
  const std::string& n = e.name;
  if (n == "ci" || n == "cn" || n == "csymbol") return convert_token(e);

  if (n == "math" || n == "semantics") {
    reject_text(e);
    const XmlElement* content = nullptr;
    for (const auto& c : e.children) {
      if (n == "semantics" && is_annotation(*c)) continue;
      if (content != nullptr) {
        if (n == "semantics") break;  // first content child wins
        throw ParseError("<math> must contain exactly one expression", c->offset);
      }
      content = c.get();
    }
    if (content == nullptr) throw ParseError("<" + n + "> contains no expression", e.offset);
    return convert(*content);
  }

  if (n == "apply") {
    reject_text(e);
    if (e.children.empty()) throw ParseError("<apply> without a head", e.offset);
    ExprTree head = convert_head(*e.children.front());
    std::vector<ExprTree> args;
    args.reserve(e.children.size() - 1);
    for (std::size_t i = 1; i < e.children.size(); ++i) args.push_back(convert(*e.children[i]));
    return ExprTree::apply(std::move(head), std::move(args));
  }

  if (n == "bind") {
    reject_text(e);
    if (e.children.size() < 2) throw ParseError("<bind> needs a binder and a body", e.offset);
    ExprTree binder = convert_head(*e.children.front());
    std::vector<ExprTree> bound;
    std::size_t i = 1;
    for (; i < e.children.size() && e.children[i]->name == "bvar"; ++i) {
      const XmlElement& bvar = *e.children[i];
      reject_text(bvar);
      if (bvar.children.size() != 1 || bvar.children.front()->name != "ci")
        throw ParseError("<bvar> must contain exactly one <ci>", bvar.offset);
      bound.push_back(convert_token(*bvar.children.front()));
    }
    if (i + 1 != e.children.size())
      throw ParseError("<bind> must end with exactly one body expression", e.offset);
    return ExprTree::bind(std::move(binder), std::move(bound), convert(*e.children[i]));
  }

  throw UnsupportedConstruct(n, e.offset);
}

void escape_into(std::string& out, std::string_view s) {
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
}

void markup_into(std::string& out, const ExprTree& t) {
  switch (t.kind()) {
    case NodeKind::Constant: {
      const auto& c = t.as_constant();
      out += "<cn";
      if (!c.type.empty()) {
        out += " type=\"";
        escape_into(out, c.type);
        out += '"';
      }
      out += '>';
      escape_into(out, c.value);
      out += "</cn>";
      return;
    }
    case NodeKind::Variable:
      out += "<ci>";
      escape_into(out, t.as_variable().name);
      out += "</ci>";
      return;
    case NodeKind::Symbol:
      out += "<csymbol cd=\"";
      escape_into(out, t.as_symbol().cd);
      out += "\">";
      escape_into(out, t.as_symbol().name);
      out += "</csymbol>";
      return;
    case NodeKind::Apply:
      break;
  }
  const auto args = t.args();
  if (t.bound_count() > 0) {
    out += "<bind>";
    markup_into(out, t.head());
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (i < t.bound_count()) out += "<bvar>";
      markup_into(out, args[i]);
      if (i < t.bound_count()) out += "</bvar>";
    }
    out += "</bind>";
    return;
  }
  out += "<apply>";
  markup_into(out, t.head());
  for (const auto& a : args) markup_into(out, a);
  out += "</apply>";
}

void notation_into(std::string& out, const ExprTree& t) {
  switch (t.kind()) {
    case NodeKind::Constant: out += t.as_constant().value; return;
    case NodeKind::Variable: out += t.as_variable().name; return;
    case NodeKind::Symbol: out += t.as_symbol().name; return;
    case NodeKind::Apply: break;
  }
  notation_into(out, t.head());
  out += '(';
  bool first = true;
  for (const auto& a : t.args()) {
    if (!first) out += ", ";
    first = false;
    notation_into(out, a);
  }
  out += ')';
}

}  // namespace

ExprTree parse_expression(std::string_view xml_text) {
  const auto dom = parse_dom(xml_text);
  return convert(*dom);
}

ExprTree parse_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_expression(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(e.detail(), e.byte_offset(), path.string());
  } catch (const UnsupportedConstruct& e) {
    throw UnsupportedConstruct(e.element(), e.byte_offset(), path.string());
  }
}

std::string to_markup(const ExprTree& tree) {
  std::string out;
  markup_into(out, tree);
  return out;
}

std::string to_string(const ExprTree& tree) {
  std::string out;
  notation_into(out, tree);
  return out;
}

}  // namespace mss
