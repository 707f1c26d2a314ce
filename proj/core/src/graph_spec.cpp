#include "causal_audit/graph_spec.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "causal_audit/errors.hpp"

namespace causal_audit {

namespace {

enum class Tok { ident, number, string, punct, arrow, end };

struct Token {
  Tok kind;
  std::string text;
  std::size_t line;
  std::size_t column;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t line = 1;
  std::size_t col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t k) {
    for (std::size_t j = 0; j < k; ++j, ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < text.size()) {
    const char c = text[i];
    if (c == '#') {
      while (i < text.size() && text[i] != '\n') advance(1);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    const std::size_t start_line = line;
    const std::size_t start_col = col;
    if (ident_start(c)) {
      std::size_t j = i;
      while (j < text.size() && ident_char(text[j])) ++j;
      out.push_back({Tok::ident, std::string(text.substr(i, j - i)), start_line, start_col});
      advance(j - i);
    } else if (digit(c) || (c == '.' && i + 1 < text.size() && digit(text[i + 1]))) {
      std::size_t j = i;
      while (j < text.size() && (digit(text[j]) || text[j] == '.')) ++j;
      if (j < text.size() && (text[j] == 'e' || text[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < text.size() && (text[k] == '+' || text[k] == '-')) ++k;
        if (k < text.size() && digit(text[k])) {
          j = k;
          while (j < text.size() && digit(text[j])) ++j;
        }
      }
      if (j < text.size() && ident_char(text[j])) {
        throw SyntaxError("malformed number", start_line, start_col);
      }
      out.push_back({Tok::number, std::string(text.substr(i, j - i)), start_line, start_col});
      advance(j - i);
    } else if (c == '"') {
      std::string value;
      std::size_t j = i + 1;
      while (true) {
        if (j >= text.size() || text[j] == '\n') {
          throw SyntaxError("unterminated string", start_line, start_col);
        }
        if (text[j] == '"') break;
        if (text[j] == '\\' && j + 1 < text.size()) ++j;
        value += text[j++];
      }
      out.push_back({Tok::string, value, start_line, start_col});
      advance(j + 1 - i);
    } else if (c == '-' && i + 1 < text.size() && text[i + 1] == '>') {
      out.push_back({Tok::arrow, "->", start_line, start_col});
      advance(2);
    } else if (std::string_view("{}[](),:;=+*-").find(c) != std::string_view::npos) {
      out.push_back({Tok::punct, std::string(1, c), start_line, start_col});
      advance(1);
    } else {
      throw SyntaxError(std::string("unexpected character '") + c + "'", start_line, start_col);
    }
  }
  out.push_back({Tok::end, "", line, col});
  return out;
}

struct Located {
  std::size_t line = 0;
  std::size_t column = 0;
};

struct NodeStmt : Located {
  std::string name;
  std::optional<std::vector<std::string>> domain;
  bool observed = true;
};

struct EdgeStmt : Located {
  std::string from;
  std::string to;
};

struct ExoStmt : Located {
  std::string name;
  std::vector<std::string> support;
  std::vector<double> probs;
};

struct FuncRow : Located {
  std::vector<std::string> inputs;
  std::string output;
};

struct FuncStmt : Located {
  std::string node;
  std::vector<std::string> args;
  std::vector<FuncRow> rows;
  std::optional<std::string> fallback;
};

struct Term {
  std::string parent;  // empty for the intercept
  double coefficient;
};

struct AssignStmt : Located {
  std::string node;
  std::vector<Term> terms;
  std::optional<double> noise;
  std::optional<double> bernoulli;
};

struct RoleStmt : Located {
  std::string node;
  std::string role;
};

struct Document {
  std::optional<ModelFamily> header;
  std::vector<NodeStmt> nodes;
  std::vector<EdgeStmt> edges;
  std::vector<ExoStmt> exos;
  std::vector<FuncStmt> funcs;
  std::vector<AssignStmt> assigns;
  std::vector<RoleStmt> roles;
  std::map<std::string, std::string> meta;
};

[[noreturn]] void semantic(const Located& at, const std::string& message) {
  throw SemanticError("line " + std::to_string(at.line) + ": " + message);
}

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  Document parse() {
    Document doc;
    while (peek().kind != Tok::end) {
      const Token& t = peek();
      if (t.kind != Tok::ident) fail(t, "expected a statement keyword");
      const std::string keyword = t.text;
      if (keyword == "model") {
        next();
        const Token& family = expect_ident();
        if (doc.header) fail(t, "duplicate model header");
        if (family.text == "discrete") {
          doc.header = ModelFamily::discrete;
        } else if (family.text == "linear") {
          doc.header = ModelFamily::linear;
        } else {
          fail(family, "expected 'discrete' or 'linear'");
        }
      } else if (keyword == "node") {
        doc.nodes.push_back(node());
      } else if (keyword == "edge") {
        edges(doc);
      } else if (keyword == "exo") {
        doc.exos.push_back(exo());
      } else if (keyword == "func") {
        doc.funcs.push_back(func());
      } else if (keyword == "assign") {
        doc.assigns.push_back(assign());
      } else if (keyword == "role") {
        RoleStmt r;
        locate(r, next());
        r.node = expect_ident().text;
        expect_punct("=");
        r.role = expect_ident().text;
        doc.roles.push_back(r);
      } else if (keyword == "meta") {
        next();
        const std::string key = expect_ident().text;
        expect_punct("=");
        const Token& value = next();
        if (value.kind != Tok::ident && value.kind != Tok::number && value.kind != Tok::string) {
          fail(value, "expected a meta value");
        }
        doc.meta[key] = value.text;
      } else {
        fail(t, "unknown keyword '" + keyword + "'");
      }
      while (is_punct(";")) next();
    }
    return doc;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  const Token& next() {
    const Token& t = tokens_[pos_];
    if (t.kind != Tok::end) ++pos_;
    return t;
  }
  bool is_punct(std::string_view p) const {
    return peek().kind == Tok::punct && peek().text == p;
  }
  [[noreturn]] static void fail(const Token& t, const std::string& message) {
    const std::string found = t.kind == Tok::end ? "end of input" : "'" + t.text + "'";
    throw SyntaxError(message + " (found " + found + ")", t.line, t.column);
  }
  static void locate(Located& l, const Token& t) {
    l.line = t.line;
    l.column = t.column;
  }
  const Token& expect_ident() {
    if (peek().kind != Tok::ident) fail(peek(), "expected an identifier");
    return next();
  }
  void expect_punct(std::string_view p) {
    if (!is_punct(p)) fail(peek(), "expected '" + std::string(p) + "'");
    next();
  }
  void expect_arrow() {
    if (peek().kind != Tok::arrow) fail(peek(), "expected '->'");
    next();
  }

  std::string value() {
    std::string sign;
    if (is_punct("-")) {
      next();
      sign = "-";
      if (peek().kind != Tok::number) fail(peek(), "expected a number after '-'");
    }
    const Token& t = next();
    if (t.kind != Tok::ident && t.kind != Tok::number && t.kind != Tok::string) {
      fail(t, "expected a value");
    }
    return sign + t.text;
  }

  double number() {
    bool negative = false;
    if (is_punct("-")) {
      next();
      negative = true;
    }
    const Token& t = peek();
    if (t.kind != Tok::number) fail(t, "expected a number");
    next();
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (ec != std::errc() || ptr != t.text.data() + t.text.size()) fail(t, "malformed number");
    return negative ? -v : v;
  }

  template <typename Item>
  std::vector<Item> list(Item (Parser::*item)()) {
    expect_punct("[");
    std::vector<Item> out;
    if (!is_punct("]")) {
      out.push_back((this->*item)());
      while (is_punct(",")) {
        next();
        out.push_back((this->*item)());
      }
    }
    expect_punct("]");
    return out;
  }

  NodeStmt node() {
    NodeStmt n;
    locate(n, next());
    n.name = expect_ident().text;
    if (!is_punct("{")) return n;
    next();
    std::set<std::string> seen;
    while (!is_punct("}")) {
      const Token& key = expect_ident();
      if (!seen.insert(key.text).second) fail(key, "duplicate field '" + key.text + "'");
      expect_punct(":");
      if (key.text == "domain") {
        n.domain = list(&Parser::value);
      } else if (key.text == "observed") {
        const Token& flag = expect_ident();
        if (flag.text != "true" && flag.text != "false") fail(flag, "expected true or false");
        n.observed = flag.text == "true";
      } else {
        fail(key, "unknown node field '" + key.text + "'");
      }
      if (!is_punct(",")) break;
      next();
    }
    expect_punct("}");
    return n;
  }

  void edges(Document& doc) {
    next();
    const Token* from = &expect_ident();
    do {
      expect_arrow();
      const Token& to = expect_ident();
      EdgeStmt e;
      locate(e, *from);
      e.from = from->text;
      e.to = to.text;
      doc.edges.push_back(e);
      from = &to;
    } while (peek().kind == Tok::arrow);
  }

  ExoStmt exo() {
    ExoStmt x;
    locate(x, next());
    x.name = expect_ident().text;
    expect_punct("{");
    bool have_support = false;
    bool have_probs = false;
    while (!is_punct("}")) {
      const Token& key = expect_ident();
      expect_punct(":");
      if (key.text == "support" && !have_support) {
        x.support = list(&Parser::value);
        have_support = true;
      } else if (key.text == "probs" && !have_probs) {
        x.probs = list(&Parser::number);
        have_probs = true;
      } else {
        fail(key, "unexpected exo field '" + key.text + "'");
      }
      if (!is_punct(",")) break;
      next();
    }
    expect_punct("}");
    if (!have_support || !have_probs) {
      semantic(x, "exo " + x.name + " needs both support and probs");
    }
    return x;
  }

  FuncStmt func() {
    FuncStmt f;
    locate(f, next());
    f.node = expect_ident().text;
    expect_punct("(");
    f.args.push_back(expect_ident().text);
    while (is_punct(",")) {
      next();
      f.args.push_back(expect_ident().text);
    }
    expect_punct(")");
    expect_punct("{");
    while (!is_punct("}")) {
      if (peek().kind == Tok::ident && peek().text == "default") {
        const Token& t = next();
        if (f.fallback) fail(t, "duplicate default row");
        expect_arrow();
        f.fallback = value();
      } else {
        FuncRow row;
        locate(row, peek());
        expect_punct("(");
        row.inputs.push_back(value());
        while (is_punct(",")) {
          next();
          row.inputs.push_back(value());
        }
        expect_punct(")");
        expect_arrow();
        row.output = value();
        f.rows.push_back(row);
      }
      if (!is_punct(";")) break;
      next();
    }
    expect_punct("}");
    return f;
  }

  AssignStmt assign() {
    AssignStmt a;
    locate(a, next());
    a.node = expect_ident().text;
    expect_punct("=");
    if (peek().kind == Tok::ident && peek().text == "bernoulli") {
      next();
      expect_punct("(");
      a.bernoulli = number();
      expect_punct(")");
      return a;
    }
    bool first = true;
    while (true) {
      double sign = 1.0;
      if (is_punct("+") || is_punct("-")) {
        sign = next().text == "-" ? -1.0 : 1.0;
      } else if (!first) {
        break;
      }
      first = false;
      if (peek().kind == Tok::ident && peek().text == "noise") {
        const Token& t = next();
        if (a.noise) fail(t, "duplicate noise term");
        if (sign < 0) fail(t, "noise term cannot be negated");
        expect_punct("(");
        a.noise = number();
        expect_punct(")");
      } else if (peek().kind == Tok::ident) {
        a.terms.push_back({next().text, sign});
      } else {
        const double c = sign * number();
        if (is_punct("*")) {
          next();
          a.terms.push_back({expect_ident().text, c});
        } else {
          a.terms.push_back({"", c});
        }
      }
    }
    return a;
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

const std::vector<std::string>& domain_of(const GraphSpec& spec, const std::string& node,
                                          const Located& at) {
  auto it = spec.domains.find(node);
  if (it == spec.domains.end()) semantic(at, "node " + node + " has no declared domain");
  return it->second;
}

std::uint32_t index_in(const std::vector<std::string>& domain, const std::string& value,
                       const std::string& owner, const Located& at) {
  auto it = std::find(domain.begin(), domain.end(), value);
  if (it == domain.end()) {
    semantic(at, "value '" + value + "' is not in the domain of " + owner);
  }
  return static_cast<std::uint32_t>(it - domain.begin());
}

DiscreteScm build_discrete(const GraphSpec& spec, const Document& doc) {
  std::map<std::string, const ExoStmt*> exos;
  for (const auto& x : doc.exos) {
    if (!exos.emplace(x.name, &x).second) semantic(x, "exo " + x.name + " declared twice");
    if (x.support.size() != x.probs.size()) {
      semantic(x, "exo " + x.name + " has " + std::to_string(x.support.size()) +
                      " support values but " + std::to_string(x.probs.size()) + " probs");
    }
    if (x.support.empty()) semantic(x, "exo " + x.name + " has an empty support");
    std::set<std::string> distinct(x.support.begin(), x.support.end());
    if (distinct.size() != x.support.size()) {
      semantic(x, "exo " + x.name + " repeats a support value");
    }
    double total = 0.0;
    for (double p : x.probs) {
      if (!(p >= 0.0 && p <= 1.0)) semantic(x, "exo " + x.name + " has a prob outside [0, 1]");
      total += p;
    }
    if (std::abs(total - 1.0) > kProbabilityTolerance) {
      semantic(x, "probs of exo " + x.name + " sum to " + format_double(total) + ", not 1");
    }
  }

  const CausalGraph& g = spec.graph;
  std::map<std::string, const FuncStmt*> funcs;
  std::set<std::string> used_exos;
  for (const auto& f : doc.funcs) {
    if (!g.contains(f.node)) semantic(f, "func for undeclared node " + f.node);
    if (!funcs.emplace(f.node, &f).second) semantic(f, "node " + f.node + " has two funcs");
    const std::string& exo_name = f.args.back();
    if (!exos.count(exo_name)) semantic(f, "func " + f.node + " uses undeclared exo " + exo_name);
    if (!used_exos.insert(exo_name).second) {
      semantic(f, "exo " + exo_name + " is shared by more than one func");
    }
  }
  for (const auto& x : doc.exos) {
    if (!used_exos.count(x.name)) semantic(x, "exo " + x.name + " is not used by any func");
  }

  std::vector<DiscreteNode> nodes;
  for (const auto& name : g.nodes()) {
    auto it = funcs.find(name);
    if (it == funcs.end()) {
      throw SemanticError("node " + name + " has no func; a discrete model needs one per node");
    }
    const FuncStmt& f = *it->second;
    const ExoStmt& x = *exos.at(f.args.back());
    DiscreteNode node;
    node.name = name;
    node.domain = domain_of(spec, name, f);
    node.parents.assign(f.args.begin(), f.args.end() - 1);
    node.exogenous = {x.name, x.support, x.probs};

    NodeList declared = node.parents;
    std::sort(declared.begin(), declared.end());
    if (std::adjacent_find(declared.begin(), declared.end()) != declared.end()) {
      semantic(f, "func " + name + " lists a parent twice");
    }
    if (declared != g.parent_names(name)) {
      semantic(f, "func " + name + " arguments do not match its parents in the graph");
    }

    std::vector<const std::vector<std::string>*> domains;
    std::vector<std::size_t> radix;
    for (const auto& p : node.parents) {
      domains.push_back(&domain_of(spec, p, f));
      radix.push_back(domains.back()->size());
    }
    domains.push_back(&x.support);
    radix.push_back(x.support.size());

    std::size_t cells = 1;
    for (std::size_t r : radix) cells *= r;
    std::vector<std::int64_t> table(cells, -1);
    for (const auto& row : f.rows) {
      if (row.inputs.size() != radix.size()) {
        semantic(row, "func " + name + " row has " + std::to_string(row.inputs.size()) +
                          " inputs, expected " + std::to_string(radix.size()));
      }
      std::size_t offset = 0;
      for (std::size_t k = 0; k < radix.size(); ++k) {
        const std::string owner = k + 1 < radix.size() ? node.parents[k] : x.name;
        offset = offset * radix[k] + index_in(*domains[k], row.inputs[k], owner, row);
      }
      if (table[offset] >= 0) semantic(row, "func " + name + " defines a row twice");
      table[offset] = index_in(node.domain, row.output, name, row);
    }
    std::optional<std::uint32_t> fallback;
    if (f.fallback) fallback = index_in(node.domain, *f.fallback, name, f);
    node.table.resize(cells);
    for (std::size_t c = 0; c < cells; ++c) {
      if (table[c] >= 0) {
        node.table[c] = static_cast<std::uint32_t>(table[c]);
      } else if (fallback) {
        node.table[c] = *fallback;
      } else {
        semantic(f, "func " + name + " is not total: some input combinations have no row and "
                                     "there is no default");
      }
    }
    nodes.push_back(std::move(node));
  }
  return DiscreteScm::build(g, std::move(nodes), true);
}

LinearGaussianScm build_linear(const GraphSpec& spec, const Document& doc) {
  const CausalGraph& g = spec.graph;
  std::map<std::string, const AssignStmt*> assigns;
  for (const auto& a : doc.assigns) {
    if (!g.contains(a.node)) semantic(a, "assign for undeclared node " + a.node);
    if (!assigns.emplace(a.node, &a).second) semantic(a, "node " + a.node + " is assigned twice");
    if (spec.domains.count(a.node)) {
      semantic(a, "node " + a.node + " has a categorical domain; linear nodes are numeric");
    }
  }
  std::vector<LinearNode> nodes;
  for (const auto& name : g.nodes()) {
    auto it = assigns.find(name);
    if (it == assigns.end()) {
      throw SemanticError("node " + name + " has no assign; a linear model needs one per node");
    }
    const AssignStmt& a = *it->second;
    LinearNode node;
    node.name = name;
    node.bernoulli_p = a.bernoulli;
    node.noise_variance = a.noise.value_or(0.0);
    for (const auto& p : g.parent_names(name)) node.coefficients[p] = 0.0;
    std::set<std::string> seen;
    bool intercept = false;
    for (const auto& t : a.terms) {
      if (t.parent.empty()) {
        if (intercept) semantic(a, "assign " + name + " has two constant terms");
        intercept = true;
        node.intercept = t.coefficient;
        continue;
      }
      if (!node.coefficients.count(t.parent)) {
        semantic(a, "assign " + name + " uses " + t.parent + ", which is not a parent");
      }
      if (!seen.insert(t.parent).second) {
        semantic(a, "assign " + name + " mentions " + t.parent + " twice");
      }
      node.coefficients[t.parent] = t.coefficient;
    }
    if (a.bernoulli && !g.parents(g.index(name)).empty()) {
      semantic(a, "bernoulli node " + name + " must not have parents");
    }
    nodes.push_back(std::move(node));
  }
  try {
    return LinearGaussianScm::build(g, std::move(nodes));
  } catch (const ModelError& e) {
    throw SemanticError(e.what());
  }
}

bool bare(const std::string& v) {
  if (v.empty()) return false;
  if (ident_start(v[0])) return std::all_of(v.begin(), v.end(), ident_char);
  std::size_t i = v[0] == '-' ? 1 : 0;
  if (i == v.size()) return false;
  double parsed = 0.0;
  auto [ptr, ec] = std::from_chars(v.data() + i, v.data() + v.size(), parsed);
  return ec == std::errc() && ptr == v.data() + v.size() && (digit(v[i]) || v[i] == '.');
}

std::string render(const std::string& v) {
  if (bare(v)) return v;
  std::string out = "\"";
  for (char c : v) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

std::string render_list(const std::vector<std::string>& values) {
  std::string out = "[";
  for (std::size_t i = 0; i < values.size(); ++i) out += (i ? ", " : "") + render(values[i]);
  return out + "]";
}

void write_header(std::ostringstream& out, const GraphSpec& spec) {
  if (spec.family == ModelFamily::discrete) out << "model discrete\n";
  if (spec.family == ModelFamily::linear) out << "model linear\n";
  for (const auto& [key, value] : spec.meta) out << "meta " << key << " = " << render(value) << "\n";
  out << "\n";
  const CausalGraph& g = spec.graph;
  for (const auto& name : g.nodes()) {
    auto d = spec.domains.find(name);
    const bool hidden = !g.observed(name);
    out << "node " << name;
    if (d != spec.domains.end()) {
      out << " { domain: " << render_list(d->second) << (hidden ? ", observed: false" : "")
          << " }";
    } else if (hidden) {
      out << " { observed: false }";
    }
    out << "\n";
  }
  if (!g.edges().empty()) out << "\n";
  for (const auto& e : g.edges()) out << "edge " << e.from << " -> " << e.to << "\n";
  if (!spec.roles.empty()) out << "\n";
  for (const auto& [node, role] : spec.roles) out << "role " << node << " = " << to_string(role) << "\n";
}

void write_discrete(std::ostringstream& out, const DiscreteScm& scm) {
  for (std::size_t v : scm.graph().topological_order()) {
    const DiscreteNode& node = scm.node(v);
    const auto& x = node.exogenous;
    std::vector<std::string> probs;
    for (double p : x.probs) probs.push_back(format_double(p));
    out << "\nexo " << x.name << " { support: " << render_list(x.support)
        << ", probs: " << render_list(probs) << " }\n";
    out << "func " << node.name << "(";
    for (const auto& p : node.parents) out << p << ", ";
    out << x.name << ") {\n";
    std::vector<const std::vector<std::string>*> domains;
    for (const auto& p : node.parents) domains.push_back(&scm.node(p).domain);
    domains.push_back(&x.support);
    std::vector<std::size_t> digits(domains.size(), 0);
    for (std::uint32_t value : node.table) {
      out << "  (";
      for (std::size_t k = 0; k < digits.size(); ++k) {
        out << (k ? ", " : "") << render((*domains[k])[digits[k]]);
      }
      out << ") -> " << render(node.domain[value]) << ";\n";
      for (std::size_t k = digits.size(); k-- > 0;) {
        if (++digits[k] < domains[k]->size()) break;
        digits[k] = 0;
      }
    }
    out << "}\n";
  }
}

void write_linear(std::ostringstream& out, const LinearGaussianScm& scm) {
  out << "\n";
  for (std::size_t v : scm.graph().topological_order()) {
    const LinearNode& node = scm.node(v);
    out << "assign " << node.name << " = ";
    if (node.bernoulli_p) {
      out << "bernoulli(" << format_double(*node.bernoulli_p) << ")\n";
      continue;
    }
    out << format_double(node.intercept);
    for (const auto& [parent, c] : node.coefficients) {
      out << (std::signbit(c) ? " - " : " + ") << format_double(std::abs(c)) << "*" << parent;
    }
    out << " + noise(" << format_double(node.noise_variance) << ")\n";
  }
}

}  // namespace

std::vector<DeclaredColumn> GraphSpec::schema() const {
  std::vector<DeclaredColumn> out;
  for (const auto& name : graph.nodes()) {
    if (!graph.observed(name)) continue;
    auto d = domains.find(name);
    if (d != domains.end()) {
      out.push_back({{name, ColumnType::categorical, d->second}, true});
    } else {
      out.push_back({{name, ColumnType::numeric, {}}, true});
    }
  }
  return out;
}

GraphSpec parse_graph_spec(std::string_view text) {
  const Document doc = Parser(tokenize(text)).parse();
  GraphSpec spec;
  spec.meta = doc.meta;

  NodeList names;
  NodeList hidden;
  std::set<std::string> declared;
  for (const auto& n : doc.nodes) {
    if (!declared.insert(n.name).second) semantic(n, "node " + n.name + " declared twice");
    names.push_back(n.name);
    if (!n.observed) hidden.push_back(n.name);
    if (n.domain) {
      if (n.domain->empty()) semantic(n, "node " + n.name + " has an empty domain");
      std::set<std::string> distinct(n.domain->begin(), n.domain->end());
      if (distinct.size() != n.domain->size()) {
        semantic(n, "node " + n.name + " repeats a domain value");
      }
      spec.domains[n.name] = *n.domain;
    }
  }
  std::vector<Edge> edges;
  for (const auto& e : doc.edges) {
    for (const auto& end : {e.from, e.to}) {
      if (!declared.count(end)) semantic(e, "edge uses undeclared node " + end);
    }
    edges.push_back({e.from, e.to});
  }
  spec.graph = CausalGraph::build(names, edges, hidden);

  for (const auto& r : doc.roles) {
    if (!declared.count(r.node)) semantic(r, "role for undeclared node " + r.node);
    auto role = parse_role(r.role);
    if (!role) semantic(r, "unknown role '" + r.role + "' (expected explaining, proxy or neutral)");
    spec.roles[r.node] = *role;
  }

  const bool has_func = !doc.funcs.empty() || !doc.exos.empty();
  const bool has_assign = !doc.assigns.empty();
  if (doc.header) {
    spec.family = *doc.header;
  } else if (has_func && has_assign) {
    const Located at{doc.assigns.front().line, doc.assigns.front().column};
    semantic(at, "spec mixes func and assign statements; add a 'model discrete' or "
                 "'model linear' header");
  } else if (has_func) {
    spec.family = ModelFamily::discrete;
  } else if (has_assign) {
    spec.family = ModelFamily::linear;
  }

  if (spec.family == ModelFamily::discrete && has_func) {
    spec.discrete = build_discrete(spec, doc);
  } else if (spec.family == ModelFamily::linear && has_assign) {
    spec.linear = build_linear(spec, doc);
  }
  return spec;
}

GraphSpec load_graph_spec(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open spec file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_graph_spec(text.str());
}

std::string export_graph_spec(const GraphSpec& spec) {
  std::ostringstream out;
  write_header(out, spec);
  if (spec.discrete) write_discrete(out, *spec.discrete);
  if (spec.linear) write_linear(out, *spec.linear);
  return out.str();
}

std::string export_graph_spec(const DiscreteScm& scm, const RoleTags& roles,
                              const std::map<std::string, std::string>& meta) {
  GraphSpec spec;
  spec.graph = scm.graph();
  for (std::size_t v = 0; v < scm.size(); ++v) spec.domains[scm.node(v).name] = scm.node(v).domain;
  spec.family = ModelFamily::discrete;
  spec.discrete = scm;
  spec.roles = roles;
  spec.meta = meta;
  return export_graph_spec(spec);
}

std::string export_graph_spec(const LinearGaussianScm& scm, const RoleTags& roles,
                              const std::map<std::string, std::string>& meta) {
  GraphSpec spec;
  spec.graph = scm.graph();
  spec.family = ModelFamily::linear;
  spec.linear = scm;
  spec.roles = roles;
  spec.meta = meta;
  return export_graph_spec(spec);
}

}  // namespace causal_audit
