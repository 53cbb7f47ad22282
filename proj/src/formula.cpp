#include "ury/formula.hpp"

#include <algorithm>
#include <cctype>
#include <map>

namespace ury {

namespace {

const std::map<std::string, NodeKind>& keywords() {
  static const std::map<std::string, NodeKind> k = {
      {"d", NodeKind::Dist},         {"half", NodeKind::Half},       {"dotminus", NodeKind::DotMinus},
      {"min", NodeKind::Min},        {"max", NodeKind::Max},         {"absdiff", NodeKind::AbsDiff},
      {"neg", NodeKind::Neg},        {"dotplus", NodeKind::DotPlus}, {"scale", NodeKind::Scale},
      {"sup", NodeKind::Sup},        {"inf", NodeKind::Inf},
  };
  return k;
}

bool is_reserved(const std::string& name) { return keywords().count(name) > 0; }

bool is_name(const std::string& s) {
  if (s.empty() || std::isdigit(static_cast<unsigned char>(s[0])) || s[0] == '-') return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'' || c == '.';
  });
}

std::shared_ptr<FormulaNode> make(NodeKind kind) {
  auto n = std::make_shared<FormulaNode>();
  n->kind = kind;
  return n;
}

}  // namespace

bool operator==(const Signature::Relation& a, const Signature::Relation& b) {
  return a.name == b.name && a.arity == b.arity && a.coefficient == b.coefficient;
}

Signature& Signature::relation(const std::string& name, std::size_t arity, std::optional<Rational> coefficient) {
  relations.push_back({name, arity, coefficient ? *coefficient : Rational(static_cast<long>(arity))});
  return *this;
}

Signature& Signature::constant(const std::string& name) {
  constants.push_back(name);
  return *this;
}

const Signature::Relation* Signature::find_relation(const std::string& name) const {
  for (const auto& r : relations)
    if (r.name == name) return &r;
  return nullptr;
}

bool Signature::is_constant(const std::string& name) const {
  return std::find(constants.begin(), constants.end(), name) != constants.end();
}

void Signature::validate() const {
  std::set<std::string> seen;
  for (const auto& r : relations) {
    if (!is_name(r.name) || is_reserved(r.name)) throw DomainError("bad relation name '" + r.name + "'");
    if (!seen.insert(r.name).second) throw DomainError("duplicate symbol '" + r.name + "'");
    if (r.arity == 0) throw DomainError("relation '" + r.name + "' has arity 0");
    if (r.coefficient <= 0) throw DomainError("relation '" + r.name + "' needs a positive modulus coefficient");
  }
  for (const auto& c : constants) {
    if (!is_name(c) || is_reserved(c)) throw DomainError("bad constant name '" + c + "'");
    if (!seen.insert(c).second) throw DomainError("duplicate symbol '" + c + "'");
  }
}

Formula Formula::constant(const Rational& q) {
  if (!in_unit_interval(q)) throw DomainError("constant " + ury::to_string(q) + " outside [0,1]");
  auto n = make(NodeKind::Const);
  n->value = q;
  return Formula(n);
}

Formula Formula::dist(Term a, Term b) {
  auto n = make(NodeKind::Dist);
  n->terms = {std::move(a), std::move(b)};
  return Formula(n);
}

Formula Formula::rel(const std::string& name, std::vector<Term> args) {
  if (args.empty()) throw DomainError("relation '" + name + "' applied to no arguments");
  auto n = make(NodeKind::Rel);
  n->name = name;
  n->terms = std::move(args);
  return Formula(n);
}

#define URY_UNARY(fn, K)                 \
  Formula Formula::fn(Formula f) {       \
    auto n = make(NodeKind::K);          \
    n->children = {std::move(f)};        \
    return Formula(n);                   \
  }
#define URY_BINARY(fn, K)                         \
  Formula Formula::fn(Formula f, Formula g) {     \
    auto n = make(NodeKind::K);                   \
    n->children = {std::move(f), std::move(g)};   \
    return Formula(n);                            \
  }
URY_UNARY(half, Half)
URY_UNARY(neg, Neg)
URY_BINARY(dot_minus, DotMinus)
URY_BINARY(min, Min)
URY_BINARY(max, Max)
URY_BINARY(abs_diff, AbsDiff)
URY_BINARY(dot_plus, DotPlus)
#undef URY_UNARY
#undef URY_BINARY

Formula Formula::scale(const Rational& q, Formula f) {
  if (q <= 0) throw DomainError("scale factor must be positive");
  auto n = make(NodeKind::Scale);
  n->value = q;
  n->children = {std::move(f)};
  return Formula(n);
}

Formula Formula::sup(const std::string& v, Formula f) {
  auto n = make(NodeKind::Sup);
  n->name = v;
  n->children = {std::move(f)};
  return Formula(n);
}

Formula Formula::inf(const std::string& v, Formula f) {
  auto n = make(NodeKind::Inf);
  n->name = v;
  n->children = {std::move(f)};
  return Formula(n);
}

std::set<std::string> Formula::free_variables() const {
  std::set<std::string> out;
  const auto& n = *node_;
  for (const auto& t : n.terms)
    if (!t.is_constant) out.insert(t.name);
  for (const auto& c : n.children) {
    auto sub = c.free_variables();
    out.insert(sub.begin(), sub.end());
  }
  if (n.kind == NodeKind::Sup || n.kind == NodeKind::Inf) out.erase(n.name);
  return out;
}

std::set<std::string> Formula::constants() const {
  std::set<std::string> out;
  for (const auto& t : node_->terms)
    if (t.is_constant) out.insert(t.name);
  for (const auto& c : node_->children) {
    auto sub = c.constants();
    out.insert(sub.begin(), sub.end());
  }
  return out;
}

bool Formula::is_quantifier_free() const {
  if (kind() == NodeKind::Sup || kind() == NodeKind::Inf) return false;
  return std::all_of(node_->children.begin(), node_->children.end(),
                     [](const Formula& c) { return c.is_quantifier_free(); });
}

std::size_t Formula::depth() const {
  std::size_t d = 0;
  for (const auto& c : node_->children) d = std::max(d, c.depth());
  return node_->children.empty() ? 0 : d + 1;
}

std::size_t Formula::quantifier_depth() const {
  std::size_t d = 0;
  for (const auto& c : node_->children) d = std::max(d, c.quantifier_depth());
  return d + ((kind() == NodeKind::Sup || kind() == NodeKind::Inf) ? 1 : 0);
}

bool operator==(const Formula& a, const Formula& b) {
  if (a.node_ == b.node_) return true;
  const auto& x = *a.node_;
  const auto& y = *b.node_;
  return x.kind == y.kind && x.value == y.value && x.name == y.name && x.terms == y.terms &&
         x.children == y.children;
}

// ---------------------------------------------------------------- printing

namespace {

const char* keyword_of(NodeKind k) {
  switch (k) {
    case NodeKind::Dist: return "d";
    case NodeKind::Half: return "half";
    case NodeKind::DotMinus: return "dotminus";
    case NodeKind::Min: return "min";
    case NodeKind::Max: return "max";
    case NodeKind::AbsDiff: return "absdiff";
    case NodeKind::Neg: return "neg";
    case NodeKind::DotPlus: return "dotplus";
    case NodeKind::Scale: return "scale";
    case NodeKind::Sup: return "sup";
    case NodeKind::Inf: return "inf";
    default: return "";
  }
}

void print(const Formula& f, std::string& out) {
  const auto& n = f.node();
  switch (n.kind) {
    case NodeKind::Const:
      out += ury::to_string(n.value);
      return;
    case NodeKind::Dist:
    case NodeKind::Rel:
      out += '(';
      out += n.kind == NodeKind::Dist ? std::string("d") : n.name;
      for (const auto& t : n.terms) out += ' ' + t.name;
      out += ')';
      return;
    default:
      break;
  }
  out += '(';
  out += keyword_of(n.kind);
  if (n.kind == NodeKind::Scale) out += ' ' + ury::to_string(n.value);
  if (n.kind == NodeKind::Sup || n.kind == NodeKind::Inf) out += ' ' + n.name;
  for (const auto& c : n.children) {
    out += ' ';
    print(c, out);
  }
  out += ')';
}

// ----------------------------------------------------------------- parsing

struct Token {
  std::string text;
  std::size_t pos;
};

std::vector<Token> lex(const std::string& s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '(' || c == ')') {
      out.push_back({std::string(1, c), i});
      ++i;
    } else {
      std::size_t j = i;
      while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j])) && s[j] != '(' && s[j] != ')') ++j;
      out.push_back({s.substr(i, j - i), i});
      i = j;
    }
  }
  return out;
}

class Parser {
 public:
  Parser(const std::string& text, const Signature& sig) : toks_(lex(text)), sig_(sig), end_(text.size()) {}

  Formula parse_all() {
    Formula f = formula();
    if (i_ < toks_.size()) fail("unexpected trailing input '" + toks_[i_].text + "'", toks_[i_].pos);
    return f;
  }

 private:
  [[noreturn]] void fail(const std::string& msg, std::size_t pos) {
    throw ParseError(msg + " at offset " + std::to_string(pos), pos);
  }

  const Token& peek() {
    if (i_ >= toks_.size()) fail("unexpected end of input", end_);
    return toks_[i_];
  }

  Token next() {
    Token t = peek();
    ++i_;
    return t;
  }

  void expect_close() {
    const Token& t = peek();
    if (t.text != ")") fail("expected ')' but found '" + t.text + "'", t.pos);
    ++i_;
  }

  Rational rational(const Token& t) {
    Rational q;
    try {
      q = parse_rational(t.text);
    } catch (const ParseError&) {
      fail("malformed rational '" + t.text + "'", t.pos);
    }
    return q;
  }

  Term term() {
    Token t = next();
    if (t.text == "(" || t.text == ")") fail("expected a term", t.pos);
    if (!is_name(t.text) || is_reserved(t.text)) fail("bad term '" + t.text + "'", t.pos);
    if (sig_.find_relation(t.text)) fail("relation symbol '" + t.text + "' used as a term", t.pos);
    return {t.text, sig_.is_constant(t.text)};
  }

  Formula formula() {
    Token t = next();
    if (t.text == ")") fail("unexpected ')'", t.pos);
    if (t.text != "(") {
      if (!t.text.empty() && (std::isdigit(static_cast<unsigned char>(t.text[0])) || t.text[0] == '-')) {
        Rational q = rational(t);
        if (!in_unit_interval(q)) fail("constant " + t.text + " outside [0,1]", t.pos);
        return Formula::constant(q);
      }
      fail("unknown symbol '" + t.text + "'", t.pos);
    }
    Token head = next();
    auto kw = keywords().find(head.text);
    if (kw == keywords().end()) {
      const auto* r = sig_.find_relation(head.text);
      if (!r) fail("unknown symbol '" + head.text + "'", head.pos);
      std::vector<Term> args;
      while (peek().text != ")") {
        if (args.size() == r->arity) fail("arity mismatch: '" + r->name + "' takes " + std::to_string(r->arity), peek().pos);
        args.push_back(term());
      }
      if (args.size() != r->arity) fail("arity mismatch: '" + r->name + "' takes " + std::to_string(r->arity), peek().pos);
      expect_close();
      return Formula::rel(r->name, std::move(args));
    }
    Formula out = Formula::constant(0);
    switch (kw->second) {
      case NodeKind::Dist: {
        Term a = term();
        if (peek().text == ")") fail("arity mismatch: 'd' takes 2", peek().pos);
        Term b = term();
        out = Formula::dist(std::move(a), std::move(b));
        break;
      }
      case NodeKind::Half: out = Formula::half(formula()); break;
      case NodeKind::Neg: out = Formula::neg(formula()); break;
      case NodeKind::Scale: {
        Token q = next();
        Rational r = rational(q);
        if (r <= 0) fail("scale factor must be positive", q.pos);
        out = Formula::scale(r, formula());
        break;
      }
      case NodeKind::Sup:
      case NodeKind::Inf: {
        Token v = next();
        if (!is_name(v.text) || is_reserved(v.text) || sig_.find_relation(v.text))
          fail("bad bound variable '" + v.text + "'", v.pos);
        if (sig_.is_constant(v.text)) fail("cannot bind constant '" + v.text + "'", v.pos);
        Formula body = formula();
        out = kw->second == NodeKind::Sup ? Formula::sup(v.text, body) : Formula::inf(v.text, body);
        break;
      }
      default: {
        Formula a = formula();
        if (peek().text == ")") fail("arity mismatch: '" + head.text + "' takes 2", peek().pos);
        Formula b = formula();
        switch (kw->second) {
          case NodeKind::DotMinus: out = Formula::dot_minus(a, b); break;
          case NodeKind::Min: out = Formula::min(a, b); break;
          case NodeKind::Max: out = Formula::max(a, b); break;
          case NodeKind::AbsDiff: out = Formula::abs_diff(a, b); break;
          default: out = Formula::dot_plus(a, b); break;
        }
      }
    }
    if (peek().text != ")") fail("arity mismatch: too many arguments to '" + head.text + "'", peek().pos);
    expect_close();
    return out;
  }

  std::vector<Token> toks_;
  const Signature& sig_;
  std::size_t end_;
  std::size_t i_ = 0;
};

}  // namespace

std::string to_string(const Formula& f) {
  std::string out;
  print(f, out);
  return out;
}

Formula parse_formula(const std::string& text, const Signature& sig) { return Parser(text, sig).parse_all(); }

void check_well_formed(const Formula& f, const Signature& sig) {
  const auto& n = f.node();
  if (n.kind == NodeKind::Rel) {
    const auto* r = sig.find_relation(n.name);
    if (!r) throw DomainError("unknown relation '" + n.name + "'");
    if (r->arity != n.terms.size()) throw DomainError("arity mismatch for '" + n.name + "'");
  }
  for (const auto& t : n.terms)
    if (t.is_constant && !sig.is_constant(t.name)) throw DomainError("unknown constant '" + t.name + "'");
  for (const auto& c : n.children) check_well_formed(c, sig);
}

// ---------------------------------------------------------------- lipschitz

Rational lipschitz(const Formula& f, const Signature& sig, const std::set<std::string>& displaced) {
  const auto& n = f.node();
  auto moved = [&](const Term& t) { return displaced.count(t.name) > 0; };
  switch (n.kind) {
    case NodeKind::Const: return 0;
    case NodeKind::Dist: return static_cast<long>(std::count_if(n.terms.begin(), n.terms.end(), moved));
    case NodeKind::Rel: {
      const auto* r = sig.find_relation(n.name);
      if (!r || r->arity != n.terms.size()) throw DomainError("ill-formed atom '" + n.name + "'");
      return std::any_of(n.terms.begin(), n.terms.end(), moved) ? r->coefficient : Rational(0);
    }
    case NodeKind::Neg: return lipschitz(n.children[0], sig, displaced);
    case NodeKind::Half: return lipschitz(n.children[0], sig, displaced) / 2;
    case NodeKind::Scale: return n.value * lipschitz(n.children[0], sig, displaced);
    case NodeKind::Min:
    case NodeKind::Max: {
      Rational a = lipschitz(n.children[0], sig, displaced);
      Rational b = lipschitz(n.children[1], sig, displaced);
      return a < b ? b : a;
    }
    case NodeKind::AbsDiff:
    case NodeKind::DotMinus:
    case NodeKind::DotPlus:
      return lipschitz(n.children[0], sig, displaced) + lipschitz(n.children[1], sig, displaced);
    case NodeKind::Sup:
    case NodeKind::Inf: {
      auto inner = displaced;
      inner.erase(n.name);
      return lipschitz(n.children[0], sig, inner);
    }
  }
  return 0;
}

Rational lipschitz(const Formula& f, const Signature& sig) { return lipschitz(f, sig, f.free_variables()); }

// -------------------------------------------------------------- borel level

namespace {

Comparison flip(Comparison c) { return c == Comparison::LessThan ? Comparison::GreaterThan : Comparison::LessThan; }

unsigned level(const Formula& f, Comparison cmp) {
  const auto& n = f.node();
  const bool less = cmp == Comparison::LessThan;
  switch (n.kind) {
    case NodeKind::Const:
    case NodeKind::Dist:
    case NodeKind::Rel:
      // {phi < e} is open; {phi > e} is reached through negation, one class up.
      return less ? 1 : 2;
    case NodeKind::Neg: return level(n.children[0], flip(cmp));
    case NodeKind::Half:
    case NodeKind::Scale: return level(n.children[0], cmp);
    case NodeKind::Min:
    case NodeKind::Max:
    case NodeKind::DotPlus:
      return std::max(level(n.children[0], cmp), level(n.children[1], cmp));
    case NodeKind::DotMinus:
      // phi -. psi < e  iff  phi < psi + e: psi enters with the opposite sense
      return std::max(level(n.children[0], cmp), level(n.children[1], flip(cmp)));
    case NodeKind::AbsDiff:
      return std::max({level(n.children[0], cmp), level(n.children[0], flip(cmp)), level(n.children[1], cmp),
                       level(n.children[1], flip(cmp))});
    case NodeKind::Inf:
      // union over witnesses for <, union of intersections for >
      return level(n.children[0], cmp) + (less ? 0 : 1);
    case NodeKind::Sup: return level(n.children[0], cmp) + (less ? 1 : 0);
  }
  return 1;
}

}  // namespace

BorelLevel borel_level(const Formula& f, Comparison cmp) { return {BorelLevel::Kind::Sigma, level(f, cmp)}; }

std::string BorelLevel::to_string() const {
  return (kind == Kind::Sigma ? "Sigma " : "Pi ") + std::to_string(index);
}

std::string to_string(Comparison cmp) { return cmp == Comparison::LessThan ? "<" : ">"; }

}  // namespace ury
