#pragma once

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ury/error.hpp"
#include "ury/rational.hpp"

namespace ury {

/// Relational continuous signature. The distance symbol `d` is implicit.
struct Signature {
  struct Relation {
    std::string name;
    std::size_t arity = 1;
    Rational coefficient;  // linear inverse continuity modulus
  };

  std::vector<Relation> relations;
  std::vector<std::string> constants;

  /// Adds a relation; the coefficient defaults to the arity.
  Signature& relation(const std::string& name, std::size_t arity, std::optional<Rational> coefficient = {});
  Signature& constant(const std::string& name);

  const Relation* find_relation(const std::string& name) const;
  bool is_constant(const std::string& name) const;

  /// Throws DomainError on duplicate or reserved names, zero arity or a
  /// non-positive coefficient.
  void validate() const;

  friend bool operator==(const Signature&, const Signature&) = default;
};

bool operator==(const Signature::Relation& a, const Signature::Relation& b);

struct Term {
  std::string name;
  bool is_constant = false;

  friend bool operator==(const Term&, const Term&) = default;
};

inline Term var(std::string name) { return {std::move(name), false}; }
inline Term cst(std::string name) { return {std::move(name), true}; }

enum class NodeKind { Const, Dist, Rel, Half, DotMinus, Min, Max, AbsDiff, Neg, DotPlus, Scale, Sup, Inf };

class Formula;

struct FormulaNode {
  NodeKind kind;
  Rational value;            // Const value or Scale factor
  std::string name;          // relation name or bound variable
  std::vector<Term> terms;   // Dist / Rel arguments
  std::vector<Formula> children;
};

/// Immutable continuous-logic formula. Cheap to copy.
class Formula {
 public:
  static Formula constant(const Rational& q);
  static Formula dist(Term a, Term b);
  static Formula rel(const std::string& name, std::vector<Term> args);
  static Formula half(Formula f);
  static Formula dot_minus(Formula f, Formula g);
  static Formula min(Formula f, Formula g);
  static Formula max(Formula f, Formula g);
  static Formula abs_diff(Formula f, Formula g);
  static Formula neg(Formula f);
  static Formula dot_plus(Formula f, Formula g);
  static Formula scale(const Rational& q, Formula f);
  static Formula sup(const std::string& v, Formula f);
  static Formula inf(const std::string& v, Formula f);

  const FormulaNode& node() const { return *node_; }
  NodeKind kind() const { return node_->kind; }
  const Formula& child(std::size_t i) const { return node_->children.at(i); }

  std::set<std::string> free_variables() const;
  /// Constant names occurring anywhere.
  std::set<std::string> constants() const;
  bool is_quantifier_free() const;
  std::size_t depth() const;
  /// Number of nested quantifiers along the deepest branch.
  std::size_t quantifier_depth() const;

  friend bool operator==(const Formula& a, const Formula& b);

 private:
  explicit Formula(std::shared_ptr<const FormulaNode> n) : node_(std::move(n)) {}
  std::shared_ptr<const FormulaNode> node_;
};

/// Parenthesized prefix syntax, e.g. `(sup x (dotminus (d x c) 1/2))`.
/// Names declared as constants in `sig` are constants, other names in
/// term position are variables. Throws ParseError carrying the byte offset.
Formula parse_formula(const std::string& text, const Signature& sig);

/// Canonical printer; parse_formula(to_string(f), sig) == f.
std::string to_string(const Formula& f);

/// Arity and relation-name checks against `sig`. Throws DomainError.
void check_well_formed(const Formula& f, const Signature& sig);

/// Linear inverse continuity modulus coefficient with respect to the
/// displaced names (by default the free variables): changing each displaced
/// name's point by at most t changes the value by at most L*t.
Rational lipschitz(const Formula& f, const Signature& sig);
Rational lipschitz(const Formula& f, const Signature& sig, const std::set<std::string>& displaced);

enum class Comparison { LessThan, GreaterThan };

struct BorelLevel {
  enum class Kind { Sigma, Pi };
  Kind kind = Kind::Sigma;
  unsigned index = 1;

  std::string to_string() const;
  friend bool operator==(const BorelLevel&, const BorelLevel&) = default;
};

/// Level in the Borel hierarchy of the set of structures where
/// `f cmp eps` holds, following the induction on formula complexity.
BorelLevel borel_level(const Formula& f, Comparison cmp);

std::string to_string(Comparison cmp);

}  // namespace ury
