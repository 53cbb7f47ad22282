#pragma once

#include <map>
#include <string>
#include <vector>

#include "ury/formula.hpp"
#include "ury/metric.hpp"
#include "ury/structure.hpp"

namespace ury {

/// Relations on the Urysohn space defined by quantifier-free formulas over
/// distances to finitely many anchors, e.g. R(x) := d(x, u0).
class AnchoredStructure {
 public:
  struct Definition {
    std::vector<std::string> args;
    Formula body;
  };

  explicit AnchoredStructure(RationalMetricSpace anchors);

  /// `body` may mention only d, the anchor names (as constants) and `args`.
  /// The relation's modulus coefficient is the body's Lipschitz constant in
  /// its arguments (1 when that is 0).
  void define(const std::string& name, std::vector<std::string> args, const std::string& body);
  void define(const std::string& name, std::vector<std::string> args, Formula body);

  const RationalMetricSpace& anchors() const { return anchors_; }
  /// Anchors as constants plus the defined relations.
  const Signature& signature() const { return sig_; }
  const Definition& definition(const std::string& name) const;
  const std::map<std::string, Definition>& definitions() const { return defs_; }

  /// The same relations restricted to the anchor points.
  FiniteStructure induced_structure() const;

 private:
  RationalMetricSpace anchors_;
  Signature sig_;
  std::map<std::string, Definition> defs_;
};

/// Text: metric block of anchors, then `def <name> <args..> := <body>` lines.
AnchoredStructure parse_anchored(const std::string& text);
std::string format_anchored(const AnchoredStructure& m);

struct QuantifierBudget {
  Rational mesh = Rational(1, 8);
  unsigned rounds = 3;
  /// Cap on boxes examined per quantifier; once hit, open boxes are kept
  /// unsplit, which only widens the enclosure.
  std::size_t max_cells = 100000;
};

struct UrysohnResult {
  Enclosure value;
  std::vector<Enclosure> rounds;  // after each refinement round, nested
};

/// Certified enclosure of a sentence (constants = anchor names) over the
/// Urysohn space of diameter 1.
UrysohnResult eval_urysohn(const Formula& f, const AnchoredStructure& m, const QuantifierBudget& budget = {});

struct QfDecision {
  Rational value;
  bool less(const Rational& q) const { return value < q; }
  bool greater(const Rational& q) const { return value > q; }
};

/// Exact value of a quantifier-free sentence over the anchor fragment.
QfDecision qf_decide(const Formula& f, const AnchoredStructure& m);

/// Enclosure of inf over e in [0,q] of min(10(q-e),1) +. sqrt(e), the value
/// of the counterexample sentence at d(u0,c) = q; the closed form is sqrt(q).
/// Requires 1/10 < q < 1/2.
Enclosure theta_demo(const Rational& q, const Rational& tol);

}  // namespace ury
