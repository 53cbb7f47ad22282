#pragma once

#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ury/formula.hpp"
#include "ury/metric.hpp"

namespace ury {

using Tuple = std::vector<std::size_t>;
/// Variable name -> point index.
using Assignment = std::map<std::string, std::size_t>;

/// Finite metric L-structure: a metric space with total relation tables and
/// constant interpretations.
class FiniteStructure {
 public:
  FiniteStructure() = default;
  /// All relations start out as the constant 0 table; constants are unset.
  FiniteStructure(RationalMetricSpace space, Signature sig);

  const RationalMetricSpace& space() const { return space_; }
  const Signature& signature() const { return sig_; }
  std::size_t size() const { return space_.size(); }

  const Rational& value(const std::string& rel, const Tuple& t) const;
  void set_value(const std::string& rel, const Tuple& t, const Rational& v);
  /// Flat table of a relation, tuples in lexicographic order.
  const std::vector<Rational>& table(const std::string& rel) const;

  void set_constant(const std::string& name, std::size_t point);
  std::size_t constant(const std::string& name) const;
  const std::map<std::string, std::size_t>& constants() const { return constants_; }

  friend bool operator==(const FiniteStructure&, const FiniteStructure&) = default;

 private:
  std::size_t offset(const Signature::Relation& r, const Tuple& t) const;
  RationalMetricSpace space_;
  Signature sig_;
  std::map<std::string, std::vector<Rational>> tables_;
  std::map<std::string, std::size_t> constants_;
};

/// All tuples of length k over n points, lexicographic.
std::vector<Tuple> all_tuples(std::size_t n, std::size_t k);

struct ModulusViolation {
  std::string relation;
  Tuple x, y;
  std::string describe() const;
};

/// First pair of tuples with |R(x)-R(y)| > c * max_i d(x_i, y_i), if any.
std::optional<ModulusViolation> modulus_violation(const FiniteStructure& m);

/// Checks values in [0,1], every constant interpreted, and modulus
/// compliance. Throws DomainError.
void validate_structure(const FiniteStructure& m);

/// Exact value. Throws DomainError for unbound variables or ill-formed atoms.
Rational eval(const Formula& f, const FiniteStructure& m, const Assignment& a = {});

/// (relation, tuple) pairs indexing the weighted structure distance.
using TupleEnumeration = std::vector<std::pair<std::string, Tuple>>;

/// Every relation tuple, relations in signature order, tuples lexicographic.
TupleEnumeration default_enumeration(const FiniteStructure& m);

/// Enclosure of sum_i 2^{-i} |R^M(t_i) - R^N(t_i)| (i from 1) from the first
/// k terms; the tail contributes at most 2^{-min(k, |enumeration|)}.
Enclosure delta_seq(const FiniteStructure& m, const FiniteStructure& n, const TupleEnumeration& enumeration,
                    unsigned k);

/// Decides eval(f, m, a) < eps (or > eps) exactly.
bool mod_member(const FiniteStructure& m, const Formula& f, const Assignment& a, const Rational& eps, Comparison cmp);

// ---------------------------------------------------------------------------
// Separable-categoricity probe at finite scale.
//
// Tuples use the variables x1..xn; extension formulas may also use x{n+1}.
// A condition is (phi <= delta) with phi from the pool in x1..xn and delta a
// value phi takes on M^n.

struct Condition {
  Formula formula;
  Rational bound;
};

struct ExtensionFailure {
  std::size_t condition;          // index into the candidate list
  Tuple tuple;                    // a, satisfying the condition
  Tuple realizer;                 // (n+1)-tuple realizing Delta
  std::vector<Condition> delta;   // the Delta that cannot be realized near a
};

struct ScProbeReport {
  enum class Outcome { Witness, Counterexample, Inconclusive };
  Outcome outcome = Outcome::Inconclusive;
  std::vector<Condition> family;       // Witness: the cover
  bool minimal = false;                // Witness: family has least size
  std::optional<Tuple> uncovered;      // Counterexample: tuple no valid condition covers
  std::vector<ExtensionFailure> failures;  // Counterexample: why covering conditions were rejected
  std::size_t candidates = 0;
  std::size_t valid = 0;
  std::string note;
};

std::string to_string(ScProbeReport::Outcome o);

ScProbeReport sc_probe(const FiniteStructure& m, std::size_t n, const Rational& eps, const std::vector<Formula>& pool,
                       std::size_t depth, std::size_t budget = 200000);

// ---------------------------------------------------------------------------
// Text format: metric block, then `rel <name> [coefficient]` blocks of
// `v p1 .. pk num/den` lines, and `const <name> <point>` lines.

FiniteStructure parse_structure(const std::string& text);
std::string format_structure(const FiniteStructure& m);

// ---------------------------------------------------------------------------
// Generators

/// Random modulus-compliant tables over `space` for every relation of `sig`:
/// random seed values on a few tuples, spread by inf-convolution with the
/// relation's modulus. Constants are assigned to random points.
FiniteStructure random_structure(std::mt19937_64& rng, const RationalMetricSpace& space, const Signature& sig,
                                 long denominator = 8);

}  // namespace ury
