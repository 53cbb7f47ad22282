#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ury/formula.hpp"
#include "ury/metric.hpp"
#include "ury/structure.hpp"

namespace ury {

// ---------------------------------------------------------------------------
// Partial isometries of one finite space, by point index.

class PartialIsometry {
 public:
  PartialIsometry() = default;
  /// Validates injectivity and exact distance preservation; throws DomainError.
  PartialIsometry(const RationalMetricSpace& space, std::map<std::size_t, std::size_t> map);

  static PartialIsometry identity(const RationalMetricSpace& space);
  /// From a permutation given as images of 0..n-1.
  static PartialIsometry from_permutation(const RationalMetricSpace& space, const std::vector<std::size_t>& images);

  std::optional<std::size_t> apply(std::size_t x) const;
  std::size_t at(std::size_t x) const;  // throws DomainError when undefined
  bool defined_on(const std::vector<std::size_t>& points) const;
  const std::map<std::size_t, std::size_t>& map() const { return map_; }
  bool is_total(std::size_t n) const { return map_.size() == n; }

  /// (this o other)(x) = this(other(x)), on the points where both steps exist.
  PartialIsometry compose(const PartialIsometry& other) const;
  PartialIsometry inverse() const;

  friend bool operator==(const PartialIsometry&, const PartialIsometry&) = default;

 private:
  std::map<std::size_t, std::size_t> map_;
};

/// `map p q` lines.
PartialIsometry parse_partial_isometry(const std::string& text, const RationalMetricSpace& space);
std::string format_partial_isometry(const PartialIsometry& g, const RationalMetricSpace& space);

/// Every distance-preserving permutation of the space, lexicographic by images.
std::vector<std::vector<std::size_t>> isometries(const RationalMetricSpace& space);

/// Isometries that also preserve every relation table; constants are fixed
/// when `fix_constants`.
std::vector<std::vector<std::size_t>> automorphisms(const FiniteStructure& m, bool fix_constants);

/// Transport of structure: R^{g(M)}(g x) = R^M(x), constants c -> g(c).
FiniteStructure transport(const FiniteStructure& m, const std::vector<std::size_t>& perm);

// ---------------------------------------------------------------------------
// Graded subgroups and cosets given by displacement of a finite tuple.

/// min(1, coef * sqrt(radicand)); linear values are stored as coef*sqrt(t^2).
struct GradedValue {
  Rational coef = 0;
  Rational radicand = 0;

  bool capped() const;  // coef*sqrt(radicand) >= 1
  Enclosure enclosure(unsigned bits = 64) const;
  /// Exact rational value when there is one.
  std::optional<Rational> exact() const;
  std::string to_string() const;
};

/// a <= b, exactly.
bool leq(const GradedValue& a, const GradedValue& b);
bool equal(const GradedValue& a, const GradedValue& b);
/// value < eps, exactly.
bool below(const GradedValue& a, const Rational& eps);
/// a <= b +. c, exactly.
bool leq_dot_sum(const GradedValue& a, const GradedValue& b, const GradedValue& c);

struct GradedDescriptor {
  enum class Kind { Linear, Sqrt, Max };
  Kind kind = Kind::Linear;
  Rational q = 1;
  std::vector<std::size_t> base;   // s
  std::vector<std::size_t> shift;  // s'; equal to base for a subgroup
  std::vector<GradedDescriptor> parts;

  static GradedDescriptor linear(Rational q, std::vector<std::size_t> s, std::vector<std::size_t> s_shift = {});
  static GradedDescriptor sqrt(Rational q, std::vector<std::size_t> s, std::vector<std::size_t> s_shift = {});
  static GradedDescriptor max(std::vector<GradedDescriptor> parts);

  bool is_subgroup() const;
  /// Every point the descriptor reads.
  std::vector<std::size_t> support() const;
  /// Throws DomainError on q <= 0, length mismatch or empty max.
  void validate(std::size_t space_size) const;

  friend bool operator==(const GradedDescriptor&, const GradedDescriptor&) = default;
};

/// Linear: q (.) max_i d(g s_i, s'_i); sqrt: q (.) sqrt(max_i ...); max: pointwise max.
GradedValue graded_eval(const GradedDescriptor& h, const PartialIsometry& g, const RationalMetricSpace& space);

struct AxiomViolation {
  enum class Kind { Identity, Symmetry, Subadditivity };
  Kind kind;
  std::size_t sample;  // index of the offending pair
  std::string detail;
};

struct AxiomReport {
  std::size_t checked_pairs = 0;
  std::size_t symmetry_checks = 0;
  std::vector<AxiomViolation> violations;
  bool ok() const { return violations.empty(); }
};

/// H(1) = 0, H(g) = H(g^-1) where g^-1 is defined on the support, and
/// H(gg') <= H(g) +. H(g') for every supplied pair. Throws DomainError for a
/// coset descriptor or a pair whose product is undefined on the support.
AxiomReport check_graded_axioms(const GradedDescriptor& h, const std::vector<std::pair<PartialIsometry, PartialIsometry>>& pairs,
                                const RationalMetricSpace& space);

/// Sum_{i<=k} 2^-i min(1, d(g s_i, h s_i)) plus the tail bound 2^-k.
Enclosure rho_s(const PartialIsometry& g, const PartialIsometry& h, const std::vector<std::size_t>& enumeration,
                unsigned k, const RationalMetricSpace& space);

struct InvarianceFailure {
  std::size_t sample;
  Assignment assignment;
  Rational moved;     // phi(g a, c)
  Rational original;  // phi(a, c)
  Rational bound;     // H_{delta,c}(g)
};

struct InvarianceReport {
  Rational delta;  // Lipschitz constant in the parameters
  std::size_t checks = 0;
  std::vector<InvarianceFailure> failures;
  bool ok() const { return failures.empty(); }
};

/// For each automorphism-like sample g (total, distance- and relation-
/// preserving; constants may move) checks phi(g a, c) <= phi(a, c) +. H(g) with
/// H(g) = delta (.) max_i d(g c_i, c_i), over every assignment a of the free
/// variables (at most `max_assignments`, taken in lexicographic order).
InvarianceReport check_formula_invariance(const Formula& phi, const FiniteStructure& m,
                                          const std::vector<PartialIsometry>& samples,
                                          std::size_t max_assignments = 4096);

struct ApproxResult {
  bool found = false;
  std::vector<std::size_t> witness;  // permutation
  GradedValue h_value;
  Rational distance;                 // closeness of g(N) to M
  std::size_t examined = 0;
};

/// Searches fragment isometries g in lexicographic order (at most `budget`)
/// for H(g) < eps and closeness(g(N), M) < eps. Closeness is the weighted
/// tuple distance over `enumeration`: the exact full sum when it lists every
/// tuple and k covers it, otherwise the upper end of delta_seq at k.
ApproxResult approx_search(const FiniteStructure& m, const FiniteStructure& n, const GradedDescriptor& h,
                           const Rational& eps, std::size_t budget, std::optional<TupleEnumeration> enumeration = {},
                           std::optional<unsigned> k = {});

struct OligoResult {
  std::vector<Tuple> family;
  std::size_t group_order = 0;
  /// For every n-tuple: (family index, image tuple under some automorphism,
  /// max-distance), all within eps.
  std::vector<std::tuple<Tuple, std::size_t, Tuple, Rational>> certificate;
};

/// Least family F of n-tuples with Aut(M).F eps-dense (distance <= eps) in
/// M^n, Aut(M) fixing the constants. Throws DomainError past the size guard.
OligoResult oligo_probe(const FiniteStructure& m, std::size_t n, const Rational& eps, std::size_t guard = 2000000);

// ---------------------------------------------------------------------------
// Descriptor text: `graded linear 2 [a b] -> [c d]`, `max{ D ; D }`.

GradedDescriptor parse_descriptor(const std::string& text, const RationalMetricSpace& space);
std::string format_descriptor(const GradedDescriptor& h, const RationalMetricSpace& space);

}  // namespace ury
