#pragma once

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ury/metric.hpp"
#include "ury/structure.hpp"

namespace ury {

/// A finite G-space X coded into structures on a finite metric space Y.
/// G is a group of isometries of Y that also permutes X.
struct ReductionInstance {
  struct Element {
    std::string name;
    std::vector<std::size_t> on_y;
    std::vector<std::size_t> on_x;
    friend bool operator==(const Element&, const Element&) = default;
  };

  RationalMetricSpace y;
  RationalMetricSpace x;  // d^tau
  std::vector<Element> group;  // group[0] is the identity
  std::vector<std::pair<std::string, std::vector<std::size_t>>> basis;  // named subsets of X
  std::vector<std::size_t> enumeration;  // s_1, s_2, ... as indices of Y

  /// Closes the generators under composition; the enumeration defaults to
  /// Y's point order. Throws DomainError if a generator is not an isometry of
  /// Y, if two elements agree on Y but not on X, or on a malformed basis.
  static ReductionInstance make(RationalMetricSpace y, RationalMetricSpace x, std::vector<Element> generators,
                                std::vector<std::pair<std::string, std::vector<std::size_t>>> basis,
                                std::vector<std::size_t> enumeration = {});

  std::size_t element_index(const std::vector<std::size_t>& on_y) const;
  /// Every pair of distinct points is split by two disjoint basis sets, one
  /// containing each point.
  bool basis_separates() const;

  friend bool operator==(const ReductionInstance&, const ReductionInstance&) = default;
};

/// Relation name for R_{k,l}: "R<k>_<basis name>".
std::string reduction_relation(std::size_t k, const std::string& basis_name);

/// M(x): R_{k,l}(y_1..y_k) = min over h in G and x' in A_l of
/// max(max_i d(h y_i, s_i), d^tau(h x, x')), for 1 <= k <= max_k
/// (default |Y|). Throws DomainError for max_k > |Y| or x out of range.
FiniteStructure encode(const ReductionInstance& inst, std::size_t x, std::optional<std::size_t> max_k = {});

struct OrbitEquivResult {
  bool same_orbit = false;
  bool isomorphic = false;
  std::optional<std::size_t> orbit_witness;          // g with g x = x'
  std::optional<std::vector<std::size_t>> witness;   // isometry f of Y with f(M(x)) = M(x')
  bool agree() const { return same_orbit == isomorphic; }
};

/// same_orbit by enumerating G; isomorphic by trying every isometry of Y in
/// lexicographic order against the encoded tables.
OrbitEquivResult orbit_equiv(const ReductionInstance& inst, std::size_t x, std::size_t x2);

struct InvarianceCheck {
  std::size_t checks = 0;
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

/// R^{M(g x)}(y) = R^{M(x)}(g^-1 y) for every g, x, relation and tuple.
InvarianceCheck check_reduction_invariance(const ReductionInstance& inst);

/// Text: `space Y` and `space X` each followed by a metric block,
/// `perm <name> <Y images> | <X images>` generator lines, `basis <name> <points>`
/// lines and an optional `enum <Y points>` line.
ReductionInstance parse_reduction_instance(const std::string& text);
std::string format_reduction_instance(const ReductionInstance& inst);

/// |Y| <= max_y with distances in {1/2, 1}, a subgroup of Iso(Y) acting on
/// |X| <= max_x points built from orbits of Y and fixed points, and a basis
/// that separates points.
ReductionInstance random_reduction_instance(std::mt19937_64& rng, std::size_t max_y = 5, std::size_t max_x = 8);

}  // namespace ury
