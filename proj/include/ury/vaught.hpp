#pragma once

#include <map>
#include <random>
#include <string>
#include <vector>

#include "ury/rational.hpp"

namespace ury {

/// Values in [0,1] indexed by point or by group element.
using GradedTable = std::vector<Rational>;
/// Membership by point or by group element.
using Subset = std::vector<bool>;

/// A finite group given by its elements as permutations of a finite point
/// set, with graded subsets of the points and of the group attached by name.
/// Discrete topology throughout: "not meagre in u" means "meets u".
class FiniteGSpace {
 public:
  FiniteGSpace() = default;
  /// Elements must be distinct permutations closed under composition and
  /// contain the identity. Throws DomainError otherwise.
  FiniteGSpace(std::vector<std::string> points, std::vector<std::pair<std::string, std::vector<std::size_t>>> elements);

  /// Closes `generators` under composition; new elements are named by words.
  static FiniteGSpace generated(std::vector<std::string> points,
                                std::vector<std::pair<std::string, std::vector<std::size_t>>> generators);

  std::size_t num_points() const { return points_.size(); }
  std::size_t order() const { return names_.size(); }
  const std::vector<std::string>& points() const { return points_; }
  const std::vector<std::string>& element_names() const { return names_; }
  std::size_t identity() const { return identity_; }

  /// g . x
  std::size_t act(std::size_t g, std::size_t x) const { return action_[g][x]; }
  /// (gh)(x) = g(h(x))
  std::size_t mul(std::size_t g, std::size_t h) const { return mul_[g][h]; }
  std::size_t inv(std::size_t g) const { return inv_[g]; }
  const std::vector<std::size_t>& permutation(std::size_t g) const { return action_[g]; }

  std::size_t point_index(const std::string& name) const;
  std::size_t element_index(const std::string& name) const;

  void add_space_table(const std::string& name, GradedTable t);
  void add_group_table(const std::string& name, GradedTable t);
  const std::map<std::string, GradedTable>& space_tables() const { return space_tables_; }
  const std::map<std::string, GradedTable>& group_tables() const { return group_tables_; }
  const GradedTable& space_table(const std::string& name) const;
  const GradedTable& group_table(const std::string& name) const;

  void check_space_table(const GradedTable& t) const;
  void check_group_table(const GradedTable& t) const;

  friend bool operator==(const FiniteGSpace&, const FiniteGSpace&) = default;

 private:
  std::vector<std::string> points_;
  std::vector<std::string> names_;
  std::vector<std::vector<std::size_t>> action_;
  std::vector<std::vector<std::size_t>> mul_;
  std::vector<std::size_t> inv_;
  std::size_t identity_ = 0;
  std::map<std::string, GradedTable> space_tables_;
  std::map<std::string, GradedTable> group_tables_;
};

/// `points x y ..`, `perm <name> <images>`, `graded-space <name> <values>`,
/// `graded-group <name> <values>`.
FiniteGSpace parse_gspace(const std::string& text);
std::string format_gspace(const FiniteGSpace& x);

/// phi^{Delta J}(x) = min_h phi(h x) +. J(h). The definition-level threshold
/// scan is computed as well and a disagreement throws ConstructionError.
GradedTable vaught_delta(const FiniteGSpace& x, const GradedTable& phi, const GradedTable& j);
/// phi^{*J}(x) = max_h phi(h x) -. J(h), checked the same way.
GradedTable vaught_star(const FiniteGSpace& x, const GradedTable& phi, const GradedTable& j);

/// Direct evaluation of the inf/sup over thresholds (r, s) with the set
/// conditions of the definition. Thresholds range over the values of phi and
/// J, each approached from the side the strict inequality requires.
GradedTable vaught_delta_scan(const FiniteGSpace& x, const GradedTable& phi, const GradedTable& j);
GradedTable vaught_star_scan(const FiniteGSpace& x, const GradedTable& phi, const GradedTable& j);

struct VaughtSets {
  Subset star;   // points x with h.x in A for every h in u
  Subset delta;  // points x with h.x in A for some h in u
};

/// Throws DomainError when u is empty.
VaughtSets vaught_sets(const FiniteGSpace& x, const Subset& a, const Subset& u);

/// O_A: 0 on A, 1 off A.
GradedTable characteristic(const Subset& a);
/// {i : t(i) < r} or {i : t(i) <= r}.
Subset below(const GradedTable& t, const Rational& r, bool strict);

/// rho = Hg: rho(h) = H(h g^-1).
GradedTable coset(const FiniteGSpace& x, const GradedTable& h, std::size_t g);
/// H^g(h) = H(g h g^-1).
GradedTable conjugate(const FiniteGSpace& x, const GradedTable& h, std::size_t g);
/// H(1) = 0, symmetric, H(gh) <= H(g) +. H(h).
bool is_graded_subgroup(const FiniteGSpace& x, const GradedTable& h);
/// phi(g x) <= phi(x) +. H(g) everywhere.
bool is_invariant(const FiniteGSpace& x, const GradedTable& phi, const GradedTable& h);

struct NiceClosure {
  std::vector<GradedTable> family;
  std::size_t applications = 0;
  bool fixed_point = false;
};

/// Closes `family` under 1-x, min, max, |x-y|, -., +., q (.) x for q in
/// `scales`, and both transforms by every table of `cosets`, spending at most
/// `budget` operation applications. Input order is kept; new tables follow in
/// discovery order.
NiceClosure nice_closure(const FiniteGSpace& x, std::vector<GradedTable> family, const std::vector<GradedTable>& cosets,
                         std::size_t budget, const std::vector<Rational>& scales = {});

struct LemmaCheck {
  std::string name;
  std::size_t checks = 0;
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

/// Every transform identity and inequality of the finite model, over all
/// attached space tables and group tables. Properties that need a graded
/// subgroup use the group tables passing is_graded_subgroup; the
/// delta-below-star inequality uses tables with J(1) = 0.
std::vector<LemmaCheck> lemma_suite(const FiniteGSpace& x);

/// Random G-space: at most `max_order` elements on at most `max_points`
/// points, space tables on the grid k/den, a few graded subgroups (weighted
/// displacement counts and capped word length) and one arbitrary group table
/// with J(1) = 0.
FiniteGSpace random_gspace(std::mt19937_64& rng, std::size_t max_order = 24, std::size_t max_points = 12, long den = 8);

}  // namespace ury
