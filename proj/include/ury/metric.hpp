#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ury/error.hpp"
#include "ury/rational.hpp"

namespace ury {

using PointId = std::string;

/// An unvalidated candidate: ids plus a square table of distances.
struct DistanceTable {
  std::vector<PointId> points;
  std::vector<std::vector<Rational>> dist;
};

struct MetricViolation {
  enum class Kind {
    Shape,        // table is not square / does not match the id list
    DuplicateId,
    Diagonal,     // d(x,x) != 0
    Range,        // entry outside [0,1]
    Asymmetry,    // d(x,y) != d(y,x)
    Degenerate,   // d(x,y) == 0 for distinct ids
    Triangle,     // d(x,z) > d(x,y) + d(y,z); points = {x, y, z}
  };
  Kind kind;
  std::vector<PointId> points;
  std::string detail;
};

std::string to_string(MetricViolation::Kind kind);

struct ValidationReport {
  std::vector<MetricViolation> violations;
  bool ok() const { return violations.empty(); }
  std::string describe() const;
};

/// Checks every metric-space invariant exhaustively (all pairs, all triples)
/// and lists every violation found.
ValidationReport validate_metric(const DistanceTable& candidate);

class MetricError : public DomainError {
 public:
  explicit MetricError(ValidationReport report)
      : DomainError("invalid metric space: " + report.describe()), report_(std::move(report)) {}
  const ValidationReport& report() const noexcept { return report_; }

 private:
  ValidationReport report_;
};

/// Finite metric space with exact rational distances in [0,1]. Immutable
/// once built; every instance has passed validate_metric.
class RationalMetricSpace {
 public:
  RationalMetricSpace() = default;

  /// Throws MetricError when the table is not a valid metric.
  static RationalMetricSpace from_table(const DistanceTable& table);

  std::size_t size() const noexcept { return ids_.size(); }
  const std::vector<PointId>& points() const noexcept { return ids_; }
  const PointId& id(std::size_t i) const { return ids_.at(i); }

  const Rational& d(std::size_t i, std::size_t j) const { return dist_[i * ids_.size() + j]; }
  const Rational& d(const PointId& a, const PointId& b) const { return d(index(a), index(b)); }

  std::optional<std::size_t> find(const PointId& id) const;
  /// Throws DomainError for unknown ids.
  std::size_t index(const PointId& id) const;
  bool contains(const PointId& id) const { return find(id).has_value(); }

  DistanceTable table() const;
  /// Subspace on the listed points, in the listed order.
  RationalMetricSpace restrict_to(const std::vector<PointId>& ids) const;

  friend bool operator==(const RationalMetricSpace& a, const RationalMetricSpace& b) {
    return a.ids_ == b.ids_ && a.dist_ == b.dist_;
  }

 private:
  friend RationalMetricSpace append_point_unchecked(const RationalMetricSpace&, const PointId&,
                                                    const std::vector<Rational>&);
  std::vector<PointId> ids_;
  std::vector<Rational> dist_;
  std::map<PointId, std::size_t> index_;
};

/// Appends a point whose distances to the existing points are `to_existing`.
/// The caller guarantees the result is a metric (e.g. via Katetov admissibility).
RationalMetricSpace append_point_unchecked(const RationalMetricSpace& space, const PointId& id,
                                           const std::vector<Rational>& to_existing);

/// Max-metric distance between two equal-length tuples of point indices.
Rational tuple_distance(const RationalMetricSpace& space, const std::vector<std::size_t>& a,
                        const std::vector<std::size_t>& b);

// ---------------------------------------------------------------------------
// Katetov functions and one-point extensions

/// Candidate distances from a new point to every point of `base`, in the
/// base's point order.
struct KatetovFunction {
  std::vector<Rational> values;

  static KatetovFunction from_map(const RationalMetricSpace& base, const std::map<PointId, Rational>& values);
};

/// First pair (a, b) with |f(a)-f(b)| > d(a,b) or d(a,b) > f(a)+f(b), or a
/// single index (a, a) when a value is outside (0,1].
std::optional<std::pair<std::size_t, std::size_t>> admissibility_violation(const RationalMetricSpace& base,
                                                                           const std::vector<Rational>& values);

/// Adds one point p with d(p, a) = f(a). Rejects inadmissible f, naming the
/// violated pair.
RationalMetricSpace one_point_extend(const RationalMetricSpace& space, const KatetovFunction& f,
                                     const PointId& new_id);

/// Least Katetov function above the partial assignment `values` on `subset`
/// (indices into `space`), capped at 1: x -> min(1, min_a values[a] + d(a,x)).
std::vector<Rational> katetov_extension(const RationalMetricSpace& space, const std::vector<std::size_t>& subset,
                                        const std::vector<Rational>& values);

// ---------------------------------------------------------------------------
// Near-copy amalgamation

/// Injective, distance-preserving map source -> target.
struct EmbeddingWitness {
  RationalMetricSpace source;
  RationalMetricSpace target;
  std::vector<std::pair<PointId, PointId>> map;

  /// Re-checks injectivity and exact distance preservation.
  bool verify() const;
};

struct AmalgamationProblem {
  RationalMetricSpace a_space;
  std::vector<PointId> a_points;  // a_1..a_n, points of a_space
  RationalMetricSpace b_space;    // b_1..b_n in its point order
  std::size_t shared = 0;         // q: b_i is identified with a_i for i <= q
  Rational eps;
};

struct HypothesisReport {
  std::vector<std::string> failures;
  bool ok() const { return failures.empty(); }
  std::string describe() const;
};

class HypothesisError : public DomainError {
 public:
  explicit HypothesisError(HypothesisReport report)
      : DomainError("amalgamation hypotheses fail: " + report.describe()), report_(std::move(report)) {}
  const HypothesisReport& report() const noexcept { return report_; }

 private:
  HypothesisReport report_;
};

enum class AmalgamationRoute {
  Inductive,          // every cross pair got eps_m from the eps/2 / geodesic rule
  InductiveRepaired,  // some eps_m had to be raised inside [eps/2, m*eps]
  ShortestPath,       // the inductive procedure got stuck; capped path metric used
};

std::string to_string(AmalgamationRoute route);

struct CrossStep {
  std::size_t i = 0, j = 0;  // 1-based indices, q < i < j <= n
  Rational level;            // min(d(a_i,a_j), d(b_i,b_j))
  Rational shift;            // eps_m
};

struct AmalgamationResult {
  RationalMetricSpace space;  // a_1..a_n followed by b_{q+1}..b_n
  EmbeddingWitness embedding;
  Rational displacement;      // (2*C(n-q,2)+1)*eps
  AmalgamationRoute route = AmalgamationRoute::Inductive;
  std::vector<CrossStep> steps;
};

/// (2*C(n-q,2)+1) * eps.
Rational amalgamation_displacement(std::size_t n, std::size_t shared, const Rational& eps);

HypothesisReport check_amalgamation_hypotheses(const AmalgamationProblem& problem);

/// Places a copy of B next to a_1..a_n so that b_i sits at distance
/// (2*C(n-q,2)+1)*eps from a_i for q < i <= n and coincides with a_i for
/// i <= q. Throws HypothesisError, or ConstructionError if the output fails
/// the exhaustive triangle check.
AmalgamationResult amalgamate(const AmalgamationProblem& problem);

// ---------------------------------------------------------------------------
// Finite approximations of the rational Urysohn space

struct ExtensionTask {
  std::vector<PointId> subset;
  std::vector<Rational> values;
  PointId realized_by;
  bool added = false;  // realized by a new point rather than an existing one
};

struct QuApproximation {
  RationalMetricSpace space;
  std::vector<ExtensionTask> certificate;
};

/// All rationals p/r with 1 <= r <= denominator_bound and 0 < p/r <= 1, sorted.
std::vector<Rational> rational_grid(unsigned denominator_bound);

/// Extends `seed` until, for every subset of the seed of size <= budget and
/// every admissible Katetov function on it with values in rational_grid,
/// some point realizes it. Deterministic.
QuApproximation qu_enumerate(const RationalMetricSpace& seed, unsigned denominator_bound, unsigned budget);

// ---------------------------------------------------------------------------
// Text format

/// `points: p1 p2 ...` followed by one `d p q num/den` line per unordered pair.
RationalMetricSpace parse_metric_space(const std::string& text);
std::string format_metric_space(const RationalMetricSpace& space);

/// Parses lines starting at `lines[begin]`; stops at the first line that is
/// neither a `d` line, blank, nor a comment. Returns one past the last line consumed.
std::size_t parse_metric_block(const std::vector<std::string>& lines, std::size_t begin, RationalMetricSpace& out);

}  // namespace ury
