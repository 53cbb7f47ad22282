#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace ury {

using Rational = mpq_class;
using Integer = mpz_class;

/// Parses `num/den` or a plain integer, optionally signed. The result is
/// canonical (reduced, positive denominator). Throws ParseError.
Rational parse_rational(std::string_view text);

/// `num/den`, or just `num` when the denominator is 1.
std::string to_string(const Rational& q);

// Truncated arithmetic on [0,1].
Rational dot_plus(const Rational& x, const Rational& y);   // min(x+y, 1)
Rational dot_minus(const Rational& x, const Rational& y);  // max(x-y, 0)
Rational dot_scale(const Rational& q, const Rational& x);  // min(q*x, 1)
Rational negation(const Rational& x);                      // 1 - x

/// 2^{-k}.
Rational pow2_neg(unsigned k);

inline bool in_unit_interval(const Rational& x) { return x >= 0 && x <= 1; }

/// Closed rational interval [lo, hi].
struct Enclosure {
  Rational lo;
  Rational hi;

  static Enclosure exact(const Rational& v) { return {v, v}; }

  bool contains(const Rational& v) const { return lo <= v && v <= hi; }
  bool contains(const Enclosure& other) const { return lo <= other.lo && other.hi <= hi; }
  Rational width() const { return hi - lo; }
  bool is_exact() const { return lo == hi; }

  /// `lo num/den hi num/den`
  std::string to_string() const;

  friend bool operator==(const Enclosure& a, const Enclosure& b) {
    return a.lo == b.lo && a.hi == b.hi;
  }
};

/// Outward-rounded enclosure of sqrt(x) for x >= 0, of width at most
/// 2^{-bits}. Exact when x is the square of a rational.
Enclosure sqrt_enclosure(const Rational& x, unsigned bits = 64);

/// Exact decision of p*sqrt(a) <= q*sqrt(b) + r*sqrt(c) for non-negative
/// coefficients and radicands.
bool surd_sum_leq(const Rational& p, const Rational& a, const Rational& q, const Rational& b,
                  const Rational& r, const Rational& c);

/// Exact comparison of p*sqrt(a) with q*sqrt(b); returns -1, 0 or 1.
int surd_compare(const Rational& p, const Rational& a, const Rational& q, const Rational& b);

// Interval versions of the truncated connectives. Arguments must lie in [0,1].
Enclosure dot_plus(const Enclosure& x, const Enclosure& y);
Enclosure dot_minus(const Enclosure& x, const Enclosure& y);
Enclosure dot_scale(const Rational& q, const Enclosure& x);
Enclosure negation(const Enclosure& x);
Enclosure half(const Enclosure& x);
Enclosure min(const Enclosure& x, const Enclosure& y);
Enclosure max(const Enclosure& x, const Enclosure& y);
Enclosure abs_diff(const Enclosure& x, const Enclosure& y);
Enclosure hull(const Enclosure& x, const Enclosure& y);
/// Clamps both ends into [0,1].
Enclosure clamp_unit(const Enclosure& x);
/// Intersection of two enclosures of the same quantity. Throws
/// ConstructionError when they are disjoint (one of them was unsound).
Enclosure intersect(const Enclosure& x, const Enclosure& y);

}  // namespace ury
