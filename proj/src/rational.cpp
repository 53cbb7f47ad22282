#include "ury/rational.hpp"

#include <algorithm>
#include <cctype>

#include "ury/error.hpp"

namespace ury {

namespace {

bool is_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

}  // namespace

Rational parse_rational(std::string_view text) {
  std::string_view body = text;
  bool negative = false;
  if (!body.empty() && (body.front() == '-' || body.front() == '+')) {
    negative = body.front() == '-';
    body.remove_prefix(1);
  }
  auto slash = body.find('/');
  std::string_view num = body.substr(0, slash);
  std::string_view den = slash == std::string_view::npos ? std::string_view("1") : body.substr(slash + 1);
  if (!is_digits(num) || !is_digits(den)) {
    throw ParseError("malformed rational '" + std::string(text) + "' (expected num/den)", 0);
  }
  Integer n(std::string(num), 10);
  Integer d(std::string(den), 10);
  if (d == 0) throw ParseError("zero denominator in '" + std::string(text) + "'", 0);
  Rational q(n, d);
  q.canonicalize();
  return negative ? Rational(-q) : q;
}

std::string to_string(const Rational& q) { return q.get_str(10); }

Rational dot_plus(const Rational& x, const Rational& y) {
  Rational s = x + y;
  return s > 1 ? Rational(1) : s;
}

Rational dot_minus(const Rational& x, const Rational& y) {
  Rational s = x - y;
  return s < 0 ? Rational(0) : s;
}

Rational dot_scale(const Rational& q, const Rational& x) {
  Rational s = q * x;
  return s > 1 ? Rational(1) : s;
}

Rational negation(const Rational& x) { return Rational(1) - x; }

Rational pow2_neg(unsigned k) {
  Integer den;
  mpz_ui_pow_ui(den.get_mpz_t(), 2, k);
  return Rational(Integer(1), den);
}

std::string Enclosure::to_string() const { return "lo " + ury::to_string(lo) + " hi " + ury::to_string(hi); }

Enclosure sqrt_enclosure(const Rational& x, unsigned bits) {
  if (x < 0) throw DomainError("square root of a negative rational");
  const Integer& p = x.get_num();
  const Integer& q = x.get_den();
  if (mpz_perfect_square_p(p.get_mpz_t()) && mpz_perfect_square_p(q.get_mpz_t())) {
    Integer rp, rq;
    mpz_sqrt(rp.get_mpz_t(), p.get_mpz_t());
    mpz_sqrt(rq.get_mpz_t(), q.get_mpz_t());
    Rational r(rp, rq);
    r.canonicalize();
    return Enclosure::exact(r);
  }
  // sqrt(p/q) = sqrt(p*q)/q, scaled by 2^bits before taking the integer root.
  Integer scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 2, bits);
  Integer n = p * q * scale * scale;
  Integer s;
  mpz_sqrt(s.get_mpz_t(), n.get_mpz_t());
  Integer den = q * scale;
  Rational lo(s, den), hi(Integer(s + 1), den);
  lo.canonicalize();
  hi.canonicalize();
  return {lo, hi};
}

int surd_compare(const Rational& p, const Rational& a, const Rational& q, const Rational& b) {
  Rational lhs = p * p * a;
  Rational rhs = q * q * b;
  return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
}

bool surd_sum_leq(const Rational& p, const Rational& a, const Rational& q, const Rational& b,
                  const Rational& r, const Rational& c) {
  Rational t = p * p * a - q * q * b - r * r * c;
  if (t <= 0) return true;
  return t * t <= 4 * q * q * r * r * b * c;
}

Enclosure dot_plus(const Enclosure& x, const Enclosure& y) {
  return {dot_plus(x.lo, y.lo), dot_plus(x.hi, y.hi)};
}

Enclosure dot_minus(const Enclosure& x, const Enclosure& y) {
  return {dot_minus(x.lo, y.hi), dot_minus(x.hi, y.lo)};
}

Enclosure dot_scale(const Rational& q, const Enclosure& x) {
  return {dot_scale(q, x.lo), dot_scale(q, x.hi)};
}

Enclosure negation(const Enclosure& x) { return {negation(x.hi), negation(x.lo)}; }

Enclosure half(const Enclosure& x) { return {x.lo / 2, x.hi / 2}; }

Enclosure min(const Enclosure& x, const Enclosure& y) {
  return {std::min(x.lo, y.lo), std::min(x.hi, y.hi)};
}

Enclosure max(const Enclosure& x, const Enclosure& y) {
  return {std::max(x.lo, y.lo), std::max(x.hi, y.hi)};
}

Enclosure abs_diff(const Enclosure& x, const Enclosure& y) {
  // |x - y| over the box [x] x [y].
  Rational hi = std::max(abs(Rational(x.hi - y.lo)), abs(Rational(y.hi - x.lo)));
  Rational lo = 0;
  if (x.lo > y.hi) lo = x.lo - y.hi;
  else if (y.lo > x.hi) lo = y.lo - x.hi;
  return {lo, hi};
}

Enclosure hull(const Enclosure& x, const Enclosure& y) {
  return {std::min(x.lo, y.lo), std::max(x.hi, y.hi)};
}

Enclosure clamp_unit(const Enclosure& x) {
  auto clamp = [](const Rational& v) { return v < 0 ? Rational(0) : (v > 1 ? Rational(1) : v); };
  return {clamp(x.lo), clamp(x.hi)};
}

Enclosure intersect(const Enclosure& x, const Enclosure& y) {
  Enclosure r{std::max(x.lo, y.lo), std::min(x.hi, y.hi)};
  if (r.lo > r.hi) {
    throw ConstructionError("disjoint enclosures " + x.to_string() + " and " + y.to_string());
  }
  return r;
}

}  // namespace ury
