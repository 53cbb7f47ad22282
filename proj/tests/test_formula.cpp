#include <doctest.h>

#include "formula_support.hpp"
#include "ury/formula.hpp"

using namespace ury;
using namespace ury::testing;

namespace {

Rational R(long p, long q = 1) {
  Rational r(p, q);
  r.canonicalize();
  return r;
}

Signature unary_r() {
  Signature s;
  s.relation("R", 1).constant("c").constant("u0");
  return s;
}

}  // namespace

TEST_CASE("parse: examples") {
  Signature sig = unary_r();
  CHECK(parse_formula("(d x y)", sig) == Formula::dist(var("x"), var("y")));
  auto f = parse_formula("(sup x (dotminus (d x c) 1/2))", sig);
  CHECK(f.kind() == NodeKind::Sup);
  CHECK(f.child(0).kind() == NodeKind::DotMinus);
  CHECK(f.child(0).child(0) == Formula::dist(var("x"), cst("c")));
  CHECK(f.free_variables().empty());
  CHECK(parse_formula("(R x)", sig) == Formula::rel("R", {var("x")}));
  CHECK(parse_formula("  3/6 ", sig) == Formula::constant(R(1, 2)));
}

TEST_CASE("parse: errors carry positions") {
  Signature sig = unary_r();
  auto offset = [&](const std::string& text) -> long {
    try {
      parse_formula(text, sig);
    } catch (const ParseError& e) {
      return static_cast<long>(e.position());
    }
    return -1;
  };
  CHECK(offset("(foo x)") == 1);             // unknown symbol
  CHECK(offset("(R x y)") == 5);             // arity mismatch
  CHECK(offset("(d x)") == 4);               // arity mismatch for d
  CHECK(offset("(max 3/2 0)") == 5);         // rational out of range
  CHECK(offset("(neg (d x y)") == 12);       // unexpected end
  CHECK(offset("(sup c (d c x))") == 5);     // cannot bind a constant
  CHECK(offset("(scale 0 (d x y))") == 7);   // non-positive factor
  CHECK(offset("(d x y) extra") == 8);       // trailing input
  CHECK(offset("(half 1/0)") == 6);          // malformed rational
}

TEST_CASE("print/parse round trip on random formulas") {
  Rng rng(17);
  Signature sig;
  sig.relation("P", 1).relation("Q", 2, R(3, 2)).constant("c");
  for (int t = 0; t < 500; ++t) {
    Formula f = random_formula(rng, sig, {"x", "y"}, 1 + rng() % 4);
    std::string text = to_string(f);
    Formula g = parse_formula(text, sig);
    CHECK(g == f);
    CHECK(to_string(g) == text);
  }
}

TEST_CASE("signature validation") {
  Signature bad;
  bad.relation("R", 1).relation("R", 2);
  CHECK_THROWS_AS(bad.validate(), DomainError);
  Signature reserved;
  reserved.relation("max", 1);
  CHECK_THROWS_AS(reserved.validate(), DomainError);
  Signature zero;
  zero.relation("R", 1, Rational(0));
  CHECK_THROWS_AS(zero.validate(), DomainError);
  CHECK(Signature().relation("S", 3).relations[0].coefficient == 3);
}

TEST_CASE("lipschitz: examples") {
  Signature sig = unary_r();
  CHECK(lipschitz(Formula::dist(var("x"), var("y")), sig) == 2);
  CHECK(lipschitz(Formula::neg(Formula::dist(var("x"), var("y"))), sig) == 2);
  // one free variable c, with u0 a fixed parameter
  Signature pure;
  pure.constant("u0");
  Formula ten = parse_formula("(scale 10 (d u0 c))", pure);
  CHECK(lipschitz(ten, pure) == 10);
  CHECK(lipschitz(Formula::constant(R(1, 3)), sig) == 0);
  CHECK(lipschitz(parse_formula("(half (R x))", sig), sig) == R(1, 2));
  CHECK(lipschitz(parse_formula("(min (d x y) (scale 3 (R x)))", sig), sig) == 3);
  CHECK(lipschitz(parse_formula("(dotplus (d x y) (scale 3 (R x)))", sig), sig) == 5);
  CHECK(lipschitz(parse_formula("(sup y (d x y))", sig), sig) == 1);
  CHECK(lipschitz(parse_formula("(sup y (d y c))", sig), sig) == 0);
  // displacing a parameter instead
  CHECK(lipschitz(parse_formula("(d x c)", sig), sig, {"c"}) == 1);
}

TEST_CASE("borel_level: examples and duality") {
  Signature sig = unary_r();
  auto lv = [&](const std::string& t, Comparison c) { return borel_level(parse_formula(t, sig), c).index; };
  CHECK(lv("(d x y)", Comparison::LessThan) == 1);
  CHECK(lv("(neg (d x y))", Comparison::LessThan) == 2);
  CHECK(lv("(inf x (R x))", Comparison::LessThan) == 1);
  CHECK(lv("(sup x (R x))", Comparison::LessThan) == 2);
  CHECK(lv("(sup x (R x))", Comparison::GreaterThan) == 2);
  CHECK(lv("(inf x (R x))", Comparison::GreaterThan) == 3);
  CHECK(borel_level(parse_formula("(d x y)", sig), Comparison::LessThan).to_string() == "Sigma 1");

  Rng rng(4);
  for (int t = 0; t < 300; ++t) {
    Formula f = random_formula(rng, sig, {"x"}, 1 + rng() % 4);
    CHECK(borel_level(f, Comparison::LessThan).index == borel_level(Formula::neg(f), Comparison::GreaterThan).index);
    CHECK(borel_level(f, Comparison::LessThan).index >= 1);
  }
}

TEST_CASE("formula queries") {
  Signature sig = unary_r();
  auto f = parse_formula("(max (sup y (inf z (d y z))) (R c))", sig);
  CHECK(f.quantifier_depth() == 2);
  CHECK_FALSE(f.is_quantifier_free());
  CHECK(f.constants() == std::set<std::string>{"c"});
  CHECK(f.depth() == 3);
  CHECK_THROWS_AS(check_well_formed(Formula::rel("R", {var("x"), var("y")}), sig), DomainError);
}
