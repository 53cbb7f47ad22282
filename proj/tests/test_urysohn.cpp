#include <doctest.h>

#include "formula_support.hpp"
#include "ury/urysohn.hpp"

using namespace ury;
using namespace ury::testing;

namespace {

Rational R(long p, long q = 1) {
  Rational r(p, q);
  r.canonicalize();
  return r;
}

AnchoredStructure pair_fragment(Rational d) {
  return AnchoredStructure(space_of({"a", "b"}, {{0, d}, {d, 0}}));
}

}  // namespace

TEST_CASE("eval_urysohn: examples") {
  AnchoredStructure single(space_of({"s"}, {{0}}));
  QuantifierBudget fine{R(1, 1000), 2};
  auto sup = eval_urysohn(parse_formula("(sup x (d s x))", single.signature()), single, fine);
  CHECK(sup.value.contains(1));
  CHECK(sup.value.width() <= R(1, 1000));

  auto pair = pair_fragment(R(3, 5));
  auto inf = eval_urysohn(parse_formula("(inf x (max (d a x) (d b x)))", pair.signature()), pair, fine);
  CHECK(inf.value.contains(R(3, 10)));
  CHECK(inf.value.width() <= R(1, 1000));

  auto c = eval_urysohn(Formula::constant(R(2, 7)), single, {R(1, 2), 1});
  CHECK(c.value == Enclosure::exact(R(2, 7)));
}

TEST_CASE("eval_urysohn: analytic values") {
  auto pair = pair_fragment(R(3, 5));
  QuantifierBudget b{R(1, 64), 3};
  auto sig = pair.signature();
  // a point on the segment at distance t from a exists for every t
  CHECK(eval_urysohn(parse_formula("(inf x (absdiff (dotplus (d a x) (d x b)) 3/5))", sig), pair, b).value.contains(0));
  // the farthest point from both anchors is at distance 1
  CHECK(eval_urysohn(parse_formula("(sup x (min (d a x) (d b x)))", sig), pair, b).value.contains(1));
  // x = a is allowed
  CHECK(eval_urysohn(parse_formula("(inf x (d a x))", sig), pair, b).value.contains(0));
  // nested: every point has a point at distance 1/2 from it
  auto nested = eval_urysohn(parse_formula("(sup x (inf y (absdiff (d x y) 1/2)))", sig), pair, b);
  CHECK(nested.value.contains(0));
}

TEST_CASE("eval_urysohn: enclosures are nested across rounds") {
  Rng rng(31);
  auto frag = AnchoredStructure(random_space(rng, 3, 6, 2, "u"));
  Signature sig = frag.signature();
  for (int t = 0; t < 12; ++t) {
    Formula body = random_formula(rng, sig, {"x"}, 2, false);
    Formula f = (t % 2) ? Formula::sup("x", body) : Formula::inf("x", body);
    auto res = eval_urysohn(f, frag, {R(1, 4), 3, 20000});
    for (std::size_t r = 1; r < res.rounds.size(); ++r) CHECK(res.rounds[r - 1].contains(res.rounds[r]));
  }
}

TEST_CASE("eval_urysohn agrees with finite evaluation on the anchor points") {
  // finite sup over anchors is a lower bound, finite inf an upper bound
  Rng rng(44);
  for (int t = 0; t < 15; ++t) {
    AnchoredStructure frag(random_space(rng, 3, 5, 1, "u"));
    frag.define("P", {"z"}, "(d z u1)");
    Signature sig = frag.signature();
    Formula body = random_formula(rng, sig, {"x"}, 2, false);
    auto fin = frag.induced_structure();
    auto sup = eval_urysohn(Formula::sup("x", body), frag, {R(1, 4), 2, 20000});
    auto inf = eval_urysohn(Formula::inf("x", body), frag, {R(1, 4), 2, 20000});
    CHECK(eval(Formula::sup("x", body), fin) <= sup.value.hi);
    CHECK(eval(Formula::inf("x", body), fin) >= inf.value.lo);
  }
}

TEST_CASE("anchored predicates") {
  AnchoredStructure frag(space_of({"u0", "c"}, {{0, R(1, 4)}, {R(1, 4), 0}}));
  frag.define("R", {"x"}, "(d x u0)");
  CHECK(frag.signature().find_relation("R")->coefficient == 1);
  CHECK(qf_decide(parse_formula("(R c)", frag.signature()), frag).value == R(1, 4));
  CHECK_THROWS_AS(frag.define("S", {"x"}, "(sup y (d x y))"), DomainError);
  CHECK_THROWS_AS(frag.define("S", {"x"}, "(d y u0)"), DomainError);
  CHECK_THROWS_AS(frag.define("S", {"u0"}, "(d u0 c)"), DomainError);
  auto sup = eval_urysohn(parse_formula("(sup x (R x))", frag.signature()), frag, {R(1, 16), 2});
  CHECK(sup.value.contains(1));
}

TEST_CASE("qf_decide: examples") {
  AnchoredStructure frag(space_of({"s", "t", "u"}, {{0, R(2, 5), R(1, 2)}, {R(2, 5), 0, R(3, 4)}, {R(1, 2), R(3, 4), 0}}));
  auto sig = frag.signature();
  CHECK(qf_decide(parse_formula("(d s s)", sig), frag).value == 0);
  CHECK(qf_decide(parse_formula("(neg (d s t))", sig), frag).value == R(3, 5));
  auto dm = qf_decide(parse_formula("(dotminus (d s u) (d t u))", sig), frag);
  CHECK(dm.value == 0);
  CHECK(dm.less(R(1, 100)));
  CHECK_FALSE(dm.greater(0));
  Signature other;
  other.constant("zz");
  CHECK_THROWS_AS(qf_decide(parse_formula("(d zz zz)", other), frag), DomainError);
  CHECK_THROWS_AS(qf_decide(parse_formula("(sup x (d x s))", sig), frag), DomainError);
}

TEST_CASE("qf_decide agrees with eval_finite") {
  Rng rng(71);
  for (int t = 0; t < 60; ++t) {
    AnchoredStructure frag(random_space(rng, 4, 8, 1, "u"));
    frag.define("P", {"z"}, "(half (d z u2))");
    Signature sig = frag.signature();
    Formula f = random_formula(rng, sig, {}, 1 + rng() % 4, false);
    CHECK(qf_decide(f, frag).value == eval(f, frag.induced_structure()));
  }
}

TEST_CASE("theta_demo") {
  CHECK(theta_demo(R(1, 4), R(1, 1000000)).contains(R(1, 2)));
  CHECK(theta_demo(R(49, 100), R(1, 1000000)).contains(R(7, 10)));
  CHECK_THROWS_AS(theta_demo(R(1, 20), R(1, 1000)), DomainError);
  CHECK_THROWS_AS(theta_demo(R(1, 2), R(1, 1000)), DomainError);
  for (long k = 11; k <= 49; ++k) {
    Rational q(k, 100);
    q.canonicalize();
    Enclosure e = theta_demo(q, R(1, 1000000));
    CHECK(e.width() <= R(1, 1000000));
    CHECK(e.lo * e.lo <= q);
    CHECK(e.hi * e.hi >= q);
  }
}
