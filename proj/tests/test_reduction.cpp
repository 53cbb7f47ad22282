#include <doctest.h>

#include "support.hpp"
#include "ury/graded.hpp"
#include "ury/reduction.hpp"

using namespace ury;
using namespace ury::testing;

namespace {

Rational R(long p, long q = 1) {
  Rational r(p, q);
  r.canonicalize();
  return r;
}

// Y = {a, b} at distance 1, X = {x, y} at distance 1/2; the swap acts on both
const char* kSwap =
    "space Y\n"
    "points: a b\n"
    "d a b 1\n"
    "space X\n"
    "points: x y\n"
    "d x y 1/2\n"
    "perm s b a | y x\n"
    "basis A x\n"
    "basis B y\n";

// direct evaluation of the defining inf-max
Rational oracle(const ReductionInstance& inst, std::size_t x, const std::vector<std::size_t>& basis_set,
                const std::vector<std::size_t>& ys) {
  Rational best = 1;
  bool any = false;
  for (const auto& g : inst.group)
    for (std::size_t a : basis_set) {
      Rational v = inst.x.d(g.on_x[x], a);
      for (std::size_t i = 0; i < ys.size(); ++i) v = std::max(v, inst.y.d(g.on_y[ys[i]], inst.enumeration[i]));
      if (!any || v < best) best = v;
      any = true;
    }
  return best;
}

}  // namespace

TEST_CASE("reduction instance text") {
  auto inst = parse_reduction_instance(kSwap);
  CHECK(inst.group.size() == 2);
  CHECK(inst.basis_separates());
  CHECK(parse_reduction_instance(format_reduction_instance(inst)) == inst);
  CHECK_THROWS_AS(parse_reduction_instance("space Y\npoints: a\n"), ParseError);
  // not an isometry of Y
  CHECK_THROWS_AS(parse_reduction_instance("space Y\npoints: a b c\nd a b 1\nd a c 1/2\nd b c 1\n"
                                           "space X\npoints: x\nperm s b a c | x\n"
                                           "perm t c b a | x\n"),
                  ParseError);
  // action on X does not factor through Y
  CHECK_THROWS_AS(parse_reduction_instance("space Y\npoints: a b\nd a b 1\nspace X\npoints: x y z\n"
                                           "d x y 1\nd x z 1\nd y z 1\nperm s b a | y z x\n"),
                  ParseError);
}

TEST_CASE("encode: examples") {
  // trivial G, A = {x}: R_k(s_1..s_k) = 0
  auto t = parse_reduction_instance(
      "space Y\npoints: a b\nd a b 1\nspace X\npoints: x y\nd x y 3/4\nbasis A x\nbasis B y\n");
  auto m = encode(t, 0);
  CHECK(m.value(reduction_relation(1, "A"), {0}) == 0);
  CHECK(m.value(reduction_relation(2, "A"), {0, 1}) == 0);
  // A disjoint from x at distance t = 3/4
  CHECK(m.value(reduction_relation(2, "B"), {0, 1}) == R(3, 4));
  CHECK(m.value(reduction_relation(1, "B"), {1}) == 1);
  CHECK_THROWS_AS(encode(t, 0, 3), DomainError);
  CHECK_THROWS_AS(encode(t, 2), DomainError);
  validate_structure(m);

  // swap: hand computation
  auto s = parse_reduction_instance(kSwap);
  auto mx = encode(s, 0);
  // h = e: max(d(a,a), d(x,A)) = 0
  CHECK(mx.value("R1_A", {0}) == 0);
  // y1 = b: h = e gives max(1, 0) = 1; h = s gives max(d(a,a), d(y, A)) = 1/2
  CHECK(mx.value("R1_A", {1}) == R(1, 2));
  CHECK(mx.value("R1_B", {0}) == R(1, 2));
  CHECK(mx.value("R1_B", {1}) == 0);
  CHECK(mx.value("R2_A", {0, 1}) == 0);
  CHECK(mx.value("R2_A", {1, 0}) == R(1, 2));
  CHECK(mx.value("R2_A", {0, 0}) == 1);
}

TEST_CASE("encode matches the inf-max oracle") {
  Rng rng(77);
  for (int t = 0; t < 20; ++t) {
    auto inst = random_reduction_instance(rng, 4, 6);
    for (std::size_t x = 0; x < inst.x.size(); ++x) {
      auto m = encode(inst, x);
      for (std::size_t k = 1; k <= inst.y.size(); ++k)
        for (const auto& [name, set] : inst.basis)
          for (const auto& ys : all_tuples(inst.y.size(), k)) CHECK(m.value(reduction_relation(k, name), ys) == oracle(inst, x, set, ys));
    }
  }
}

TEST_CASE("orbit_equiv: examples") {
  auto s = parse_reduction_instance(kSwap);
  auto same = orbit_equiv(s, 0, 0);
  CHECK(same.same_orbit);
  CHECK(same.isomorphic);
  CHECK(same.witness == std::vector<std::size_t>{0, 1});
  auto swapped = orbit_equiv(s, 0, 1);
  CHECK(swapped.same_orbit);
  CHECK(swapped.isomorphic);
  CHECK(swapped.witness == std::vector<std::size_t>{1, 0});
  CHECK(transport(encode(s, 0), *swapped.witness) == encode(s, 1));

  // trivial group, separated points
  auto t = parse_reduction_instance(
      "space Y\npoints: a b\nd a b 1\nspace X\npoints: x y\nd x y 3/4\nbasis A x\nbasis B y\n");
  auto apart = orbit_equiv(t, 0, 1);
  CHECK_FALSE(apart.same_orbit);
  CHECK_FALSE(apart.isomorphic);
  CHECK_FALSE(apart.witness.has_value());
}

TEST_CASE("reduction soundness and invariance on random instances") {
  Rng rng(99);
  std::size_t nontrivial = 0, cross = 0;
  for (int t = 0; t < 40; ++t) {
    auto inst = random_reduction_instance(rng);
    REQUIRE(inst.y.size() <= 5);
    REQUIRE(inst.x.size() <= 8);
    REQUIRE(inst.basis_separates());
    if (inst.group.size() > 1) ++nontrivial;
    CHECK(check_reduction_invariance(inst).ok());
    std::vector<FiniteStructure> enc;
    for (std::size_t x = 0; x < inst.x.size(); ++x) enc.push_back(encode(inst, x));
    for (std::size_t x = 0; x < inst.x.size(); ++x)
      for (std::size_t x2 = 0; x2 < inst.x.size(); ++x2) {
        auto r = orbit_equiv(inst, x, x2);
        CHECK(r.agree());
        if (r.same_orbit && x != x2) ++cross;
        if (x != x2) CHECK(!(enc[x] == enc[x2]));
      }
  }
  CHECK(nontrivial > 10);
  CHECK(cross > 10);
}
