#include <doctest.h>

#include <set>

#include "support.hpp"
#include "ury/vaught.hpp"

using namespace ury;
using namespace ury::testing;

namespace {

Rational R(long p, long q = 1) {
  Rational r(p, q);
  r.canonicalize();
  return r;
}

FiniteGSpace swap_space() { return parse_gspace("points x y\nperm e x y\nperm s y x\n"); }

FiniteGSpace trivial_space() { return parse_gspace("points x y z\nperm e x y z\n"); }

}  // namespace

TEST_CASE("G-space text format") {
  auto x = parse_gspace(
      "# swap\n"
      "points x y\n"
      "perm e x y\n"
      "perm s y x\n"
      "graded-space phi 0 1\n"
      "graded-group J 0 1/2\n");
  CHECK(x.order() == 2);
  CHECK(x.identity() == 0);
  CHECK(x.act(1, 0) == 1);
  CHECK(x.mul(1, 1) == 0);
  CHECK(x.inv(1) == 1);
  CHECK(x.space_table("phi") == GradedTable{0, 1});
  CHECK(x.group_table("J") == GradedTable{0, R(1, 2)});
  CHECK(parse_gspace(format_gspace(x)) == x);
  CHECK(format_gspace(x) == "points x y\nperm e x y\nperm s y x\ngraded-space phi 0 1\ngraded-group J 0 1/2\n");

  CHECK_THROWS_AS(parse_gspace("points x y\nperm s y x\n"), ParseError);               // no identity
  CHECK_THROWS_AS(parse_gspace("points x y z\nperm e x y z\nperm a y z x\n"), ParseError);  // not closed
  CHECK_THROWS_AS(parse_gspace("points x y\nperm e x y\nperm f x y\n"), ParseError);   // repeated element
  CHECK_THROWS_AS(parse_gspace("points x y\nperm e x x\n"), ParseError);
  CHECK_THROWS_AS(parse_gspace("points x y\nperm e x y\ngraded-space phi 0 2\n"), ParseError);
  CHECK_THROWS_AS(parse_gspace("points x y\nperm e x y\ngraded-group J 0 1\n"), ParseError);
  CHECK_THROWS_AS(parse_gspace("points x y\nperm e x y\nbogus\n"), ParseError);
}

TEST_CASE("generated groups") {
  auto x = FiniteGSpace::generated({"a", "b", "c", "d"}, {{"r", {1, 2, 3, 0}}, {"f", {0, 3, 2, 1}}});
  CHECK(x.order() == 8);
  for (std::size_t g = 0; g < x.order(); ++g) {
    CHECK(x.mul(g, x.inv(g)) == x.identity());
    for (std::size_t h = 0; h < x.order(); ++h)
      for (std::size_t p = 0; p < 4; ++p) CHECK(x.act(x.mul(g, h), p) == x.act(g, x.act(h, p)));
  }
}

TEST_CASE("vaught_delta: examples") {
  auto x = swap_space();
  GradedTable o_x{0, 1};
  CHECK(vaught_delta(x, o_x, {0, 0}) == GradedTable{0, 0});
  auto t = trivial_space();
  GradedTable phi{R(1, 4), R(3, 4), 1};
  CHECK(vaught_delta(t, phi, {R(1, 2)}) == GradedTable{R(3, 4), 1, 1});
  CHECK(vaught_delta(x, {1, 1}, {R(1, 8), R(1, 2)}) == GradedTable{1, 1});
  CHECK_THROWS_AS(vaught_delta(x, {0}, {0, 0}), DomainError);
  CHECK_THROWS_AS(vaught_delta(x, {0, 0}, {0}), DomainError);
}

TEST_CASE("vaught_star: examples") {
  auto x = swap_space();
  auto t = trivial_space();
  GradedTable phi{R(1, 4), R(3, 4), 1};
  CHECK(vaught_star(t, phi, {R(1, 2)}) == GradedTable{0, R(1, 4), R(1, 2)});
  CHECK(vaught_star(x, {R(3, 8), R(3, 8)}, {0, 0}) == GradedTable{R(3, 8), R(3, 8)});
  // duality on the swap space with an arbitrary J
  GradedTable p{R(1, 8), R(5, 8)}, j{R(1, 4), R(1, 8)};
  auto star = vaught_star(x, p, j);
  auto dual = vaught_delta(x, {R(7, 8), R(3, 8)}, j);
  for (std::size_t i = 0; i < 2; ++i) CHECK(star[i] == 1 - dual[i]);
  CHECK(star == GradedTable{R(1, 2), R(3, 8)});
}

TEST_CASE("vaught_sets: examples") {
  auto x = swap_space();
  auto both = vaught_sets(x, {true, false}, {true, true});
  CHECK(both.delta == Subset{true, true});
  CHECK(both.star == Subset{false, false});
  auto inv = vaught_sets(x, {true, true}, {true, true});
  CHECK(inv.delta == Subset{true, true});
  CHECK(inv.star == Subset{true, true});
  auto id = vaught_sets(x, {true, false}, {true, false});
  CHECK(id.delta == Subset{true, false});
  CHECK(id.star == Subset{true, false});
  CHECK_THROWS_AS(vaught_sets(x, {true, false}, {false, false}), DomainError);
}

TEST_CASE("closed form equals the threshold scan on random G-spaces") {
  Rng rng(8);
  for (int t = 0; t < 40; ++t) {
    auto x = random_gspace(rng, 24, 8);
    for (const auto& [pn, phi] : x.space_tables())
      for (const auto& [jn, j] : x.group_tables()) {
        // independent closed forms
        GradedTable d(x.num_points()), s(x.num_points());
        for (std::size_t p = 0; p < x.num_points(); ++p) {
          Rational lo = 1, hi = 0;
          for (std::size_t h = 0; h < x.order(); ++h) {
            Rational v = phi[x.act(h, p)];
            lo = std::min(lo, std::min(Rational(1), Rational(v + j[h])));
            hi = std::max(hi, std::max(Rational(0), Rational(v - j[h])));
          }
          d[p] = lo;
          s[p] = hi;
        }
        CHECK(vaught_delta_scan(x, phi, j) == d);
        CHECK(vaught_star_scan(x, phi, j) == s);
        CHECK(vaught_delta(x, phi, j) == d);
        CHECK(vaught_star(x, phi, j) == s);
      }
  }
}

TEST_CASE("cosets, conjugates and subgroups") {
  auto x = FiniteGSpace::generated({"a", "b", "c"}, {{"r", {1, 2, 0}}, {"f", {0, 2, 1}}});
  REQUIRE(x.order() == 6);
  GradedTable h(6);
  for (std::size_t g = 0; g < 6; ++g) h[g] = x.act(g, 0) == 0 ? Rational(0) : R(1, 2);
  CHECK(is_graded_subgroup(x, h));
  GradedTable bad = h;
  bad[x.identity()] = R(1, 8);
  CHECK_FALSE(is_graded_subgroup(x, bad));
  for (std::size_t g = 0; g < 6; ++g) {
    auto rho = coset(x, h, g);
    CHECK(rho[g] == 0);
    auto hg = conjugate(x, h, g);
    CHECK(is_graded_subgroup(x, hg));
    for (std::size_t k = 0; k < 6; ++k) CHECK(hg[k] == h[x.mul(x.mul(g, k), x.inv(g))]);
  }
  CHECK(is_invariant(x, {R(1, 3), R(1, 3), R(1, 3)}, h));
  CHECK_FALSE(is_invariant(x, {0, 1, 1}, h));
}

TEST_CASE("nice_closure: examples") {
  auto x = swap_space();
  auto consts = nice_closure(x, {{0, 0}, {1, 1}}, {{0, 1}}, 1000);
  CHECK(consts.fixed_point);
  CHECK(consts.family.size() == 2);

  auto one = nice_closure(x, {{0, 1}}, {{0, 0}}, 1000);
  CHECK(one.fixed_point);
  CHECK(std::find(one.family.begin(), one.family.end(), GradedTable{0, 0}) != one.family.end());
  CHECK(std::find(one.family.begin(), one.family.end(), GradedTable{1, 0}) != one.family.end());

  auto none = nice_closure(x, {{R(1, 3), 1}}, {{0, 0}}, 0);
  CHECK(none.family == std::vector<GradedTable>{{R(1, 3), 1}});
  CHECK_FALSE(none.fixed_point);
  CHECK(none.applications == 0);

  auto scaled = nice_closure(x, {{R(1, 4), R(1, 2)}}, {}, 100000, {R(2)});
  CHECK(scaled.fixed_point);
  for (const auto& t : scaled.family)
    for (const auto& v : t) CHECK(v.get_den() <= 4);

  auto cut = nice_closure(x, {{R(1, 4), R(1, 2)}}, {}, 3, {R(1, 2)});
  CHECK_FALSE(cut.fixed_point);
  CHECK(cut.applications == 3);
}

TEST_CASE("nice_closure result is closed") {
  Rng rng(12);
  for (int t = 0; t < 6; ++t) {
    auto x = random_gspace(rng, 6, 4, 2);
    std::vector<GradedTable> cos;
    for (const auto& [n, h] : x.group_tables())
      if (is_graded_subgroup(x, h)) cos.push_back(coset(x, h, x.order() - 1));
    auto c = nice_closure(x, {x.space_table("phi")}, cos, 2000000);
    REQUIRE(c.fixed_point);
    std::set<GradedTable> fam(c.family.begin(), c.family.end());
    for (const auto& a : c.family) {
      GradedTable neg;
      for (const auto& v : a) neg.push_back(1 - v);
      CHECK(fam.count(neg));
      for (const auto& rho : cos) {
        CHECK(fam.count(vaught_delta(x, a, rho)));
        CHECK(fam.count(vaught_star(x, a, rho)));
      }
      for (const auto& b : c.family) {
        GradedTable mn, dm;
        for (std::size_t i = 0; i < a.size(); ++i) {
          mn.push_back(std::min(a[i], b[i]));
          dm.push_back(std::max(Rational(0), Rational(a[i] - b[i])));
        }
        CHECK(fam.count(mn));
        CHECK(fam.count(dm));
      }
    }
  }
}

TEST_CASE("lemma suite on random G-spaces") {
  Rng rng(2024);
  std::map<std::string, std::size_t> checks;
  for (int t = 0; t < 50; ++t) {
    auto x = random_gspace(rng);
    CHECK(x.order() <= 24);
    CHECK(x.num_points() <= 12);
    for (const auto& c : lemma_suite(x)) {
      checks[c.name] += c.checks;
      CHECK_MESSAGE(c.ok(), c.name << ": " << (c.violations.empty() ? "" : c.violations.front()));
    }
  }
  // every property was exercised
  for (const auto& [name, n] : checks) CHECK_MESSAGE(n > 0, name);
  CHECK(checks.size() == 10);
}

TEST_CASE("lemma suite on the swap space") {
  auto x = swap_space();
  x.add_space_table("phi", {0, 1});
  x.add_group_table("H", {0, R(1, 4)});
  auto suite = lemma_suite(x);
  for (const auto& c : suite) CHECK(c.ok());
  // H moves phi by 1 with H(s) = 1/4, so phi is not H-invariant; its
  // transforms still are
  CHECK_FALSE(is_invariant(x, x.space_table("phi"), x.group_table("H")));
  auto d = vaught_delta(x, x.space_table("phi"), x.group_table("H"));
  CHECK(d == GradedTable{0, R(1, 4)});
}
