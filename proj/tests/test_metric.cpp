#include <doctest.h>

#include <set>

#include "support.hpp"
#include "ury/metric.hpp"

using namespace ury;
using namespace ury::testing;

namespace {

Rational R(long p, long q = 1) {
  Rational r(p, q);
  r.canonicalize();
  return r;
}

DistanceTable triangle_table(Rational ab, Rational bc, Rational ac) {
  return {{"a", "b", "c"}, {{0, ab, ac}, {ab, 0, bc}, {ac, bc, 0}}};
}

}  // namespace

TEST_CASE("rational text form") {
  CHECK(parse_rational("3/6") == R(1, 2));
  CHECK(to_string(parse_rational("3/6")) == "1/2");
  CHECK(parse_rational("1") == 1);
  CHECK(parse_rational("-2/4") == R(-1, 2));
  CHECK_THROWS_AS(parse_rational("1/0"), ParseError);
  CHECK_THROWS_AS(parse_rational("0.5"), ParseError);
  CHECK_THROWS_AS(parse_rational(""), ParseError);
}

TEST_CASE("dotted connectives") {
  CHECK(dot_plus(R(3, 4), R(1, 2)) == 1);
  CHECK(dot_minus(R(1, 2), R(3, 4)) == 0);
  CHECK(dot_scale(R(10), R(1, 4)) == 1);
  CHECK(negation(R(2, 5)) == R(3, 5));
}

TEST_CASE("sqrt enclosures are outward and exact on squares") {
  CHECK(sqrt_enclosure(R(1, 4)) == Enclosure::exact(R(1, 2)));
  CHECK(sqrt_enclosure(R(49, 100)) == Enclosure::exact(R(7, 10)));
  for (long k = 1; k < 60; ++k) {
    Rational x = R(k, 37);
    Enclosure e = sqrt_enclosure(x, 40);
    CHECK(e.lo * e.lo <= x);
    CHECK(e.hi * e.hi >= x);
    CHECK(e.width() <= pow2_neg(40));
  }
}

TEST_CASE("exact surd comparisons") {
  // sqrt(2) <= 1 + 1/2 but not <= 1 + 2/5
  CHECK(surd_sum_leq(1, 2, 1, 1, 1, R(1, 4)));
  CHECK_FALSE(surd_sum_leq(1, 2, 1, 1, 1, R(4, 25)));
  // sqrt(a+b) <= sqrt(a) + sqrt(b)
  CHECK(surd_sum_leq(1, R(5, 7), 1, R(2, 7), 1, R(3, 7)));
  CHECK(surd_compare(2, R(1, 4), 1, 1) == 0);
}

TEST_CASE("validate_metric") {
  SUBCASE("singleton") {
    CHECK(validate_metric({{"a"}, {{0}}}).ok());
  }
  SUBCASE("equilateral") {
    CHECK(validate_metric(triangle_table(R(1, 2), R(1, 2), R(1, 2))).ok());
  }
  SUBCASE("triangle failure names the triple") {
    auto report = validate_metric(triangle_table(R(1, 10), R(1, 10), R(9, 10)));
    REQUIRE(report.violations.size() == 1);
    CHECK(report.violations[0].kind == MetricViolation::Kind::Triangle);
    std::set<PointId> pts(report.violations[0].points.begin(), report.violations[0].points.end());
    CHECK(pts == std::set<PointId>{"a", "b", "c"});
  }
  SUBCASE("range and asymmetry are reported separately") {
    DistanceTable t{{"a", "b", "c"}, {{0, R(3, 2), R(1, 2)}, {R(3, 2), 0, R(1, 2)}, {R(1, 3), R(1, 2), 0}}};
    auto report = validate_metric(t);
    std::set<MetricViolation::Kind> kinds;
    for (const auto& v : report.violations) kinds.insert(v.kind);
    CHECK(kinds.count(MetricViolation::Kind::Range));
    CHECK(kinds.count(MetricViolation::Kind::Asymmetry));
  }
  SUBCASE("degenerate pair") {
    auto report = validate_metric({{"a", "b"}, {{0, 0}, {0, 0}}});
    REQUIRE_FALSE(report.ok());
    CHECK(report.violations[0].kind == MetricViolation::Kind::Degenerate);
  }
  SUBCASE("from_table throws with the report") {
    CHECK_THROWS_AS(RationalMetricSpace::from_table(triangle_table(R(1, 10), R(1, 10), R(9, 10))), MetricError);
  }
}

TEST_CASE("validate_metric agrees with the brute-force oracle") {
  Rng rng(7);
  for (int t = 0; t < 300; ++t) {
    std::size_t n = 1 + rng() % 5;
    std::vector<std::vector<Rational>> d(n, std::vector<Rational>(n, Rational(0)));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) d[i][j] = d[j][i] = random_rational(rng, 1, 10, 10);
    CHECK(validate_metric({names("p", n), d}).ok() == brute_force_is_metric(d));
  }
}

TEST_CASE("one_point_extend") {
  auto single = space_of({"a"}, {{0}});
  SUBCASE("singleton") {
    auto s = one_point_extend(single, {{R(1, 3)}}, "p");
    CHECK(s.size() == 2);
    CHECK(s.d("a", "p") == R(1, 3));
  }
  auto pair = space_of({"a", "b"}, {{0, R(3, 5)}, {R(3, 5), 0}});
  SUBCASE("midpoint") {
    auto s = one_point_extend(pair, {{R(3, 10), R(3, 10)}}, "m");
    CHECK(brute_force_is_metric(matrix_of(s)));
    CHECK(s.d("m", "b") == R(3, 10));
  }
  SUBCASE("inadmissible pair is rejected") {
    CHECK_THROWS_WITH_AS(one_point_extend(pair, {{R(1, 10), R(1, 10)}}, "m"), doctest::Contains("{a,b}"), DomainError);
  }
  SUBCASE("existing id is rejected") {
    CHECK_THROWS_AS(one_point_extend(pair, {{R(1, 2), R(1, 2)}}, "a"), DomainError);
  }
}

TEST_CASE("one_point_extend accepts exactly the admissible functions") {
  Rng rng(11);
  for (int t = 0; t < 200; ++t) {
    auto space = random_space(rng, 1 + rng() % 4, 6, 1);
    std::vector<Rational> f;
    for (std::size_t i = 0; i < space.size(); ++i) f.push_back(random_rational(rng, 1, 6, 6));
    bool admissible = true;
    for (std::size_t a = 0; a < f.size(); ++a)
      for (std::size_t b = 0; b < f.size(); ++b)
        if (abs(Rational(f[a] - f[b])) > space.d(a, b) || space.d(a, b) > f[a] + f[b]) admissible = false;
    if (admissible) {
      auto ext = one_point_extend(space, {f}, "new");
      CHECK(brute_force_is_metric(matrix_of(ext)));
    } else {
      CHECK_THROWS_AS(one_point_extend(space, {f}, "new"), DomainError);
    }
  }
}

TEST_CASE("amalgamate: two points") {
  auto a = space_of({"a1", "a2"}, {{0, R(1, 2)}, {R(1, 2), 0}});
  auto b = space_of({"b1", "b2"}, {{0, R(9, 20)}, {R(9, 20), 0}});
  auto res = amalgamate({a, {"a1", "a2"}, b, 0, R(1, 10)});
  CHECK(res.displacement == R(3, 10));
  CHECK(res.space.d("a1", "b1") == R(3, 10));
  CHECK(res.space.d("a2", "b2") == R(3, 10));
  CHECK(res.space.d("a1", "b2") == R(2, 5));
  CHECK(res.space.d("b1", "a2") == R(2, 5));
  CHECK(res.route == AmalgamationRoute::Inductive);
  CHECK(brute_force_is_metric(matrix_of(res.space)));
  CHECK(res.embedding.verify());
}

TEST_CASE("amalgamate: isometric copy is still displaced") {
  auto a = space_of({"a1", "a2"}, {{0, R(1, 2)}, {R(1, 2), 0}});
  auto b = space_of({"b1", "b2"}, {{0, R(1, 2)}, {R(1, 2), 0}});
  auto res = amalgamate({a, {"a1", "a2"}, b, 0, R(1, 100)});
  CHECK(res.space.d("a1", "b1") == R(3, 100));
  CHECK(res.space.d("a2", "b2") == R(3, 100));
}

TEST_CASE("amalgamate: n=3, q=1 random instances") {
  Rng rng(3);
  for (int t = 0; t < 40; ++t) {
    auto problem = random_amalgamation_problem(rng, 3, 1);
    auto res = amalgamate(problem);
    CHECK(brute_force_is_metric(matrix_of(res.space)));
    CHECK(res.space.size() == 5);
    CHECK(res.space.d("a2", "b2") == 3 * problem.eps);
    CHECK(res.space.d("a3", "b3") == 3 * problem.eps);
    CHECK_FALSE(res.space.contains("b1"));
    // b1 is identified with a1: the embedding sends it there.
    CHECK(res.embedding.map[0] == std::pair<PointId, PointId>{"b1", "a1"});
  }
}

TEST_CASE("amalgamate: hypothesis failures are reported") {
  auto a = space_of({"a1", "a2"}, {{0, R(1, 2)}, {R(1, 2), 0}});
  auto b = space_of({"b1", "b2"}, {{0, R(1, 4)}, {R(1, 4), 0}});
  SUBCASE("deviation too large") {
    try {
      amalgamate({a, {"a1", "a2"}, b, 0, R(1, 10)});
      FAIL("expected HypothesisError");
    } catch (const HypothesisError& e) {
      CHECK(e.report().describe().find("deviation") != std::string::npos);
    }
  }
  SUBCASE("separation equality is rejected") {
    // 3*eps == d(a1,a2)
    auto b2 = space_of({"b1", "b2"}, {{0, R(1, 2)}, {R(1, 2), 0}});
    CHECK_THROWS_AS(amalgamate({a, {"a1", "a2"}, b2, 0, R(1, 6)}), HypothesisError);
    CHECK(amalgamate({a, {"a1", "a2"}, b2, 0, R(1, 7)}).space.size() == 4);
  }
  SUBCASE("geodesic through a shared point") {
    // a2 between a3 and shared a1
    auto line = space_of({"a1", "a2", "a3"}, {{0, R(1, 4), R(3, 4)}, {R(1, 4), 0, R(1, 2)}, {R(3, 4), R(1, 2), 0}});
    auto copy = space_of({"b1", "b2", "b3"}, line.table().dist);
    auto report = check_amalgamation_hypotheses({line, {"a1", "a2", "a3"}, copy, 1, R(1, 100)});
    CHECK_FALSE(report.ok());
    CHECK(report.describe().find("geodesic") != std::string::npos);
  }
}

TEST_CASE("amalgamate property: random instances n<=6, q<=2") {
  Rng rng(2024);
  std::map<AmalgamationRoute, int> routes;
  for (int t = 0; t < 150; ++t) {
    std::size_t n = 2 + rng() % 5;
    std::size_t q = rng() % std::min<std::size_t>(3, n);
    auto problem = random_amalgamation_problem(rng, n, q);
    auto res = amalgamate(problem);
    routes[res.route]++;
    REQUIRE(brute_force_is_metric(matrix_of(res.space)));
    const long m = static_cast<long>(n - q);
    for (std::size_t i = q; i < n; ++i) {
      CHECK(res.space.d("a" + std::to_string(i + 1), "b" + std::to_string(i + 1)) == (m * (m - 1) + 1) * problem.eps);
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        CHECK(res.space.d(res.embedding.map[i].second, res.embedding.map[j].second) == problem.b_space.d(i, j));
    for (const auto& s : res.steps) CHECK(s.shift >= problem.eps / 2);
  }
  CHECK(routes[AmalgamationRoute::Inductive] > 0);
}

TEST_CASE("qu_enumerate") {
  auto single = space_of({"a"}, {{0}});
  SUBCASE("budget 0 returns the seed") {
    auto out = qu_enumerate(single, 4, 0);
    CHECK(out.space == single);
    CHECK(out.certificate.empty());
  }
  SUBCASE("one point, denominators <= 2") {
    auto out = qu_enumerate(single, 2, 1);
    REQUIRE(out.certificate.size() == 2);
    std::set<Rational> dists;
    for (std::size_t i = 1; i < out.space.size(); ++i) dists.insert(out.space.d(0, i));
    CHECK(dists == std::set<Rational>{R(1, 2), R(1)});
  }
  SUBCASE("pair at distance 1/2") {
    auto pair = space_of({"a", "b"}, {{0, R(1, 2)}, {R(1, 2), 0}});
    auto out = qu_enumerate(pair, 2, 2);
    std::size_t over_pair = 0;
    for (const auto& t : out.certificate) {
      if (t.subset.size() == 2) ++over_pair;
      // every task is realized exactly
      for (std::size_t k = 0; k < t.subset.size(); ++k) CHECK(out.space.d(t.realized_by, t.subset[k]) == t.values[k]);
    }
    CHECK(over_pair == 4);
    CHECK(brute_force_is_metric(matrix_of(out.space)));
  }
}

TEST_CASE("qu_enumerate is monotone in the budget") {
  Rng rng(5);
  for (int t = 0; t < 10; ++t) {
    auto seed = random_space(rng, 3, 4, 1);
    auto small = qu_enumerate(seed, 3, 1);
    auto large = qu_enumerate(seed, 3, 2);
    REQUIRE(small.space.size() <= large.space.size());
    for (std::size_t i = 0; i < small.space.size(); ++i) {
      CHECK(small.space.id(i) == large.space.id(i));
      for (std::size_t j = 0; j < small.space.size(); ++j) CHECK(small.space.d(i, j) == large.space.d(i, j));
    }
    CHECK(brute_force_is_metric(matrix_of(large.space)));
  }
}

TEST_CASE("metric text format") {
  auto s = parse_metric_space("points: a b c\nd a b 1/2\nd b c 1/2\nd a c 3/4 # comment\n");
  CHECK(s.d("a", "c") == R(3, 4));
  CHECK(parse_metric_space(format_metric_space(s)) == s);
  CHECK_THROWS_AS(parse_metric_space("points: a b c\nd a b 1/2\nd b c 1/2\n"), ParseError);
  CHECK_THROWS_AS(parse_metric_space("points: a b\nd a b 0.5\n"), ParseError);
  CHECK_THROWS_AS(parse_metric_space("points: a b c\nd a b 1/10\nd b c 1/10\nd a c 9/10\n"), MetricError);
}
