#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "ury/cli.hpp"
#include "ury/rational.hpp"

using namespace ury;
using namespace ury::cli;
using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

const std::string kData = URY_DATA_DIR;

std::string data(const std::string& f) { return kData + "/" + f; }

struct Outcome {
  int code;
  std::string out, err;
};

Outcome invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

json invoke_json(std::vector<std::string> args) {
  args.push_back("--format");
  args.push_back("json");
  auto o = invoke(args);
  INFO(o.err);
  REQUIRE(o.code == 0);
  return json::parse(o.out);
}

fs::path scratch_dir() {
  std::random_device rd;
  auto p = fs::temp_directory_path() / ("ury_catalog_" + std::to_string(rd()));
  fs::remove_all(p);
  return p;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("fnv1a reference vectors") {
  CHECK(fnv1a("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cull);
  CHECK(fnv1a("foobar") == 0x85944171f73967e8ull);
}

TEST_CASE("catalog put/get") {
  auto dir = scratch_dir();
  const std::string space = "points: a b c\nd a b 1/2\nd a c 1\nd b c 1\n";
  {
    Catalog cat(dir);
    auto e = cat.put("tri", "space", space);
    CHECK(e.file == "tri.space");
    CHECK(cat.get("tri") == space);
    CHECK_THROWS_AS(cat.put("tri", "space", space), CatalogError);
    CHECK_THROWS_AS(cat.get("missing"), CatalogError);
    CHECK_THROWS_AS(cat.put("../escape", "space", space), CatalogError);
    CHECK_THROWS_AS(cat.put("junk", "space", "points: a b\nd a b 2\n"), DomainError);
    CHECK_FALSE(cat.contains("junk"));
  }
  // Non-canonical input is stored canonically.
  Catalog again(dir);
  REQUIRE(again.entries().size() == 1);
  again.put("tri2", "space", "# comment\npoints: a b c\nd b c 1\nd a c 1\nd a b 2/4\n");
  CHECK(again.get("tri2") == space);
  CHECK(again.enumeration() == "default");
  CHECK_THROWS_AS(again.set_enumeration("tri"), CatalogError);
  fs::remove_all(dir);
}

TEST_CASE("canonical forms of the bundled artifacts are fixed points") {
  const std::vector<std::pair<std::string, std::string>> files{
      {"triangle.space", "space"},        {"square.space", "space"},          {"square.structure", "structure"},
      {"near_p.formula", "formula"},      {"square.pool", "pool"},            {"anchors.anchored", "anchored"},
      {"midpoint.formula", "formula"},    {"swap.gspace", "gspace"},          {"swap.instance", "instance"},
      {"square.enumeration", "enumeration"}};
  for (const auto& [file, format] : files) {
    CAPTURE(file);
    auto once = canonicalize(format, slurp(data(file)));
    CHECK(canonicalize(format, once) == once);
  }
}

TEST_CASE("theta-demo at q = 1/4 encloses 1/2") {
  auto j = invoke_json({"theta-demo", "--q", "1/4", "--tol", "1/1000000"});
  auto lo = parse_rational(j["result"]["value"]["lo"].get<std::string>());
  auto hi = parse_rational(j["result"]["value"]["hi"].get<std::string>());
  CHECK(lo <= Rational(1, 2));
  CHECK(Rational(1, 2) <= hi);
  CHECK(hi - lo <= Rational(1, 1000000));
}

TEST_CASE("vaught-sets on the swap example") {
  auto j = invoke_json({"vaught-sets", data("swap.gspace"), "--a", "x"});
  CHECK(j["result"]["delta"] == json::array({"x", "y"}));
  CHECK(j["result"]["star"] == json::array());
  j = invoke_json({"vaught-sets", data("swap.gspace"), "--a", "x", "--u", "e"});
  CHECK(j["result"]["delta"] == json::array({"x"}));
}

TEST_CASE("exit codes") {
  CHECK(invoke({"no-such-command"}).code == 2);
  CHECK(invoke({}).code == 2);
  CHECK(invoke({"theta-demo", "--q"}).code == 2);
  CHECK(invoke({"eval", data("square.structure")}).code == 2);
  CHECK(invoke({"--format", "yaml", "theta-demo"}).code == 2);
  auto bad = invoke({"validate", data("bad.space")});
  CHECK(bad.code == 1);
  CHECK(bad.err.find("triangle") != std::string::npos);
  CHECK(invoke({"theta-demo", "--q", "3/4"}).code == 1);
  CHECK(invoke({"validate", data("does-not-exist.space")}).code == 1);
  CHECK(invoke({"qf-decide", data("anchors.anchored"), data("midpoint.formula")}).code == 1);
  CHECK(invoke({"--help"}).code == 0);
}

TEST_CASE("catalog commands and @references") {
  auto dir = scratch_dir().string();
  auto put = invoke({"--catalog", dir, "catalog", "put", "sq", data("square.structure"), "--as", "structure"});
  REQUIRE(put.code == 0);
  CHECK(invoke({"--catalog", dir, "catalog", "put", "sq", data("square.structure"), "--as", "structure"}).code == 1);
  CHECK(invoke({"--catalog", dir, "catalog", "put", "x", data("square.structure"), "--as", "cobol"}).code == 2);
  CHECK(invoke({"--catalog", dir, "catalog", "put", "f", data("near_p.formula"), "--as", "formula"}).code == 0);

  auto j = invoke_json({"--catalog", dir, "catalog", "get", "sq"});
  CHECK(j["result"]["text"] == canonicalize("structure", slurp(data("square.structure"))));
  CHECK(invoke({"--catalog", dir, "catalog", "get", "nope"}).code == 1);

  auto from_files = invoke_json({"eval", data("square.structure"), data("near_p.formula"), "--assign", "x=p2"});
  auto from_cat = invoke_json({"--catalog", dir, "eval", "@sq", "@f", "--assign", "x=p2"});
  CHECK(from_cat["result"] == from_files["result"]);

  // The manifest's enumeration is used when no --enum is given.
  REQUIRE(invoke({"--catalog", dir, "catalog", "put", "en", data("square.enumeration"), "--as", "enumeration"}).code == 0);
  REQUIRE(invoke({"--catalog", dir, "catalog", "set-enum", "en"}).code == 0);
  auto ds = invoke_json({"--catalog", dir, "delta-seq", "@sq", data("square_shifted.structure"), "--k", "1"});
  CHECK(ds["result"]["enumeration"] == "@en");
  // first term of the custom order is P(p1): |1/2 - 0| / 2
  CHECK(ds["result"]["value"]["lo"] == "1/4");

  auto list = invoke_json({"--catalog", dir, "catalog", "list"});
  CHECK(list["result"]["entries"].size() == 3);

  ::setenv(kCatalogEnv, dir.c_str(), 1);
  CHECK(invoke({"catalog", "get", "sq"}).code == 0);
  ::unsetenv(kCatalogEnv);
  fs::remove_all(dir);
}

TEST_CASE("reports are deterministic and round-trip through the schema") {
  const std::vector<std::vector<std::string>> commands{
      {"validate", data("triangle.space")},
      {"extend", data("triangle.space"), "--least", "--value", "a=1/4"},
      {"amalgamate", data("triangle.space"), data("pair.space"), "--points", "a,b", "--eps", "1/20"},
      {"enumerate-qu", data("pair.space"), "--den", "2", "--budget", "1"},
      {"parse", "(sup x (R x c))", "--rel", "R:2", "--const", "c"},
      {"lipschitz", data("near_p.formula")},
      {"borel-level", data("near_p.formula"), "--cmp", "gt"},
      {"eval", data("square.structure"), data("near_p.formula"), "--assign", "x=p2"},
      {"delta-seq", data("square.structure"), data("square_shifted.structure"), "--k", "3"},
      {"mod-member", data("square.structure"), data("near_p.formula"), "--assign", "x=p2", "--eps", "1/2"},
      {"sc-probe", data("square.structure"), data("square.pool"), "--n", "1", "--eps", "1/4"},
      {"eval-urysohn", data("anchors.anchored"), data("midpoint.formula"), "--mesh", "1/4", "--rounds", "2"},
      {"qf-decide", data("anchors.anchored"), data("anchor_gap.formula"), "--q", "1/10"},
      {"theta-demo", "--q", "49/100"},
      {"graded-eval", data("square.space"), "--desc", "graded sqrt 1 [p0 p1]", "--g", "p1,p2,p3,p0"},
      {"graded-axioms", data("square.space"), "--desc", "graded sqrt 1 [p0 p1]"},
      {"rho-s", data("square.space"), "--g", "p1,p2,p3,p0", "--g2", "p0,p1,p2,p3", "--k", "3"},
      {"invariance", data("square.structure"), data("near_p.formula")},
      {"approx-search", data("square.structure"), data("square_shifted.structure"), "--desc", "graded linear 1 [p0]",
       "--eps", "1"},
      {"oligo-probe", data("square.structure"), "--n", "1", "--eps", "0"},
      {"vaught-delta", data("swap.gspace"), "--phi", "phi", "--j", "J"},
      {"vaught-star", data("swap.gspace"), "--phi", "phi", "--j", "J"},
      {"vaught-sets", data("swap.gspace"), "--a", "x"},
      {"nice-closure", data("swap.gspace"), "--budget", "20"},
      {"encode", data("swap.instance"), "--x", "x1"},
      {"orbit-equiv", data("swap.instance"), "--x", "x1", "--x2", "x2"},
      {"lemma-suite", "--count", "3", "--seed", "7"},
  };
  std::set<std::string> seen;
  for (const auto& c : commands) {
    CAPTURE(c[0]);
    auto a = invoke_json(c);
    auto b = invoke_json(c);
    a["elapsed_ms"] = 0;
    b["elapsed_ms"] = 0;
    CHECK(a == b);
    CHECK(Report::from_json(a).to_json() == a);
    std::vector<std::string> keys;
    for (const auto& [k, v] : a.items()) keys.push_back(k);
    CHECK(keys == std::vector<std::string>{"command", "args", "inputs_digest", "exact", "result", "elapsed_ms"});
    seen.insert(a["command"].get<std::string>());
    auto t = invoke(c);
    CHECK(t.code == 0);
    CHECK(t.out.rfind("command: " + c[0], 0) == 0);
  }
  CHECK(seen.size() == 27);
}

TEST_CASE("selected command results") {
  auto j = invoke_json({"theta-demo", "--q", "49/100"});
  CHECK(j["result"]["value"]["lo"] == "7/10");
  CHECK(j["result"]["value"]["hi"] == "7/10");

  j = invoke_json({"eval-urysohn", data("anchors.anchored"), data("midpoint.formula"), "--mesh", "1/4", "--rounds",
                   "6"});
  auto lo = parse_rational(j["result"]["value"]["lo"].get<std::string>());
  auto hi = parse_rational(j["result"]["value"]["hi"].get<std::string>());
  CHECK(lo <= Rational(3, 10));
  CHECK(Rational(3, 10) <= hi);
  CHECK_FALSE(j["exact"].get<bool>());

  j = invoke_json({"orbit-equiv", data("swap.instance"), "--x", "x1", "--x2", "x3"});
  CHECK_FALSE(j["result"]["same_orbit"].get<bool>());
  CHECK(j["result"]["agree"].get<bool>());

  j = invoke_json({"encode", data("swap.instance"), "--x", "x1", "--max-k", "1"});
  CHECK(j["result"]["relations"] == 3);

  j = invoke_json({"amalgamate", data("triangle.space"), data("pair.space"), "--points", "a,b", "--eps", "1/20"});
  CHECK(j["result"]["displacement"] == "3/20");

  // Same inputs, different digest once the file content differs.
  auto d1 = invoke_json({"validate", data("triangle.space")})["inputs_digest"];
  auto d2 = invoke_json({"validate", data("square.space")})["inputs_digest"];
  CHECK(d1 != d2);
}
