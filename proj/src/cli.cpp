#include "ury/cli.hpp"

#include <CLI11.hpp>

#include <cctype>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "text.hpp"
#include "ury/formula.hpp"
#include "ury/graded.hpp"
#include "ury/metric.hpp"
#include "ury/reduction.hpp"
#include "ury/structure.hpp"
#include "ury/urysohn.hpp"
#include "ury/vaught.hpp"

namespace ury::cli {

using json = nlohmann::ordered_json;

namespace {

// ---------------------------------------------------------------- formula files
// Optional `rel <name> <arity> [coefficient]` and `const <name>` lines, then
// one formula per line.

struct FormulaFile {
  Signature sig;
  std::vector<std::string> bodies;
};

FormulaFile read_formula_file(const std::string& source) {
  FormulaFile ff;
  auto lines = text::logical_lines(source);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto tok = text::tokens(lines[i]);
    if (tok[0] == "rel") {
      if (tok.size() < 3 || tok.size() > 4) throw ParseError("expected 'rel <name> <arity> [coefficient]'", 0, i + 1);
      std::size_t arity = 0;
      try {
        arity = std::stoul(tok[2]);
      } catch (const std::exception&) {
        throw ParseError("bad arity '" + tok[2] + "'", 0, i + 1);
      }
      std::optional<Rational> coef;
      if (tok.size() == 4) coef = parse_rational(tok[3]);
      ff.sig.relation(tok[1], arity, coef);
    } else if (tok[0] == "const") {
      if (tok.size() != 2) throw ParseError("expected 'const <name>'", 0, i + 1);
      ff.sig.constant(tok[1]);
    } else {
      ff.bodies.push_back(lines[i]);
    }
  }
  ff.sig.validate();
  for (std::size_t b = 0; b < ff.bodies.size(); ++b) {
    auto f = parse_formula(ff.bodies[b], ff.sig);
    check_well_formed(f, ff.sig);
  }
  return ff;
}

std::string format_formula_file(const FormulaFile& ff) {
  std::ostringstream out;
  for (const auto& r : ff.sig.relations) {
    out << "rel " << r.name << ' ' << r.arity;
    if (r.coefficient != static_cast<long>(r.arity)) out << ' ' << to_string(r.coefficient);
    out << '\n';
  }
  for (const auto& c : ff.sig.constants) out << "const " << c << '\n';
  for (const auto& b : ff.bodies) out << to_string(parse_formula(b, ff.sig)) << '\n';
  return out.str();
}

// `t <relation> <points..>` lines.
std::string canonical_enumeration(const std::string& source) {
  std::ostringstream out;
  auto lines = text::logical_lines(source);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto tok = text::tokens(lines[i]);
    if (tok[0] != "t" || tok.size() < 3) throw ParseError("expected 't <relation> <points>'", 0, i + 1);
    out << text::join(tok, " ") << '\n';
  }
  return out.str();
}

TupleEnumeration resolve_enumeration(const std::string& source, const FiniteStructure& m) {
  TupleEnumeration en;
  for (const auto& line : text::logical_lines(canonical_enumeration(source))) {
    if (line.empty()) continue;
    auto tok = text::tokens(line);
    const auto* r = m.signature().find_relation(tok[1]);
    if (!r) throw DomainError("enumeration names unknown relation '" + tok[1] + "'");
    if (tok.size() - 2 != r->arity) throw DomainError("enumeration tuple has the wrong arity for '" + tok[1] + "'");
    Tuple t;
    for (std::size_t k = 2; k < tok.size(); ++k) t.push_back(m.space().index(tok[k]));
    en.emplace_back(tok[1], t);
  }
  return en;
}

// ---------------------------------------------------------------- small helpers

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DomainError("cannot read '" + p.string() + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const std::filesystem::path& p, const std::string& data) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw DomainError("cannot write '" + p.string() + "'");
  out << data;
  if (!out) throw DomainError("cannot write '" + p.string() + "'");
}

std::vector<std::string> split_list(const std::string& s) {
  std::string t = s;
  for (char& c : t)
    if (c == ',') c = ' ';
  return text::tokens(t);
}

std::string q(const Rational& r) { return to_string(r); }

json enc(const Enclosure& e) { return json{{"lo", q(e.lo)}, {"hi", q(e.hi)}}; }

json names(const RationalMetricSpace& s, const std::vector<std::size_t>& pts) {
  json a = json::array();
  for (auto p : pts) a.push_back(s.id(p));
  return a;
}

std::vector<std::size_t> point_list(const RationalMetricSpace& s, const std::string& list) {
  std::vector<std::size_t> out;
  for (const auto& id : split_list(list)) out.push_back(s.index(id));
  return out;
}

std::vector<std::size_t> permutation_of(const RationalMetricSpace& s, const std::string& images) {
  auto p = point_list(s, images);
  if (p.size() != s.size()) throw DomainError("a permutation lists one image per point");
  return p;
}

Assignment assignment_of(const RationalMetricSpace& s, const std::vector<std::string>& pairs) {
  Assignment a;
  for (const auto& item : pairs)
    for (const auto& kv : split_list(item)) {
      auto eq = kv.find('=');
      if (eq == std::string::npos) throw DomainError("expected var=point, got '" + kv + "'");
      a[kv.substr(0, eq)] = s.index(kv.substr(eq + 1));
    }
  return a;
}

Comparison comparison_of(const std::string& s) {
  if (s == "lt" || s == "<") return Comparison::LessThan;
  if (s == "gt" || s == ">") return Comparison::GreaterThan;
  throw DomainError("comparison must be lt or gt");
}

bool valid_name(const std::string& n) {
  if (n.empty() || n[0] == '.') return false;
  for (char c : n)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-' && c != '.') return false;
  return true;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << v;
  return s.str();
}

}  // namespace

// ---------------------------------------------------------------- formats

const std::vector<std::string>& artifact_formats() {
  static const std::vector<std::string> f{"space",  "structure", "formula",  "pool",
                                          "gspace", "instance",  "anchored", "enumeration"};
  return f;
}

std::string canonicalize(const std::string& format, const std::string& source) {
  if (format == "space") return format_metric_space(parse_metric_space(source));
  if (format == "structure") {
    auto m = parse_structure(source);
    validate_structure(m);
    return format_structure(m);
  }
  if (format == "formula" || format == "pool") {
    auto ff = read_formula_file(source);
    if (format == "formula" && ff.bodies.size() != 1) throw DomainError("a formula artifact holds exactly one formula");
    return format_formula_file(ff);
  }
  if (format == "gspace") return format_gspace(parse_gspace(source));
  if (format == "instance") return format_reduction_instance(parse_reduction_instance(source));
  if (format == "anchored") return format_anchored(parse_anchored(source));
  if (format == "enumeration") return canonical_enumeration(source);
  throw DomainError("unknown artifact format '" + format + "'");
}

std::uint64_t fnv1a(std::string_view data, std::uint64_t h) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

// ---------------------------------------------------------------- catalog

Catalog::Catalog(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw CatalogError("cannot create catalog directory '" + dir_.string() + "'");
  auto manifest = dir_ / "MANIFEST";
  if (!std::filesystem::exists(manifest)) {
    save();
    return;
  }
  auto lines = text::logical_lines(read_file(manifest));
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto tok = text::tokens(lines[i]);
    if (tok[0] == "entry" && tok.size() == 4) {
      entries_.push_back({tok[1], tok[2], tok[3]});
    } else if (tok[0] == "enumeration" && tok.size() == 2) {
      enumeration_ = tok[1];
    } else {
      throw CatalogError("malformed manifest line " + std::to_string(i + 1));
    }
  }
}

void Catalog::save() const {
  std::ostringstream out;
  out << "# catalog manifest\n";
  out << "enumeration " << enumeration_ << '\n';
  for (const auto& e : entries_) out << "entry " << e.name << ' ' << e.format << ' ' << e.file << '\n';
  write_file(dir_ / "MANIFEST", out.str());
}

bool Catalog::contains(const std::string& name) const {
  for (const auto& e : entries_)
    if (e.name == name) return true;
  return false;
}

const Catalog::Entry& Catalog::entry(const std::string& name) const {
  for (const auto& e : entries_)
    if (e.name == name) return e;
  throw CatalogError("no catalog entry named '" + name + "'");
}

Catalog::Entry Catalog::put(const std::string& name, const std::string& format, const std::string& source) {
  if (!valid_name(name)) throw CatalogError("bad catalog name '" + name + "'");
  if (contains(name)) throw CatalogError("catalog already has an entry named '" + name + "'");
  auto canonical = canonicalize(format, source);
  Entry e{name, format, name + "." + format};
  write_file(dir_ / e.file, canonical);
  entries_.push_back(e);
  save();
  return e;
}

std::string Catalog::get(const std::string& name) const { return read_file(dir_ / entry(name).file); }

void Catalog::set_enumeration(const std::string& name) {
  if (name != "default" && entry(name).format != "enumeration")
    throw CatalogError("'" + name + "' is not an enumeration");
  enumeration_ = name;
  save();
}

// ---------------------------------------------------------------- report

json Report::to_json() const {
  json j;
  j["command"] = command;
  j["args"] = args;
  j["inputs_digest"] = "fnv1a:" + hex64(inputs_digest);
  j["exact"] = exact;
  j["result"] = result;
  j["elapsed_ms"] = elapsed_ms;
  return j;
}

Report Report::from_json(const json& j) {
  Report r;
  r.command = j.at("command").get<std::string>();
  r.args = j.at("args").get<std::vector<std::string>>();
  auto d = j.at("inputs_digest").get<std::string>();
  if (!text::starts_with(d, "fnv1a:")) throw ParseError("bad inputs_digest", 0);
  r.inputs_digest = std::stoull(d.substr(6), nullptr, 16);
  r.exact = j.at("exact").get<bool>();
  r.result = j.at("result");
  r.elapsed_ms = j.at("elapsed_ms").get<double>();
  return r;
}

namespace {

void text_value(std::ostream& out, const std::string& key, const json& v) {
  if (v.is_string()) {
    const auto& s = v.get_ref<const std::string&>();
    if (s.find('\n') == std::string::npos) {
      out << key << ": " << s << '\n';
    } else {
      out << key << ":\n";
      for (const auto& line : text::logical_lines(s))
        if (!line.empty()) out << "  " << line << '\n';
    }
  } else if (v.is_object()) {
    for (const auto& [k, sub] : v.items()) text_value(out, key.empty() ? k : key + "." + k, sub);
  } else {
    out << key << ": " << v.dump() << '\n';
  }
}

}  // namespace

std::string Report::to_text() const {
  std::ostringstream out;
  out << "command: " << text::join(args, " ") << '\n';
  out << "inputs_digest: fnv1a:" << hex64(inputs_digest) << '\n';
  out << "exact: " << (exact ? "true" : "false") << '\n';
  text_value(out, "", result);
  out << "elapsed_ms: " << elapsed_ms << '\n';
  return out.str();
}

// ---------------------------------------------------------------- commands

namespace {

struct Options {
  std::string catalog_dir;
  std::uint64_t seed = 1;
  std::string mesh = "1/8";
  unsigned rounds = 3;
  std::optional<std::size_t> budget;
  std::string format = "text";

  std::string in1, in2, formula, desc, g, h, a, u, x, x2, phi, j, enumeration, id = "p", points, cmp = "lt";
  std::string eps = "1/10", qv, tol = "1/1000000", name, artifact_format;
  std::vector<std::string> values, assign, tables, cosets, scales, displace;
  unsigned k = 8, n = 1, depth = 1, den = 2, shared = 0, count = 50;
  std::optional<std::size_t> max_k;
  bool least = false;
};

class Runner {
 public:
  Runner(Options& o, Report& r) : o_(o), r_(r) {}

  Catalog& catalog() {
    if (!cat_) {
      std::string dir = o_.catalog_dir;
      if (dir.empty())
        if (const char* env = std::getenv(kCatalogEnv)) dir = env;
      if (dir.empty()) throw DomainError("no catalog: pass --catalog DIR or set " + std::string(kCatalogEnv));
      cat_.emplace(dir);
    }
    return *cat_;
  }

  // `@name` reads from the catalog, anything else is a file path.
  std::string load(const std::string& ref) {
    std::string s = (!ref.empty() && ref[0] == '@') ? catalog().get(ref.substr(1)) : read_file(ref);
    digest(s);
    return s;
  }

  void digest(const std::string& s) {
    r_.inputs_digest = fnv1a(s, fnv1a(std::to_string(s.size()), r_.inputs_digest));
  }

  RationalMetricSpace space(const std::string& ref) { return parse_metric_space(load(ref)); }
  FiniteStructure structure(const std::string& ref) {
    auto m = parse_structure(load(ref));
    validate_structure(m);
    return m;
  }
  FiniteGSpace gspace(const std::string& ref) { return parse_gspace(load(ref)); }
  ReductionInstance instance(const std::string& ref) { return parse_reduction_instance(load(ref)); }
  AnchoredStructure anchored(const std::string& ref) { return parse_anchored(load(ref)); }

  // A literal starting with '(' or a formula artifact.
  FormulaFile formula_source(const std::string& ref) {
    auto first = ref.find_first_not_of(" \t");
    if (first != std::string::npos && ref[first] == '(') {
      digest(ref);
      return FormulaFile{Signature{}, {ref}};
    }
    return read_formula_file(load(ref));
  }

  Formula formula(const std::string& ref, const Signature& sig) {
    auto ff = formula_source(ref);
    if (ff.bodies.size() != 1) throw DomainError("expected exactly one formula");
    auto f = parse_formula(ff.bodies[0], sig);
    check_well_formed(f, sig);
    return f;
  }

  // Standalone formulas: the artifact's own signature plus --rel/--const.
  std::pair<Formula, Signature> free_formula(const std::string& ref, const std::vector<std::string>& rels,
                                             const std::vector<std::string>& consts) {
    auto ff = formula_source(ref);
    if (ff.bodies.size() != 1) throw DomainError("expected exactly one formula");
    for (const auto& item : rels) {
      // name:arity[:num/den]
      auto colon = item.find(':');
      if (colon == std::string::npos) throw DomainError("--rel expects name:arity[:coefficient]");
      auto rest = item.substr(colon + 1);
      auto colon2 = rest.find(':');
      std::size_t arity = std::stoul(rest.substr(0, colon2));
      std::optional<Rational> coef;
      if (colon2 != std::string::npos) coef = parse_rational(rest.substr(colon2 + 1));
      ff.sig.relation(item.substr(0, colon), arity, coef);
    }
    for (const auto& c : consts) ff.sig.constant(c);
    ff.sig.validate();
    auto f = parse_formula(ff.bodies[0], ff.sig);
    check_well_formed(f, ff.sig);
    return {f, ff.sig};
  }

  Rational rational(const std::string& s) { return parse_rational(s); }

  json& out() { return r_.result; }
  void inexact() { r_.exact = false; }
  Options& opt() { return o_; }
  std::optional<Catalog>& cat() { return cat_; }

 private:
  Options& o_;
  Report& r_;
  std::optional<Catalog> cat_;
};

json structure_tables(const FiniteGSpace& x, const GradedTable& t, bool on_points) {
  json o = json::object();
  for (std::size_t i = 0; i < t.size(); ++i) o[on_points ? x.points()[i] : x.element_names()[i]] = q(t[i]);
  return o;
}

Subset subset_of_points(const FiniteGSpace& x, const std::string& list) {
  Subset s(x.num_points(), false);
  for (const auto& p : split_list(list)) s[x.point_index(p)] = true;
  return s;
}

json point_set(const FiniteGSpace& x, const Subset& s) {
  json a = json::array();
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s[i]) a.push_back(x.points()[i]);
  return a;
}

void add_commands(CLI::App& app, Options& o, std::function<void(Runner&)>& action, std::vector<std::string>& rels,
                  std::vector<std::string>& consts) {
  auto cmd = [&](const std::string& name, const std::string& help, std::function<void(Runner&)> body) {
    auto* sub = app.add_subcommand(name, help);
    sub->callback([&action, body] { action = body; });
    return sub;
  };
  auto sig_flags = [&](CLI::App* s) {
    s->add_option("--rel", rels, "relation name:arity[:coefficient]");
    s->add_option("--const", consts, "constant name");
  };

  // ---- metric_core
  auto* s = cmd("validate", "Check every metric axiom of a space", [](Runner& r) {
    auto src = r.load(r.opt().in1);
    try {
      auto sp = parse_metric_space(src);
      r.out()["valid"] = true;
      r.out()["points"] = sp.size();
    } catch (const MetricError& e) {
      r.out()["valid"] = false;
      json v = json::array();
      for (const auto& m : e.report().violations)
        v.push_back(json{{"kind", to_string(m.kind)}, {"points", m.points}, {"detail", m.detail}});
      r.out()["violations"] = v;
      throw;
    }
  });
  s->add_option("space", o.in1)->required();

  s = cmd("extend", "One-point extension by a Katetov function", [](Runner& r) {
    auto sp = r.space(r.opt().in1);
    std::map<PointId, Rational> vals;
    for (const auto& item : r.opt().values)
      for (const auto& kv : split_list(item)) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) throw DomainError("expected point=value, got '" + kv + "'");
        vals[kv.substr(0, eq)] = parse_rational(kv.substr(eq + 1));
      }
    std::vector<Rational> full;
    if (r.opt().least) {
      std::vector<std::size_t> subset;
      std::vector<Rational> given;
      for (const auto& [p, v] : vals) {
        subset.push_back(sp.index(p));
        given.push_back(v);
      }
      full = katetov_extension(sp, subset, given);
    } else {
      full = KatetovFunction::from_map(sp, vals).values;
    }
    auto ext = one_point_extend(sp, KatetovFunction{full}, r.opt().id);
    json f = json::object();
    for (std::size_t i = 0; i < sp.size(); ++i) f[sp.id(i)] = q(full[i]);
    r.out()["katetov"] = f;
    r.out()["space"] = format_metric_space(ext);
  });
  s->add_option("space", o.in1)->required();
  s->add_option("--value", o.values, "point=num/den");
  s->add_option("--id", o.id, "name of the new point");
  s->add_flag("--least", o.least, "extend a partial assignment to the least Katetov function");

  s = cmd("amalgamate", "Place a near copy of B next to a_1..a_n", [](Runner& r) {
    AmalgamationProblem p;
    p.a_space = r.space(r.opt().in1);
    p.b_space = r.space(r.opt().in2);
    p.a_points = split_list(r.opt().points);
    p.shared = r.opt().shared;
    p.eps = r.rational(r.opt().eps);
    auto res = amalgamate(p);
    r.out()["displacement"] = q(res.displacement);
    r.out()["route"] = to_string(res.route);
    r.out()["embedding_verified"] = res.embedding.verify();
    json steps = json::array();
    for (const auto& st : res.steps)
      steps.push_back(json{{"i", st.i}, {"j", st.j}, {"level", q(st.level)}, {"shift", q(st.shift)}});
    r.out()["steps"] = steps;
    r.out()["space"] = format_metric_space(res.space);
  });
  s->add_option("a", o.in1)->required();
  s->add_option("b", o.in2)->required();
  s->add_option("--points", o.points, "a_1..a_n in A")->required();
  s->add_option("--shared", o.shared, "q, number of identified points");
  s->add_option("--eps", o.eps, "epsilon");

  s = cmd("enumerate-qu", "Finite approximation of the rational Urysohn space", [](Runner& r) {
    auto seed = r.space(r.opt().in1);
    auto res = qu_enumerate(seed, r.opt().den, static_cast<unsigned>(r.opt().budget.value_or(2)));
    r.out()["points"] = res.space.size();
    r.out()["tasks"] = res.certificate.size();
    std::size_t added = 0;
    for (const auto& t : res.certificate) added += t.added;
    r.out()["added"] = added;
    r.out()["space"] = format_metric_space(res.space);
  });
  s->add_option("seed-space", o.in1)->required();
  s->add_option("--den", o.den, "denominator bound of the value grid");

  // ---- formula
  s = cmd("parse", "Parse and print a formula canonically", [&rels, &consts](Runner& r) {
    auto [f, sig] = r.free_formula(r.opt().formula, rels, consts);
    r.out()["formula"] = to_string(f);
    r.out()["free_variables"] = f.free_variables();
    r.out()["constants"] = f.constants();
    r.out()["depth"] = f.depth();
    r.out()["quantifier_depth"] = f.quantifier_depth();
    r.out()["quantifier_free"] = f.is_quantifier_free();
  });
  s->add_option("formula", o.formula)->required();
  sig_flags(s);

  s = cmd("lipschitz", "Modulus coefficient in the displaced names", [&rels, &consts](Runner& r) {
    auto [f, sig] = r.free_formula(r.opt().formula, rels, consts);
    Rational l = r.opt().displace.empty()
                     ? lipschitz(f, sig)
                     : lipschitz(f, sig, std::set<std::string>(r.opt().displace.begin(), r.opt().displace.end()));
    r.out()["formula"] = to_string(f);
    r.out()["lipschitz"] = q(l);
  });
  s->add_option("formula", o.formula)->required();
  s->add_option("--displace", o.displace, "names allowed to move (default: free variables)");
  sig_flags(s);

  s = cmd("borel-level", "Borel level of {M : phi < eps} or {M : phi > eps}", [&rels, &consts](Runner& r) {
    auto [f, sig] = r.free_formula(r.opt().formula, rels, consts);
    auto cmp = comparison_of(r.opt().cmp);
    r.out()["formula"] = to_string(f);
    r.out()["comparison"] = to_string(cmp);
    r.out()["level"] = borel_level(f, cmp).to_string();
  });
  s->add_option("formula", o.formula)->required();
  s->add_option("--cmp", o.cmp, "lt or gt");
  sig_flags(s);

  // ---- eval_finite
  s = cmd("eval", "Exact value of a formula in a finite structure", [](Runner& r) {
    auto m = r.structure(r.opt().in1);
    auto f = r.formula(r.opt().formula, m.signature());
    r.out()["formula"] = to_string(f);
    r.out()["value"] = q(eval(f, m, assignment_of(m.space(), r.opt().assign)));
  });
  s->add_option("structure", o.in1)->required();
  s->add_option("formula", o.formula)->required();
  s->add_option("--assign", o.assign, "var=point");

  s = cmd("delta-seq", "Weighted tuple distance between two structures", [](Runner& r) {
    auto m = r.structure(r.opt().in1);
    auto n = r.structure(r.opt().in2);
    std::string used = "default";
    TupleEnumeration en;
    if (!r.opt().enumeration.empty()) {
      used = r.opt().enumeration;
      en = resolve_enumeration(r.load(used), m);
    } else if (!r.opt().catalog_dir.empty() || std::getenv(kCatalogEnv)) {
      if (r.catalog().enumeration() != "default") {
        used = "@" + r.catalog().enumeration();
        en = resolve_enumeration(r.load(used), m);
      }
    }
    if (used == "default") en = default_enumeration(m);
    auto e = delta_seq(m, n, en, r.opt().k);
    if (!e.is_exact()) r.inexact();
    r.out()["enumeration"] = used;
    r.out()["terms"] = en.size();
    r.out()["k"] = r.opt().k;
    r.out()["value"] = enc(e);
  });
  s->add_option("m", o.in1)->required();
  s->add_option("n", o.in2)->required();
  s->add_option("--k", o.k, "number of terms");
  s->add_option("--enum", o.enumeration, "enumeration artifact (file or @name)");

  s = cmd("mod-member", "Decide phi < eps or phi > eps exactly", [](Runner& r) {
    auto m = r.structure(r.opt().in1);
    auto f = r.formula(r.opt().formula, m.signature());
    auto cmp = comparison_of(r.opt().cmp);
    auto a = assignment_of(m.space(), r.opt().assign);
    r.out()["comparison"] = to_string(cmp);
    r.out()["eps"] = q(r.rational(r.opt().eps));
    r.out()["member"] = mod_member(m, f, a, r.rational(r.opt().eps), cmp);
    r.out()["value"] = q(eval(f, m, a));
  });
  s->add_option("structure", o.in1)->required();
  s->add_option("formula", o.formula)->required();
  s->add_option("--eps", o.eps, "threshold");
  s->add_option("--cmp", o.cmp, "lt or gt");
  s->add_option("--assign", o.assign, "var=point");

  s = cmd("sc-probe", "Finite-scale separable-categoricity probe", [](Runner& r) {
    auto m = r.structure(r.opt().in1);
    auto ff = r.formula_source(r.opt().formula);
    std::vector<Formula> pool;
    for (const auto& b : ff.bodies) {
      pool.push_back(parse_formula(b, m.signature()));
      check_well_formed(pool.back(), m.signature());
    }
    auto rep = sc_probe(m, r.opt().n, r.rational(r.opt().eps), pool, r.opt().depth, r.opt().budget.value_or(200000));
    r.out()["outcome"] = to_string(rep.outcome);
    json fam = json::array();
    for (const auto& c : rep.family) fam.push_back(json{{"formula", to_string(c.formula)}, {"bound", q(c.bound)}});
    r.out()["family"] = fam;
    r.out()["minimal"] = rep.minimal;
    if (rep.uncovered) r.out()["uncovered"] = names(m.space(), *rep.uncovered);
    r.out()["failures"] = rep.failures.size();
    r.out()["candidates"] = rep.candidates;
    r.out()["valid"] = rep.valid;
    if (!rep.note.empty()) r.out()["note"] = rep.note;
  });
  s->add_option("structure", o.in1)->required();
  s->add_option("pool", o.formula, "pool artifact")->required();
  s->add_option("--n", o.n, "tuple length");
  s->add_option("--eps", o.eps, "epsilon");
  s->add_option("--depth", o.depth, "pool formula depth bound");

  // ---- eval_urysohn
  s = cmd("eval-urysohn", "Certified enclosure over the Urysohn space", [](Runner& r) {
    auto m = r.anchored(r.opt().in1);
    auto f = r.formula(r.opt().formula, m.signature());
    QuantifierBudget b;
    b.mesh = r.rational(r.opt().mesh);
    b.rounds = r.opt().rounds;
    if (r.opt().budget) b.max_cells = *r.opt().budget;
    auto res = eval_urysohn(f, m, b);
    if (!res.value.is_exact()) r.inexact();
    r.out()["formula"] = to_string(f);
    r.out()["value"] = enc(res.value);
    r.out()["width"] = q(res.value.width());
    json rounds = json::array();
    for (const auto& e : res.rounds) rounds.push_back(enc(e));
    r.out()["rounds"] = rounds;
  });
  s->add_option("anchored", o.in1)->required();
  s->add_option("formula", o.formula)->required();

  s = cmd("qf-decide", "Exact value of a quantifier-free sentence over the anchors", [](Runner& r) {
    auto m = r.anchored(r.opt().in1);
    auto f = r.formula(r.opt().formula, m.signature());
    auto d = qf_decide(f, m);
    r.out()["formula"] = to_string(f);
    r.out()["value"] = q(d.value);
    if (!r.opt().qv.empty()) {
      auto t = r.rational(r.opt().qv);
      r.out()["less"] = d.less(t);
      r.out()["greater"] = d.greater(t);
    }
  });
  s->add_option("anchored", o.in1)->required();
  s->add_option("formula", o.formula)->required();
  s->add_option("--q", o.qv, "threshold to compare against");

  s = cmd("theta-demo", "Enclosure of the counterexample value at d(u0,c) = q", [](Runner& r) {
    auto qq = r.rational(r.opt().qv.empty() ? "1/4" : r.opt().qv);
    auto tol = r.rational(r.opt().tol);
    r.digest(q(qq) + " " + q(tol));
    auto e = theta_demo(qq, tol);
    if (!e.is_exact()) r.inexact();
    r.out()["q"] = q(qq);
    r.out()["tol"] = q(tol);
    r.out()["value"] = enc(e);
    r.out()["width"] = q(e.width());
  });
  s->add_option("--q", o.qv, "distance q, 1/10 < q < 1/2");
  s->add_option("--tol", o.tol, "enclosure width");

  // ---- graded
  s = cmd("graded-eval", "Value of a graded descriptor at an isometry", [](Runner& r) {
    auto sp = r.space(r.opt().in1);
    r.digest(r.opt().desc + "|" + r.opt().g);
    auto h = parse_descriptor(r.opt().desc, sp);
    h.validate(sp.size());
    PartialIsometry g = r.opt().g.empty() ? PartialIsometry::identity(sp)
                                          : PartialIsometry::from_permutation(sp, permutation_of(sp, r.opt().g));
    auto v = graded_eval(h, g, sp);
    auto ex = v.exact();
    if (!ex) r.inexact();
    r.out()["descriptor"] = format_descriptor(h, sp);
    r.out()["value"] = v.to_string();
    if (ex) r.out()["exact_value"] = q(*ex);
    r.out()["enclosure"] = enc(v.enclosure());
  });
  s->add_option("space", o.in1)->required();
  s->add_option("--desc", o.desc, "descriptor text")->required();
  s->add_option("--g", o.g, "images of the points, in point order");

  s = cmd("graded-axioms", "Graded-subgroup axioms over the full isometry group", [](Runner& r) {
    auto sp = r.space(r.opt().in1);
    r.digest(r.opt().desc);
    auto h = parse_descriptor(r.opt().desc, sp);
    h.validate(sp.size());
    auto group = isometries(sp);
    std::vector<std::pair<PartialIsometry, PartialIsometry>> pairs;
    const std::size_t cap = r.opt().budget.value_or(std::numeric_limits<std::size_t>::max());
    for (const auto& g : group)
      for (const auto& g2 : group) {
        if (pairs.size() >= cap) break;
        pairs.emplace_back(PartialIsometry::from_permutation(sp, g), PartialIsometry::from_permutation(sp, g2));
      }
    auto rep = check_graded_axioms(h, pairs, sp);
    r.out()["group_order"] = group.size();
    r.out()["checked_pairs"] = rep.checked_pairs;
    r.out()["symmetry_checks"] = rep.symmetry_checks;
    r.out()["ok"] = rep.ok();
    json v = json::array();
    for (const auto& x : rep.violations) v.push_back(x.detail);
    r.out()["violations"] = v;
  });
  s->add_option("space", o.in1)->required();
  s->add_option("--desc", o.desc, "descriptor text")->required();

  s = cmd("rho-s", "Truncated left-invariant metric between two isometries", [](Runner& r) {
    auto sp = r.space(r.opt().in1);
    r.digest(r.opt().g + "|" + r.opt().h + "|" + r.opt().points);
    auto g = PartialIsometry::from_permutation(sp, permutation_of(sp, r.opt().g));
    auto h = PartialIsometry::from_permutation(sp, permutation_of(sp, r.opt().h));
    std::vector<std::size_t> en;
    if (r.opt().points.empty())
      for (std::size_t i = 0; i < sp.size(); ++i) en.push_back(i);
    else
      en = point_list(sp, r.opt().points);
    auto e = rho_s(g, h, en, r.opt().k, sp);
    if (!e.is_exact()) r.inexact();
    r.out()["k"] = r.opt().k;
    r.out()["value"] = enc(e);
  });
  s->add_option("space", o.in1)->required();
  s->add_option("--g", o.g, "images of the points")->required();
  s->add_option("--g2", o.h, "images of the points")->required();
  s->add_option("--enum", o.points, "enumeration s_1, s_2, .. (default: point order)");
  s->add_option("--k", o.k, "truncation");

  s = cmd("invariance", "phi(g a, c) <= phi(a, c) +. H(g) over the automorphisms", [](Runner& r) {
    auto m = r.structure(r.opt().in1);
    auto f = r.formula(r.opt().formula, m.signature());
    std::vector<PartialIsometry> samples;
    for (const auto& p : automorphisms(m, false)) samples.push_back(PartialIsometry::from_permutation(m.space(), p));
    auto rep = check_formula_invariance(f, m, samples, r.opt().budget.value_or(4096));
    r.out()["formula"] = to_string(f);
    r.out()["delta"] = q(rep.delta);
    r.out()["samples"] = samples.size();
    r.out()["checks"] = rep.checks;
    r.out()["ok"] = rep.ok();
    json v = json::array();
    for (const auto& x : rep.failures)
      v.push_back(json{{"sample", x.sample}, {"moved", q(x.moved)}, {"original", q(x.original)}, {"bound", q(x.bound)}});
    r.out()["failures"] = v;
  });
  s->add_option("structure", o.in1)->required();
  s->add_option("formula", o.formula)->required();

  s = cmd("approx-search", "Search for g with H(g) < eps and g(N) eps-close to M", [](Runner& r) {
    auto m = r.structure(r.opt().in1);
    auto n = r.structure(r.opt().in2);
    r.digest(r.opt().desc);
    auto h = parse_descriptor(r.opt().desc, m.space());
    std::optional<TupleEnumeration> en;
    if (!r.opt().enumeration.empty()) en = resolve_enumeration(r.load(r.opt().enumeration), m);
    std::optional<unsigned> k;
    if (r.opt().max_k) k = static_cast<unsigned>(*r.opt().max_k);
    auto res = approx_search(m, n, h, r.rational(r.opt().eps), r.opt().budget.value_or(100000), en, k);
    r.out()["found"] = res.found;
    if (res.found) {
      r.out()["witness"] = names(m.space(), res.witness);
      r.out()["h_value"] = res.h_value.to_string();
      r.out()["distance"] = q(res.distance);
    }
    r.out()["examined"] = res.examined;
  });
  s->add_option("m", o.in1)->required();
  s->add_option("n", o.in2)->required();
  s->add_option("--desc", o.desc, "descriptor text")->required();
  s->add_option("--eps", o.eps, "epsilon");
  s->add_option("--enum", o.enumeration, "enumeration artifact");
  s->add_option("--k", o.max_k, "number of delta-seq terms");

  s = cmd("oligo-probe", "Least F with Aut(M).F eps-dense in M^n", [](Runner& r) {
    auto m = r.structure(r.opt().in1);
    auto res = oligo_probe(m, r.opt().n, r.rational(r.opt().eps), r.opt().budget.value_or(2000000));
    r.out()["group_order"] = res.group_order;
    r.out()["size"] = res.family.size();
    json fam = json::array();
    for (const auto& t : res.family) fam.push_back(names(m.space(), t));
    r.out()["family"] = fam;
  });
  s->add_option("structure", o.in1)->required();
  s->add_option("--n", o.n, "tuple length");
  s->add_option("--eps", o.eps, "epsilon");

  // ---- vaught_finite
  auto transform = [](bool star) {
    return [star](Runner& r) {
      auto x = r.gspace(r.opt().in1);
      const auto& phi = x.space_table(r.opt().phi);
      const auto& j = x.group_table(r.opt().j);
      auto t = star ? vaught_star(x, phi, j) : vaught_delta(x, phi, j);
      r.out()["phi"] = r.opt().phi;
      r.out()["j"] = r.opt().j;
      r.out()["value"] = structure_tables(x, t, true);
    };
  };
  for (bool star : {false, true}) {
    s = cmd(star ? "vaught-star" : "vaught-delta",
            star ? "phi^{*J}(x) = max_h phi(hx) -. J(h)" : "phi^{Delta J}(x) = min_h phi(hx) +. J(h)", transform(star));
    s->add_option("gspace", o.in1)->required();
    s->add_option("--phi", o.phi, "space table")->required();
    s->add_option("--j", o.j, "group table")->required();
  }

  s = cmd("vaught-sets", "A^{*u} and A^{Delta u} of a subset", [](Runner& r) {
    auto x = r.gspace(r.opt().in1);
    r.digest(r.opt().a + "|" + r.opt().u);
    auto a = subset_of_points(x, r.opt().a);
    Subset u(x.order(), r.opt().u.empty());
    for (const auto& e : split_list(r.opt().u)) u[x.element_index(e)] = true;
    auto res = vaught_sets(x, a, u);
    r.out()["star"] = point_set(x, res.star);
    r.out()["delta"] = point_set(x, res.delta);
  });
  s->add_option("gspace", o.in1)->required();
  s->add_option("--a", o.a, "points of A")->required();
  s->add_option("--u", o.u, "group elements of u (default: all of G)");

  s = cmd("nice-closure", "Close tables under the connectives and Vaught transforms", [](Runner& r) {
    auto x = r.gspace(r.opt().in1);
    std::vector<GradedTable> family, cosets;
    std::vector<std::string> fam_names = r.opt().tables, coset_names = r.opt().cosets;
    if (fam_names.empty())
      for (const auto& [k, v] : x.space_tables()) fam_names.push_back(k);
    for (const auto& nme : fam_names) family.push_back(x.space_table(nme));
    for (const auto& nme : coset_names) cosets.push_back(x.group_table(nme));
    std::vector<Rational> scales;
    for (const auto& sc : r.opt().scales) scales.push_back(parse_rational(sc));
    auto res = nice_closure(x, family, cosets, r.opt().budget.value_or(10000), scales);
    r.out()["size"] = res.family.size();
    r.out()["applications"] = res.applications;
    r.out()["fixed_point"] = res.fixed_point;
    json fam = json::array();
    for (const auto& t : res.family) {
      json row = json::array();
      for (const auto& v : t) row.push_back(q(v));
      fam.push_back(row);
    }
    r.out()["family"] = fam;
  });
  s->add_option("gspace", o.in1)->required();
  s->add_option("--table", o.tables, "space table to start from (default: all)");
  s->add_option("--coset", o.cosets, "group table used as a transform index");
  s->add_option("--scale", o.scales, "scalar for q (.) x");

  s = cmd("lemma-suite", "Every transform identity over random finite G-spaces", [](Runner& r) {
    std::vector<FiniteGSpace> spaces;
    if (!r.opt().in1.empty()) {
      spaces.push_back(r.gspace(r.opt().in1));
    } else {
      r.digest("seed " + std::to_string(r.opt().seed) + " count " + std::to_string(r.opt().count));
      std::mt19937_64 rng(r.opt().seed);
      for (unsigned i = 0; i < r.opt().count; ++i) spaces.push_back(random_gspace(rng));
    }
    std::vector<std::string> order;
    std::map<std::string, std::pair<std::size_t, std::vector<std::string>>> agg;
    for (const auto& x : spaces)
      for (const auto& c : lemma_suite(x)) {
        if (!agg.count(c.name)) order.push_back(c.name);
        auto& slot = agg[c.name];
        slot.first += c.checks;
        for (const auto& v : c.violations)
          if (slot.second.size() < 5) slot.second.push_back(v);
      }
    bool ok = true;
    json checks = json::array();
    for (const auto& nme : order) {
      const auto& [count, viol] = agg[nme];
      ok = ok && viol.empty();
      checks.push_back(json{{"name", nme}, {"checks", count}, {"violations", viol}});
    }
    r.out()["gspaces"] = spaces.size();
    r.out()["ok"] = ok;
    r.out()["checks"] = checks;
  });
  s->add_option("gspace", o.in1, "G-space artifact (default: random spaces)");
  s->add_option("--count", o.count, "number of random G-spaces");

  // ---- reduction
  s = cmd("encode", "The structure M(x) coding a point of X", [](Runner& r) {
    auto inst = r.instance(r.opt().in1);
    auto m = encode(inst, inst.x.index(r.opt().x), r.opt().max_k);
    r.out()["x"] = r.opt().x;
    r.out()["relations"] = m.signature().relations.size();
    r.out()["structure"] = format_structure(m);
  });
  s->add_option("instance", o.in1)->required();
  s->add_option("--x", o.x, "point of X")->required();
  s->add_option("--max-k", o.max_k, "largest tuple length");

  s = cmd("orbit-equiv", "Same G-orbit versus isomorphic codes", [](Runner& r) {
    auto inst = r.instance(r.opt().in1);
    auto res = orbit_equiv(inst, inst.x.index(r.opt().x), inst.x.index(r.opt().x2));
    r.out()["same_orbit"] = res.same_orbit;
    r.out()["isomorphic"] = res.isomorphic;
    r.out()["agree"] = res.agree();
    if (res.orbit_witness) r.out()["orbit_witness"] = inst.group[*res.orbit_witness].name;
    if (res.witness) r.out()["witness"] = names(inst.y, *res.witness);
  });
  s->add_option("instance", o.in1)->required();
  s->add_option("--x", o.x, "point of X")->required();
  s->add_option("--x2", o.x2, "point of X")->required();

  // ---- catalog
  auto* cat = app.add_subcommand("catalog", "Store and fetch named artifacts");
  cat->require_subcommand(1);
  s = cat->add_subcommand("put", "Store an artifact in canonical form");
  s->add_option("name", o.name)->required();
  s->add_option("file", o.in1)->required();
  s->add_option("--as", o.artifact_format, "artifact format")->required()->check(CLI::IsMember(artifact_formats()));
  s->callback([&action] {
    action = [](Runner& r) {
      auto src = read_file(r.opt().in1);
      r.digest(src);
      auto e = r.catalog().put(r.opt().name, r.opt().artifact_format, src);
      r.out()["name"] = e.name;
      r.out()["format"] = e.format;
      r.out()["file"] = e.file;
    };
  });
  s = cat->add_subcommand("get", "Print a stored artifact");
  s->add_option("name", o.name)->required();
  s->callback([&action] {
    action = [](Runner& r) {
      r.out()["name"] = r.opt().name;
      r.out()["format"] = r.catalog().entry(r.opt().name).format;
      r.out()["text"] = r.load("@" + r.opt().name);
    };
  });
  s = cat->add_subcommand("list", "List the manifest");
  s->callback([&action] {
    action = [](Runner& r) {
      json e = json::array();
      for (const auto& x : r.catalog().entries())
        e.push_back(json{{"name", x.name}, {"format", x.format}, {"file", x.file}});
      r.out()["enumeration"] = r.catalog().enumeration();
      r.out()["entries"] = e;
    };
  });
  s = cat->add_subcommand("set-enum", "Record the tuple enumeration used by delta-seq");
  s->add_option("name", o.name)->required();
  s->callback([&action] {
    action = [](Runner& r) {
      r.catalog().set_enumeration(r.opt().name);
      r.out()["enumeration"] = r.opt().name;
    };
  });
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  std::function<void(Runner&)> action;
  std::vector<std::string> rels, consts;

  CLI::App app{"Exact tools for finite metric structures and the Urysohn space", "ury"};
  app.fallthrough();
  app.require_subcommand(1);
  app.add_option("--catalog", o.catalog_dir, std::string("catalog directory (default: $") + kCatalogEnv + ")");
  app.add_option("--seed", o.seed, "random seed");
  app.add_option("--mesh", o.mesh, "initial quantifier mesh num/den");
  app.add_option("--rounds", o.rounds, "refinement rounds");
  app.add_option("--budget", o.budget, "work budget of the command");
  app.add_option("--format", o.format, "report format")->check(CLI::IsMember({"text", "json"}));
  add_commands(app, o, action, rels, consts);

  std::vector<std::string> argv_store{"ury"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }
  if (!action) {
    err << "no command given\n";
    return 2;
  }

  Report report;
  report.args = args;
  for (auto* sub : app.get_subcommands()) {
    report.command = sub->get_name();
    for (auto* inner : sub->get_subcommands()) report.command += " " + inner->get_name();
  }
  Runner runner(o, report);
  auto start = std::chrono::steady_clock::now();
  int code = 0;
  try {
    action(runner);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    if (const auto* pe = dynamic_cast<const ParseError*>(&e); pe && pe->line() > 0)
      err << "  at line " << pe->line() << '\n';
    code = 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    code = 1;
  }
  report.elapsed_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  if (code == 0 || !report.result.empty()) {
    if (o.format == "json")
      out << report.to_json().dump(2) << '\n';
    else
      out << report.to_text();
  }
  return code;
}

}  // namespace ury::cli
