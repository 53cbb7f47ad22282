#include "ury/structure.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <tuple>

#include "text.hpp"

namespace ury {

FiniteStructure::FiniteStructure(RationalMetricSpace space, Signature sig) : space_(std::move(space)), sig_(std::move(sig)) {
  sig_.validate();
  for (const auto& r : sig_.relations) {
    std::size_t cells = 1;
    for (std::size_t i = 0; i < r.arity; ++i) cells *= space_.size();
    tables_[r.name].assign(cells, Rational(0));
  }
}

std::size_t FiniteStructure::offset(const Signature::Relation& r, const Tuple& t) const {
  if (t.size() != r.arity) throw DomainError("arity mismatch for '" + r.name + "'");
  std::size_t k = 0;
  for (std::size_t p : t) {
    if (p >= space_.size()) throw DomainError("point index out of range");
    k = k * space_.size() + p;
  }
  return k;
}

const Rational& FiniteStructure::value(const std::string& rel, const Tuple& t) const {
  const auto* r = sig_.find_relation(rel);
  if (!r) throw DomainError("unknown relation '" + rel + "'");
  return tables_.at(rel)[offset(*r, t)];
}

void FiniteStructure::set_value(const std::string& rel, const Tuple& t, const Rational& v) {
  const auto* r = sig_.find_relation(rel);
  if (!r) throw DomainError("unknown relation '" + rel + "'");
  tables_.at(rel)[offset(*r, t)] = v;
}

const std::vector<Rational>& FiniteStructure::table(const std::string& rel) const {
  auto it = tables_.find(rel);
  if (it == tables_.end()) throw DomainError("unknown relation '" + rel + "'");
  return it->second;
}

void FiniteStructure::set_constant(const std::string& name, std::size_t point) {
  if (!sig_.is_constant(name)) throw DomainError("unknown constant '" + name + "'");
  if (point >= space_.size()) throw DomainError("point index out of range");
  constants_[name] = point;
}

std::size_t FiniteStructure::constant(const std::string& name) const {
  auto it = constants_.find(name);
  if (it == constants_.end()) throw DomainError("constant '" + name + "' is not interpreted");
  return it->second;
}

std::vector<Tuple> all_tuples(std::size_t n, std::size_t k) {
  std::vector<Tuple> out;
  if (n == 0 && k > 0) return out;
  Tuple t(k, 0);
  while (true) {
    out.push_back(t);
    std::size_t i = k;
    while (i > 0 && t[i - 1] + 1 == n) t[--i] = 0;
    if (i == 0) break;
    ++t[i - 1];
  }
  return out;
}

namespace {

std::string tuple_text(const RationalMetricSpace& s, const Tuple& t) {
  std::string out = "(";
  for (std::size_t i = 0; i < t.size(); ++i) out += (i ? "," : "") + s.id(t[i]);
  return out + ")";
}

}  // namespace

std::string ModulusViolation::describe() const {
  std::ostringstream out;
  out << relation << " breaks its modulus between [";
  for (std::size_t i = 0; i < x.size(); ++i) out << (i ? " " : "") << x[i];
  out << "] and [";
  for (std::size_t i = 0; i < y.size(); ++i) out << (i ? " " : "") << y[i];
  out << "]";
  return out.str();
}

std::optional<ModulusViolation> modulus_violation(const FiniteStructure& m) {
  for (const auto& r : m.signature().relations) {
    auto tuples = all_tuples(m.size(), r.arity);
    const auto& tab = m.table(r.name);
    for (std::size_t i = 0; i < tuples.size(); ++i) {
      for (std::size_t j = i + 1; j < tuples.size(); ++j) {
        Rational gap = tab[i] - tab[j];
        if (gap < 0) gap = -gap;
        if (gap > r.coefficient * tuple_distance(m.space(), tuples[i], tuples[j])) {
          return ModulusViolation{r.name, tuples[i], tuples[j]};
        }
      }
    }
  }
  return std::nullopt;
}

void validate_structure(const FiniteStructure& m) {
  for (const auto& r : m.signature().relations) {
    for (const auto& v : m.table(r.name)) {
      if (!in_unit_interval(v)) throw DomainError("relation '" + r.name + "' has a value outside [0,1]");
    }
  }
  for (const auto& c : m.signature().constants) m.constant(c);
  if (auto v = modulus_violation(m)) {
    throw DomainError(v->relation + " violates its modulus between " + tuple_text(m.space(), v->x) + " and " +
                      tuple_text(m.space(), v->y));
  }
}

// ---------------------------------------------------------------- eval

namespace {

struct Evaluator {
  const FiniteStructure& m;
  Assignment env;

  std::size_t point(const Term& t) const {
    if (t.is_constant) return m.constant(t.name);
    auto it = env.find(t.name);
    if (it == env.end()) throw DomainError("unbound variable '" + t.name + "'");
    return it->second;
  }

  Rational quantify(const FormulaNode& n, bool take_max) {
    auto it = env.find(n.name);
    const bool shadowed = it != env.end();
    const std::size_t saved = shadowed ? it->second : 0;
    Rational best = take_max ? 0 : 1;
    for (std::size_t p = 0; p < m.size(); ++p) {
      env[n.name] = p;
      Rational v = run(n.children[0]);
      if (take_max ? v > best : v < best) best = v;
    }
    if (shadowed) env[n.name] = saved; else env.erase(n.name);
    return best;
  }

  Rational run(const Formula& f) {
    const auto& n = f.node();
    switch (n.kind) {
      case NodeKind::Const: return n.value;
      case NodeKind::Dist: return m.space().d(point(n.terms[0]), point(n.terms[1]));
      case NodeKind::Rel: {
        Tuple t;
        for (const auto& term : n.terms) t.push_back(point(term));
        return m.value(n.name, t);
      }
      case NodeKind::Half: return run(n.children[0]) / 2;
      case NodeKind::Neg: return negation(run(n.children[0]));
      case NodeKind::Scale: return dot_scale(n.value, run(n.children[0]));
      case NodeKind::DotMinus: return dot_minus(run(n.children[0]), run(n.children[1]));
      case NodeKind::DotPlus: return dot_plus(run(n.children[0]), run(n.children[1]));
      case NodeKind::Min: {
        Rational a = run(n.children[0]), b = run(n.children[1]);
        return a < b ? a : b;
      }
      case NodeKind::Max: {
        Rational a = run(n.children[0]), b = run(n.children[1]);
        return a < b ? b : a;
      }
      case NodeKind::AbsDiff: {
        Rational a = run(n.children[0]) - run(n.children[1]);
        return a < 0 ? Rational(-a) : a;
      }
      case NodeKind::Sup: return quantify(n, true);
      case NodeKind::Inf: return quantify(n, false);
    }
    return 0;
  }
};

}  // namespace

Rational eval(const Formula& f, const FiniteStructure& m, const Assignment& a) {
  if (m.size() == 0) throw DomainError("empty structure");
  for (const auto& [v, p] : a)
    if (p >= m.size()) throw DomainError("variable '" + v + "' assigned to a point out of range");
  check_well_formed(f, m.signature());
  Evaluator ev{m, a};
  return ev.run(f);
}

TupleEnumeration default_enumeration(const FiniteStructure& m) {
  TupleEnumeration out;
  for (const auto& r : m.signature().relations)
    for (auto& t : all_tuples(m.size(), r.arity)) out.emplace_back(r.name, t);
  return out;
}

Enclosure delta_seq(const FiniteStructure& m, const FiniteStructure& n, const TupleEnumeration& enumeration,
                    unsigned k) {
  if (!(m.space() == n.space())) throw DomainError("delta_seq needs structures on the same space");
  if (!(m.signature() == n.signature())) throw DomainError("delta_seq needs structures with the same signature");
  const unsigned terms = static_cast<unsigned>(std::min<std::size_t>(k, enumeration.size()));
  Rational sum = 0;
  for (unsigned i = 0; i < terms; ++i) {
    const auto& [rel, t] = enumeration[i];
    Rational gap = m.value(rel, t) - n.value(rel, t);
    if (gap < 0) gap = -gap;
    sum += pow2_neg(i + 1) * gap;
  }
  return {sum, sum + pow2_neg(terms)};
}

bool mod_member(const FiniteStructure& m, const Formula& f, const Assignment& a, const Rational& eps, Comparison cmp) {
  Rational v = eval(f, m, a);
  return cmp == Comparison::LessThan ? v < eps : v > eps;
}

// ---------------------------------------------------------------- sc_probe

std::string to_string(ScProbeReport::Outcome o) {
  switch (o) {
    case ScProbeReport::Outcome::Witness: return "witness";
    case ScProbeReport::Outcome::Counterexample: return "counterexample";
    default: return "inconclusive";
  }
}

namespace {

std::string xvar(std::size_t i) { return "x" + std::to_string(i + 1); }

struct BudgetExceeded {};

// Ranks c over combinations of `pool` of size k, lexicographic.
std::vector<std::vector<std::size_t>> combinations(std::size_t n, std::size_t k) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> c(k);
  for (std::size_t i = 0; i < k; ++i) c[i] = i;
  if (k > n) return out;
  while (true) {
    out.push_back(c);
    std::size_t i = k;
    while (i > 0 && c[i - 1] == n - k + i - 1) --i;
    if (i == 0) break;
    ++c[i - 1];
    for (std::size_t j = i; j < k; ++j) c[j] = c[j - 1] + 1;
  }
  return out;
}

}  // namespace

ScProbeReport sc_probe(const FiniteStructure& m, std::size_t n, const Rational& eps, const std::vector<Formula>& pool,
                       std::size_t depth, std::size_t budget) {
  ScProbeReport rep;
  if (n == 0) throw DomainError("sc_probe needs n >= 1");
  std::set<std::string> vars_n, vars_ext;
  for (std::size_t i = 0; i < n; ++i) vars_n.insert(xvar(i));
  vars_ext = vars_n;
  vars_ext.insert(xvar(n));

  auto within = [](const Formula& f, const std::set<std::string>& vs) {
    auto fv = f.free_variables();
    return std::includes(vs.begin(), vs.end(), fv.begin(), fv.end());
  };
  std::vector<Formula> pool_n, pool_ext;
  std::size_t ignored = 0;
  for (const auto& f : pool) {
    if (within(f, vars_n)) pool_n.push_back(f);
    if (within(f, vars_ext)) pool_ext.push_back(f);
    else ++ignored;
  }
  if (ignored) rep.note = std::to_string(ignored) + " pool formula(s) use variables beyond x1..x" + std::to_string(n + 1);

  const auto tuples = all_tuples(m.size(), n);
  const auto ext_tuples = all_tuples(m.size(), n + 1);
  std::size_t spent = 0;
  auto charge = [&](std::size_t c) {
    spent += c;
    if (spent > budget) throw BudgetExceeded{};
  };
  auto assign = [&](const Tuple& t) {
    Assignment a;
    for (std::size_t i = 0; i < t.size(); ++i) a[xvar(i)] = t[i];
    return a;
  };

  try {
    // value tables
    std::vector<std::vector<Rational>> val_n(pool_n.size()), val_ext(pool_ext.size());
    for (std::size_t f = 0; f < pool_n.size(); ++f)
      for (const auto& t : tuples) {
        charge(1);
        val_n[f].push_back(eval(pool_n[f], m, assign(t)));
      }
    for (std::size_t f = 0; f < pool_ext.size(); ++f)
      for (const auto& t : ext_tuples) {
        charge(1);
        val_ext[f].push_back(eval(pool_ext[f], m, assign(t)));
      }

    // candidate conditions, one per distinct satisfying set
    std::vector<Condition> cands;
    std::vector<std::vector<bool>> sat;
    std::set<std::vector<bool>> seen;
    for (std::size_t f = 0; f < pool_n.size(); ++f) {
      std::set<Rational> values(val_n[f].begin(), val_n[f].end());
      for (const auto& delta : values) {
        std::vector<bool> s(tuples.size());
        for (std::size_t t = 0; t < tuples.size(); ++t) s[t] = val_n[f][t] <= delta;
        if (seen.insert(s).second) {
          cands.push_back({pool_n[f], delta});
          sat.push_back(s);
        }
      }
    }
    rep.candidates = cands.size();

    // index of an (n+1)-tuple's first n coordinates in `tuples`
    auto head = [&](std::size_t ext) { return ext / m.size(); };
    const std::size_t k = std::min(depth, pool_ext.size());
    const auto deltas = combinations(pool_ext.size(), k);

    std::vector<bool> valid(cands.size(), true);
    std::vector<std::optional<ExtensionFailure>> why(cands.size());
    for (std::size_t c = 0; c < cands.size(); ++c) {
      for (std::size_t a = 0; a < tuples.size() && valid[c]; ++a) {
        if (!sat[c][a]) continue;
        for (std::size_t r = 0; r < ext_tuples.size() && valid[c]; ++r) {
          if (!sat[c][head(r)]) continue;
          for (const auto& subset : deltas) {
            bool found = false;
            for (std::size_t b = 0; b < ext_tuples.size() && !found; ++b) {
              charge(1);
              if (!sat[c][head(b)]) continue;
              bool ok = true;
              for (std::size_t i = 0; i < n && ok; ++i) ok = m.space().d(tuples[a][i], ext_tuples[b][i]) < eps;
              for (std::size_t s : subset) {
                if (!ok) break;
                ok = val_ext[s][b] <= val_ext[s][r];
              }
              found = ok;
            }
            if (!found) {
              valid[c] = false;
              ExtensionFailure fail{c, tuples[a], ext_tuples[r], {cands[c]}};
              for (std::size_t s : subset) fail.delta.push_back({pool_ext[s], val_ext[s][r]});
              why[c] = fail;
              break;
            }
          }
        }
      }
    }

    std::vector<std::size_t> good;
    for (std::size_t c = 0; c < cands.size(); ++c)
      if (valid[c]) good.push_back(c);
    rep.valid = good.size();

    for (std::size_t t = 0; t < tuples.size(); ++t) {
      bool covered = std::any_of(good.begin(), good.end(), [&](std::size_t c) { return sat[c][t]; });
      if (!covered) {
        rep.outcome = ScProbeReport::Outcome::Counterexample;
        rep.uncovered = tuples[t];
        for (std::size_t c = 0; c < cands.size(); ++c)
          if (sat[c][t] && why[c]) rep.failures.push_back(*why[c]);
        return rep;
      }
    }

    // least cover, by size; greedy once the search gets too large
    auto covers = [&](const std::vector<std::size_t>& pick) {
      for (std::size_t t = 0; t < tuples.size(); ++t) {
        bool hit = false;
        for (std::size_t i : pick) hit = hit || sat[good[i]][t];
        if (!hit) return false;
      }
      return true;
    };
    for (std::size_t size = 1; size <= good.size(); ++size) {
      auto combos = combinations(good.size(), size);
      if (spent + combos.size() * tuples.size() > budget) break;
      for (const auto& pick : combos) {
        charge(tuples.size());
        if (covers(pick)) {
          for (std::size_t i : pick) rep.family.push_back(cands[good[i]]);
          rep.minimal = true;
          rep.outcome = ScProbeReport::Outcome::Witness;
          return rep;
        }
      }
    }
    std::vector<bool> done(tuples.size(), false);
    std::size_t left = tuples.size();
    while (left > 0) {
      std::size_t best = 0, gain = 0;
      for (std::size_t i = 0; i < good.size(); ++i) {
        std::size_t g = 0;
        for (std::size_t t = 0; t < tuples.size(); ++t) g += (!done[t] && sat[good[i]][t]) ? 1 : 0;
        if (g > gain) gain = g, best = i;
      }
      rep.family.push_back(cands[good[best]]);
      for (std::size_t t = 0; t < tuples.size(); ++t)
        if (sat[good[best]][t] && !done[t]) done[t] = true, --left;
    }
    rep.outcome = ScProbeReport::Outcome::Witness;
    return rep;
  } catch (const BudgetExceeded&) {
    rep = ScProbeReport{};
    rep.outcome = ScProbeReport::Outcome::Inconclusive;
    rep.note = "budget of " + std::to_string(budget) + " steps exhausted";
    return rep;
  }
}

// ---------------------------------------------------------------- text format

FiniteStructure parse_structure(const std::string& source) {
  auto lines = text::logical_lines(source);
  RationalMetricSpace space;
  std::size_t i = parse_metric_block(lines, 0, space);

  struct RelBlock {
    std::string name;
    std::optional<Rational> coef;
    std::vector<std::pair<Tuple, Rational>> rows;
    std::size_t line;
  };
  std::vector<RelBlock> rels;
  std::vector<std::tuple<std::string, std::size_t, std::size_t>> consts;
  auto point = [&](const std::string& id, std::size_t line) {
    auto p = space.find(id);
    if (!p) throw ParseError("unknown point '" + id + "'", 0, line);
    return *p;
  };
  auto rational_at = [](const std::string& tok, std::size_t line) {
    try {
      return parse_rational(tok);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), 0, line);
    }
  };
  for (; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto tok = text::tokens(lines[i]);
    const std::size_t ln = i + 1;
    if (tok[0] == "rel") {
      if (tok.size() < 2 || tok.size() > 3) throw ParseError("expected 'rel <name> [coefficient]'", 0, ln);
      RelBlock b{tok[1], std::nullopt, {}, ln};
      if (tok.size() == 3) b.coef = rational_at(tok[2], ln);
      rels.push_back(b);
    } else if (tok[0] == "v") {
      if (rels.empty()) throw ParseError("'v' line outside a rel block", 0, ln);
      if (tok.size() < 3) throw ParseError("expected 'v p1 .. pk num/den'", 0, ln);
      Tuple t;
      for (std::size_t k = 1; k + 1 < tok.size(); ++k) t.push_back(point(tok[k], ln));
      rels.back().rows.emplace_back(t, rational_at(tok.back(), ln));
    } else if (tok[0] == "const") {
      if (tok.size() != 3) throw ParseError("expected 'const <name> <point>'", 0, ln);
      consts.emplace_back(tok[1], point(tok[2], ln), ln);
    } else {
      throw ParseError("unexpected line '" + lines[i] + "'", 0, ln);
    }
  }

  Signature sig;
  for (const auto& b : rels) {
    if (b.rows.empty()) throw ParseError("relation '" + b.name + "' has no values", 0, b.line);
    sig.relation(b.name, b.rows.front().first.size(), b.coef);
  }
  for (const auto& [name, p, ln] : consts) sig.constant(name);
  try {
    sig.validate();
  } catch (const DomainError& e) {
    throw ParseError(e.what(), 0, 0);
  }
  FiniteStructure m(space, sig);
  for (const auto& b : rels) {
    const std::size_t arity = b.rows.front().first.size();
    std::set<Tuple> seen;
    for (const auto& [t, v] : b.rows) {
      if (t.size() != arity) throw ParseError("relation '" + b.name + "' used with two arities", 0, b.line);
      if (!seen.insert(t).second) throw ParseError("relation '" + b.name + "' lists a tuple twice", 0, b.line);
      m.set_value(b.name, t, v);
    }
    if (seen.size() != all_tuples(space.size(), arity).size())
      throw ParseError("relation '" + b.name + "' is not total", 0, b.line);
  }
  for (const auto& [name, p, ln] : consts) m.set_constant(name, p);
  validate_structure(m);
  return m;
}

std::string format_structure(const FiniteStructure& m) {
  std::ostringstream out;
  out << format_metric_space(m.space());
  for (const auto& r : m.signature().relations) {
    out << "rel " << r.name;
    if (r.coefficient != static_cast<long>(r.arity)) out << ' ' << to_string(r.coefficient);
    out << '\n';
    for (const auto& t : all_tuples(m.size(), r.arity)) {
      out << 'v';
      for (std::size_t p : t) out << ' ' << m.space().id(p);
      out << ' ' << to_string(m.value(r.name, t)) << '\n';
    }
  }
  for (const auto& c : m.signature().constants) out << "const " << c << ' ' << m.space().id(m.constant(c)) << '\n';
  return out.str();
}

// ---------------------------------------------------------------- generators

FiniteStructure random_structure(std::mt19937_64& rng, const RationalMetricSpace& space, const Signature& sig,
                                 long denominator) {
  FiniteStructure m(space, sig);
  std::uniform_int_distribution<long> pick_value(0, denominator);
  for (const auto& r : sig.relations) {
    auto tuples = all_tuples(space.size(), r.arity);
    std::uniform_int_distribution<std::size_t> pick_tuple(0, tuples.size() - 1);
    std::vector<std::pair<std::size_t, Rational>> seeds;
    const std::size_t count = 1 + pick_tuple(rng) % 4;
    for (std::size_t s = 0; s < count; ++s) {
      Rational v(pick_value(rng), denominator);
      v.canonicalize();
      seeds.emplace_back(pick_tuple(rng), v);
    }
    for (std::size_t t = 0; t < tuples.size(); ++t) {
      Rational best = 1;
      for (const auto& [s, v] : seeds) {
        Rational cand = v + r.coefficient * tuple_distance(space, tuples[t], tuples[s]);
        if (cand < best) best = cand;
      }
      m.set_value(r.name, tuples[t], best);
    }
  }
  std::uniform_int_distribution<std::size_t> pick_point(0, space.size() - 1);
  for (const auto& c : sig.constants) m.set_constant(c, pick_point(rng));
  return m;
}

}  // namespace ury
