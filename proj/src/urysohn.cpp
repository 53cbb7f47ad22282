#include "ury/urysohn.hpp"

#include <algorithm>
#include <functional>
#include <optional>
#include <queue>
#include <sstream>

#include "text.hpp"

namespace ury {

AnchoredStructure::AnchoredStructure(RationalMetricSpace anchors) : anchors_(std::move(anchors)) {
  for (const auto& p : anchors_.points()) sig_.constant(p);
  sig_.validate();
}

void AnchoredStructure::define(const std::string& name, std::vector<std::string> args, const std::string& body) {
  Signature plain;
  plain.constants = sig_.constants;
  define(name, std::move(args), parse_formula(body, plain));
}

void AnchoredStructure::define(const std::string& name, std::vector<std::string> args, Formula body) {
  if (args.empty()) throw DomainError("predicate '" + name + "' needs at least one argument");
  if (!body.is_quantifier_free()) throw DomainError("predicate '" + name + "' must be defined without quantifiers");
  std::set<std::string> allowed(args.begin(), args.end());
  if (allowed.size() != args.size()) throw DomainError("predicate '" + name + "' repeats an argument");
  for (const auto& a : args)
    if (anchors_.contains(a)) throw DomainError("argument '" + a + "' clashes with an anchor");
  for (const auto& v : body.free_variables())
    if (!allowed.count(v)) throw DomainError("predicate '" + name + "' uses undeclared variable '" + v + "'");
  std::function<void(const Formula&)> only_d = [&](const Formula& f) {
    if (f.kind() == NodeKind::Rel) throw DomainError("predicate '" + name + "' may only use the distance symbol");
    for (const auto& c : f.node().children) only_d(c);
  };
  only_d(body);
  Signature trial = sig_;
  Rational coef = lipschitz(body, sig_, allowed);
  trial.relation(name, args.size(), coef > 0 ? coef : Rational(1));
  trial.validate();
  check_well_formed(body, sig_);
  sig_ = trial;
  defs_.insert_or_assign(name, Definition{std::move(args), std::move(body)});
}

const AnchoredStructure::Definition& AnchoredStructure::definition(const std::string& name) const {
  auto it = defs_.find(name);
  if (it == defs_.end()) throw DomainError("unknown predicate '" + name + "'");
  return it->second;
}

namespace {

using Matrix = std::vector<std::vector<Rational>>;

struct Cell {
  std::vector<Rational> corner;
  Rational side;
  Enclosure value;
  Rational bound;  // upper bound for sup, lower bound for inf
};

class Evaluator {
 public:
  Evaluator(const AnchoredStructure& m, Rational mesh, std::size_t max_cells)
      : m_(m), mesh_(std::move(mesh)), max_cells_(max_cells) {
    const auto& a = m.anchors();
    d_.assign(a.size(), std::vector<Rational>(a.size(), Rational(0)));
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < a.size(); ++j) d_[i][j] = a.d(i, j);
  }

  Enclosure run(const Formula& f) {
    const auto& n = f.node();
    switch (n.kind) {
      case NodeKind::Const: return Enclosure::exact(n.value);
      case NodeKind::Dist: return Enclosure::exact(d_[point(n.terms[0])][point(n.terms[1])]);
      case NodeKind::Rel: {
        const auto& def = m_.definition(n.name);
        if (def.args.size() != n.terms.size()) throw DomainError("arity mismatch for '" + n.name + "'");
        std::map<std::string, std::size_t> inner;
        for (std::size_t i = 0; i < def.args.size(); ++i) inner[def.args[i]] = point(n.terms[i]);
        std::swap(inner, env_);
        Enclosure v = run(def.body);
        std::swap(inner, env_);
        return v;
      }
      case NodeKind::Half: return half(run(n.children[0]));
      case NodeKind::Neg: return negation(run(n.children[0]));
      case NodeKind::Scale: return dot_scale(n.value, run(n.children[0]));
      case NodeKind::DotMinus: return dot_minus(run(n.children[0]), run(n.children[1]));
      case NodeKind::DotPlus: return dot_plus(run(n.children[0]), run(n.children[1]));
      case NodeKind::Min: return min(run(n.children[0]), run(n.children[1]));
      case NodeKind::Max: return max(run(n.children[0]), run(n.children[1]));
      case NodeKind::AbsDiff: return abs_diff(run(n.children[0]), run(n.children[1]));
      case NodeKind::Sup: return optimize(n, true);
      case NodeKind::Inf: return optimize(n, false);
    }
    return Enclosure::exact(0);
  }

 private:
  std::size_t point(const Term& t) const {
    if (t.is_constant) {
      auto p = m_.anchors().find(t.name);
      if (!p) throw DomainError("unknown constant '" + t.name + "'");
      return *p;
    }
    auto it = env_.find(t.name);
    if (it == env_.end()) throw DomainError("unbound variable '" + t.name + "'");
    return it->second;
  }

  // Points whose distances to the new point can change the body's value.
  std::vector<std::size_t> relevant(const Formula& body, const std::string& bound) const {
    std::set<std::size_t> out;
    for (const auto& v : body.free_variables())
      if (v != bound) out.insert(point(var(v)));
    for (const auto& c : body.constants()) out.insert(point(cst(c)));
    std::function<void(const Formula&)> walk = [&](const Formula& f) {
      if (f.kind() == NodeKind::Rel)
        for (const auto& c : m_.definition(f.node().name).body.constants()) out.insert(point(cst(c)));
      for (const auto& ch : f.node().children) walk(ch);
    };
    walk(body);
    return {out.begin(), out.end()};
  }

  // Evaluates the body at the point realizing the capped McShane extension
  // of `corner` over the relevant points; nullopt when it is not admissible.
  std::optional<Enclosure> probe(const FormulaNode& n, const std::vector<std::size_t>& rel,
                                 const std::vector<Rational>& corner) {
    const std::size_t k = rel.size();
    std::vector<Rational> g(k);
    for (std::size_t i = 0; i < k; ++i) {
      Rational v = 1;
      for (std::size_t j = 0; j < k; ++j) {
        Rational c = corner[j] + d_[rel[j]][rel[i]];
        if (c < v) v = c;
      }
      g[i] = v;
    }
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = i + 1; j < k; ++j)
        if (d_[rel[i]][rel[j]] > g[i] + g[j]) return std::nullopt;
    const std::size_t size = d_.size();
    std::vector<Rational> row(size + 1, Rational(1));
    for (std::size_t p = 0; p < size; ++p) {
      for (std::size_t j = 0; j < k; ++j) {
        Rational c = g[j] + d_[rel[j]][p];
        if (c < row[p]) row[p] = c;
      }
    }
    row[size] = 0;
    for (std::size_t p = 0; p < size; ++p) d_[p].push_back(row[p]);
    d_.push_back(row);
    auto it = env_.find(n.name);
    const bool shadowed = it != env_.end();
    const std::size_t saved = shadowed ? it->second : 0;
    env_[n.name] = size;
    Enclosure v = run(n.children[0]);
    if (shadowed) {
      env_[n.name] = saved;
    } else {
      env_.erase(n.name);
    }
    d_.pop_back();
    for (auto& r : d_) r.pop_back();
    return v;
  }

  Enclosure optimize(const FormulaNode& n, bool sup) {
    const Formula& body = n.children[0];
    const auto rel = relevant(body, n.name);
    const Rational L = lipschitz(body, m_.signature(), {n.name});
    const std::size_t k = rel.size();
    if (k == 0) {
      // nothing to vary: every placement of the new point looks the same
      return *probe(n, rel, {});
    }
    auto bound_of = [&](const Enclosure& v, const Rational& side) {
      if (sup) {
        Rational u = v.hi + L * side;
        return u > 1 ? Rational(1) : u;
      }
      Rational l = v.lo - L * side;
      return l < 0 ? Rational(0) : l;
    };
    auto worse = [sup](const Cell& a, const Cell& b) { return sup ? a.bound < b.bound : a.bound > b.bound; };
    std::priority_queue<Cell, std::vector<Cell>, decltype(worse)> open(worse);
    std::optional<Rational> best;  // achieved value: max lo for sup, min hi for inf
    std::size_t cells = 0;
    auto consider = [&](std::vector<Rational> corner, const Rational& side) {
      std::vector<Rational> upper(k);
      for (std::size_t i = 0; i < k; ++i) upper[i] = std::min(Rational(corner[i] + side), Rational(1));
      ++cells;
      auto v = probe(n, rel, upper);
      if (!v) return;
      Rational achieved = sup ? v->lo : v->hi;
      if (!best || (sup ? achieved > *best : achieved < *best)) best = achieved;
      open.push(Cell{std::move(corner), side, *v, bound_of(*v, side)});
    };
    consider(std::vector<Rational>(k, Rational(0)), 1);
    if (!best) throw ConstructionError("no admissible extension found for a quantifier");

    std::optional<Rational> limit;
    while (!open.empty()) {
      Cell top = open.top();
      open.pop();
      const bool dominated = sup ? top.bound <= *best : top.bound >= *best;
      if (dominated) break;
      if (top.side <= mesh_ || cells >= max_cells_) {
        limit = top.bound;  // best remaining bound; everything else is no better
        break;
      }
      Rational half_side = top.side / 2;
      for (std::size_t mask = 0; mask < (std::size_t(1) << k); ++mask) {
        std::vector<Rational> corner = top.corner;
        for (std::size_t i = 0; i < k; ++i)
          if (mask & (std::size_t(1) << i)) corner[i] += half_side;
        consider(std::move(corner), half_side);
      }
    }
    Enclosure out;
    if (sup) {
      out = {*best, limit && *limit > *best ? *limit : *best};
    } else {
      out = {limit && *limit < *best ? *limit : *best, *best};
    }
    return clamp_unit(out);
  }

  const AnchoredStructure& m_;
  Rational mesh_;
  std::size_t max_cells_;
  Matrix d_;
  std::map<std::string, std::size_t> env_;
};

}  // namespace

FiniteStructure AnchoredStructure::induced_structure() const {
  FiniteStructure out(anchors_, sig_);
  for (std::size_t i = 0; i < anchors_.size(); ++i) out.set_constant(anchors_.id(i), i);
  for (const auto& [name, def] : defs_) {
    for (const auto& t : all_tuples(anchors_.size(), def.args.size())) {
      Assignment a;
      for (std::size_t i = 0; i < t.size(); ++i) a[def.args[i]] = t[i];
      out.set_value(name, t, eval(def.body, out, a));
    }
  }
  return out;
}

UrysohnResult eval_urysohn(const Formula& f, const AnchoredStructure& m, const QuantifierBudget& budget) {
  if (budget.mesh <= 0) throw DomainError("mesh must be positive");
  if (budget.rounds == 0) throw DomainError("at least one refinement round is needed");
  if (!f.free_variables().empty()) throw DomainError("eval_urysohn needs a sentence; free: " + *f.free_variables().begin());
  check_well_formed(f, m.signature());
  UrysohnResult out;
  Rational mesh = budget.mesh;
  for (unsigned r = 0; r < budget.rounds; ++r) {
    Evaluator ev(m, mesh, budget.max_cells);
    Enclosure e = clamp_unit(ev.run(f));
    out.value = r == 0 ? e : intersect(out.value, e);
    out.rounds.push_back(out.value);
    mesh /= 2;
  }
  return out;
}

QfDecision qf_decide(const Formula& f, const AnchoredStructure& m) {
  if (!f.is_quantifier_free()) throw DomainError("qf_decide needs a quantifier-free formula");
  if (!f.free_variables().empty()) throw DomainError("qf_decide needs a sentence; free: " + *f.free_variables().begin());
  for (const auto& c : f.constants())
    if (!m.anchors().contains(c)) throw DomainError("unknown constant '" + c + "'");
  check_well_formed(f, m.signature());
  Evaluator ev(m, 1, 1);
  Enclosure e = ev.run(f);
  if (!e.is_exact()) throw ConstructionError("quantifier-free value was not exact");
  return {e.lo};
}

Enclosure theta_demo(const Rational& q, const Rational& tol) {
  if (!(q > Rational(1, 10) && q < Rational(1, 2))) throw DomainError("theta_demo needs 1/10 < q < 1/2");
  if (tol <= 0) throw DomainError("tol must be positive");
  // F(e) = min(10(q-e),1) +. sqrt(e) on [0,q].
  // On [0, q-1/10] the first term is 1, so F = 1.
  // On [q-1/10, q], F = min(1, 10(q-e) + sqrt(e)) is concave: its infimum is
  // at an endpoint. At e = q-1/10, F = 1 +. sqrt(e) = 1; at e = q, F = sqrt(q).
  const Rational a = q - Rational(1, 10);
  auto F = [&](const Rational& e, unsigned bits) {
    Enclosure lin = dot_scale(Rational(10), Enclosure::exact(q - e));
    return dot_plus(lin, sqrt_enclosure(e, bits));
  };
  for (unsigned bits = 16;; bits += 8) {
    Enclosure v = Enclosure::exact(1);
    v = min(v, F(a, bits));
    v = min(v, F(q, bits));
    if (v.width() <= tol) return v;
    if (bits > 4096) throw ConstructionError("theta_demo failed to reach the requested width");
  }
}

AnchoredStructure parse_anchored(const std::string& source) {
  auto lines = text::logical_lines(source);
  RationalMetricSpace anchors;
  std::size_t i = parse_metric_block(lines, 0, anchors);
  AnchoredStructure m(anchors);
  for (; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::size_t ln = i + 1;
    auto sep = lines[i].find(":=");
    if (sep == std::string::npos) throw ParseError("expected 'def <name> <args> := <body>'", 0, ln);
    auto head = text::tokens(std::string_view(lines[i]).substr(0, sep));
    if (head.size() < 3 || head[0] != "def") throw ParseError("expected 'def <name> <args> := <body>'", 0, ln);
    try {
      m.define(head[1], std::vector<std::string>(head.begin() + 2, head.end()), lines[i].substr(sep + 2));
    } catch (const ParseError& e) {
      throw ParseError(e.what(), e.position(), ln);
    }
  }
  return m;
}

std::string format_anchored(const AnchoredStructure& m) {
  std::ostringstream out;
  out << format_metric_space(m.anchors());
  for (const auto& [name, def] : m.definitions())
    out << "def " << name << ' ' << text::join(def.args, " ") << " := " << to_string(def.body) << '\n';
  return out.str();
}

}  // namespace ury
