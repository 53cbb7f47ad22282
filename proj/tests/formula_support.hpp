#pragma once

// Random formulas and a direct reference evaluator for tests.

#include <string>
#include <vector>

#include "support.hpp"
#include "ury/structure.hpp"

namespace ury::testing {

/// Random formula of depth <= `depth` over `vars` (plus the signature's
/// constants). Quantifiers bind fresh names q1, q2, ...
inline Formula random_formula(Rng& rng, const Signature& sig, std::vector<std::string> vars, unsigned depth,
                              bool quantifiers = true, unsigned* fresh = nullptr) {
  unsigned local = 0;
  if (!fresh) fresh = &local;
  std::vector<Term> terms;
  for (const auto& v : vars) terms.push_back(var(v));
  for (const auto& c : sig.constants) terms.push_back(cst(c));
  auto term = [&]() { return terms[rng() % terms.size()]; };
  auto atom = [&]() -> Formula {
    unsigned pick = rng() % 6;
    if (pick == 0 || terms.empty()) return Formula::constant(random_rational(rng, 0, 4, 4));
    if (pick <= 2 && !sig.relations.empty()) {
      const auto& r = sig.relations[rng() % sig.relations.size()];
      std::vector<Term> args;
      for (std::size_t i = 0; i < r.arity; ++i) args.push_back(term());
      return Formula::rel(r.name, args);
    }
    return Formula::dist(term(), term());
  };
  if (depth == 0) return atom();
  unsigned pick = rng() % (quantifiers ? 12 : 10);
  auto sub = [&](std::vector<std::string> vs) { return random_formula(rng, sig, vs, depth - 1, quantifiers, fresh); };
  switch (pick) {
    case 0: return atom();
    case 1: return Formula::half(sub(vars));
    case 2: return Formula::neg(sub(vars));
    case 3: return Formula::dot_minus(sub(vars), sub(vars));
    case 4: return Formula::min(sub(vars), sub(vars));
    case 5: return Formula::max(sub(vars), sub(vars));
    case 6: return Formula::abs_diff(sub(vars), sub(vars));
    case 7: return Formula::dot_plus(sub(vars), sub(vars));
    case 8: return Formula::scale(random_rational(rng, 1, 12, 4), sub(vars));
    case 9: return atom();
    default: {
      std::string v = "q" + std::to_string(++*fresh);
      auto inner = vars;
      inner.push_back(v);
      return pick == 10 ? Formula::sup(v, sub(inner)) : Formula::inf(v, sub(inner));
    }
  }
}

/// Straight recursive evaluation, written independently of ury::eval.
inline Rational reference_eval(const Formula& f, const FiniteStructure& m, std::map<std::string, std::size_t> env) {
  const auto& n = f.node();
  auto pt = [&](const Term& t) { return t.is_constant ? m.constants().at(t.name) : env.at(t.name); };
  auto c = [&](std::size_t i) { return reference_eval(n.children[i], m, env); };
  auto clip = [](Rational v) { return v < 0 ? Rational(0) : (v > 1 ? Rational(1) : v); };
  switch (n.kind) {
    case NodeKind::Const: return n.value;
    case NodeKind::Dist: return m.space().table().dist[pt(n.terms[0])][pt(n.terms[1])];
    case NodeKind::Rel: {
      Tuple t;
      for (const auto& x : n.terms) t.push_back(pt(x));
      return m.value(n.name, t);
    }
    case NodeKind::Half: return c(0) / 2;
    case NodeKind::Neg: return 1 - c(0);
    case NodeKind::Scale: return clip(n.value * c(0));
    case NodeKind::DotMinus: return clip(c(0) - c(1));
    case NodeKind::DotPlus: return clip(c(0) + c(1));
    case NodeKind::Min: return std::min(c(0), c(1));
    case NodeKind::Max: return std::max(c(0), c(1));
    case NodeKind::AbsDiff: return abs(Rational(c(0) - c(1)));
    case NodeKind::Sup:
    case NodeKind::Inf: {
      std::vector<Rational> vals;
      for (std::size_t p = 0; p < m.size(); ++p) {
        env[n.name] = p;
        vals.push_back(reference_eval(n.children[0], m, env));
      }
      return n.kind == NodeKind::Sup ? *std::max_element(vals.begin(), vals.end())
                                     : *std::min_element(vals.begin(), vals.end());
    }
  }
  return 0;
}

}  // namespace ury::testing
