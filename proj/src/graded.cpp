#include "ury/graded.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>

#include "text.hpp"

namespace ury {

// ---------------------------------------------------------------- partial isometries

PartialIsometry::PartialIsometry(const RationalMetricSpace& space, std::map<std::size_t, std::size_t> map)
    : map_(std::move(map)) {
  std::set<std::size_t> images;
  for (const auto& [x, y] : map_) {
    if (x >= space.size() || y >= space.size()) throw DomainError("partial isometry refers to a point out of range");
    if (!images.insert(y).second) throw DomainError("partial isometry is not injective at " + space.id(y));
  }
  for (const auto& [x, gx] : map_) {
    for (const auto& [y, gy] : map_) {
      if (x < y && space.d(x, y) != space.d(gx, gy)) {
        throw DomainError("map does not preserve d(" + space.id(x) + "," + space.id(y) + ")");
      }
    }
  }
}

PartialIsometry PartialIsometry::identity(const RationalMetricSpace& space) {
  std::map<std::size_t, std::size_t> m;
  for (std::size_t i = 0; i < space.size(); ++i) m[i] = i;
  PartialIsometry g;
  g.map_ = std::move(m);
  return g;
}

PartialIsometry PartialIsometry::from_permutation(const RationalMetricSpace& space, const std::vector<std::size_t>& images) {
  if (images.size() != space.size()) throw DomainError("permutation length differs from the space size");
  std::map<std::size_t, std::size_t> m;
  for (std::size_t i = 0; i < images.size(); ++i) m[i] = images[i];
  return PartialIsometry(space, std::move(m));
}

std::optional<std::size_t> PartialIsometry::apply(std::size_t x) const {
  auto it = map_.find(x);
  if (it == map_.end()) return std::nullopt;
  return it->second;
}

std::size_t PartialIsometry::at(std::size_t x) const {
  auto it = map_.find(x);
  if (it == map_.end()) throw DomainError("partial isometry undefined at point " + std::to_string(x));
  return it->second;
}

bool PartialIsometry::defined_on(const std::vector<std::size_t>& points) const {
  return std::all_of(points.begin(), points.end(), [&](std::size_t p) { return map_.count(p) > 0; });
}

PartialIsometry PartialIsometry::compose(const PartialIsometry& other) const {
  PartialIsometry out;
  for (const auto& [x, y] : other.map_) {
    auto it = map_.find(y);
    if (it != map_.end()) out.map_[x] = it->second;
  }
  return out;
}

PartialIsometry PartialIsometry::inverse() const {
  PartialIsometry out;
  for (const auto& [x, y] : map_) out.map_[y] = x;
  return out;
}

PartialIsometry parse_partial_isometry(const std::string& source, const RationalMetricSpace& space) {
  std::map<std::size_t, std::size_t> m;
  auto lines = text::logical_lines(source);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto tok = text::tokens(lines[i]);
    if (tok.size() != 3 || tok[0] != "map") throw ParseError("expected 'map p q'", 0, i + 1);
    auto x = space.find(tok[1]), y = space.find(tok[2]);
    if (!x || !y) throw ParseError("unknown point in '" + lines[i] + "'", 0, i + 1);
    if (!m.emplace(*x, *y).second) throw ParseError("point mapped twice: " + tok[1], 0, i + 1);
  }
  return PartialIsometry(space, std::move(m));
}

std::string format_partial_isometry(const PartialIsometry& g, const RationalMetricSpace& space) {
  std::string out;
  for (const auto& [x, y] : g.map()) out += "map " + space.id(x) + " " + space.id(y) + "\n";
  return out;
}

std::vector<std::vector<std::size_t>> isometries(const RationalMetricSpace& space) {
  const std::size_t n = space.size();
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> img(n);
  std::vector<bool> used(n, false);
  std::function<void(std::size_t)> go = [&](std::size_t i) {
    if (i == n) {
      out.push_back(img);
      return;
    }
    for (std::size_t y = 0; y < n; ++y) {
      if (used[y]) continue;
      bool ok = true;
      for (std::size_t j = 0; j < i && ok; ++j) ok = space.d(j, i) == space.d(img[j], y);
      if (!ok) continue;
      used[y] = true;
      img[i] = y;
      go(i + 1);
      used[y] = false;
    }
  };
  go(0);
  return out;
}

namespace {

bool preserves_relations(const FiniteStructure& m, const std::vector<std::size_t>& g) {
  for (const auto& r : m.signature().relations) {
    for (const auto& t : all_tuples(m.size(), r.arity)) {
      Tuple gt;
      for (std::size_t p : t) gt.push_back(g[p]);
      if (m.value(r.name, gt) != m.value(r.name, t)) return false;
    }
  }
  return true;
}

}  // namespace

std::vector<std::vector<std::size_t>> automorphisms(const FiniteStructure& m, bool fix_constants) {
  std::vector<std::vector<std::size_t>> out;
  for (auto& g : isometries(m.space())) {
    if (fix_constants) {
      bool fixed = true;
      for (const auto& [c, p] : m.constants()) fixed = fixed && g[p] == p;
      if (!fixed) continue;
    }
    if (preserves_relations(m, g)) out.push_back(std::move(g));
  }
  return out;
}

FiniteStructure transport(const FiniteStructure& m, const std::vector<std::size_t>& perm) {
  FiniteStructure out(m.space(), m.signature());
  for (const auto& r : m.signature().relations) {
    for (const auto& t : all_tuples(m.size(), r.arity)) {
      Tuple gt;
      for (std::size_t p : t) gt.push_back(perm.at(p));
      out.set_value(r.name, gt, m.value(r.name, t));
    }
  }
  for (const auto& [c, p] : m.constants()) out.set_constant(c, perm.at(p));
  return out;
}

// ---------------------------------------------------------------- graded values

bool GradedValue::capped() const { return coef * coef * radicand >= 1; }

Enclosure GradedValue::enclosure(unsigned bits) const {
  if (capped()) return Enclosure::exact(1);
  Enclosure s = sqrt_enclosure(radicand, bits);
  Rational hi = coef * s.hi;
  return {coef * s.lo, hi > 1 ? Rational(1) : hi};
}

std::optional<Rational> GradedValue::exact() const {
  if (capped()) return Rational(1);
  Enclosure s = sqrt_enclosure(radicand, 64);
  if (!s.is_exact()) return std::nullopt;
  return Rational(coef * s.lo);
}

std::string GradedValue::to_string() const {
  if (auto e = exact()) return ury::to_string(*e);
  return ury::to_string(coef) + "*sqrt(" + ury::to_string(radicand) + ")";
}

bool leq(const GradedValue& a, const GradedValue& b) {
  if (b.capped()) return true;
  if (a.capped()) return false;
  return surd_compare(a.coef, a.radicand, b.coef, b.radicand) <= 0;
}

bool equal(const GradedValue& a, const GradedValue& b) { return leq(a, b) && leq(b, a); }

bool below(const GradedValue& a, const Rational& eps) {
  if (eps > 1) return true;
  if (eps <= 0 || a.capped()) return false;
  return a.coef * a.coef * a.radicand < eps * eps;
}

bool leq_dot_sum(const GradedValue& a, const GradedValue& b, const GradedValue& c) {
  if (surd_sum_leq(1, 1, b.coef, b.radicand, c.coef, c.radicand)) return true;  // right side is 1
  if (a.capped()) return false;
  return surd_sum_leq(a.coef, a.radicand, b.coef, b.radicand, c.coef, c.radicand);
}

// ---------------------------------------------------------------- descriptors

GradedDescriptor GradedDescriptor::linear(Rational q, std::vector<std::size_t> s, std::vector<std::size_t> s_shift) {
  GradedDescriptor d;
  d.kind = Kind::Linear;
  d.q = std::move(q);
  d.shift = s_shift.empty() ? s : std::move(s_shift);
  d.base = std::move(s);
  return d;
}

GradedDescriptor GradedDescriptor::sqrt(Rational q, std::vector<std::size_t> s, std::vector<std::size_t> s_shift) {
  GradedDescriptor d = linear(std::move(q), std::move(s), std::move(s_shift));
  d.kind = Kind::Sqrt;
  return d;
}

GradedDescriptor GradedDescriptor::max(std::vector<GradedDescriptor> parts) {
  GradedDescriptor d;
  d.kind = Kind::Max;
  d.parts = std::move(parts);
  return d;
}

bool GradedDescriptor::is_subgroup() const {
  if (kind == Kind::Max) return std::all_of(parts.begin(), parts.end(), [](const auto& p) { return p.is_subgroup(); });
  return base == shift;
}

std::vector<std::size_t> GradedDescriptor::support() const {
  std::set<std::size_t> out(base.begin(), base.end());
  for (const auto& p : parts) {
    auto s = p.support();
    out.insert(s.begin(), s.end());
  }
  return {out.begin(), out.end()};
}

void GradedDescriptor::validate(std::size_t space_size) const {
  if (kind == Kind::Max) {
    if (parts.empty()) throw DomainError("max{} needs at least one part");
    for (const auto& p : parts) p.validate(space_size);
    return;
  }
  if (q <= 0) throw DomainError("graded scale must be positive");
  if (base.empty()) throw DomainError("graded tuple must be non-empty");
  if (base.size() != shift.size()) throw DomainError("graded tuple and shift differ in length");
  for (std::size_t p : base)
    if (p >= space_size) throw DomainError("graded tuple point out of range");
  for (std::size_t p : shift)
    if (p >= space_size) throw DomainError("graded shift point out of range");
}

GradedValue graded_eval(const GradedDescriptor& h, const PartialIsometry& g, const RationalMetricSpace& space) {
  h.validate(space.size());
  if (h.kind == GradedDescriptor::Kind::Max) {
    GradedValue best = graded_eval(h.parts[0], g, space);
    for (std::size_t i = 1; i < h.parts.size(); ++i) {
      GradedValue v = graded_eval(h.parts[i], g, space);
      if (!leq(v, best)) best = v;
    }
    return best;
  }
  Rational m = 0;
  for (std::size_t i = 0; i < h.base.size(); ++i) {
    Rational d = space.d(g.at(h.base[i]), h.shift[i]);
    if (d > m) m = d;
  }
  if (h.kind == GradedDescriptor::Kind::Linear) return {h.q, m * m};
  return {h.q, m};
}

AxiomReport check_graded_axioms(const GradedDescriptor& h, const std::vector<std::pair<PartialIsometry, PartialIsometry>>& pairs,
                                const RationalMetricSpace& space) {
  h.validate(space.size());
  if (!h.is_subgroup()) throw DomainError("axioms apply to subgroup descriptors (shift equal to base)");
  AxiomReport rep;
  const auto support = h.support();
  if (auto v = graded_eval(h, PartialIsometry::identity(space), space).exact(); !v || *v != 0) {
    rep.violations.push_back({AxiomViolation::Kind::Identity, 0, "H(1) is not 0"});
  }
  std::set<std::map<std::size_t, std::size_t>> seen;  // symmetry is checked once per element
  auto symmetric = [&](const PartialIsometry& g, std::size_t idx) {
    if (!seen.insert(g.map()).second) return;
    PartialIsometry inv = g.inverse();
    if (!inv.defined_on(support)) return;
    ++rep.symmetry_checks;
    GradedValue a = graded_eval(h, g, space), b = graded_eval(h, inv, space);
    if (!equal(a, b)) {
      rep.violations.push_back({AxiomViolation::Kind::Symmetry, idx, "H(g)=" + a.to_string() + " but H(g^-1)=" + b.to_string()});
    }
  };
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& [g, g2] = pairs[i];
    if (!g.defined_on(support) || !g2.defined_on(support)) throw DomainError("pair " + std::to_string(i) + " is undefined on the descriptor's tuple");
    PartialIsometry prod = g.compose(g2);
    if (!prod.defined_on(support)) throw DomainError("pair " + std::to_string(i) + " is not composable on the descriptor's tuple");
    ++rep.checked_pairs;
    GradedValue a = graded_eval(h, prod, space), b = graded_eval(h, g, space), c = graded_eval(h, g2, space);
    if (!leq_dot_sum(a, b, c)) {
      rep.violations.push_back({AxiomViolation::Kind::Subadditivity, i,
                                "H(gg')=" + a.to_string() + " exceeds " + b.to_string() + " +. " + c.to_string()});
    }
    symmetric(g, i);
    symmetric(g2, i);
  }
  return rep;
}

Enclosure rho_s(const PartialIsometry& g, const PartialIsometry& h, const std::vector<std::size_t>& enumeration,
                unsigned k, const RationalMetricSpace& space) {
  if (k > enumeration.size()) throw DomainError("truncation exceeds the enumeration");
  Rational sum = 0;
  for (unsigned i = 0; i < k; ++i) {
    std::size_t s = enumeration[i];
    auto a = g.apply(s), b = h.apply(s);
    if (!a || !b) throw DomainError("insufficient domain at enumeration point " + std::to_string(i + 1));
    Rational d = space.d(*a, *b);
    sum += pow2_neg(i + 1) * (d > 1 ? Rational(1) : d);
  }
  return {sum, sum + pow2_neg(k)};
}

// ---------------------------------------------------------------- invariance

InvarianceReport check_formula_invariance(const Formula& phi, const FiniteStructure& m,
                                          const std::vector<PartialIsometry>& samples, std::size_t max_assignments) {
  validate_structure(m);
  check_well_formed(phi, m.signature());
  InvarianceReport rep;
  const auto params = phi.constants();
  rep.delta = lipschitz(phi, m.signature(), params);
  const auto free = phi.free_variables();
  const std::vector<std::string> vars(free.begin(), free.end());
  auto tuples = all_tuples(m.size(), vars.size());
  if (tuples.size() > max_assignments) tuples.resize(max_assignments);

  for (std::size_t s = 0; s < samples.size(); ++s) {
    const auto& g = samples[s];
    if (!g.is_total(m.size())) throw DomainError("sample " + std::to_string(s) + " is not defined on every point");
    std::vector<std::size_t> perm(m.size());
    for (const auto& [x, y] : g.map()) perm[x] = y;
    if (!preserves_relations(m, perm)) throw DomainError("sample " + std::to_string(s) + " is not relation-preserving");
    Rational moved_by = 0;
    for (const auto& c : params) {
      std::size_t p = m.constant(c);
      Rational d = m.space().d(p, perm[p]);
      if (d > moved_by) moved_by = d;
    }
    Rational bound = dot_scale(rep.delta, moved_by);
    for (const auto& t : tuples) {
      Assignment a, ga;
      for (std::size_t i = 0; i < vars.size(); ++i) {
        a[vars[i]] = t[i];
        ga[vars[i]] = perm[t[i]];
      }
      ++rep.checks;
      Rational before = eval(phi, m, a), after = eval(phi, m, ga);
      Rational gap = after - before;
      if (gap < 0) gap = -gap;
      if (gap > bound) rep.failures.push_back({s, a, after, before, bound});
    }
  }
  return rep;
}

// ---------------------------------------------------------------- approximation search

ApproxResult approx_search(const FiniteStructure& m, const FiniteStructure& n, const GradedDescriptor& h,
                           const Rational& eps, std::size_t budget, std::optional<TupleEnumeration> enumeration,
                           std::optional<unsigned> k) {
  if (!(m.space() == n.space())) throw DomainError("approx_search needs structures on one fragment");
  if (!(m.signature() == n.signature())) throw DomainError("approx_search needs one signature");
  h.validate(m.size());
  const TupleEnumeration full = default_enumeration(m);
  const TupleEnumeration en = enumeration ? *enumeration : full;
  const unsigned kk = k ? *k : static_cast<unsigned>(en.size());
  const bool complete = kk >= en.size() && std::set(en.begin(), en.end()) == std::set(full.begin(), full.end());

  ApproxResult out;
  for (const auto& perm : isometries(m.space())) {
    if (out.examined >= budget) break;
    ++out.examined;
    auto g = PartialIsometry::from_permutation(m.space(), perm);
    GradedValue hv = graded_eval(h, g, m.space());
    if (!below(hv, eps)) continue;
    FiniteStructure moved = transport(n, perm);
    if (!(moved.constants() == m.constants())) {
      // constants are part of the structure; a moved constant counts fully
      continue;
    }
    Enclosure dist = delta_seq(moved, m, en, kk);
    Rational closeness = complete ? dist.lo : dist.hi;
    if (closeness < eps) {
      out.found = true;
      out.witness = perm;
      out.h_value = hv;
      out.distance = closeness;
      return out;
    }
  }
  return out;
}

// ---------------------------------------------------------------- oligomorphy probe

OligoResult oligo_probe(const FiniteStructure& m, std::size_t n, const Rational& eps, std::size_t guard) {
  if (n == 0) throw DomainError("oligo_probe needs n >= 1");
  auto tuples = all_tuples(m.size(), n);
  auto group = automorphisms(m, true);
  if (tuples.size() * tuples.size() > guard || group.size() * tuples.size() > guard)
    throw DomainError("oligo_probe size guard: " + std::to_string(tuples.size()) + " tuples, " +
                      std::to_string(group.size()) + " automorphisms");
  OligoResult out;
  out.group_order = group.size();
  auto rank = [&](const Tuple& t) {
    std::size_t r = 0;
    for (std::size_t p : t) r = r * m.size() + p;
    return r;
  };
  auto image = [&](const std::vector<std::size_t>& g, const Tuple& t) {
    Tuple u;
    for (std::size_t p : t) u.push_back(g[p]);
    return u;
  };
  // orbit representatives: the least tuple of each orbit
  std::vector<std::size_t> reps;
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    bool least = true;
    for (const auto& g : group) least = least && rank(image(g, tuples[i])) >= i;
    if (least) reps.push_back(i);
  }
  // cover[r][t]: some automorphic image of rep r is within eps of tuple t
  std::vector<std::vector<bool>> cover(reps.size(), std::vector<bool>(tuples.size(), false));
  for (std::size_t r = 0; r < reps.size(); ++r) {
    std::set<std::size_t> orbit;
    for (const auto& g : group) orbit.insert(rank(image(g, tuples[reps[r]])));
    for (std::size_t t = 0; t < tuples.size(); ++t)
      for (std::size_t o : orbit)
        if (tuple_distance(m.space(), tuples[t], tuples[o]) <= eps) {
          cover[r][t] = true;
          break;
        }
  }
  std::size_t spent = 0;
  std::vector<std::size_t> pick;
  std::function<bool(std::size_t, std::size_t)> search = [&](std::size_t from, std::size_t left) -> bool {
    if (left == 0) {
      if (++spent > guard) throw DomainError("oligo_probe size guard: cover search too large");
      for (std::size_t t = 0; t < tuples.size(); ++t) {
        bool hit = false;
        for (std::size_t r : pick) hit = hit || cover[r][t];
        if (!hit) return false;
      }
      return true;
    }
    for (std::size_t r = from; r < reps.size(); ++r) {
      pick.push_back(r);
      if (search(r + 1, left - 1)) return true;
      pick.pop_back();
    }
    return false;
  };
  for (std::size_t size = 1; size <= reps.size(); ++size) {
    pick.clear();
    if (search(0, size)) break;
  }
  for (std::size_t r : pick) out.family.push_back(tuples[reps[r]]);
  for (const auto& t : tuples) {
    bool done = false;
    for (std::size_t f = 0; f < out.family.size() && !done; ++f) {
      for (const auto& g : group) {
        Tuple img = image(g, out.family[f]);
        Rational d = tuple_distance(m.space(), t, img);
        if (d <= eps) {
          out.certificate.emplace_back(t, f, img, d);
          done = true;
          break;
        }
      }
    }
    if (!done) throw ConstructionError("oligo_probe produced a family that does not cover");
  }
  return out;
}

// ---------------------------------------------------------------- descriptor text

namespace {

std::vector<std::string> descriptor_tokens(const std::string& s) {
  std::string spaced;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (c == '[' || c == ']' || c == '{' || c == '}' || c == ';') {
      spaced += ' ';
      spaced += c;
      spaced += ' ';
    } else if (c == '-' && i + 1 < s.size() && s[i + 1] == '>') {
      spaced += " -> ";
      ++i;
    } else {
      spaced += c;
    }
  }
  std::vector<std::string> out;
  for (const auto& line : text::logical_lines(spaced))
    for (auto& t : text::tokens(line)) out.push_back(t);
  return out;
}

struct DescriptorParser {
  std::vector<std::string> tok;
  const RationalMetricSpace& space;
  std::size_t i = 0;

  [[noreturn]] void fail(const std::string& msg) { throw ParseError(msg + " at token " + std::to_string(i + 1), i); }
  const std::string& peek() {
    if (i >= tok.size()) fail("unexpected end of descriptor");
    return tok[i];
  }
  std::string next() {
    std::string t = peek();
    ++i;
    return t;
  }
  void expect(const std::string& s) {
    if (next() != s) {
      --i;
      fail("expected '" + s + "'");
    }
  }
  std::vector<std::size_t> points() {
    expect("[");
    std::vector<std::size_t> out;
    while (peek() != "]") {
      auto p = space.find(next());
      if (!p) {
        --i;
        fail("unknown point '" + tok[i] + "'");
      }
      out.push_back(*p);
    }
    expect("]");
    return out;
  }
  GradedDescriptor descriptor() {
    std::string head = next();
    if (head == "max") {
      expect("{");
      std::vector<GradedDescriptor> parts{descriptor()};
      while (peek() == ";") {
        ++i;
        parts.push_back(descriptor());
      }
      expect("}");
      return GradedDescriptor::max(std::move(parts));
    }
    if (head != "graded") {
      --i;
      fail("expected 'graded' or 'max'");
    }
    std::string kind = next();
    if (kind != "linear" && kind != "sqrt") {
      --i;
      fail("expected 'linear' or 'sqrt'");
    }
    Rational q;
    try {
      q = parse_rational(next());
    } catch (const ParseError&) {
      --i;
      fail("malformed scale");
    }
    auto base = points();
    std::vector<std::size_t> shift = base;
    if (i < tok.size() && tok[i] == "->") {
      ++i;
      shift = points();
    }
    return kind == "linear" ? GradedDescriptor::linear(q, base, shift) : GradedDescriptor::sqrt(q, base, shift);
  }
};

}  // namespace

GradedDescriptor parse_descriptor(const std::string& text, const RationalMetricSpace& space) {
  DescriptorParser p{descriptor_tokens(text), space};
  GradedDescriptor d = p.descriptor();
  if (p.i != p.tok.size()) p.fail("trailing input");
  try {
    d.validate(space.size());
  } catch (const DomainError& e) {
    throw ParseError(e.what(), p.i);
  }
  return d;
}

std::string format_descriptor(const GradedDescriptor& h, const RationalMetricSpace& space) {
  if (h.kind == GradedDescriptor::Kind::Max) {
    std::string out = "max{ ";
    for (std::size_t i = 0; i < h.parts.size(); ++i) out += (i ? " ; " : "") + format_descriptor(h.parts[i], space);
    return out + " }";
  }
  auto list = [&](const std::vector<std::size_t>& ps) {
    std::vector<std::string> ids;
    for (std::size_t p : ps) ids.push_back(space.id(p));
    return "[" + text::join(ids, " ") + "]";
  };
  std::string out = std::string("graded ") + (h.kind == GradedDescriptor::Kind::Linear ? "linear " : "sqrt ") +
                    to_string(h.q) + " " + list(h.base);
  if (h.shift != h.base) out += " -> " + list(h.shift);
  return out;
}

}  // namespace ury
