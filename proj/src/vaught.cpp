#include "ury/vaught.hpp"

#include <algorithm>
#include <deque>
#include <set>

#include "text.hpp"
#include "ury/error.hpp"

namespace ury {

namespace {

bool is_permutation_of(const std::vector<std::size_t>& p, std::size_t n) {
  if (p.size() != n) return false;
  std::vector<bool> seen(n, false);
  for (std::size_t v : p) {
    if (v >= n || seen[v]) return false;
    seen[v] = true;
  }
  return true;
}

std::vector<std::size_t> compose(const std::vector<std::size_t>& g, const std::vector<std::size_t>& h) {
  std::vector<std::size_t> out(h.size());
  for (std::size_t x = 0; x < h.size(); ++x) out[x] = g[h[x]];
  return out;
}

void check_unit(const GradedTable& t, std::size_t n, const std::string& what) {
  if (t.size() != n) throw DomainError(what + " table has " + std::to_string(t.size()) + " entries, expected " + std::to_string(n));
  for (const auto& v : t)
    if (v < 0 || v > 1) throw DomainError(what + " table value " + to_string(v) + " outside [0,1]");
}

}  // namespace

FiniteGSpace::FiniteGSpace(std::vector<std::string> points,
                           std::vector<std::pair<std::string, std::vector<std::size_t>>> elements)
    : points_(std::move(points)) {
  const std::size_t n = points_.size();
  if (std::set(points_.begin(), points_.end()).size() != n) throw DomainError("duplicate point name");
  if (elements.empty()) throw DomainError("a group needs at least the identity");
  std::map<std::vector<std::size_t>, std::size_t> index;
  for (auto& [name, perm] : elements) {
    if (!is_permutation_of(perm, n)) throw DomainError("element " + name + " is not a permutation of the points");
    if (std::find(names_.begin(), names_.end(), name) != names_.end()) throw DomainError("duplicate element name " + name);
    if (!index.emplace(perm, names_.size()).second) throw DomainError("element " + name + " repeats another element");
    names_.push_back(name);
    action_.push_back(perm);
  }
  const std::size_t m = names_.size();
  std::vector<std::size_t> id(n);
  for (std::size_t x = 0; x < n; ++x) id[x] = x;
  auto it = index.find(id);
  if (it == index.end()) throw DomainError("the identity permutation is missing");
  identity_ = it->second;
  mul_.assign(m, std::vector<std::size_t>(m));
  inv_.assign(m, m);
  for (std::size_t g = 0; g < m; ++g) {
    for (std::size_t h = 0; h < m; ++h) {
      auto p = index.find(compose(action_[g], action_[h]));
      if (p == index.end()) throw DomainError("elements are not closed under composition: " + names_[g] + names_[h]);
      mul_[g][h] = p->second;
      if (p->second == identity_) inv_[g] = h;
    }
  }
}

FiniteGSpace FiniteGSpace::generated(std::vector<std::string> points,
                                     std::vector<std::pair<std::string, std::vector<std::size_t>>> generators) {
  const std::size_t n = points.size();
  std::vector<std::size_t> id(n);
  for (std::size_t x = 0; x < n; ++x) id[x] = x;
  std::map<std::vector<std::size_t>, std::string> seen{{id, "e"}};
  std::vector<std::pair<std::string, std::vector<std::size_t>>> out{{"e", id}};
  for (const auto& [name, perm] : generators)
    if (!is_permutation_of(perm, n)) throw DomainError("generator " + name + " is not a permutation of the points");
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (const auto& [name, perm] : generators) {
      auto p = compose(perm, out[i].second);
      if (seen.count(p)) continue;
      std::string word = out[i].first == "e" ? name : name + "." + out[i].first;
      seen.emplace(p, word);
      out.emplace_back(word, p);
    }
  }
  return FiniteGSpace(std::move(points), std::move(out));
}

std::size_t FiniteGSpace::point_index(const std::string& name) const {
  auto it = std::find(points_.begin(), points_.end(), name);
  if (it == points_.end()) throw DomainError("unknown point " + name);
  return static_cast<std::size_t>(it - points_.begin());
}

std::size_t FiniteGSpace::element_index(const std::string& name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw DomainError("unknown group element " + name);
  return static_cast<std::size_t>(it - names_.begin());
}

void FiniteGSpace::check_space_table(const GradedTable& t) const { check_unit(t, num_points(), "space"); }
void FiniteGSpace::check_group_table(const GradedTable& t) const { check_unit(t, order(), "group"); }

void FiniteGSpace::add_space_table(const std::string& name, GradedTable t) {
  check_space_table(t);
  space_tables_.insert_or_assign(name, std::move(t));
}

void FiniteGSpace::add_group_table(const std::string& name, GradedTable t) {
  check_group_table(t);
  group_tables_.insert_or_assign(name, std::move(t));
}

const GradedTable& FiniteGSpace::space_table(const std::string& name) const {
  auto it = space_tables_.find(name);
  if (it == space_tables_.end()) throw DomainError("unknown graded-space table " + name);
  return it->second;
}

const GradedTable& FiniteGSpace::group_table(const std::string& name) const {
  auto it = group_tables_.find(name);
  if (it == group_tables_.end()) throw DomainError("unknown graded-group table " + name);
  return it->second;
}

// ---------------------------------------------------------------- text

FiniteGSpace parse_gspace(const std::string& source) {
  auto lines = text::logical_lines(source);
  std::vector<std::string> points;
  bool have_points = false;
  std::vector<std::pair<std::string, std::vector<std::size_t>>> elements;
  std::vector<std::tuple<bool, std::string, std::vector<std::string>, std::size_t>> tables;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto tok = text::tokens(lines[i]);
    const std::size_t line = i + 1;
    if (tok[0] == "points") {
      if (have_points) throw ParseError("second 'points' line", 0, line);
      points.assign(tok.begin() + 1, tok.end());
      have_points = true;
    } else if (tok[0] == "perm") {
      if (!have_points) throw ParseError("'perm' before 'points'", 0, line);
      if (tok.size() != points.size() + 2) throw ParseError("perm needs a name and one image per point", 0, line);
      std::vector<std::size_t> perm;
      for (std::size_t k = 2; k < tok.size(); ++k) {
        auto it = std::find(points.begin(), points.end(), tok[k]);
        if (it == points.end()) throw ParseError("unknown point " + tok[k], 0, line);
        perm.push_back(static_cast<std::size_t>(it - points.begin()));
      }
      elements.emplace_back(tok[1], std::move(perm));
    } else if (tok[0] == "graded-space" || tok[0] == "graded-group") {
      if (tok.size() < 2) throw ParseError("table needs a name", 0, line);
      tables.emplace_back(tok[0] == "graded-space", tok[1], std::vector<std::string>(tok.begin() + 2, tok.end()), line);
    } else {
      throw ParseError("unknown directive '" + tok[0] + "'", 0, line);
    }
  }
  if (!have_points) throw ParseError("missing 'points' line", 0, lines.size());
  FiniteGSpace x;
  try {
    x = FiniteGSpace(points, elements);
  } catch (const DomainError& e) {
    throw ParseError(e.what(), 0, lines.size());
  }
  for (const auto& [space, name, values, line] : tables) {
    GradedTable t;
    for (const auto& v : values) {
      try {
        t.push_back(parse_rational(v));
      } catch (const ParseError&) {
        throw ParseError("malformed value " + v, 0, line);
      }
    }
    try {
      if (space)
        x.add_space_table(name, t);
      else
        x.add_group_table(name, t);
    } catch (const DomainError& e) {
      throw ParseError(e.what(), 0, line);
    }
  }
  return x;
}

std::string format_gspace(const FiniteGSpace& x) {
  std::string out = "points " + text::join(x.points(), " ") + "\n";
  for (std::size_t g = 0; g < x.order(); ++g) {
    std::vector<std::string> images;
    for (std::size_t p : x.permutation(g)) images.push_back(x.points()[p]);
    out += "perm " + x.element_names()[g] + " " + text::join(images, " ") + "\n";
  }
  auto values = [](const GradedTable& t) {
    std::vector<std::string> v;
    for (const auto& q : t) v.push_back(to_string(q));
    return text::join(v, " ");
  };
  for (const auto& [name, t] : x.space_tables()) out += "graded-space " + name + " " + values(t) + "\n";
  for (const auto& [name, t] : x.group_tables()) out += "graded-group " + name + " " + values(t) + "\n";
  return out;
}

// ---------------------------------------------------------------- transforms

namespace {

GradedTable delta_closed(const FiniteGSpace& x, const GradedTable& phi, const GradedTable& j) {
  GradedTable out(x.num_points(), Rational(1));
  for (std::size_t p = 0; p < x.num_points(); ++p)
    for (std::size_t h = 0; h < x.order(); ++h) out[p] = std::min(out[p], dot_plus(phi[x.act(h, p)], j[h]));
  return out;
}

GradedTable star_closed(const FiniteGSpace& x, const GradedTable& phi, const GradedTable& j) {
  GradedTable out(x.num_points(), Rational(0));
  for (std::size_t p = 0; p < x.num_points(); ++p)
    for (std::size_t h = 0; h < x.order(); ++h) out[p] = std::max(out[p], dot_minus(phi[x.act(h, p)], j[h]));
  return out;
}

std::vector<Rational> distinct(const GradedTable& t) {
  std::set<Rational> s(t.begin(), t.end());
  return {s.begin(), s.end()};
}

}  // namespace

GradedTable vaught_delta_scan(const FiniteGSpace& x, const GradedTable& phi, const GradedTable& j) {
  x.check_space_table(phi);
  x.check_group_table(j);
  // r = v + 0 gives phi_{<r} = phi_{<=v}; s = w + 0 gives J_{<s} = J_{<=w}
  GradedTable out(x.num_points(), Rational(1));
  for (const auto& v : distinct(phi)) {
    Subset a = below(phi, v, false);
    for (const auto& w : distinct(j)) {
      VaughtSets sets = vaught_sets(x, a, below(j, w, false));
      for (std::size_t p = 0; p < x.num_points(); ++p)
        if (sets.delta[p]) out[p] = std::min(out[p], dot_plus(v, w));
    }
  }
  return out;
}

GradedTable vaught_star_scan(const FiniteGSpace& x, const GradedTable& phi, const GradedTable& j) {
  x.check_space_table(phi);
  x.check_group_table(j);
  // r = v - 0 gives phi_{<=r} = phi_{<v}; s = w + 0 gives J_{<s} = J_{<=w}
  GradedTable out(x.num_points(), Rational(0));
  for (const auto& v : distinct(phi)) {
    Subset a = below(phi, v, true);
    for (const auto& w : distinct(j)) {
      VaughtSets sets = vaught_sets(x, a, below(j, w, false));
      for (std::size_t p = 0; p < x.num_points(); ++p)
        if (!sets.star[p]) out[p] = std::max(out[p], dot_minus(v, w));
    }
  }
  return out;
}

GradedTable vaught_delta(const FiniteGSpace& x, const GradedTable& phi, const GradedTable& j) {
  GradedTable scan = vaught_delta_scan(x, phi, j);
  GradedTable closed = delta_closed(x, phi, j);
  if (scan != closed) throw ConstructionError("Delta transform: closed form and threshold scan disagree");
  return closed;
}

GradedTable vaught_star(const FiniteGSpace& x, const GradedTable& phi, const GradedTable& j) {
  GradedTable scan = vaught_star_scan(x, phi, j);
  GradedTable closed = star_closed(x, phi, j);
  if (scan != closed) throw ConstructionError("star transform: closed form and threshold scan disagree");
  return closed;
}

VaughtSets vaught_sets(const FiniteGSpace& x, const Subset& a, const Subset& u) {
  if (a.size() != x.num_points()) throw DomainError("point subset has the wrong length");
  if (u.size() != x.order()) throw DomainError("group subset has the wrong length");
  if (std::none_of(u.begin(), u.end(), [](bool b) { return b; })) throw DomainError("group subset u is empty");
  VaughtSets out{Subset(x.num_points(), true), Subset(x.num_points(), false)};
  for (std::size_t p = 0; p < x.num_points(); ++p) {
    for (std::size_t h = 0; h < x.order(); ++h) {
      if (!u[h]) continue;
      if (a[x.act(h, p)])
        out.delta[p] = true;
      else
        out.star[p] = false;
    }
  }
  return out;
}

GradedTable characteristic(const Subset& a) {
  GradedTable out;
  for (bool b : a) out.push_back(b ? Rational(0) : Rational(1));
  return out;
}

Subset below(const GradedTable& t, const Rational& r, bool strict) {
  Subset out;
  for (const auto& v : t) out.push_back(strict ? v < r : v <= r);
  return out;
}

GradedTable coset(const FiniteGSpace& x, const GradedTable& h, std::size_t g) {
  x.check_group_table(h);
  GradedTable out;
  for (std::size_t k = 0; k < x.order(); ++k) out.push_back(h[x.mul(k, x.inv(g))]);
  return out;
}

GradedTable conjugate(const FiniteGSpace& x, const GradedTable& h, std::size_t g) {
  x.check_group_table(h);
  GradedTable out;
  for (std::size_t k = 0; k < x.order(); ++k) out.push_back(h[x.mul(x.mul(g, k), x.inv(g))]);
  return out;
}

bool is_graded_subgroup(const FiniteGSpace& x, const GradedTable& h) {
  x.check_group_table(h);
  if (h[x.identity()] != 0) return false;
  for (std::size_t g = 0; g < x.order(); ++g) {
    if (h[g] != h[x.inv(g)]) return false;
    for (std::size_t k = 0; k < x.order(); ++k)
      if (h[x.mul(g, k)] > dot_plus(h[g], h[k])) return false;
  }
  return true;
}

bool is_invariant(const FiniteGSpace& x, const GradedTable& phi, const GradedTable& h) {
  for (std::size_t g = 0; g < x.order(); ++g)
    for (std::size_t p = 0; p < x.num_points(); ++p)
      if (phi[x.act(g, p)] > dot_plus(phi[p], h[g])) return false;
  return true;
}

// ---------------------------------------------------------------- closure

NiceClosure nice_closure(const FiniteGSpace& x, std::vector<GradedTable> family, const std::vector<GradedTable>& cosets,
                         std::size_t budget, const std::vector<Rational>& scales) {
  for (const auto& t : family) x.check_space_table(t);
  for (const auto& t : cosets) x.check_group_table(t);
  NiceClosure out;
  std::set<GradedTable> seen;
  for (auto& t : family)
    if (seen.insert(t).second) out.family.push_back(std::move(t));

  auto pointwise = [](const GradedTable& a, const GradedTable& b, auto op) {
    GradedTable r;
    for (std::size_t i = 0; i < a.size(); ++i) r.push_back(op(a[i], b[i]));
    return r;
  };
  auto offer = [&](GradedTable t) -> bool {
    ++out.applications;
    if (seen.insert(t).second) out.family.push_back(std::move(t));
    return out.applications >= budget;
  };
  if (budget == 0) return out;

  std::size_t start = 0;
  while (true) {
    const std::size_t end = out.family.size();
    for (std::size_t i = start; i < end; ++i) {
      GradedTable a = out.family[i];
      GradedTable neg;
      for (const auto& v : a) neg.push_back(negation(v));
      if (offer(neg)) return out;
      for (const auto& q : scales) {
        GradedTable s;
        for (const auto& v : a) s.push_back(dot_scale(q, v));
        if (offer(s)) return out;
      }
      for (const auto& rho : cosets) {
        if (offer(vaught_delta(x, a, rho))) return out;
        if (offer(vaught_star(x, a, rho))) return out;
      }
    }
    for (std::size_t i = 0; i < end; ++i) {
      for (std::size_t j = 0; j < end; ++j) {
        if (i < start && j < start) continue;
        GradedTable a = out.family[i], b = out.family[j];
        if (i <= j) {
          if (offer(pointwise(a, b, [](const Rational& u, const Rational& v) { return std::min(u, v); }))) return out;
          if (offer(pointwise(a, b, [](const Rational& u, const Rational& v) { return std::max(u, v); }))) return out;
          if (offer(pointwise(a, b, [](const Rational& u, const Rational& v) { return Rational(abs(Rational(u - v))); }))) return out;
          if (offer(pointwise(a, b, [](const Rational& u, const Rational& v) { return dot_plus(u, v); }))) return out;
        }
        if (offer(pointwise(a, b, [](const Rational& u, const Rational& v) { return dot_minus(u, v); }))) return out;
      }
    }
    if (out.family.size() == end) {
      out.fixed_point = true;
      return out;
    }
    start = end;
  }
}

// ---------------------------------------------------------------- lemma suite

namespace {

/// Table values, midpoints between consecutive values, and 1, restricted to (0,1].
std::vector<Rational> threshold_grid(const std::vector<const GradedTable*>& tables) {
  std::set<Rational> vals{Rational(0), Rational(1)};
  for (const auto* t : tables) vals.insert(t->begin(), t->end());
  std::vector<Rational> sorted(vals.begin(), vals.end());
  std::set<Rational> out;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i] > 0) out.insert(sorted[i]);
    if (i + 1 < sorted.size()) out.insert((sorted[i] + sorted[i + 1]) / 2);
  }
  return {out.begin(), out.end()};
}

std::string point_msg(const FiniteGSpace& x, const std::string& phi, const std::string& j, std::size_t p) {
  return phi + "/" + j + " at " + x.points()[p];
}

}  // namespace

std::vector<LemmaCheck> lemma_suite(const FiniteGSpace& x) {
  auto named = [](const char* name) {
    LemmaCheck c;
    c.name = name;
    return c;
  };
  LemmaCheck scan = named("closed-form-equals-threshold-scan"), duality = named("star-dual-of-delta"),
             order = named("delta-below-star"), corr = named("threshold-correspondence"),
             corr_sets = named("threshold-correspondence-group-side"), below_id = named("delta-below-identity"),
             inv = named("subgroup-invariance"), fixed = named("invariant-fixed-point"),
             conj = named("conjugate-invariance"), translates = named("closure-of-translates");
  const std::size_t n = x.num_points(), m = x.order();

  std::vector<const GradedTable*> all;
  for (const auto& [k, t] : x.space_tables()) all.push_back(&t);
  for (const auto& [k, t] : x.group_tables()) all.push_back(&t);
  const auto grid = threshold_grid(all);

  std::vector<std::pair<std::string, GradedTable>> subgroups;
  for (const auto& [name, h] : x.group_tables())
    if (is_graded_subgroup(x, h)) subgroups.emplace_back(name, h);

  for (const auto& [pname, phi] : x.space_tables()) {
    GradedTable neg;
    for (const auto& v : phi) neg.push_back(negation(v));

    for (const auto& [jname, j] : x.group_tables()) {
      GradedTable d_closed = delta_closed(x, phi, j), s_closed = star_closed(x, phi, j);
      ++scan.checks;
      if (vaught_delta_scan(x, phi, j) != d_closed) scan.violations.push_back("Delta " + pname + "/" + jname);
      ++scan.checks;
      if (vaught_star_scan(x, phi, j) != s_closed) scan.violations.push_back("star " + pname + "/" + jname);

      GradedTable dual = delta_closed(x, neg, j);
      for (std::size_t p = 0; p < n; ++p) {
        ++duality.checks;
        if (s_closed[p] != negation(dual[p])) duality.violations.push_back(point_msg(x, pname, jname, p));
      }
      if (j[x.identity()] == 0) {
        for (std::size_t p = 0; p < n; ++p) {
          ++order.checks;
          if (d_closed[p] > s_closed[p]) order.violations.push_back(point_msg(x, pname, jname, p));
        }
      }
      // group-side correspondence on the sets A = phi_{<=v}
      for (const auto& v : grid) {
        Subset a = below(phi, v, false);
        GradedTable oa_delta = delta_closed(x, characteristic(a), j);
        for (const auto& r : grid) {
          Subset u = below(j, r, true);
          if (std::none_of(u.begin(), u.end(), [](bool b) { return b; })) continue;
          ++corr_sets.checks;
          if (vaught_sets(x, a, u).delta != below(oa_delta, r, true))
            corr_sets.violations.push_back(pname + "<=" + to_string(v) + " / " + jname + "<" + to_string(r));
        }
      }
    }

    // set/graded correspondence for u = J_{<s} and u = G, u = {1}
    std::vector<Subset> us{Subset(m, true)};
    Subset one(m, false);
    one[x.identity()] = true;
    us.push_back(one);
    for (const auto& [jname, j] : x.group_tables())
      for (const auto& s : grid) {
        Subset u = below(j, s, true);
        if (std::any_of(u.begin(), u.end(), [](bool b) { return b; })) us.push_back(u);
      }
    for (const auto& u : us) {
      GradedTable ou = characteristic(u);
      GradedTable d = delta_closed(x, phi, ou), st = star_closed(x, phi, ou);
      for (const auto& r : grid) {
        ++corr.checks;
        if (vaught_sets(x, below(phi, r, true), u).delta != below(d, r, true))
          corr.violations.push_back("Delta " + pname + "<" + to_string(r));
        ++corr.checks;
        if (vaught_sets(x, below(phi, r, false), u).star != below(st, r, false))
          corr.violations.push_back("star " + pname + "<=" + to_string(r));
      }
    }

    for (const auto& [hname, h] : subgroups) {
      GradedTable d = delta_closed(x, phi, h), st = star_closed(x, phi, h);
      for (std::size_t p = 0; p < n; ++p) {
        ++below_id.checks;
        if (d[p] > phi[p]) below_id.violations.push_back(point_msg(x, pname, hname, p));
      }
      for (std::size_t g = 0; g < m; ++g)
        for (std::size_t p = 0; p < n; ++p) {
          std::size_t gp = x.act(g, p);
          inv.checks += 2;
          if (abs(Rational(d[gp] - d[p])) > h[g]) inv.violations.push_back("Delta " + point_msg(x, pname, hname, p));
          if (abs(Rational(st[gp] - st[p])) > h[g]) inv.violations.push_back("star " + point_msg(x, pname, hname, p));
        }
      if (is_invariant(x, phi, h)) {
        ++fixed.checks;
        if (d != phi || st != phi) fixed.violations.push_back(pname + "/" + hname);
      }
      for (std::size_t g = 0; g < m; ++g) {
        GradedTable rho = coset(x, h, g), hg = conjugate(x, h, g);
        GradedTable dr = delta_closed(x, phi, rho), sr = star_closed(x, phi, rho);
        for (std::size_t k = 0; k < m; ++k)
          for (std::size_t p = 0; p < n; ++p) {
            std::size_t kp = x.act(k, p);
            conj.checks += 2;
            if (dr[kp] > dot_plus(dr[p], hg[k]))
              conj.violations.push_back("Delta " + pname + "/" + hname + x.element_names()[g] + " by " + x.element_names()[k]);
            if (sr[kp] > dot_plus(sr[p], hg[k]))
              conj.violations.push_back("star " + pname + "/" + hname + x.element_names()[g] + " by " + x.element_names()[k]);
          }
      }
    }
  }

  // phi_{<r} inside H_{<eps} psi_{<t}  implies  (phi^{DH})_{<r} inside H_{<r} (psi^{DH})_{<t+eps}
  auto translate = [&](const GradedTable& h, const Rational& eps, const Subset& s) {
    Subset out(n, false);
    for (std::size_t g = 0; g < m; ++g) {
      if (!(h[g] < eps)) continue;
      for (std::size_t p = 0; p < n; ++p)
        if (s[p]) out[x.act(g, p)] = true;
    }
    return out;
  };
  auto subset_of = [](const Subset& a, const Subset& b) {
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i] && !b[i]) return false;
    return true;
  };
  std::vector<Rational> coarse;
  for (long k = 1; k <= 8; ++k) coarse.push_back(Rational(k, 8));
  for (auto& q : coarse) q.canonicalize();
  for (const auto& [hname, h] : subgroups) {
    for (const auto& [pname, phi] : x.space_tables()) {
      GradedTable dphi = delta_closed(x, phi, h);
      for (const auto& [sname, psi] : x.space_tables()) {
        GradedTable dpsi = delta_closed(x, psi, h);
        for (const auto& r : coarse)
          for (const auto& t : coarse)
            for (const auto& eps : coarse) {
              if (!subset_of(below(phi, r, true), translate(h, eps, below(psi, t, true)))) continue;
              ++translates.checks;
              if (!subset_of(below(dphi, r, true), translate(h, r, below(dpsi, t + eps, true))))
                translates.violations.push_back(pname + "," + sname + "/" + hname + " r=" + to_string(r) + " t=" +
                                                to_string(t) + " eps=" + to_string(eps));
            }
      }
    }
  }

  return {scan, duality, order, corr, corr_sets, below_id, inv, fixed, conj, translates};
}

// ---------------------------------------------------------------- generator

FiniteGSpace random_gspace(std::mt19937_64& rng, std::size_t max_order, std::size_t max_points, long den) {
  auto pick = [&](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); };
  const std::size_t n = pick(2, std::max<std::size_t>(2, max_points));
  std::vector<std::string> points;
  for (std::size_t i = 0; i < n; ++i) points.push_back("x" + std::to_string(i + 1));

  FiniteGSpace x;
  std::vector<std::vector<std::size_t>> gens;
  for (int attempt = 0;; ++attempt) {
    gens.clear();
    std::size_t k = pick(1, 2);
    for (std::size_t g = 0; g < k; ++g) {
      // permute a random block of at most 4 points
      std::vector<std::size_t> perm(n), block(n);
      for (std::size_t i = 0; i < n; ++i) perm[i] = block[i] = i;
      std::shuffle(block.begin(), block.end(), rng);
      block.resize(std::min<std::size_t>(n, pick(2, 4)));
      std::vector<std::size_t> images = block;
      std::shuffle(images.begin(), images.end(), rng);
      for (std::size_t i = 0; i < block.size(); ++i) perm[block[i]] = images[i];
      gens.push_back(perm);
    }
    std::vector<std::pair<std::string, std::vector<std::size_t>>> named;
    for (std::size_t g = 0; g < gens.size(); ++g) named.emplace_back(std::string(1, static_cast<char>('a' + g)), gens[g]);
    x = FiniteGSpace::generated(points, named);
    if (x.order() <= max_order || attempt > 50) break;
  }
  if (x.order() > max_order) {  // fall back to the group generated by one transposition
    std::vector<std::size_t> swap(n);
    for (std::size_t i = 0; i < n; ++i) swap[i] = i;
    std::swap(swap[0], swap[1]);
    x = FiniteGSpace::generated(points, {{"a", swap}});
    gens = {swap};
  }

  auto grid_value = [&]() { return Rational(static_cast<long>(pick(0, den)), den); };
  auto canon = [](Rational q) {
    q.canonicalize();
    return q;
  };
  for (const char* name : {"phi", "psi"}) {
    GradedTable t;
    for (std::size_t p = 0; p < n; ++p) t.push_back(canon(grid_value()));
    x.add_space_table(name, t);
  }
  {  // constant on orbits, hence invariant under every graded subgroup
    GradedTable t(n, Rational(-1));
    for (std::size_t p = 0; p < n; ++p) {
      if (t[p] >= 0) continue;
      Rational v = canon(grid_value());
      for (std::size_t g = 0; g < x.order(); ++g) t[x.act(g, p)] = v;
    }
    x.add_space_table("orbit", t);
  }

  const std::size_t m = x.order();
  {  // weighted count of displaced points from a random set
    std::vector<Rational> w(n, Rational(0));
    for (std::size_t p = 0; p < n; ++p)
      if (pick(0, 2) == 0) w[p] = canon(Rational(static_cast<long>(pick(1, den)), den));
    GradedTable h(m);
    for (std::size_t g = 0; g < m; ++g) {
      Rational s = 0;
      for (std::size_t p = 0; p < n; ++p)
        if (x.act(g, p) != p) s += w[p];
      h[g] = s > 1 ? Rational(1) : s;
    }
    x.add_group_table("H", h);
  }
  {  // capped word length in the generators and their inverses
    std::vector<std::size_t> gen_idx;
    for (const auto& g : gens) {
      for (std::size_t e = 0; e < m; ++e)
        if (x.permutation(e) == g) {
          gen_idx.push_back(e);
          gen_idx.push_back(x.inv(e));
        }
    }
    std::vector<long> len(m, -1);
    std::deque<std::size_t> queue{x.identity()};
    len[x.identity()] = 0;
    while (!queue.empty()) {
      std::size_t e = queue.front();
      queue.pop_front();
      for (std::size_t s : gen_idx) {
        std::size_t f = x.mul(s, e);
        if (len[f] < 0) {
          len[f] = len[e] + 1;
          queue.push_back(f);
        }
      }
    }
    Rational step = canon(Rational(static_cast<long>(pick(1, den)), den));
    GradedTable h(m);
    for (std::size_t e = 0; e < m; ++e) h[e] = dot_scale(step, Rational(len[e]));
    x.add_group_table("L", h);
  }
  {
    GradedTable j(m);
    for (std::size_t e = 0; e < m; ++e) j[e] = e == x.identity() ? Rational(0) : canon(grid_value());
    x.add_group_table("J", j);
  }
  return x;
}

}  // namespace ury
