#include "ury/reduction.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <set>

#include "text.hpp"
#include "ury/error.hpp"
#include "ury/graded.hpp"

namespace ury {

namespace {

std::vector<std::size_t> compose(const std::vector<std::size_t>& g, const std::vector<std::size_t>& h) {
  std::vector<std::size_t> out(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) out[i] = g[h[i]];
  return out;
}

std::vector<std::size_t> identity(std::size_t n) {
  std::vector<std::size_t> id(n);
  for (std::size_t i = 0; i < n; ++i) id[i] = i;
  return id;
}

bool is_perm(const std::vector<std::size_t>& p, std::size_t n) {
  if (p.size() != n) return false;
  std::vector<bool> seen(n, false);
  for (std::size_t v : p) {
    if (v >= n || seen[v]) return false;
    seen[v] = true;
  }
  return true;
}

/// Distance values replaced by their rank among all values that occur, so
/// the inner loops compare integers.
struct RankedInstance {
  std::vector<Rational> values;
  std::vector<std::vector<int>> dy;        // rank of d(a, b) on Y

  explicit RankedInstance(const ReductionInstance& inst) {
    std::set<Rational> all{Rational(0)};
    for (std::size_t a = 0; a < inst.y.size(); ++a)
      for (std::size_t b = 0; b < inst.y.size(); ++b) all.insert(inst.y.d(a, b));
    for (std::size_t a = 0; a < inst.x.size(); ++a)
      for (std::size_t b = 0; b < inst.x.size(); ++b) all.insert(inst.x.d(a, b));
    values.assign(all.begin(), all.end());
    dy.assign(inst.y.size(), std::vector<int>(inst.y.size()));
    for (std::size_t a = 0; a < inst.y.size(); ++a)
      for (std::size_t b = 0; b < inst.y.size(); ++b) dy[a][b] = rank(inst.y.d(a, b));
  }
  int rank(const Rational& v) const {
    return static_cast<int>(std::lower_bound(values.begin(), values.end(), v) - values.begin());
  }
};

std::size_t power(std::size_t n, std::size_t k) {
  std::size_t p = 1;
  for (std::size_t i = 0; i < k; ++i) p *= n;
  return p;
}

/// tables[k-1][l][tuple rank], tuples lexicographic.
using RankTables = std::vector<std::vector<std::vector<int>>>;

RankTables encode_ranks(const ReductionInstance& inst, const RankedInstance& ranked, std::size_t x, std::size_t max_k) {
  const std::size_t n = inst.y.size(), m = inst.group.size(), nb = inst.basis.size();
  std::vector<std::vector<int>> to_basis(m, std::vector<int>(nb));
  for (std::size_t g = 0; g < m; ++g) {
    std::size_t gx = inst.group[g].on_x[x];
    for (std::size_t l = 0; l < nb; ++l) {
      Rational best = 1;
      bool any = false;
      for (std::size_t p : inst.basis[l].second) {
        if (!any || inst.x.d(gx, p) < best) best = inst.x.d(gx, p);
        any = true;
      }
      to_basis[g][l] = any ? ranked.rank(best) : -1;  // empty A_l: inf over nothing
    }
  }
  RankTables out(max_k);
  for (std::size_t k = 1; k <= max_k; ++k) {
    const std::size_t count = power(n, k);
    out[k - 1].assign(nb, std::vector<int>(count));
    std::vector<std::size_t> t(k, 0);
    for (std::size_t r = 0; r < count; ++r) {
      std::size_t rest = r;
      for (std::size_t i = k; i-- > 0;) {
        t[i] = rest % n;
        rest /= n;
      }
      std::vector<int> coord(m, 0);
      for (std::size_t g = 0; g < m; ++g) {
        int c = 0;
        for (std::size_t i = 0; i < k; ++i) c = std::max(c, ranked.dy[inst.group[g].on_y[t[i]]][inst.enumeration[i]]);
        coord[g] = c;
      }
      for (std::size_t l = 0; l < nb; ++l) {
        int best = std::numeric_limits<int>::max();
        for (std::size_t g = 0; g < m; ++g) {
          if (to_basis[g][l] < 0) continue;
          best = std::min(best, std::max(coord[g], to_basis[g][l]));
        }
        out[k - 1][l][r] = best;
      }
    }
  }
  return out;
}

/// Rank of the tuple f(t) where t has rank r.
std::size_t image_rank(std::size_t r, std::size_t k, std::size_t n, const std::vector<std::size_t>& f) {
  std::vector<std::size_t> t(k);
  for (std::size_t i = k; i-- > 0;) {
    t[i] = r % n;
    r /= n;
  }
  std::size_t out = 0;
  for (std::size_t i = 0; i < k; ++i) out = out * n + f[t[i]];
  return out;
}

}  // namespace

ReductionInstance ReductionInstance::make(RationalMetricSpace y, RationalMetricSpace x, std::vector<Element> generators,
                                          std::vector<std::pair<std::string, std::vector<std::size_t>>> basis,
                                          std::vector<std::size_t> enumeration) {
  ReductionInstance inst;
  const std::size_t ny = y.size(), nx = x.size();
  if (ny == 0) throw DomainError("Y must be non-empty");
  for (const auto& g : generators) {
    if (!is_perm(g.on_y, ny)) throw DomainError("element " + g.name + " is not a permutation of Y");
    if (!is_perm(g.on_x, nx)) throw DomainError("element " + g.name + " is not a permutation of X");
    for (std::size_t a = 0; a < ny; ++a)
      for (std::size_t b = 0; b < ny; ++b)
        if (y.d(a, b) != y.d(g.on_y[a], g.on_y[b])) throw DomainError("element " + g.name + " is not an isometry of Y");
  }
  std::map<std::vector<std::size_t>, std::size_t> index;
  inst.group.push_back({"e", identity(ny), identity(nx)});
  index[identity(ny)] = 0;
  for (std::size_t i = 0; i < inst.group.size(); ++i) {
    for (const auto& g : generators) {
      Element prod{"", compose(g.on_y, inst.group[i].on_y), compose(g.on_x, inst.group[i].on_x)};
      auto it = index.find(prod.on_y);
      if (it != index.end()) {
        if (inst.group[it->second].on_x != prod.on_x)
          throw DomainError("the action on X does not factor through the action on Y");
        continue;
      }
      prod.name = i == 0 ? g.name : g.name + "." + inst.group[i].name;
      index[prod.on_y] = inst.group.size();
      inst.group.push_back(std::move(prod));
    }
  }
  std::set<std::string> names;
  for (auto& [name, pts] : basis) {
    if (!names.insert(name).second) throw DomainError("duplicate basis set " + name);
    for (std::size_t p : pts)
      if (p >= nx) throw DomainError("basis set " + name + " has a point out of range");
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  }
  if (enumeration.empty()) enumeration = identity(ny);
  if (!is_perm(enumeration, ny)) throw DomainError("enumeration must list every point of Y once");
  inst.y = std::move(y);
  inst.x = std::move(x);
  inst.basis = std::move(basis);
  inst.enumeration = std::move(enumeration);
  return inst;
}

std::size_t ReductionInstance::element_index(const std::vector<std::size_t>& on_y) const {
  for (std::size_t g = 0; g < group.size(); ++g)
    if (group[g].on_y == on_y) return g;
  throw DomainError("not an element of the group");
}

bool ReductionInstance::basis_separates() const {
  auto has = [](const std::vector<std::size_t>& s, std::size_t p) { return std::binary_search(s.begin(), s.end(), p); };
  auto disjoint = [&](const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    for (std::size_t p : a)
      if (has(b, p)) return false;
    return true;
  };
  for (std::size_t p = 0; p < x.size(); ++p)
    for (std::size_t q = p + 1; q < x.size(); ++q) {
      bool split = false;
      for (const auto& [na, a] : basis) {
        if (!has(a, p) || has(a, q)) continue;
        for (const auto& [nb, b] : basis)
          if (has(b, q) && !has(b, p) && disjoint(a, b)) split = true;
      }
      if (!split) return false;
    }
  return true;
}

std::string reduction_relation(std::size_t k, const std::string& basis_name) {
  return "R" + std::to_string(k) + "_" + basis_name;
}

FiniteStructure encode(const ReductionInstance& inst, std::size_t x, std::optional<std::size_t> max_k) {
  const std::size_t kk = max_k ? *max_k : inst.y.size();
  if (kk > inst.y.size()) throw DomainError("k exceeds |Y|");
  if (x >= inst.x.size()) throw DomainError("point out of range");
  RankedInstance ranked(inst);
  RankTables tables = encode_ranks(inst, ranked, x, kk);
  Signature sig;
  for (std::size_t k = 1; k <= kk; ++k)
    for (const auto& [name, pts] : inst.basis) sig.relation(reduction_relation(k, name), k, Rational(1));
  FiniteStructure m(inst.y, sig);
  for (std::size_t k = 1; k <= kk; ++k) {
    auto tuples = all_tuples(inst.y.size(), k);
    for (std::size_t l = 0; l < inst.basis.size(); ++l)
      for (std::size_t r = 0; r < tuples.size(); ++r) {
        int v = tables[k - 1][l][r];
        m.set_value(reduction_relation(k, inst.basis[l].first), tuples[r],
                    v == std::numeric_limits<int>::max() ? Rational(1) : ranked.values[v]);
      }
  }
  return m;
}

OrbitEquivResult orbit_equiv(const ReductionInstance& inst, std::size_t x, std::size_t x2) {
  if (x >= inst.x.size() || x2 >= inst.x.size()) throw DomainError("point out of range");
  OrbitEquivResult out;
  for (std::size_t g = 0; g < inst.group.size(); ++g)
    if (inst.group[g].on_x[x] == x2) {
      out.same_orbit = true;
      out.orbit_witness = g;
      break;
    }
  RankedInstance ranked(inst);
  const std::size_t n = inst.y.size();
  RankTables a = encode_ranks(inst, ranked, x, n), b = encode_ranks(inst, ranked, x2, n);
  for (const auto& f : isometries(inst.y)) {
    bool match = true;
    for (std::size_t k = 1; k <= n && match; ++k)
      for (std::size_t l = 0; l < inst.basis.size() && match; ++l)
        for (std::size_t r = 0; r < a[k - 1][l].size() && match; ++r)
          match = b[k - 1][l][image_rank(r, k, n, f)] == a[k - 1][l][r];
    if (match) {
      out.isomorphic = true;
      out.witness = f;
      break;
    }
  }
  return out;
}

InvarianceCheck check_reduction_invariance(const ReductionInstance& inst) {
  InvarianceCheck out;
  RankedInstance ranked(inst);
  const std::size_t n = inst.y.size();
  std::vector<RankTables> enc;
  for (std::size_t x = 0; x < inst.x.size(); ++x) enc.push_back(encode_ranks(inst, ranked, x, n));
  for (std::size_t g = 0; g < inst.group.size(); ++g) {
    const auto& e = inst.group[g];
    std::vector<std::size_t> inv(n);
    for (std::size_t p = 0; p < n; ++p) inv[e.on_y[p]] = p;
    for (std::size_t x = 0; x < inst.x.size(); ++x) {
      const auto& moved = enc[e.on_x[x]];
      for (std::size_t k = 1; k <= n; ++k)
        for (std::size_t l = 0; l < inst.basis.size(); ++l)
          for (std::size_t r = 0; r < moved[k - 1][l].size(); ++r) {
            ++out.checks;
            if (moved[k - 1][l][r] != enc[x][k - 1][l][image_rank(r, k, n, inv)])
              out.violations.push_back(e.name + " at " + inst.x.id(x) + " " + reduction_relation(k, inst.basis[l].first));
          }
    }
  }
  return out;
}

// ---------------------------------------------------------------- text

ReductionInstance parse_reduction_instance(const std::string& source) {
  auto lines = text::logical_lines(source);
  std::optional<RationalMetricSpace> y, x;
  struct RawPerm {
    std::string name;
    std::vector<std::string> on_y, on_x;
    std::size_t line;
  };
  std::vector<RawPerm> perms;
  std::vector<std::pair<std::string, std::vector<std::string>>> basis_raw;
  std::vector<std::string> enum_raw;
  std::size_t i = 0;
  while (i < lines.size()) {
    if (lines[i].empty()) {
      ++i;
      continue;
    }
    auto tok = text::tokens(lines[i]);
    const std::size_t line = i + 1;
    if (tok[0] == "space") {
      if (tok.size() != 2 || (tok[1] != "Y" && tok[1] != "X")) throw ParseError("expected 'space Y' or 'space X'", 0, line);
      auto& slot = tok[1] == "Y" ? y : x;
      if (slot) throw ParseError("space " + tok[1] + " given twice", 0, line);
      RationalMetricSpace s;
      try {
        i = parse_metric_block(lines, i + 1, s);
      } catch (const MetricError& e) {
        throw ParseError(e.what(), 0, line);
      }
      slot = std::move(s);
      continue;
    }
    if (tok[0] == "perm") {
      auto bar = std::find(tok.begin(), tok.end(), "|");
      if (tok.size() < 2 || bar == tok.end()) throw ParseError("expected 'perm <name> <Y images> | <X images>'", 0, line);
      perms.push_back({tok[1], {tok.begin() + 2, bar}, {bar + 1, tok.end()}, line});
    } else if (tok[0] == "basis") {
      if (tok.size() < 2) throw ParseError("basis set needs a name", 0, line);
      basis_raw.emplace_back(tok[1], std::vector<std::string>(tok.begin() + 2, tok.end()));
    } else if (tok[0] == "enum") {
      enum_raw.assign(tok.begin() + 1, tok.end());
    } else {
      throw ParseError("unknown directive '" + tok[0] + "'", 0, line);
    }
    ++i;
  }
  if (!y || !x) throw ParseError("both 'space Y' and 'space X' are required", 0, lines.size());
  auto indices = [&](const RationalMetricSpace& s, const std::vector<std::string>& ids, std::size_t line) {
    std::vector<std::size_t> out;
    for (const auto& id : ids) {
      auto p = s.find(id);
      if (!p) throw ParseError("unknown point " + id, 0, line);
      out.push_back(*p);
    }
    return out;
  };
  std::vector<ReductionInstance::Element> gens;
  for (const auto& p : perms) {
    auto on_y = indices(*y, p.on_y, p.line), on_x = indices(*x, p.on_x, p.line);
    if (on_y == identity(y->size()) && on_x == identity(x->size())) continue;
    gens.push_back({p.name, on_y, on_x});
  }
  std::vector<std::pair<std::string, std::vector<std::size_t>>> basis;
  for (const auto& [name, pts] : basis_raw) basis.emplace_back(name, indices(*x, pts, lines.size()));
  try {
    return ReductionInstance::make(*y, *x, gens, basis, enum_raw.empty() ? std::vector<std::size_t>{} : indices(*y, enum_raw, lines.size()));
  } catch (const DomainError& e) {
    throw ParseError(e.what(), 0, lines.size());
  }
}

std::string format_reduction_instance(const ReductionInstance& inst) {
  std::string out = "space Y\n" + format_metric_space(inst.y) + "space X\n" + format_metric_space(inst.x);
  for (std::size_t g = 1; g < inst.group.size(); ++g) {
    const auto& e = inst.group[g];
    out += "perm " + e.name;
    for (std::size_t p : e.on_y) out += " " + inst.y.id(p);
    out += " |";
    for (std::size_t p : e.on_x) out += " " + inst.x.id(p);
    out += "\n";
  }
  for (const auto& [name, pts] : inst.basis) {
    out += "basis " + name;
    for (std::size_t p : pts) out += " " + inst.x.id(p);
    out += "\n";
  }
  out += "enum";
  for (std::size_t p : inst.enumeration) out += " " + inst.y.id(p);
  return out + "\n";
}

// ---------------------------------------------------------------- generator

ReductionInstance random_reduction_instance(std::mt19937_64& rng, std::size_t max_y, std::size_t max_x) {
  auto pick = [&](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); };
  const std::size_t ny = pick(2, std::max<std::size_t>(2, max_y));
  DistanceTable ty;
  for (std::size_t i = 0; i < ny; ++i) ty.points.push_back("y" + std::to_string(i + 1));
  ty.dist.assign(ny, std::vector<Rational>(ny, Rational(0)));
  for (std::size_t i = 0; i < ny; ++i)
    for (std::size_t j = i + 1; j < ny; ++j) ty.dist[i][j] = ty.dist[j][i] = pick(0, 1) ? Rational(1) : Rational(1, 2);
  RationalMetricSpace y = RationalMetricSpace::from_table(ty);

  // a subgroup of Iso(Y) from up to two random isometries
  auto iso = isometries(y);
  std::vector<std::vector<std::size_t>> gens_y;
  for (std::size_t k = pick(0, 2); k > 0; --k) gens_y.push_back(iso[pick(0, iso.size() - 1)]);
  std::vector<std::vector<std::size_t>> group{identity(ny)};
  std::set<std::vector<std::size_t>> seen{identity(ny)};
  for (std::size_t i = 0; i < group.size(); ++i)
    for (const auto& g : gens_y) {
      auto p = compose(g, group[i]);
      if (seen.insert(p).second) group.push_back(p);
    }

  // X: copies of G-orbits in Y plus fixed points; the G-action on X is read
  // off the action on Y, so it factors through it
  std::vector<std::size_t> origin;  // Y point a copied X point follows, or npos for fixed points
  std::vector<std::size_t> block;   // g maps the copy of p in a block to the copy of g(p) in that block
  const std::size_t npos = static_cast<std::size_t>(-1);
  const std::size_t nx_target = pick(2, std::max<std::size_t>(2, max_x));
  while (origin.size() < nx_target) {
    const std::size_t b = block.empty() ? 0 : block.back() + 1;
    std::set<std::size_t> orbit;
    if (pick(0, 2) != 0) {
      std::size_t a = pick(0, ny - 1);
      for (const auto& g : group) orbit.insert(g[a]);
    }
    if (orbit.empty() || origin.size() + orbit.size() > nx_target) {
      origin.push_back(npos);
      block.push_back(b);
      continue;
    }
    for (std::size_t p : orbit) {
      origin.push_back(p);
      block.push_back(b);
    }
  }
  const std::size_t nx = origin.size();
  std::vector<ReductionInstance::Element> gens;
  for (std::size_t g = 0; g < gens_y.size(); ++g) {
    std::vector<std::size_t> on_x(nx);
    for (std::size_t i = 0; i < nx; ++i) {
      if (origin[i] == npos) {
        on_x[i] = i;
        continue;
      }
      std::size_t target = gens_y[g][origin[i]];
      for (std::size_t j = 0; j < nx; ++j)
        if (block[j] == block[i] && origin[j] == target) on_x[i] = j;
    }
    gens.push_back({std::string(1, static_cast<char>('a' + g)), gens_y[g], on_x});
  }

  DistanceTable tx;
  for (std::size_t i = 0; i < nx; ++i) tx.points.push_back("x" + std::to_string(i + 1));
  while (true) {
    tx.dist.assign(nx, std::vector<Rational>(nx, Rational(0)));
    for (std::size_t i = 0; i < nx; ++i)
      for (std::size_t j = i + 1; j < nx; ++j) {
        Rational v(static_cast<long>(pick(2, 4)), 4);
        v.canonicalize();
        tx.dist[i][j] = tx.dist[j][i] = v;
      }
    if (validate_metric(tx).ok()) break;
  }
  RationalMetricSpace x = RationalMetricSpace::from_table(tx);

  std::vector<std::pair<std::string, std::vector<std::size_t>>> basis;
  for (std::size_t k = pick(1, 3); k > 0; --k) {
    std::vector<std::size_t> s;
    for (std::size_t i = 0; i < nx; ++i)
      if (pick(0, 1)) s.push_back(i);
    if (!s.empty()) basis.emplace_back("A" + std::to_string(basis.size() + 1), s);
  }
  auto inst = ReductionInstance::make(y, x, gens, basis);
  // separate the remaining pairs with singletons
  for (std::size_t i = 0; i < nx && !inst.basis_separates(); ++i) {
    inst.basis.emplace_back("A" + std::to_string(inst.basis.size() + 1), std::vector<std::size_t>{i});
  }
  return inst;
}

}  // namespace ury
