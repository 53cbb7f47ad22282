#include <algorithm>
#include <set>
#include <sstream>

#include "ury/metric.hpp"

namespace ury {

std::string to_string(AmalgamationRoute route) {
  switch (route) {
    case AmalgamationRoute::Inductive: return "inductive";
    case AmalgamationRoute::InductiveRepaired: return "inductive-repaired";
    case AmalgamationRoute::ShortestPath: return "shortest-path";
  }
  return "unknown";
}

std::string HypothesisReport::describe() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < failures.size(); ++i) out << (i ? "; " : "") << failures[i];
  return out.str();
}

bool EmbeddingWitness::verify() const {
  std::set<PointId> images;
  for (const auto& [from, to] : map) {
    if (!source.contains(from) || !target.contains(to)) return false;
    if (!images.insert(to).second) return false;
  }
  if (map.size() != source.size()) return false;
  for (const auto& [x, fx] : map) {
    for (const auto& [y, fy] : map) {
      if (source.d(x, y) != target.d(fx, fy)) return false;
    }
  }
  return true;
}

Rational amalgamation_displacement(std::size_t n, std::size_t shared, const Rational& eps) {
  const std::size_t m = n - shared;
  const std::size_t pairs = m * (m - 1) / 2;
  return Rational(static_cast<long>(2 * pairs + 1)) * eps;
}

namespace {

std::string idx(std::size_t i) { return std::to_string(i + 1); }

}  // namespace

HypothesisReport check_amalgamation_hypotheses(const AmalgamationProblem& p) {
  HypothesisReport r;
  auto fail = [&](std::string s) { r.failures.push_back(std::move(s)); };
  const std::size_t n = p.a_points.size();
  if (n == 0) fail("no points");
  if (p.b_space.size() != n) fail("B has " + std::to_string(p.b_space.size()) + " points, expected " + std::to_string(n));
  if (p.shared >= n && n > 0) fail("q must satisfy q < n");
  if (p.eps <= 0) fail("eps must be positive");
  {
    std::set<PointId> seen;
    for (const auto& a : p.a_points) {
      if (!p.a_space.contains(a)) fail("a-point '" + a + "' is not in the ambient space");
      if (!seen.insert(a).second) fail("a-point '" + a + "' repeated");
    }
  }
  if (!r.ok()) return r;

  std::vector<std::size_t> ai;
  for (const auto& a : p.a_points) ai.push_back(p.a_space.index(a));
  auto da = [&](std::size_t i, std::size_t j) -> const Rational& { return p.a_space.d(ai[i], ai[j]); };
  auto db = [&](std::size_t i, std::size_t j) -> const Rational& { return p.b_space.d(i, j); };
  const std::size_t q = p.shared;
  const Rational margin = amalgamation_displacement(n, q, p.eps);

  if (margin > 1) fail("displacement " + to_string(margin) + " exceeds the diameter bound 1");
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!(margin < da(i, j))) {
        fail("separation: d(a" + idx(i) + ",a" + idx(j) + ")=" + to_string(da(i, j)) + " is not > " + to_string(margin));
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = j + 1; k < n; ++k) {
        if (i == j || i == k) continue;
        Rational slack = da(i, j) + da(i, k) - da(j, k);
        if (slack != 0 && !(margin < slack)) {
          fail("margin: triple (a" + idx(i) + ";a" + idx(j) + ",a" + idx(k) + ") has slack " + to_string(slack) +
               " not > " + to_string(margin));
        }
      }
    }
  }
  for (std::size_t k = 0; k < q; ++k) {
    for (std::size_t i = q; i < n; ++i) {
      for (std::size_t j = q; j < n; ++j) {
        if (i == j) continue;
        if (da(i, j) + da(j, k) == da(i, k)) {
          fail("geodesic: a" + idx(j) + " lies between a" + idx(i) + " and shared a" + idx(k));
        }
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      Rational dev = abs(Rational(db(i, j) - da(i, j)));
      if (j < q) {
        if (dev != 0) fail("shared part: d(b" + idx(i) + ",b" + idx(j) + ") differs from d(a" + idx(i) + ",a" + idx(j) + ")");
      } else if (dev > p.eps) {
        fail("deviation: |d(b" + idx(i) + ",b" + idx(j) + ") - d(a" + idx(i) + ",a" + idx(j) + ")| = " + to_string(dev) +
             " > eps");
      }
    }
  }
  std::set<PointId> a_ids(p.a_points.begin(), p.a_points.end());
  for (std::size_t i = q; i < n; ++i) {
    if (a_ids.count(p.b_space.id(i))) fail("b-point id '" + p.b_space.id(i) + "' collides with an a-point");
  }
  return r;
}

namespace {

/// Partially defined symmetric distance matrix on the output points.
class PartialMetric {
 public:
  explicit PartialMetric(std::size_t n) : n_(n), d_(n * n), defined_(n * n, false) {
    for (std::size_t i = 0; i < n; ++i) set(i, i, Rational(0));
  }
  void set(std::size_t i, std::size_t j, const Rational& v) {
    d_[i * n_ + j] = v;
    d_[j * n_ + i] = v;
    defined_[i * n_ + j] = defined_[j * n_ + i] = true;
  }
  bool has(std::size_t i, std::size_t j) const { return defined_[i * n_ + j]; }
  const Rational& at(std::size_t i, std::size_t j) const { return d_[i * n_ + j]; }
  std::size_t size() const { return n_; }

  /// Interval [lo, hi] of values for the edge (u,v) compatible with every
  /// triangle whose other two edges are defined.
  std::pair<Rational, Rational> window(std::size_t u, std::size_t v, const Rational& cap) const {
    Rational lo = 0, hi = cap;
    for (std::size_t z = 0; z < n_; ++z) {
      if (z == u || z == v || !has(u, z) || !has(z, v)) continue;
      hi = std::min(hi, Rational(at(u, z) + at(z, v)));
      lo = std::max(lo, Rational(abs(Rational(at(u, z) - at(z, v)))));
    }
    return {lo, hi};
  }

 private:
  std::size_t n_;
  std::vector<Rational> d_;
  std::vector<bool> defined_;
};

}  // namespace

AmalgamationResult amalgamate(const AmalgamationProblem& p) {
  if (auto report = check_amalgamation_hypotheses(p); !report.ok()) throw HypothesisError(std::move(report));

  const std::size_t n = p.a_points.size();
  const std::size_t q = p.shared;
  const std::size_t total = n + (n - q);
  const Rational displacement = amalgamation_displacement(n, q, p.eps);
  const Rational half_eps = p.eps / 2;

  std::vector<std::size_t> ai;
  for (const auto& a : p.a_points) ai.push_back(p.a_space.index(a));
  auto da = [&](std::size_t i, std::size_t j) -> const Rational& { return p.a_space.d(ai[i], ai[j]); };
  auto db = [&](std::size_t i, std::size_t j) -> const Rational& { return p.b_space.d(i, j); };
  auto A = [](std::size_t i) { return i; };
  auto B = [&](std::size_t i) { return i < q ? i : n + (i - q); };

  PartialMetric m(total);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      m.set(A(i), A(j), da(i, j));
      m.set(B(i), B(j), db(i, j));
    }
  }
  for (std::size_t i = q; i < n; ++i) m.set(A(i), B(i), displacement);
  // Shared points: d(a_k, b_j) = d(b_k, b_j) for k <= q.
  for (std::size_t k = 0; k < q; ++k) {
    for (std::size_t j = q; j < n; ++j) m.set(A(k), B(j), db(k, j));
  }

  struct Pair {
    Rational level;
    std::size_t i, j;
  };
  std::vector<Pair> order;
  for (std::size_t i = q; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) order.push_back({std::min(da(i, j), db(i, j)), i, j});
  }
  std::stable_sort(order.begin(), order.end(), [](const Pair& x, const Pair& y) {
    if (x.level != y.level) return x.level < y.level;
    return std::pair(x.i, x.j) < std::pair(y.i, y.j);
  });

  AmalgamationResult result;
  result.displacement = displacement;
  std::map<std::pair<std::size_t, std::size_t>, Rational> shift_of;
  auto key = [](std::size_t i, std::size_t j) { return i < j ? std::pair(i, j) : std::pair(j, i); };
  auto fits = [&](std::size_t i, std::size_t j, const Rational& x) {
    for (auto [u, v] : {std::pair(A(i), B(j)), std::pair(B(i), A(j))}) {
      auto [lo, hi] = m.window(u, v, Rational(1));
      if (x < lo || x > hi) return false;
    }
    return true;
  };

  bool stuck = false;
  for (std::size_t step = 0; step < order.size() && !stuck; ++step) {
    const auto& [level, i, j] = order[step];
    const Rational ceiling = Rational(static_cast<long>(step + 1)) * p.eps;
    Rational shift = half_eps;
    if (!fits(i, j, level - shift)) {
      // a_k between a_i and a_j with both cross pairs already placed: reuse
      // the largest shift among the pairs {i,k}.
      bool found = false;
      Rational best;
      for (std::size_t k = q; k < n; ++k) {
        if (k == i || k == j) continue;
        if (!shift_of.count(key(i, k)) || !shift_of.count(key(j, k))) continue;
        if (da(i, k) + da(k, j) != da(i, j)) continue;
        const Rational& s = shift_of.at(key(i, k));
        if (!found || s > best) best = s;
        found = true;
      }
      if (found) shift = best;
      if (!fits(i, j, level - shift)) {
        Rational lo = 0, hi = level - half_eps;
        for (auto [u, v] : {std::pair(A(i), B(j)), std::pair(B(i), A(j))}) {
          auto [l, h] = m.window(u, v, Rational(1));
          lo = std::max(lo, l);
          hi = std::min(hi, h);
        }
        shift = level - hi;
        if (hi < lo || hi <= 0 || shift > ceiling) {
          stuck = true;
          break;
        }
        result.route = AmalgamationRoute::InductiveRepaired;
      }
    }
    shift_of[key(i, j)] = shift;
    m.set(A(i), B(j), level - shift);
    m.set(B(i), A(j), level - shift);
    result.steps.push_back({i + 1, j + 1, level, shift});
  }

  DistanceTable table;
  for (std::size_t i = 0; i < n; ++i) table.points.push_back(p.a_points[i]);
  for (std::size_t i = q; i < n; ++i) table.points.push_back(p.b_space.id(i));
  table.dist.assign(total, std::vector<Rational>(total));

  if (stuck) {
    // Capped shortest-path metric of the graph A ∪ B ∪ {a_i b_i}.
    result.route = AmalgamationRoute::ShortestPath;
    result.steps.clear();
    const Rational inf = 2;
    std::vector<std::vector<Rational>> g(total, std::vector<Rational>(total, inf));
    for (std::size_t x = 0; x < total; ++x) g[x][x] = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        g[A(i)][A(j)] = std::min(g[A(i)][A(j)], da(i, j));
        g[B(i)][B(j)] = std::min(g[B(i)][B(j)], db(i, j));
      }
    }
    for (std::size_t i = q; i < n; ++i) g[A(i)][B(i)] = g[B(i)][A(i)] = displacement;
    for (std::size_t k = 0; k < total; ++k) {
      for (std::size_t x = 0; x < total; ++x) {
        for (std::size_t y = 0; y < total; ++y) {
          Rational via = g[x][k] + g[k][y];
          if (via < g[x][y]) g[x][y] = via;
        }
      }
    }
    for (std::size_t x = 0; x < total; ++x) {
      for (std::size_t y = 0; y < total; ++y) table.dist[x][y] = std::min(g[x][y], Rational(1));
    }
  } else {
    for (std::size_t x = 0; x < total; ++x) {
      for (std::size_t y = 0; y < total; ++y) {
        if (!m.has(x, y)) throw ConstructionError("distance left undefined in amalgamation");
        table.dist[x][y] = m.at(x, y);
      }
    }
  }

  ValidationReport report = validate_metric(table);
  if (!report.ok()) throw ConstructionError("amalgamation produced an invalid space: " + report.describe());
  result.space = RationalMetricSpace::from_table(table);
  for (std::size_t i = q; i < n; ++i) {
    if (result.space.d(A(i), B(i)) != displacement) {
      throw ConstructionError("displacement of a" + idx(i) + " not preserved");
    }
  }

  result.embedding.source = p.b_space;
  result.embedding.target = result.space;
  for (std::size_t i = 0; i < n; ++i) result.embedding.map.emplace_back(p.b_space.id(i), table.points[B(i)]);
  if (!result.embedding.verify()) throw ConstructionError("amalgamation does not embed B isometrically");
  return result;
}

}  // namespace ury
