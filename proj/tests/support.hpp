#pragma once

// Test-only generators and brute-force oracles. Nothing here calls the code
// paths it is used to check.

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "ury/metric.hpp"

namespace ury::testing {

using Rng = std::mt19937_64;

inline Rational random_rational(Rng& rng, long lo_num, long hi_num, long den) {
  std::uniform_int_distribution<long> pick(lo_num, hi_num);
  Rational r(pick(rng), den);
  r.canonicalize();
  return r;
}

/// Independent triangle/range/symmetry check over a plain matrix.
inline bool brute_force_is_metric(const std::vector<std::vector<Rational>>& d) {
  const std::size_t n = d.size();
  for (std::size_t x = 0; x < n; ++x) {
    if (d[x][x] != 0) return false;
    for (std::size_t y = 0; y < n; ++y) {
      if (d[x][y] != d[y][x] || d[x][y] < 0 || d[x][y] > 1) return false;
      if (x != y && d[x][y] == 0) return false;
      for (std::size_t z = 0; z < n; ++z) {
        if (d[x][z] > d[x][y] + d[y][z]) return false;
      }
    }
  }
  return true;
}

inline std::vector<std::vector<Rational>> matrix_of(const RationalMetricSpace& s) { return s.table().dist; }

inline std::vector<PointId> names(const std::string& prefix, std::size_t n) {
  std::vector<PointId> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i + 1));
  return out;
}

inline RationalMetricSpace space_of(std::vector<PointId> ids, std::vector<std::vector<Rational>> d) {
  return RationalMetricSpace::from_table(DistanceTable{std::move(ids), std::move(d)});
}

/// Random finite metric space with distances in {lo/den, ..., 1}.
inline RationalMetricSpace random_space(Rng& rng, std::size_t n, long den, long lo_num, const std::string& prefix = "p") {
  while (true) {
    std::vector<std::vector<Rational>> d(n, std::vector<Rational>(n, Rational(0)));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) d[i][j] = d[j][i] = random_rational(rng, lo_num, den, den);
    }
    if (brute_force_is_metric(d)) return space_of(names(prefix, n), d);
  }
}

/// Random instance satisfying every hypothesis of the near-copy amalgamation.
/// Half of the instances place the a-points on a line so geodesic triples
/// are common.
inline AmalgamationProblem random_amalgamation_problem(Rng& rng, std::size_t n, std::size_t q) {
  const long den = 40;
  const std::size_t m = n - q;
  const long factor = static_cast<long>(2 * (m * (m - 1) / 2) + 1);
  while (true) {
    std::vector<std::vector<Rational>> a(n, std::vector<Rational>(n, Rational(0)));
    if (std::bernoulli_distribution(0.5)(rng)) {
      std::vector<Rational> pos;
      while (pos.size() < n) {
        Rational x = random_rational(rng, 0, den, den);
        if (std::find(pos.begin(), pos.end(), x) == pos.end()) pos.push_back(x);
      }
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a[i][j] = abs(Rational(pos[i] - pos[j]));
    } else {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) a[i][j] = a[j][i] = random_rational(rng, den / 4, den, den);
    }
    if (!brute_force_is_metric(a)) continue;
    bool bad = false;
    Rational min_slack = 1;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i != j) min_slack = std::min(min_slack, a[i][j]);
        for (std::size_t k = 0; k < n; ++k) {
          if (i == j || j == k || i == k) continue;
          Rational s = a[i][j] + a[i][k] - a[j][k];
          if (s != 0) min_slack = std::min(min_slack, s);
          if (k < q && i >= q && j >= q && a[i][j] + a[j][k] == a[i][k]) bad = true;
        }
      }
    }
    if (bad) continue;
    std::uniform_int_distribution<long> shrink(2, 5);
    Rational eps = min_slack / Rational(factor * shrink(rng));
    if (n == 1) eps = Rational(1, 10);

    std::vector<std::vector<Rational>> b = a;
    for (int attempt = 0; attempt < 100; ++attempt) {
      std::vector<std::vector<Rational>> cand = a;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
          if (j < q) continue;
          cand[i][j] = cand[j][i] = a[i][j] + eps * random_rational(rng, -4, 4, 4);
        }
      }
      if (brute_force_is_metric(cand)) {
        b = cand;
        break;
      }
    }
    RationalMetricSpace a_space = space_of(names("a", n), a);
    RationalMetricSpace b_space = space_of(names("b", n), b);
    return AmalgamationProblem{a_space, a_space.points(), b_space, q, eps};
  }
}

}  // namespace ury::testing
