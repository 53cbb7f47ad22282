#include "ury/metric.hpp"

#include <algorithm>
#include <sstream>

namespace ury {

std::string to_string(MetricViolation::Kind kind) {
  switch (kind) {
    case MetricViolation::Kind::Shape: return "shape";
    case MetricViolation::Kind::DuplicateId: return "duplicate-id";
    case MetricViolation::Kind::Diagonal: return "diagonal";
    case MetricViolation::Kind::Range: return "range";
    case MetricViolation::Kind::Asymmetry: return "asymmetry";
    case MetricViolation::Kind::Degenerate: return "degenerate";
    case MetricViolation::Kind::Triangle: return "triangle";
  }
  return "unknown";
}

std::string ValidationReport::describe() const {
  if (ok()) return "ok";
  std::ostringstream out;
  for (std::size_t i = 0; i < violations.size(); ++i) {
    const auto& v = violations[i];
    if (i) out << "; ";
    out << to_string(v.kind) << " {";
    for (std::size_t k = 0; k < v.points.size(); ++k) out << (k ? "," : "") << v.points[k];
    out << "}";
    if (!v.detail.empty()) out << " " << v.detail;
  }
  return out.str();
}

ValidationReport validate_metric(const DistanceTable& c) {
  ValidationReport report;
  auto add = [&](MetricViolation::Kind kind, std::vector<PointId> pts, std::string detail) {
    report.violations.push_back({kind, std::move(pts), std::move(detail)});
  };
  const std::size_t n = c.points.size();
  if (c.dist.size() != n ||
      std::any_of(c.dist.begin(), c.dist.end(), [n](const auto& row) { return row.size() != n; })) {
    add(MetricViolation::Kind::Shape, {}, "table is not " + std::to_string(n) + "x" + std::to_string(n));
    return report;
  }
  {
    std::vector<PointId> sorted = c.points;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 1; i < n; ++i) {
      if (sorted[i] == sorted[i - 1]) add(MetricViolation::Kind::DuplicateId, {sorted[i]}, "");
    }
  }
  const auto& d = c.dist;
  for (std::size_t i = 0; i < n; ++i) {
    if (d[i][i] != 0) add(MetricViolation::Kind::Diagonal, {c.points[i]}, "d = " + to_string(d[i][i]));
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && !in_unit_interval(d[i][j])) {
        add(MetricViolation::Kind::Range, {c.points[i], c.points[j]}, "d = " + to_string(d[i][j]));
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (d[i][j] != d[j][i]) {
        add(MetricViolation::Kind::Asymmetry, {c.points[i], c.points[j]},
            to_string(d[i][j]) + " vs " + to_string(d[j][i]));
      } else if (d[i][j] == 0) {
        add(MetricViolation::Kind::Degenerate, {c.points[i], c.points[j]}, "");
      }
    }
  }
  // Each violated (x, z) pair is reported once per intermediate point y.
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t z = x + 1; z < n; ++z) {
      for (std::size_t y = 0; y < n; ++y) {
        if (y == x || y == z) continue;
        if (d[x][z] > d[x][y] + d[y][z]) {
          add(MetricViolation::Kind::Triangle, {c.points[x], c.points[y], c.points[z]},
              "d(" + c.points[x] + "," + c.points[z] + ")=" + to_string(d[x][z]) + " > " +
                  to_string(d[x][y]) + " + " + to_string(d[y][z]));
        }
      }
    }
  }
  return report;
}

RationalMetricSpace RationalMetricSpace::from_table(const DistanceTable& table) {
  ValidationReport report = validate_metric(table);
  if (!report.ok()) throw MetricError(std::move(report));
  RationalMetricSpace s;
  s.ids_ = table.points;
  const std::size_t n = s.ids_.size();
  s.dist_.reserve(n * n);
  for (const auto& row : table.dist) s.dist_.insert(s.dist_.end(), row.begin(), row.end());
  for (std::size_t i = 0; i < n; ++i) s.index_.emplace(s.ids_[i], i);
  return s;
}

std::optional<std::size_t> RationalMetricSpace::find(const PointId& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t RationalMetricSpace::index(const PointId& id) const {
  auto i = find(id);
  if (!i) throw DomainError("unknown point '" + id + "'");
  return *i;
}

DistanceTable RationalMetricSpace::table() const {
  DistanceTable t;
  t.points = ids_;
  const std::size_t n = ids_.size();
  t.dist.assign(n, std::vector<Rational>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) t.dist[i][j] = d(i, j);
  }
  return t;
}

RationalMetricSpace RationalMetricSpace::restrict_to(const std::vector<PointId>& ids) const {
  DistanceTable t;
  t.points = ids;
  std::vector<std::size_t> idx;
  idx.reserve(ids.size());
  for (const auto& id : ids) idx.push_back(index(id));
  t.dist.assign(ids.size(), std::vector<Rational>(ids.size()));
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t j = 0; j < ids.size(); ++j) t.dist[i][j] = d(idx[i], idx[j]);
  }
  return from_table(t);
}

RationalMetricSpace append_point_unchecked(const RationalMetricSpace& space, const PointId& id,
                                           const std::vector<Rational>& to_existing) {
  const std::size_t n = space.size();
  RationalMetricSpace s;
  s.ids_ = space.ids_;
  s.ids_.push_back(id);
  s.dist_.reserve((n + 1) * (n + 1));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) s.dist_.push_back(space.d(i, j));
    s.dist_.push_back(to_existing[i]);
  }
  for (std::size_t j = 0; j < n; ++j) s.dist_.push_back(to_existing[j]);
  s.dist_.emplace_back(0);
  s.index_ = space.index_;
  s.index_.emplace(id, n);
  return s;
}

Rational tuple_distance(const RationalMetricSpace& space, const std::vector<std::size_t>& a,
                        const std::vector<std::size_t>& b) {
  Rational m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, space.d(a[i], b[i]));
  return m;
}

// ---------------------------------------------------------------------------

KatetovFunction KatetovFunction::from_map(const RationalMetricSpace& base, const std::map<PointId, Rational>& values) {
  KatetovFunction f;
  f.values.resize(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) {
    auto it = values.find(base.id(i));
    if (it == values.end()) throw DomainError("Katetov function has no value at '" + base.id(i) + "'");
    f.values[i] = it->second;
  }
  if (values.size() != base.size()) throw DomainError("Katetov function names points outside the base space");
  return f;
}

std::optional<std::pair<std::size_t, std::size_t>> admissibility_violation(const RationalMetricSpace& base,
                                                                           const std::vector<Rational>& v) {
  if (v.size() != base.size()) throw DomainError("Katetov function size does not match the base space");
  for (std::size_t a = 0; a < v.size(); ++a) {
    if (v[a] <= 0 || v[a] > 1) return std::pair{a, a};
  }
  for (std::size_t a = 0; a < v.size(); ++a) {
    for (std::size_t b = a + 1; b < v.size(); ++b) {
      const Rational& dab = base.d(a, b);
      if (abs(Rational(v[a] - v[b])) > dab || dab > v[a] + v[b]) return std::pair{a, b};
    }
  }
  return std::nullopt;
}

RationalMetricSpace one_point_extend(const RationalMetricSpace& space, const KatetovFunction& f,
                                     const PointId& new_id) {
  if (space.contains(new_id)) throw DomainError("point '" + new_id + "' already exists");
  if (auto bad = admissibility_violation(space, f.values)) {
    auto [a, b] = *bad;
    if (a == b) {
      throw DomainError("inadmissible Katetov function: value " + to_string(f.values[a]) + " at '" + space.id(a) +
                        "' is outside (0,1]");
    }
    throw DomainError("inadmissible Katetov function at pair {" + space.id(a) + "," + space.id(b) + "}: f = " +
                      to_string(f.values[a]) + ", " + to_string(f.values[b]) + ", d = " + to_string(space.d(a, b)));
  }
  return append_point_unchecked(space, new_id, f.values);
}

std::vector<Rational> katetov_extension(const RationalMetricSpace& space, const std::vector<std::size_t>& subset,
                                        const std::vector<Rational>& values) {
  std::vector<Rational> out(space.size(), Rational(1));
  for (std::size_t x = 0; x < space.size(); ++x) {
    for (std::size_t k = 0; k < subset.size(); ++k) {
      Rational c = values[k] + space.d(subset[k], x);
      if (c < out[x]) out[x] = c;
    }
  }
  return out;
}

}  // namespace ury
