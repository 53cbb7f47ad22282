#include <set>
#include <sstream>

#include "text.hpp"
#include "ury/metric.hpp"

namespace ury {

std::size_t parse_metric_block(const std::vector<std::string>& lines, std::size_t begin, RationalMetricSpace& out) {
  std::size_t i = begin;
  while (i < lines.size() && lines[i].empty()) ++i;
  if (i >= lines.size() || !text::starts_with(lines[i], "points:")) {
    throw ParseError("expected 'points:' header", 0, i + 1);
  }
  DistanceTable table;
  table.points = text::tokens(std::string_view(lines[i]).substr(7));
  const std::size_t n = table.points.size();
  std::map<PointId, std::size_t> index;
  for (std::size_t k = 0; k < n; ++k) {
    if (!index.emplace(table.points[k], k).second) {
      throw ParseError("duplicate point '" + table.points[k] + "'", 0, i + 1);
    }
  }
  table.dist.assign(n, std::vector<Rational>(n, Rational(0)));
  std::vector<std::vector<bool>> seen(n, std::vector<bool>(n, false));
  ++i;
  for (; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto tok = text::tokens(lines[i]);
    if (tok[0] != "d") break;
    if (tok.size() != 4) throw ParseError("expected 'd p q num/den'", 0, i + 1);
    auto a = index.find(tok[1]), b = index.find(tok[2]);
    if (a == index.end() || b == index.end()) {
      throw ParseError("unknown point in '" + lines[i] + "'", 0, i + 1);
    }
    if (a->second == b->second) throw ParseError("distance of a point to itself is implicit", 0, i + 1);
    if (seen[a->second][b->second]) throw ParseError("pair listed twice: " + lines[i], 0, i + 1);
    Rational v;
    try {
      v = parse_rational(tok[3]);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), 0, i + 1);
    }
    table.dist[a->second][b->second] = table.dist[b->second][a->second] = v;
    seen[a->second][b->second] = seen[b->second][a->second] = true;
  }
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = x + 1; y < n; ++y) {
      if (!seen[x][y]) {
        throw ParseError("missing distance for pair " + table.points[x] + " " + table.points[y], 0, begin + 1);
      }
    }
  }
  out = RationalMetricSpace::from_table(table);
  return i;
}

RationalMetricSpace parse_metric_space(const std::string& source) {
  auto lines = text::logical_lines(source);
  RationalMetricSpace space;
  std::size_t end = parse_metric_block(lines, 0, space);
  for (; end < lines.size(); ++end) {
    if (!lines[end].empty()) throw ParseError("unexpected line '" + lines[end] + "'", 0, end + 1);
  }
  return space;
}

std::string format_metric_space(const RationalMetricSpace& space) {
  std::ostringstream out;
  out << "points:";
  for (const auto& p : space.points()) out << ' ' << p;
  out << '\n';
  for (std::size_t i = 0; i < space.size(); ++i) {
    for (std::size_t j = i + 1; j < space.size(); ++j) {
      out << "d " << space.id(i) << ' ' << space.id(j) << ' ' << to_string(space.d(i, j)) << '\n';
    }
  }
  return out.str();
}

}  // namespace ury
