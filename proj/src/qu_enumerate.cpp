#include <algorithm>
#include <set>

#include "ury/metric.hpp"

namespace ury {

std::vector<Rational> rational_grid(unsigned denominator_bound) {
  std::set<Rational> values;
  for (unsigned r = 1; r <= denominator_bound; ++r) {
    for (unsigned p = 1; p <= r; ++p) {
      Rational v(p, r);
      v.canonicalize();
      values.insert(v);
    }
  }
  return {values.begin(), values.end()};
}

namespace {

/// Calls `visit` on every k-subset of {0..n-1} in lexicographic order.
template <class Visit>
void for_each_subset(std::size_t n, std::size_t k, Visit&& visit) {
  if (k > n) return;
  std::vector<std::size_t> c(k);
  for (std::size_t i = 0; i < k; ++i) c[i] = i;
  while (true) {
    visit(c);
    std::size_t i = k;
    while (i > 0 && c[i - 1] == n - k + (i - 1)) --i;
    if (i == 0) return;
    ++c[i - 1];
    for (std::size_t j = i; j < k; ++j) c[j] = c[j - 1] + 1;
  }
}

PointId fresh_id(const RationalMetricSpace& space, std::size_t& counter) {
  while (true) {
    PointId id = "u" + std::to_string(++counter);
    if (!space.contains(id)) return id;
  }
}

}  // namespace

QuApproximation qu_enumerate(const RationalMetricSpace& seed, unsigned denominator_bound, unsigned budget) {
  QuApproximation out{seed, {}};
  const std::vector<Rational> grid = rational_grid(denominator_bound);
  if (grid.empty()) return out;
  std::size_t counter = 0;
  const std::size_t max_size = std::min<std::size_t>(budget, seed.size());

  for (std::size_t size = 1; size <= max_size; ++size) {
    for_each_subset(seed.size(), size, [&](const std::vector<std::size_t>& subset) {
      // Seed indices stay valid in `out.space`: points are only appended.
      std::vector<std::size_t> digits(size, 0);
      while (true) {
        std::vector<Rational> values(size);
        for (std::size_t k = 0; k < size; ++k) values[k] = grid[digits[k]];
        bool admissible = true;
        for (std::size_t a = 0; a < size && admissible; ++a) {
          for (std::size_t b = a + 1; b < size && admissible; ++b) {
            const Rational& d = seed.d(subset[a], subset[b]);
            admissible = abs(Rational(values[a] - values[b])) <= d && d <= values[a] + values[b];
          }
        }
        if (admissible) {
          ExtensionTask task;
          for (auto s : subset) task.subset.push_back(seed.id(s));
          task.values = values;
          for (std::size_t x = 0; x < out.space.size() && task.realized_by.empty(); ++x) {
            bool match = true;
            for (std::size_t k = 0; k < size && match; ++k) match = out.space.d(x, subset[k]) == values[k];
            if (match) task.realized_by = out.space.id(x);
          }
          if (task.realized_by.empty()) {
            PointId id = fresh_id(out.space, counter);
            out.space = append_point_unchecked(out.space, id, katetov_extension(out.space, subset, values));
            task.realized_by = id;
            task.added = true;
          }
          out.certificate.push_back(std::move(task));
        }
        // Next value vector, first coordinate most significant.
        std::size_t pos = size;
        while (pos > 0 && digits[pos - 1] + 1 == grid.size()) digits[--pos] = 0;
        if (pos == 0) break;
        ++digits[pos - 1];
      }
    });
  }
  return out;
}

}  // namespace ury
