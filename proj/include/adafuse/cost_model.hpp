#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "adafuse/error.hpp"
#include "adafuse/types.hpp"

namespace adafuse {

/// Frequencies of (reference character, hypothesis character) pairs observed
/// at the same string position. Keys are ordered so the derived alphabet is
/// deterministic.
struct AlignedPairCounts {
  // counts[{b, a}]: reference character b was recognized as a.
  std::map<std::pair<char32_t, char32_t>, std::uint64_t> counts;
  std::map<char32_t, std::uint64_t> totals;
};

/// Counts characters at matching positions of each (hypothesis, reference)
/// pair. Positions past the shorter string are ignored.
inline AlignedPairCounts count_positional_pairs(
    std::span<const std::pair<Label, Label>> pairs) {
  AlignedPairCounts counts;
  for (const auto& [hyp, ref] : pairs) {
    const auto& h = hyp.codepoints();
    const auto& r = ref.codepoints();
    const std::size_t n = std::min(h.size(), r.size());
    for (std::size_t k = 0; k < n; ++k) {
      ++counts.counts[{r[k], h[k]}];
      ++counts.totals[r[k]];
    }
  }
  return counts;
}

/// Turns pair frequencies into substitution costs:
///   cost(a, b) = 1 - counts[(b, a)] / totals[b]
/// for every alphabet character a, whenever b was observed at least
/// max(min_count, 1) times; otherwise the column falls back to default_cost.
/// The diagonal is forced to zero.
inline SubstitutionCostMatrix build_cost_matrix(const AlignedPairCounts& counts,
                                                std::uint64_t min_count,
                                                double default_cost) {
  if (!(default_cost >= 0.0 && default_cost <= 1.0)) {
    throw InvalidArgument("default_cost must lie in [0, 1]");
  }
  std::vector<char32_t> alphabet;
  for (const auto& [key, n] : counts.counts) {
    (void)n;
    alphabet.push_back(key.first);
    alphabet.push_back(key.second);
  }
  std::sort(alphabet.begin(), alphabet.end());
  alphabet.erase(std::unique(alphabet.begin(), alphabet.end()), alphabet.end());

  const std::size_t n = alphabet.size();
  std::vector<double> cells(n * n, default_cost);
  const std::uint64_t threshold = std::max<std::uint64_t>(min_count, 1);
  for (std::size_t bi = 0; bi < n; ++bi) {
    const char32_t b = alphabet[bi];
    const auto it = counts.totals.find(b);
    const std::uint64_t total = it == counts.totals.end() ? 0 : it->second;
    if (total < threshold) continue;
    for (std::size_t ai = 0; ai < n; ++ai) {
      const char32_t a = alphabet[ai];
      const auto cit = counts.counts.find({b, a});
      const std::uint64_t c = cit == counts.counts.end() ? 0 : cit->second;
      cells[ai * n + bi] = 1.0 - static_cast<double>(c) / static_cast<double>(total);
    }
  }
  for (std::size_t i = 0; i < n; ++i) cells[i * n + i] = 0.0;
  return SubstitutionCostMatrix(std::move(alphabet), std::move(cells), default_cost);
}

/// Cost Levenshtein Distance: minimum-cost edit script turning `a` into `b`
/// where substituting a_i by b_j costs costs.cost(a_i, b_j) and every
/// insertion or deletion costs indel_cost.
inline double cld(const Label& a, const Label& b, const SubstitutionCostMatrix& costs,
                  double indel_cost = 1.0) {
  if (!(indel_cost > 0.0)) throw InvalidArgument("indel_cost must be > 0");
  const auto& sa = a.codepoints();
  const auto& sb = b.codepoints();
  const std::size_t n = sa.size();
  const std::size_t m = sb.size();
  // Base cells accumulate indel costs one edit at a time so every cell value
  // is the fold of its edit script in script order.
  std::vector<double> prev(m + 1), curr(m + 1);
  prev[0] = 0.0;
  for (std::size_t j = 1; j <= m; ++j) prev[j] = prev[j - 1] + indel_cost;
  for (std::size_t i = 1; i <= n; ++i) {
    curr[0] = prev[0] + indel_cost;
    for (std::size_t j = 1; j <= m; ++j) {
      const double del = prev[j] + indel_cost;
      const double ins = curr[j - 1] + indel_cost;
      const double sub = prev[j - 1] + costs.cost(sa[i - 1], sb[j - 1]);
      curr[j] = std::min(std::min(del, ins), sub);
    }
    std::swap(prev, curr);
  }
  return prev[m];
}

}  // namespace adafuse
