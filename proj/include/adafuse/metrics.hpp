#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "adafuse/error.hpp"
#include "adafuse/types.hpp"

namespace adafuse {

/// Classical unit-cost Levenshtein distance over codepoints.
inline std::uint64_t levenshtein(const std::u32string& a, const std::u32string& b) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  std::vector<std::uint64_t> prev(m + 1), curr(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    curr[0] = i;
    for (std::size_t j = 1; j <= m; ++j) {
      const std::uint64_t del = prev[j] + 1;
      const std::uint64_t ins = curr[j - 1] + 1;
      const std::uint64_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      curr[j] = std::min(std::min(del, ins), sub);
    }
    std::swap(prev, curr);
  }
  return prev[m];
}

inline std::uint64_t levenshtein(const Label& a, const Label& b) {
  return levenshtein(a.codepoints(), b.codepoints());
}

/// Total edit distance and word recognition rate, case-sensitive and
/// uppercase-folded. Edit distances always use unit costs; learned
/// substitution costs are a fusion-internal quantity and never enter
/// evaluation.
struct EvalReport {
  double ted = 0.0;
  double crw = 0.0;
  double ted_upper = 0.0;
  double crw_upper = 0.0;
  std::size_t n_samples = 0;
};

inline EvalReport evaluate(std::span<const std::pair<Label, Label>> pairs) {
  if (pairs.empty()) throw EmptyInput("evaluate requires at least one (prediction, reference) pair");
  std::uint64_t ted = 0;
  std::uint64_t ted_upper = 0;
  std::size_t correct = 0;
  std::size_t correct_upper = 0;
  for (const auto& [pred, ref] : pairs) {
    ted += levenshtein(pred, ref);
    if (pred == ref) ++correct;
    const Label pred_up = pred.upper();
    const Label ref_up = ref.upper();
    ted_upper += levenshtein(pred_up, ref_up);
    if (pred_up == ref_up) ++correct_upper;
  }
  EvalReport report;
  report.n_samples = pairs.size();
  report.ted = static_cast<double>(ted);
  report.ted_upper = static_cast<double>(ted_upper);
  report.crw = static_cast<double>(correct) / static_cast<double>(pairs.size());
  report.crw_upper = static_cast<double>(correct_upper) / static_cast<double>(pairs.size());
  return report;
}

}  // namespace adafuse
