#pragma once

#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "adafuse/error.hpp"
#include "adafuse/utf8.hpp"

namespace adafuse {

/// A candidate or prediction string. Stored as Unicode scalar values; all
/// edit operations and comparisons in this library are per scalar.
class Label {
 public:
  Label() = default;
  explicit Label(std::u32string codepoints) : cps_(std::move(codepoints)) {
    for (char32_t cp : cps_) {
      const auto v = static_cast<std::uint32_t>(cp);
      if (v > 0x10FFFF || (v >= 0xD800 && v <= 0xDFFF)) {
        throw InvalidArgument("label contains a non-scalar codepoint");
      }
    }
  }

  static Label from_utf8(std::string_view bytes) { return Label(decode_utf8(bytes)); }

  const std::u32string& codepoints() const { return cps_; }
  std::string utf8() const { return encode_utf8(cps_); }
  bool empty() const { return cps_.empty(); }
  std::size_t size() const { return cps_.size(); }

  /// Per-codepoint simple uppercase fold.
  Label upper() const { return Label(to_upper(std::u32string_view(cps_))); }

  friend bool operator==(const Label&, const Label&) = default;
  friend std::strong_ordering operator<=>(const Label& a, const Label& b) {
    return a.cps_ <=> b.cps_;
  }

 private:
  std::u32string cps_;
};

enum class CaseMode { Exact, FoldUpper };

inline std::string to_string(CaseMode mode) {
  return mode == CaseMode::Exact ? "exact" : "fold-upper";
}

inline CaseMode parse_case_mode(std::string_view text) {
  if (text == "exact") return CaseMode::Exact;
  if (text == "fold-upper") return CaseMode::FoldUpper;
  throw InvalidArgument("unknown case mode '" + std::string(text) +
                        "' (expected 'exact' or 'fold-upper')");
}

/// The outputs of all L recognizer snapshots for one sample.
class HypothesisSet {
 public:
  HypothesisSet(std::string sample_id, std::vector<Label> outputs)
      : sample_id_(std::move(sample_id)), outputs_(std::move(outputs)) {
    if (outputs_.empty()) {
      throw EmptyEnsemble("hypothesis set '" + sample_id_ + "' has no outputs");
    }
  }

  const std::string& sample_id() const { return sample_id_; }
  const std::vector<Label>& outputs() const { return outputs_; }
  std::size_t size() const { return outputs_.size(); }

 private:
  std::string sample_id_;
  std::vector<Label> outputs_;
};

inline HypothesisSet new_hypothesis_set(std::string sample_id,
                                        const std::vector<std::string>& outputs) {
  if (outputs.empty()) {
    throw EmptyEnsemble("hypothesis set '" + sample_id + "' has no outputs");
  }
  std::vector<Label> labels;
  labels.reserve(outputs.size());
  for (const auto& s : outputs) labels.push_back(Label::from_utf8(s));
  return HypothesisSet(std::move(sample_id), std::move(labels));
}

/// Finite word set with deterministic membership. Under FoldUpper both the
/// stored words and the query are folded before lookup.
class Dictionary {
 public:
  explicit Dictionary(CaseMode mode = CaseMode::Exact) : mode_(mode) {}

  Dictionary(const std::vector<Label>& words, CaseMode mode) : mode_(mode) {
    for (const auto& w : words) insert(w);
  }

  void insert(const Label& word) {
    exact_.insert(word.codepoints());
    if (mode_ == CaseMode::FoldUpper) folded_.insert(to_upper(word.codepoints()));
  }

  bool contains(const Label& word) const {
    if (mode_ == CaseMode::FoldUpper) {
      return folded_.count(to_upper(word.codepoints())) != 0;
    }
    return exact_.count(word.codepoints()) != 0;
  }

  std::size_t size() const { return exact_.size(); }
  bool empty() const { return exact_.empty(); }
  CaseMode case_mode() const { return mode_; }

  /// Raw stored words (unordered). Callers that need a stable order must
  /// sort the result themselves.
  const std::unordered_set<std::u32string>& words() const { return exact_; }

 private:
  CaseMode mode_;
  std::unordered_set<std::u32string> exact_;
  std::unordered_set<std::u32string> folded_;
};

/// Character substitution costs, cost(a, b) in [0, 1] with a zero diagonal.
/// Pairs outside the stored alphabet fall back to default_cost.
class SubstitutionCostMatrix {
 public:
  SubstitutionCostMatrix() : default_cost_(1.0) {}

  /// `cells` is row-major over the alphabet: cells[i * n + j] = cost(alphabet[i],
  /// alphabet[j]).
  SubstitutionCostMatrix(std::vector<char32_t> alphabet, std::vector<double> cells,
                         double default_cost)
      : alphabet_(std::move(alphabet)), cells_(std::move(cells)), default_cost_(default_cost) {
    const std::size_t n = alphabet_.size();
    if (cells_.size() != n * n) {
      throw InvalidArgument("cost matrix cell count does not match alphabet size");
    }
    if (!(default_cost_ >= 0.0 && default_cost_ <= 1.0)) {
      throw InvalidArgument("default_cost must lie in [0, 1]");
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (index_.count(alphabet_[i])) {
        throw InvalidArgument("cost matrix alphabet contains a duplicate character");
      }
      index_.emplace(alphabet_[i], i);
      if (cells_[i * n + i] != 0.0) {
        throw InvalidArgument("cost matrix diagonal must be zero");
      }
      for (std::size_t j = 0; j < n; ++j) {
        const double c = cells_[i * n + j];
        if (!(c >= 0.0 && c <= 1.0)) {
          throw InvalidArgument("cost matrix cell outside [0, 1]");
        }
      }
    }
  }

  /// Unit costs: every substitution between different characters costs 1.
  static SubstitutionCostMatrix unit() { return SubstitutionCostMatrix(); }

  double cost(char32_t a, char32_t b) const {
    if (a == b) return 0.0;
    const auto ia = index_.find(a);
    if (ia == index_.end()) return default_cost_;
    const auto ib = index_.find(b);
    if (ib == index_.end()) return default_cost_;
    return cells_[ia->second * alphabet_.size() + ib->second];
  }

  const std::vector<char32_t>& alphabet() const { return alphabet_; }
  const std::vector<double>& cells() const { return cells_; }
  double default_cost() const { return default_cost_; }

 private:
  std::vector<char32_t> alphabet_;
  std::unordered_map<char32_t, std::size_t> index_;
  std::vector<double> cells_;
  double default_cost_;
};

/// Piecewise-linear function over integer knot abscissae. Evaluation clamps
/// to the nearest endpoint outside the knot range; a single knot therefore
/// yields a constant function.
class FCurve {
 public:
  /// Defaults to the constant zero function.
  FCurve() : knots_{{0, 0.0}} {}

  explicit FCurve(std::vector<std::pair<int, double>> knots) : knots_(std::move(knots)) {
    if (knots_.empty()) throw InvalidArgument("F-curve needs at least one knot");
    for (std::size_t i = 0; i < knots_.size(); ++i) {
      if (!std::isfinite(knots_[i].second)) {
        throw InvalidArgument("F-curve knot value must be finite");
      }
      if (i > 0 && knots_[i].first <= knots_[i - 1].first) {
        throw InvalidArgument("F-curve knot abscissae must be strictly increasing");
      }
    }
  }

  static FCurve zeros(const std::vector<int>& abscissae) {
    std::vector<std::pair<int, double>> knots;
    knots.reserve(abscissae.size());
    for (int d : abscissae) knots.emplace_back(d, 0.0);
    return FCurve(std::move(knots));
  }

  double eval(double d) const {
    if (d <= knots_.front().first) return knots_.front().second;
    if (d >= knots_.back().first) return knots_.back().second;
    // invariant: front < d < back, so a bracketing segment exists
    std::size_t lo = 0;
    std::size_t hi = knots_.size() - 1;
    while (hi - lo > 1) {
      const std::size_t mid = lo + (hi - lo) / 2;
      if (knots_[mid].first <= d) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    const double d0 = knots_[lo].first;
    const double d1 = knots_[hi].first;
    const double v0 = knots_[lo].second;
    const double v1 = knots_[hi].second;
    if (d == d0) return v0;
    return (v0 * (d1 - d) + v1 * (d - d0)) / (d1 - d0);
  }

  const std::vector<std::pair<int, double>>& knots() const { return knots_; }

  friend bool operator==(const FCurve&, const FCurve&) = default;

 private:
  std::vector<std::pair<int, double>> knots_;
};

/// Scalar parameters of the combination rule. `theta` bounds the candidate
/// search and may be +infinity; `max_candidates` caps the candidate set fed
/// to the scorer.
struct EnsembleConfig {
  double lambda = 1.0;
  double likelihood_const = 1.0;
  double theta = std::numeric_limits<double>::infinity();
  std::size_t max_candidates = 256;
  FCurve f_curve;
  CaseMode case_mode = CaseMode::Exact;

  void validate() const {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
      throw InvalidArgument("lambda must be finite and > 0");
    }
    if (!(likelihood_const > 0.0) || !std::isfinite(likelihood_const)) {
      throw InvalidArgument("likelihood_const must be finite and > 0");
    }
    if (std::isnan(theta) || theta < 0.0) {
      throw InvalidArgument("theta must be >= 0 (or +infinity)");
    }
    if (max_candidates == 0) {
      throw InvalidArgument("max_candidates must be > 0");
    }
  }
};

/// One reference transcription.
struct LabeledSample {
  std::string sample_id;
  Label ground_truth;
};

/// Binary selection over the L snapshots. At least one bit must be set.
class PruningMask {
 public:
  explicit PruningMask(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
    if (bits_.empty()) throw InvalidArgument("pruning mask must not be empty");
    bool any = false;
    for (auto& b : bits_) {
      b = b ? 1 : 0;
      any = any || b;
    }
    if (!any) throw EmptyEnsemble("pruning mask selects no snapshots");
  }

  static PruningMask all_ones(std::size_t n) {
    return PruningMask(std::vector<std::uint8_t>(n, 1));
  }

  static PruningMask single(std::size_t n, std::size_t index) {
    std::vector<std::uint8_t> bits(n, 0);
    bits.at(index) = 1;
    return PruningMask(std::move(bits));
  }

  std::size_t size() const { return bits_.size(); }
  bool test(std::size_t i) const { return bits_[i] != 0; }

  std::size_t count() const {
    std::size_t c = 0;
    for (auto b : bits_) c += b;
    return c;
  }

  const std::vector<std::uint8_t>& bits() const { return bits_; }

  std::string to_string() const {
    std::string s;
    s.reserve(bits_.size());
    for (auto b : bits_) s.push_back(b ? '1' : '0');
    return s;
  }

  friend bool operator==(const PruningMask&, const PruningMask&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

}  // namespace adafuse

template <>
struct std::hash<adafuse::Label> {
  std::size_t operator()(const adafuse::Label& label) const {
    return std::hash<std::u32string>()(label.codepoints());
  }
};
