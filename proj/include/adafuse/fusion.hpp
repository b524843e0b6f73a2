#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "adafuse/cost_model.hpp"
#include "adafuse/error.hpp"
#include "adafuse/metrics.hpp"
#include "adafuse/parallel.hpp"
#include "adafuse/types.hpp"

namespace adafuse {

enum class Provenance { HypothesisOutput, DictionaryNeighbor };

/// A candidate label with its (scaled) ensemble score.
struct ScoredCandidate {
  Label label;
  double score = 0.0;
  Provenance provenance = Provenance::HypothesisOutput;
};

/// Parameters of the voting-candidate search. `dictionary_candidates`
/// extends the initial candidate pool with every dictionary word; it is off
/// by default, which restricts the pool to the hypothesis outputs.
struct CandidateParams {
  double theta = std::numeric_limits<double>::infinity();
  std::size_t max_candidates = 256;
  bool dictionary_candidates = false;
};

/// Dictionary indicator U(y): 1 iff y is a dictionary word under the
/// dictionary's case mode.
inline int u_indicator(const Label& y, const Dictionary& dict) {
  return dict.contains(y) ? 1 : 0;
}

/// Distance weight V(y, h): the F-curve evaluated at -CLD(y, h) when h is a
/// dictionary word (y and h compete for the same slot) and at +CLD(y, h)
/// otherwise.
inline double v_weight(const Label& y, const Label& h, const Dictionary& dict,
                       const SubstitutionCostMatrix& costs, const FCurve& f) {
  const double d = cld(y, h, costs);
  return dict.contains(h) ? f.eval(-d) : f.eval(d);
}

/// Per-hypothesis vote weight W(y, h) = lambda * (I(y == h) + U(y) * V(y, h)).
/// The indicator uses exact codepoint equality regardless of case mode.
inline double w_weight(const Label& y, const Label& h, const Dictionary& dict,
                       const SubstitutionCostMatrix& costs, const FCurve& f,
                       double lambda) {
  if (!(lambda > 0.0)) throw InvalidArgument("lambda must be > 0");
  const double indicator = (y == h) ? 1.0 : 0.0;
  const double uv = u_indicator(y, dict) ? v_weight(y, h, dict, costs, f) : 0.0;
  return lambda * (indicator + uv);
}

namespace detail {

struct CandidateInfo {
  std::size_t frequency = 0;  // occurrences among the hypothesis outputs
};

/// Core of the voting-candidate search over an explicit output list.
///
/// A candidate survives when some non-empty subset of hypotheses, pairwise
/// within 2*theta, lies entirely within theta of it. Any single hypothesis
/// is such a subset on its own, so survival reduces to the nearest
/// hypothesis being within theta.
inline std::vector<Label> candidate_labels(std::span<const Label> outputs,
                                           const Dictionary& dict,
                                           const SubstitutionCostMatrix& ed_costs,
                                           const CandidateParams& params,
                                           std::span<const Label> extra) {
  std::map<Label, CandidateInfo> pool;
  for (const Label& h : outputs) ++pool[h].frequency;
  for (const Label& y : extra) pool.try_emplace(y);
  if (params.dictionary_candidates) {
    for (const auto& cps : dict.words()) pool.try_emplace(Label(cps));
  }

  std::vector<std::pair<Label, std::size_t>> kept;
  kept.reserve(pool.size());
  const bool unbounded = std::isinf(params.theta);
  for (auto& [y, info] : pool) {
    bool keep = unbounded || info.frequency > 0;
    if (!keep) {
      for (const Label& h : outputs) {
        if (cld(y, h, ed_costs) <= params.theta) {
          keep = true;
          break;
        }
      }
    }
    if (keep) kept.emplace_back(y, info.frequency);
  }
  // map iteration is lexicographic, so a stable sort by frequency yields the
  // (frequency desc, label asc) truncation order.
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (kept.size() > params.max_candidates) kept.resize(params.max_candidates);

  std::vector<Label> result;
  result.reserve(kept.size());
  for (auto& [y, freq] : kept) result.push_back(std::move(y));
  return result;
}

}  // namespace detail

/// Voting candidates for a hypothesis set (all snapshots).
inline std::vector<Label> generate_candidates(const HypothesisSet& hset,
                                              const Dictionary& dict,
                                              const SubstitutionCostMatrix& costs,
                                              const CandidateParams& params,
                                              std::span<const Label> extra = {}) {
  return detail::candidate_labels(hset.outputs(), dict, costs, params, extra);
}

/// Unscaled vote total used for ranking. Scaling factors are applied only to
/// reported scores, never to the ranking, so the selected label is invariant
/// under any positive lambda or likelihood constant.
inline double raw_vote_sum(const Label& y, std::span<const Label> outputs,
                           const std::vector<std::uint8_t>& mask_bits,
                           const Dictionary& dict, const SubstitutionCostMatrix& costs,
                           const FCurve& f) {
  const bool in_dict = dict.contains(y);
  double sum = 0.0;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    if (!mask_bits[i]) continue;
    const Label& h = outputs[i];
    double term = (y == h) ? 1.0 : 0.0;
    if (in_dict) {
      const double d = cld(y, h, costs);
      term += dict.contains(h) ? f.eval(-d) : f.eval(d);
    }
    sum += term;
  }
  return sum;
}

/// Score of candidate y over the retained snapshots:
///   sum_i W(y, h_i) * likelihood_const.
inline double score_candidate(const Label& y, const HypothesisSet& hset,
                              const PruningMask& mask, const EnsembleConfig& config,
                              const Dictionary& dict, const SubstitutionCostMatrix& costs) {
  if (mask.size() != hset.size()) {
    throw MaskLengthMismatch("mask has " + std::to_string(mask.size()) +
                             " bits but the ensemble has " + std::to_string(hset.size()) +
                             " snapshots");
  }
  config.validate();
  const double raw =
      raw_vote_sum(y, hset.outputs(), mask.bits(), dict, costs, config.f_curve);
  return (raw * config.lambda) * config.likelihood_const;
}

struct CombineOptions {
  /// Distance used inside the candidate search; defaults to the same learned
  /// costs used by V.
  const SubstitutionCostMatrix* candidate_ed = nullptr;
  /// Extends the candidate pool with every dictionary word (full search).
  bool dictionary_candidates = false;
};

namespace detail {

struct RankEntry {
  const Label* label;
  double raw;
  bool in_dict;
  std::size_t frequency;
};

/// Deterministic winner selection: higher raw score, then dictionary member,
/// then higher frequency among the retained outputs, then lexicographically
/// smallest label.
inline bool ranks_better(const RankEntry& a, const RankEntry& b) {
  if (a.raw != b.raw) return a.raw > b.raw;
  if (a.in_dict != b.in_dict) return a.in_dict;
  if (a.frequency != b.frequency) return a.frequency > b.frequency;
  return *a.label < *b.label;
}

}  // namespace detail

/// The combination rule: generates voting candidates over the retained
/// snapshots, scores each, and returns the best candidate.
inline ScoredCandidate combine(const HypothesisSet& hset, const PruningMask& mask,
                               const EnsembleConfig& config, const Dictionary& dict,
                               const SubstitutionCostMatrix& costs,
                               const CombineOptions& options = {}) {
  if (mask.size() != hset.size()) {
    throw MaskLengthMismatch("mask has " + std::to_string(mask.size()) +
                             " bits but the ensemble has " + std::to_string(hset.size()) +
                             " snapshots");
  }
  config.validate();
  if (mask.count() == 0) throw EmptyEnsemble("pruning mask selects no snapshots");

  std::vector<Label> retained;
  retained.reserve(mask.count());
  for (std::size_t i = 0; i < hset.size(); ++i) {
    if (mask.test(i)) retained.push_back(hset.outputs()[i]);
  }

  const SubstitutionCostMatrix& ed =
      options.candidate_ed != nullptr ? *options.candidate_ed : costs;
  CandidateParams params;
  params.theta = config.theta;
  params.max_candidates = config.max_candidates;
  params.dictionary_candidates = options.dictionary_candidates;
  const std::vector<Label> candidates =
      detail::candidate_labels(retained, dict, ed, params, {});

  const std::vector<std::uint8_t> full_mask(retained.size(), 1);
  bool have_best = false;
  detail::RankEntry best{};
  for (const Label& y : candidates) {
    detail::RankEntry entry;
    entry.label = &y;
    entry.raw = raw_vote_sum(y, retained, full_mask, dict, costs, config.f_curve);
    entry.in_dict = dict.contains(y);
    entry.frequency = static_cast<std::size_t>(
        std::count(retained.begin(), retained.end(), y));
    if (!have_best || detail::ranks_better(entry, best)) {
      best = entry;
      have_best = true;
    }
  }
  // candidates is never empty: each retained output is its own candidate
  ScoredCandidate result;
  result.label = *best.label;
  result.score = (best.raw * config.lambda) * config.likelihood_const;
  result.provenance = best.frequency > 0 ? Provenance::HypothesisOutput
                                         : Provenance::DictionaryNeighbor;
  return result;
}

/// Precomputed per-sample vote tables for repeated fusion over the same
/// validation data. All distances and dictionary lookups are resolved once;
/// evaluating a mask or a trial F-curve then reduces to summing cached terms
/// in the same order as combine(), so predictions agree with combine()
/// bit for bit.
class FusionCache {
 public:
  FusionCache(std::span<const std::pair<HypothesisSet, LabeledSample>> val,
              const Dictionary& dict, const SubstitutionCostMatrix& costs,
              const EnsembleConfig& config)
      : max_candidates_(config.max_candidates), case_mode_(config.case_mode) {
    config.validate();
    if (val.empty()) throw EmptyInput("validation set is empty");
    ensemble_size_ = val.front().first.size();
    samples_.reserve(val.size());
    for (const auto& [hset, labeled] : val) {
      if (hset.size() != ensemble_size_) {
        throw RaggedEnsemble("hypothesis set '" + hset.sample_id() +
                             "' has L=" + std::to_string(hset.size()) + ", expected " +
                             std::to_string(ensemble_size_));
      }
      samples_.push_back(build_sample(hset, labeled, dict, costs));
    }
  }

  std::size_t ensemble_size() const { return ensemble_size_; }
  std::size_t sample_count() const { return samples_.size(); }

  /// Fused prediction for one sample under the given mask and F-curve.
  const Label& predict(std::size_t sample, const std::vector<std::uint8_t>& mask_bits,
                       const FCurve& f) const {
    const SampleCache& sc = samples_[sample];
    // candidate order: frequency under the mask desc, then lexicographic
    // (candidates are stored lexicographically sorted)
    thread_local std::vector<std::pair<std::size_t, std::size_t>> order;
    order.clear();
    for (std::size_t c = 0; c < sc.candidates.size(); ++c) {
      std::size_t freq = 0;
      for (std::size_t i = 0; i < ensemble_size_; ++i) {
        if (mask_bits[i] && sc.candidates[c].exact[i]) ++freq;
      }
      if (freq > 0) order.emplace_back(c, freq);
    }
    std::stable_sort(order.begin(), order.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    if (order.size() > max_candidates_) order.resize(max_candidates_);

    bool have_best = false;
    detail::RankEntry best{};
    std::size_t best_c = 0;
    for (const auto& [c, freq] : order) {
      const CandidateCache& cand = sc.candidates[c];
      double raw = 0.0;
      for (std::size_t i = 0; i < ensemble_size_; ++i) {
        if (!mask_bits[i]) continue;
        double term = cand.exact[i] ? 1.0 : 0.0;
        if (cand.in_dict) term += f.eval(cand.signed_cld[i]);
        raw += term;
      }
      detail::RankEntry entry{&cand.label, raw, cand.in_dict, freq};
      if (!have_best || detail::ranks_better(entry, best)) {
        best = entry;
        best_c = c;
        have_best = true;
      }
    }
    const CandidateCache& winner = sc.candidates[best_c];
    return case_mode_ == CaseMode::FoldUpper ? winner.label_upper : winner.label;
  }

  /// Number of validation samples whose fused prediction matches the
  /// reference under the configured case mode.
  std::size_t match_count(const std::vector<std::uint8_t>& mask_bits, const FCurve& f,
                          unsigned threads = 1) const {
    std::vector<std::uint8_t> hit(samples_.size(), 0);
    parallel_for(samples_.size(), threads, [&](std::size_t s) {
      hit[s] = (predict(s, mask_bits, f) == samples_[s].reference) ? 1 : 0;
    });
    std::size_t total = 0;
    for (auto h : hit) total += h;
    return total;
  }

  double recognition_rate(const std::vector<std::uint8_t>& mask_bits, const FCurve& f,
                          unsigned threads = 1) const {
    return static_cast<double>(match_count(mask_bits, f, threads)) /
           static_cast<double>(samples_.size());
  }

 private:
  struct CandidateCache {
    Label label;
    Label label_upper;
    bool in_dict = false;
    std::vector<std::uint8_t> exact;   // exact[i]: output i equals this label
    std::vector<double> signed_cld;    // -CLD when output i is a dictionary word
  };

  struct SampleCache {
    std::vector<CandidateCache> candidates;  // lexicographically sorted
    Label reference;                         // folded per case mode
  };

  SampleCache build_sample(const HypothesisSet& hset, const LabeledSample& labeled,
                           const Dictionary& dict, const SubstitutionCostMatrix& costs) {
    SampleCache sc;
    std::map<Label, std::monostate> distinct;
    for (const Label& h : hset.outputs()) distinct.try_emplace(h);
    sc.candidates.reserve(distinct.size());
    for (const auto& [y, unused] : distinct) {
      (void)unused;
      CandidateCache cand;
      cand.label = y;
      cand.label_upper = y.upper();
      cand.in_dict = dict.contains(y);
      cand.exact.resize(ensemble_size_);
      cand.signed_cld.resize(ensemble_size_);
      for (std::size_t i = 0; i < ensemble_size_; ++i) {
        const Label& h = hset.outputs()[i];
        cand.exact[i] = (y == h) ? 1 : 0;
        if (cand.in_dict) {
          const double d = cld(y, h, costs);
          cand.signed_cld[i] = dict.contains(h) ? -d : d;
        }
      }
      sc.candidates.push_back(std::move(cand));
    }
    sc.reference = case_mode_ == CaseMode::FoldUpper ? labeled.ground_truth.upper()
                                                     : labeled.ground_truth;
    return sc;
  }

  std::size_t ensemble_size_ = 0;
  std::size_t max_candidates_;
  CaseMode case_mode_;
  std::vector<SampleCache> samples_;
};

struct FitOptions {
  std::size_t max_sweeps = 10;
  unsigned threads = 1;
  /// Called after each completed sweep with the sweep index (1-based) and
  /// the validation recognition rate reached so far.
  std::function<void(std::size_t, double)> observer;
};

/// Fits F-curve knot values by coordinate ascent on the validation
/// recognition rate. Starting from all zeros, each sweep revisits every knot
/// and assigns it the grid value with the highest recognition rate, breaking
/// ties toward the smaller absolute value (then the smaller value). Stops
/// after a sweep that changes nothing, or after max_sweeps.
inline FCurve fit_f_curve(const std::vector<int>& knot_abscissae,
                          const std::vector<double>& search_grid,
                          std::span<const std::pair<HypothesisSet, LabeledSample>> val,
                          const PruningMask& mask, const Dictionary& dict,
                          const SubstitutionCostMatrix& costs,
                          const EnsembleConfig& config_base, const FitOptions& options = {}) {
  if (knot_abscissae.empty()) throw InvalidArgument("knot abscissae must not be empty");
  if (search_grid.empty()) throw InvalidArgument("search grid must not be empty");
  for (double v : search_grid) {
    if (!std::isfinite(v)) throw InvalidArgument("search grid values must be finite");
  }
  FCurve::zeros(knot_abscissae);  // validates strictly increasing abscissae

  FusionCache cache(val, dict, costs, config_base);
  if (mask.size() != cache.ensemble_size()) {
    throw MaskLengthMismatch("mask length does not match the ensemble size");
  }
  const std::vector<std::uint8_t>& bits = mask.bits();

  std::vector<double> values(knot_abscissae.size(), 0.0);
  const auto make_curve = [&](const std::vector<double>& vals) {
    std::vector<std::pair<int, double>> knots;
    knots.reserve(vals.size());
    for (std::size_t k = 0; k < vals.size(); ++k) {
      knots.emplace_back(knot_abscissae[k], vals[k]);
    }
    return FCurve(std::move(knots));
  };

  for (std::size_t sweep = 1; sweep <= options.max_sweeps; ++sweep) {
    bool changed = false;
    for (std::size_t k = 0; k < values.size(); ++k) {
      std::size_t best_matches = 0;
      double best_value = 0.0;
      bool have_best = false;
      std::vector<double> trial = values;
      for (double v : search_grid) {
        trial[k] = v;
        const std::size_t m = cache.match_count(bits, make_curve(trial), options.threads);
        const bool better =
            !have_best || m > best_matches ||
            (m == best_matches && (std::abs(v) < std::abs(best_value) ||
                                   (std::abs(v) == std::abs(best_value) && v < best_value)));
        if (better) {
          best_matches = m;
          best_value = v;
          have_best = true;
        }
      }
      if (values[k] != best_value) {
        values[k] = best_value;
        changed = true;
      }
    }
    if (options.observer) {
      options.observer(sweep, cache.recognition_rate(bits, make_curve(values),
                                                     options.threads));
    }
    if (!changed) break;
  }
  return make_curve(values);
}

}  // namespace adafuse
