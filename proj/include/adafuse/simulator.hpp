#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "adafuse/error.hpp"
#include "adafuse/parallel.hpp"
#include "adafuse/rng.hpp"
#include "adafuse/types.hpp"

namespace adafuse {

/// Row-stochastic confusion table: row i is a distribution over the output
/// character given input character alphabet[i]. Rows that sum to zero fall
/// back to a uniform draw over the other characters.
struct ConfusionTable {
  std::vector<char32_t> alphabet;
  std::vector<double> rows;  // row-major, |alphabet|^2

  void validate() const {
    if (rows.size() != alphabet.size() * alphabet.size()) {
      throw InvalidArgument("confusion table shape does not match its alphabet");
    }
    for (double p : rows) {
      if (!(p >= 0.0) || !std::isfinite(p)) {
        throw InvalidArgument("confusion table entries must be finite and >= 0");
      }
    }
  }
};

/// Noisy-channel parameters. shared_noise_fraction is the probability that a
/// corruption draw comes from a per-sample stream shared by all snapshots,
/// which models correlated mistakes; 0 means fully independent snapshots.
struct ChannelModel {
  double sub_rate = 0.0;
  double ins_rate = 0.0;
  double del_rate = 0.0;
  double shared_noise_fraction = 0.0;
  std::vector<char32_t> alphabet;
  std::optional<ConfusionTable> confusion;

  void validate() const {
    for (double r : {sub_rate, ins_rate, del_rate, shared_noise_fraction}) {
      if (!(r >= 0.0 && r <= 1.0)) {
        throw InvalidArgument("channel rates must lie in [0, 1]");
      }
    }
    if (alphabet.empty()) throw InvalidArgument("channel alphabet must not be empty");
    if (confusion) confusion->validate();
  }
};

/// Per-snapshot multipliers applied to all channel rates, modeling snapshots
/// of different quality along the training trajectory.
struct TrajectoryModel {
  std::vector<double> multipliers;

  static TrajectoryModel uniform(std::size_t n, double value = 1.0) {
    return TrajectoryModel{std::vector<double>(n, value)};
  }

  /// Linear ramp from `first` to `last` inclusive.
  static TrajectoryModel linear(std::size_t n, double first, double last) {
    TrajectoryModel t;
    t.multipliers.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double s = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
      t.multipliers[i] = first + (last - first) * s;
    }
    return t;
  }

  void validate() const {
    if (multipliers.empty()) throw InvalidArgument("trajectory must not be empty");
    for (double m : multipliers) {
      if (!(m >= 0.0) || !std::isfinite(m)) {
        throw InvalidArgument("trajectory multipliers must be finite and >= 0");
      }
    }
  }
};

namespace detail {

// stream tags for derive_stream
inline constexpr std::uint64_t kSelectorStream = 1;
inline constexpr std::uint64_t kSharedStream = 2;
inline constexpr std::uint64_t kPrivateStream = 3;

inline char32_t uniform_char(std::span<const char32_t> alphabet, std::uint64_t u) {
  return alphabet[u % alphabet.size()];
}

inline char32_t uniform_char_excluding(std::span<const char32_t> alphabet, char32_t source,
                                       std::uint64_t u) {
  std::size_t others = 0;
  for (char32_t c : alphabet) {
    if (c != source) ++others;
  }
  if (others == 0) return source;
  std::uint64_t k = u % others;
  for (char32_t c : alphabet) {
    if (c == source) continue;
    if (k == 0) return c;
    --k;
  }
  return source;  // unreachable
}

inline char32_t confused_char(const ConfusionTable& table, char32_t source,
                              std::uint64_t u) {
  std::size_t row = table.alphabet.size();
  for (std::size_t i = 0; i < table.alphabet.size(); ++i) {
    if (table.alphabet[i] == source) {
      row = i;
      break;
    }
  }
  if (row == table.alphabet.size()) {
    return uniform_char_excluding(table.alphabet, source, u);
  }
  const std::size_t n = table.alphabet.size();
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) total += table.rows[row * n + j];
  if (!(total > 0.0)) return uniform_char_excluding(table.alphabet, source, u);
  const double x = static_cast<double>(u >> 11) * 0x1.0p-53 * total;
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    acc += table.rows[row * n + j];
    if (x < acc) return table.alphabet[j];
  }
  return table.alphabet[n - 1];
}

}  // namespace detail

/// Generates L noisy snapshot outputs per sample. Each source character
/// undergoes a deletion check, otherwise a substitution check; an insertion
/// check follows in either case. All draws come from streams derived from
/// (seed, sample id, snapshot index), so adding samples or snapshots never
/// perturbs existing output, and every draw slot is consumed whether or not
/// the event fires, which keeps the shared stream aligned across snapshots.
inline std::vector<HypothesisSet> generate(std::span<const LabeledSample> ground_truth,
                                           std::size_t ensemble_size,
                                           const ChannelModel& channel,
                                           const TrajectoryModel& trajectory,
                                           std::uint64_t seed, unsigned threads = 1) {
  if (ensemble_size < 1) throw InvalidArgument("ensemble size must be >= 1");
  channel.validate();
  trajectory.validate();
  if (trajectory.multipliers.size() != ensemble_size) {
    throw InvalidArgument("trajectory length must equal the ensemble size");
  }

  const auto clamp01 = [](double p) { return p < 0.0 ? 0.0 : (p > 1.0 ? 1.0 : p); };

  std::vector<HypothesisSet> result;
  result.reserve(ground_truth.size());
  for (const auto& s : ground_truth) {
    (void)s;
    result.push_back(HypothesisSet("pending", {Label()}));
  }

  parallel_for(ground_truth.size(), threads, [&](std::size_t si) {
    const LabeledSample& sample = ground_truth[si];
    const std::uint64_t id_hash = hash_bytes(sample.sample_id);
    const auto& gt = sample.ground_truth.codepoints();

    std::vector<Label> outputs;
    outputs.reserve(ensemble_size);
    for (std::size_t snap = 0; snap < ensemble_size; ++snap) {
      SplitMix64 selector(derive_stream(seed, id_hash, detail::kSelectorStream));
      SplitMix64 shared(derive_stream(seed, id_hash, detail::kSharedStream));
      SplitMix64 private_(derive_stream(seed, id_hash, detail::kPrivateStream,
                                        static_cast<std::uint64_t>(snap)));
      const auto draw = [&]() {
        const bool use_shared = selector.next_double() < channel.shared_noise_fraction;
        return use_shared ? shared.next_u64() : private_.next_u64();
      };
      const auto to_unit = [](std::uint64_t u) {
        return static_cast<double>(u >> 11) * 0x1.0p-53;
      };

      const double mult = trajectory.multipliers[snap];
      const double p_del = clamp01(channel.del_rate * mult);
      const double p_sub = clamp01(channel.sub_rate * mult);
      const double p_ins = clamp01(channel.ins_rate * mult);

      std::u32string out;
      out.reserve(gt.size() + 4);
      for (char32_t c : gt) {
        // five fixed draws per source character keep all streams position-aligned
        const std::uint64_t u_del = draw();
        const std::uint64_t u_sub = draw();
        const std::uint64_t u_sub_target = draw();
        const std::uint64_t u_ins = draw();
        const std::uint64_t u_ins_char = draw();

        if (to_unit(u_del) >= p_del) {
          if (to_unit(u_sub) < p_sub) {
            out.push_back(channel.confusion
                              ? detail::confused_char(*channel.confusion, c, u_sub_target)
                              : detail::uniform_char_excluding(channel.alphabet, c,
                                                               u_sub_target));
          } else {
            out.push_back(c);
          }
        }
        if (to_unit(u_ins) < p_ins) {
          out.push_back(detail::uniform_char(channel.alphabet, u_ins_char));
        }
      }
      outputs.push_back(Label(std::move(out)));
    }
    result[si] = HypothesisSet(sample.sample_id, std::move(outputs));
  });
  return result;
}

}  // namespace adafuse
