#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "adafuse/error.hpp"
#include "adafuse/fusion.hpp"
#include "adafuse/parallel.hpp"
#include "adafuse/rng.hpp"
#include "adafuse/types.hpp"

namespace adafuse {

/// Genetic-algorithm settings. Operators are the textbook set: tournament
/// selection, single-point crossover, per-bit flip mutation, elitism.
struct GaParams {
  std::size_t population_size = 32;
  std::size_t generations = 50;
  double crossover_rate = 0.9;
  /// Per-bit flip probability; defaults to 1/L when unset.
  std::optional<double> mutation_rate_per_bit;
  std::size_t tournament_size = 3;
  std::size_t elite_count = 2;
  std::uint64_t seed = 1;

  void validate() const {
    if (population_size < 2) throw InvalidArgument("population_size must be >= 2");
    if (generations < 1) throw InvalidArgument("generations must be >= 1");
    if (!(crossover_rate >= 0.0 && crossover_rate <= 1.0)) {
      throw InvalidArgument("crossover_rate must lie in [0, 1]");
    }
    if (mutation_rate_per_bit &&
        !(*mutation_rate_per_bit >= 0.0 && *mutation_rate_per_bit <= 1.0)) {
      throw InvalidArgument("mutation_rate_per_bit must lie in [0, 1]");
    }
    if (tournament_size < 1) throw InvalidArgument("tournament_size must be >= 1");
    if (elite_count < 1) throw InvalidArgument("elite_count must be >= 1");
    if (elite_count >= population_size) {
      throw InvalidArgument("elite_count must be smaller than population_size");
    }
  }
};

/// Per-generation progress record. With elitism the best-fitness sequence is
/// non-decreasing.
struct GaTrace {
  struct Generation {
    double best_fitness = 0.0;
    double mean_fitness = 0.0;
    PruningMask best_mask = PruningMask::all_ones(1);
  };
  std::vector<Generation> generations;
};

struct GaResult {
  PruningMask best_mask = PruningMask::all_ones(1);
  GaTrace trace;
};

/// Recognition rate of the pruned ensemble on the validation set: the
/// fraction of samples whose fused prediction matches the reference under
/// the configured case mode.
inline double fitness(const PruningMask& mask,
                      std::span<const std::pair<HypothesisSet, LabeledSample>> val,
                      const Dictionary& dict, const SubstitutionCostMatrix& costs,
                      const EnsembleConfig& config, unsigned threads = 1) {
  FusionCache cache(val, dict, costs, config);
  if (mask.size() != cache.ensemble_size()) {
    throw MaskLengthMismatch("mask length does not match the ensemble size");
  }
  return cache.recognition_rate(mask.bits(), config.f_curve, threads);
}

namespace detail {

inline void repair_in_place(std::vector<std::uint8_t>& bits, SplitMix64& rng) {
  for (auto b : bits) {
    if (b) return;
  }
  bits[rng.next_below(bits.size())] = 1;
}

}  // namespace detail

/// Evolves a pruning mask maximizing validation recognition rate. Fully
/// deterministic for a given seed: the population is evaluated from a
/// snapshot each generation and all random draws come from one seeded
/// stream.
inline GaResult ga_prune(std::size_t ensemble_size,
                         std::span<const std::pair<HypothesisSet, LabeledSample>> val,
                         const Dictionary& dict, const SubstitutionCostMatrix& costs,
                         const EnsembleConfig& config, const GaParams& params,
                         unsigned threads = 1) {
  if (ensemble_size < 1) throw InvalidArgument("ensemble size must be >= 1");
  params.validate();
  FusionCache cache(val, dict, costs, config);
  if (cache.ensemble_size() != ensemble_size) {
    throw MaskLengthMismatch("ensemble size does not match the validation data");
  }

  const std::size_t L = ensemble_size;
  std::map<std::vector<std::uint8_t>, double> memo;
  const auto evaluate_population =
      [&](const std::vector<std::vector<std::uint8_t>>& population) {
        std::vector<double> fit(population.size(), 0.0);
        std::vector<std::size_t> missing;
        for (std::size_t p = 0; p < population.size(); ++p) {
          const auto it = memo.find(population[p]);
          if (it != memo.end()) {
            fit[p] = it->second;
          } else {
            missing.push_back(p);
          }
        }
        // duplicates inside one generation are computed once per index; the
        // result is identical, so the memo stays consistent
        parallel_for(missing.size(), threads, [&](std::size_t k) {
          const std::size_t p = missing[k];
          fit[p] = cache.recognition_rate(population[p], config.f_curve, 1);
        });
        for (std::size_t p : missing) memo.emplace(population[p], fit[p]);
        return fit;
      };

  GaResult result;
  if (L == 1) {
    // only one valid chromosome exists
    const std::vector<std::uint8_t> bits{1};
    const double f = cache.recognition_rate(bits, config.f_curve, threads);
    result.best_mask = PruningMask(bits);
    result.trace.generations.push_back({f, f, result.best_mask});
    return result;
  }

  SplitMix64 rng(derive_stream(params.seed, std::uint64_t{0x6761}));  // "ga"
  const double mutation_rate =
      params.mutation_rate_per_bit.value_or(1.0 / static_cast<double>(L));

  std::vector<std::vector<std::uint8_t>> population(params.population_size);
  for (auto& bits : population) {
    bits.resize(L);
    for (auto& b : bits) b = rng.next_bool(0.5) ? 1 : 0;
    detail::repair_in_place(bits, rng);
  }

  std::vector<std::uint8_t> best_bits;
  double best_fitness = -1.0;

  for (std::size_t gen = 0; gen < params.generations; ++gen) {
    const std::vector<double> fit = evaluate_population(population);

    std::size_t gen_best = 0;
    double fitness_sum = 0.0;
    for (std::size_t p = 0; p < population.size(); ++p) {
      fitness_sum += fit[p];
      if (fit[p] > fit[gen_best]) gen_best = p;
    }
    if (fit[gen_best] > best_fitness) {
      best_fitness = fit[gen_best];
      best_bits = population[gen_best];
    }
    result.trace.generations.push_back(
        {best_fitness, fitness_sum / static_cast<double>(population.size()),
         PruningMask(best_bits)});

    if (gen + 1 == params.generations) break;

    // elites: highest fitness first, index as deterministic tie-break
    std::vector<std::size_t> ranked(population.size());
    std::iota(ranked.begin(), ranked.end(), std::size_t{0});
    std::stable_sort(ranked.begin(), ranked.end(),
                     [&](std::size_t a, std::size_t b) { return fit[a] > fit[b]; });

    std::vector<std::vector<std::uint8_t>> next;
    next.reserve(params.population_size);
    for (std::size_t e = 0; e < params.elite_count; ++e) {
      next.push_back(population[ranked[e]]);
    }

    const auto tournament = [&]() -> const std::vector<std::uint8_t>& {
      std::size_t winner = rng.next_below(population.size());
      for (std::size_t t = 1; t < params.tournament_size; ++t) {
        const std::size_t challenger = rng.next_below(population.size());
        if (fit[challenger] > fit[winner]) winner = challenger;
      }
      return population[winner];
    };

    while (next.size() < params.population_size) {
      const std::vector<std::uint8_t>& p1 = tournament();
      const std::vector<std::uint8_t>& p2 = tournament();
      std::vector<std::uint8_t> child = p1;
      if (rng.next_bool(params.crossover_rate)) {
        const std::size_t point = 1 + rng.next_below(L - 1);
        for (std::size_t i = point; i < L; ++i) child[i] = p2[i];
      }
      for (std::size_t i = 0; i < L; ++i) {
        if (rng.next_bool(mutation_rate)) child[i] ^= 1;
      }
      detail::repair_in_place(child, rng);
      next.push_back(std::move(child));
    }
    population = std::move(next);
  }

  result.best_mask = PruningMask(best_bits);
  return result;
}

}  // namespace adafuse
