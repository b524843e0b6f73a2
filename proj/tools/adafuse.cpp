// adafuse command-line front end: simulate, learn-costs, fit-f, prune, fuse,
// eval. Data goes to --out (or stdout), logs go to stderr. Exit codes:
// 0 success, 1 usage error, 2 data error, 3 internal error.

#include <cstdint>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "adafuse/adafuse.hpp"

namespace {

using namespace adafuse;

double parse_theta_text(const std::string& text) {
  if (text == "inf") return std::numeric_limits<double>::infinity();
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw InvalidArgument("theta must be a number or 'inf', got '" + text + "'");
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(',', start);
    if (end == std::string::npos) end = text.size();
    const std::string tok = text.substr(start, end - start);
    if (!tok.empty()) grid.push_back(io::parse_double(tok, "--grid", 0));
    start = end + 1;
  }
  if (grid.empty()) throw InvalidArgument("--grid must list at least one value");
  return grid;
}

std::vector<char32_t> parse_alphabet(const std::string& text) {
  std::vector<char32_t> alphabet;
  std::set<char32_t> seen;
  for (char32_t c : decode_utf8(text)) {
    if (seen.insert(c).second) alphabet.push_back(c);
  }
  return alphabet;
}

std::vector<char32_t> derive_alphabet(const std::vector<LabeledSample>& gt) {
  std::set<char32_t> chars;
  for (const auto& s : gt) {
    for (char32_t c : s.ground_truth.codepoints()) chars.insert(c);
  }
  return {chars.begin(), chars.end()};
}

/// Joins hypothesis sets with references by sample id, in hypothesis order.
std::vector<std::pair<HypothesisSet, LabeledSample>> join_by_id(
    const std::vector<HypothesisSet>& hyps, const std::vector<LabeledSample>& gt) {
  std::map<std::string, const LabeledSample*> by_id;
  for (const auto& s : gt) by_id[s.sample_id] = &s;
  std::vector<std::pair<HypothesisSet, LabeledSample>> joined;
  joined.reserve(hyps.size());
  for (const auto& h : hyps) {
    const auto it = by_id.find(h.sample_id());
    if (it != by_id.end()) joined.emplace_back(h, *it->second);
  }
  if (joined.empty()) {
    throw Error("no sample ids are shared between the hypotheses and the ground truth");
  }
  if (joined.size() < hyps.size()) {
    std::cerr << "[adafuse] note: " << hyps.size() - joined.size()
              << " hypothesis sets have no ground truth and were skipped\n";
  }
  return joined;
}

/// Writes to --out when given, otherwise to stdout.
void with_output(const std::string& out_path, const std::function<void(std::ostream&)>& fn) {
  if (out_path.empty()) {
    fn(std::cout);
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw Error("cannot open '" + out_path + "' for writing");
    fn(out);
  }
}

/// Fusion-rule settings shared by fit-f, prune and fuse. Values come from
/// built-in defaults, then an optional --config file, then explicit flags.
struct FusionArgs {
  CLI::Option* config_opt = nullptr;
  CLI::Option* lambda_opt = nullptr;
  CLI::Option* likelihood_opt = nullptr;
  CLI::Option* theta_opt = nullptr;
  CLI::Option* max_candidates_opt = nullptr;
  CLI::Option* case_mode_opt = nullptr;

  std::string config_path;
  double lambda = 1.0;
  double likelihood_const = 1.0;
  std::string theta_text = "inf";
  std::size_t max_candidates = 256;
  std::string case_mode_text = "exact";

  void add_to(CLI::App& cmd) {
    config_opt = cmd.add_option("--config", config_path,
                                "JSON run configuration (flags override it)");
    lambda_opt = cmd.add_option("--lambda", lambda, "Scaling factor applied to vote weights");
    likelihood_opt = cmd.add_option("--likelihood-const", likelihood_const,
                                    "Constant model likelihood per snapshot");
    theta_opt = cmd.add_option("--theta", theta_text,
                               "Candidate distance bound (number or 'inf')");
    max_candidates_opt = cmd.add_option("--max-candidates", max_candidates,
                                        "Cap on the voting candidate set");
    case_mode_opt = cmd.add_option("--case-mode", case_mode_text,
                                   "Matching mode: exact or fold-upper");
  }

  io::RunConfig resolve() const {
    io::RunConfig cfg;
    if (config_opt->count() > 0) cfg = io::read_run_config(config_path);
    if (lambda_opt->count() > 0) cfg.lambda = lambda;
    if (likelihood_opt->count() > 0) cfg.likelihood_const = likelihood_const;
    if (theta_opt->count() > 0) cfg.theta = parse_theta_text(theta_text);
    if (max_candidates_opt->count() > 0) cfg.max_candidates = max_candidates;
    if (case_mode_opt->count() > 0) cfg.case_mode = parse_case_mode(case_mode_text);
    return cfg;
  }
};

/// Returns the flag value, a config-file path fallback, or fails with a
/// usage message.
std::string require_input(const CLI::Option* opt, const std::string& value,
                          const std::optional<std::string>& fallback, const char* name) {
  if (opt->count() > 0) return value;
  if (fallback) return *fallback;
  throw CLI::RequiredError(name);
}

int cmd_simulate(const std::string& gt_path, const std::string& out_path,
                 std::size_t snapshots, double sub_rate, double ins_rate, double del_rate,
                 double shared_fraction, const std::string& alphabet_text,
                 const std::string& trajectory_kind, double traj_first, double traj_last,
                 std::uint64_t seed, unsigned threads) {
  const auto gt = io::read_ground_truth(gt_path);
  ChannelModel channel;
  channel.sub_rate = sub_rate;
  channel.ins_rate = ins_rate;
  channel.del_rate = del_rate;
  channel.shared_noise_fraction = shared_fraction;
  channel.alphabet = alphabet_text.empty() ? derive_alphabet(gt) : parse_alphabet(alphabet_text);

  TrajectoryModel traj;
  if (trajectory_kind == "uniform") {
    traj = TrajectoryModel::uniform(snapshots, traj_first);
  } else if (trajectory_kind == "linear") {
    traj = TrajectoryModel::linear(snapshots, traj_first, traj_last);
  } else {
    throw InvalidArgument("--trajectory must be 'uniform' or 'linear'");
  }

  const auto sets = generate(gt, snapshots, channel, traj, seed, threads);
  with_output(out_path, [&](std::ostream& out) { io::write_hypotheses(out, sets); });
  std::cerr << "[adafuse] simulated " << sets.size() << " samples x " << snapshots
            << " snapshots\n";
  return 0;
}

int cmd_learn_costs(const std::string& hyps_path, const std::string& gt_path,
                    const std::string& snapshot_sel, std::uint64_t min_count,
                    double default_cost, const std::string& out_path) {
  const auto hyps = io::read_hypotheses(hyps_path);
  const auto gt = io::read_ground_truth(gt_path);
  const auto joined = join_by_id(hyps, gt);

  std::optional<std::size_t> snapshot_index;
  if (snapshot_sel != "all") {
    std::size_t idx = 0;
    try {
      idx = std::stoul(snapshot_sel);
    } catch (const std::exception&) {
      throw InvalidArgument("--snapshot must be 'all' or a snapshot index");
    }
    if (idx >= joined.front().first.size()) {
      throw Error("snapshot index " + snapshot_sel + " out of range (L=" +
                  std::to_string(joined.front().first.size()) + ")");
    }
    snapshot_index = idx;
  }

  std::vector<std::pair<Label, Label>> pairs;
  for (const auto& [hset, labeled] : joined) {
    if (snapshot_index) {
      pairs.emplace_back(hset.outputs()[*snapshot_index], labeled.ground_truth);
    } else {
      for (const auto& h : hset.outputs()) pairs.emplace_back(h, labeled.ground_truth);
    }
  }
  const auto counts = count_positional_pairs(pairs);
  const auto matrix = build_cost_matrix(counts, min_count, default_cost);
  with_output(out_path, [&](std::ostream& out) { io::write_cost_matrix(out, matrix); });
  std::cerr << "[adafuse] learned costs over " << pairs.size() << " pairs, alphabet size "
            << matrix.alphabet().size() << "\n";
  return 0;
}

PruningMask load_mask_or_all_ones(const CLI::Option* opt, const std::string& path,
                                  const std::optional<std::string>& fallback,
                                  std::size_t ensemble_size) {
  std::string resolved;
  if (opt->count() > 0) {
    resolved = path;
  } else if (fallback) {
    resolved = *fallback;
  } else {
    return PruningMask::all_ones(ensemble_size);
  }
  PruningMask mask = io::read_mask(resolved);
  if (mask.size() != ensemble_size) {
    throw MaskLengthMismatch("mask file '" + resolved + "' has " +
                             std::to_string(mask.size()) + " bits but the ensemble has " +
                             std::to_string(ensemble_size));
  }
  return mask;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive fusion of sequence-recognizer snapshot ensembles"};
  app.require_subcommand(1);
  std::function<int()> action;

  // --- simulate ------------------------------------------------------------
  auto* sim = app.add_subcommand("simulate", "Generate noisy snapshot hypotheses");
  {
    struct Args {
      std::string gt, out, alphabet, trajectory = "uniform";
      std::size_t snapshots = 15;
      double sub = 0.1, ins = 0.02, del = 0.02, shared = 0.0;
      double traj_first = 1.0, traj_last = 1.0;
      std::uint64_t seed = 1;
      unsigned threads = 0;
    };
    auto args = std::make_shared<Args>();
    sim->add_option("--gt", args->gt, "Ground-truth TSV (id, text)")->required();
    sim->add_option("--out", args->out, "Output hypotheses JSONL (default stdout)");
    sim->add_option("-L,--snapshots", args->snapshots, "Number of snapshots");
    sim->add_option("--sub-rate", args->sub, "Per-character substitution rate");
    sim->add_option("--ins-rate", args->ins, "Per-character insertion rate");
    sim->add_option("--del-rate", args->del, "Per-character deletion rate");
    sim->add_option("--shared-noise-fraction", args->shared,
                    "Fraction of corruption draws shared across snapshots");
    sim->add_option("--alphabet", args->alphabet,
                    "Channel alphabet (default: characters of the ground truth)");
    sim->add_option("--trajectory", args->trajectory, "Rate multipliers: uniform or linear");
    sim->add_option("--traj-first", args->traj_first, "Multiplier of the first snapshot");
    sim->add_option("--traj-last", args->traj_last,
                    "Multiplier of the last snapshot (linear trajectory)");
    sim->add_option("--seed", args->seed, "Random seed");
    sim->add_option("--threads", args->threads, "Worker threads (0 = auto)");
    sim->callback([args, &action] {
      action = [args] {
        return cmd_simulate(args->gt, args->out, args->snapshots, args->sub, args->ins,
                            args->del, args->shared, args->alphabet, args->trajectory,
                            args->traj_first, args->traj_last, args->seed, args->threads);
      };
    });
  }

  // --- learn-costs ----------------------------------------------------------
  auto* learn = app.add_subcommand("learn-costs",
                                   "Learn the character substitution cost matrix");
  {
    struct Args {
      std::string hyps, gt, out, snapshot = "all";
      std::uint64_t min_count = 5;
      double default_cost = 1.0;
    };
    auto args = std::make_shared<Args>();
    learn->add_option("--hyps", args->hyps, "Hypotheses JSONL")->required();
    learn->add_option("--gt", args->gt, "Ground-truth TSV")->required();
    learn->add_option("--snapshot", args->snapshot,
                      "Snapshot index to learn from, or 'all'");
    learn->add_option("--min-count", args->min_count,
                      "Minimum observations of a reference character");
    learn->add_option("--default-cost", args->default_cost,
                      "Cost for unseen character pairs");
    learn->add_option("--out", args->out, "Output cost matrix TSV (default stdout)");
    learn->callback([args, &action] {
      action = [args] {
        return cmd_learn_costs(args->hyps, args->gt, args->snapshot, args->min_count,
                               args->default_cost, args->out);
      };
    });
  }

  // --- fit-f -----------------------------------------------------------------
  auto* fit = app.add_subcommand("fit-f", "Fit the F-curve on validation data");
  {
    struct Args {
      std::string hyps, gt, dict, costs, mask, out;
      std::string grid = "-1.5,-1,-0.5,0,0.5,1,1.5";
      int knot_min = -4, knot_max = 6;
      std::size_t max_sweeps = 10;
      unsigned threads = 0;
      FusionArgs fusion;
      CLI::Option *hyps_opt, *gt_opt, *dict_opt, *costs_opt, *mask_opt;
    };
    auto args = std::make_shared<Args>();
    args->hyps_opt = fit->add_option("--hyps", args->hyps, "Hypotheses JSONL");
    args->gt_opt = fit->add_option("--gt", args->gt, "Ground-truth TSV");
    args->dict_opt = fit->add_option("--dict", args->dict, "Dictionary word list");
    args->costs_opt = fit->add_option("--costs", args->costs, "Cost matrix TSV");
    args->mask_opt = fit->add_option("--mask", args->mask, "Pruning mask file");
    fit->add_option("--knot-min", args->knot_min, "Smallest knot abscissa");
    fit->add_option("--knot-max", args->knot_max, "Largest knot abscissa");
    fit->add_option("--grid", args->grid, "Comma-separated knot value grid");
    fit->add_option("--max-sweeps", args->max_sweeps, "Coordinate-ascent sweep limit");
    fit->add_option("--out", args->out, "Output F-curve JSON (default stdout)");
    fit->add_option("--threads", args->threads, "Worker threads (0 = auto)");
    args->fusion.add_to(*fit);
    fit->callback([args, &action] {
      action = [args] {
        const io::RunConfig cfg = args->fusion.resolve();
        const auto hyps = io::read_hypotheses(
            require_input(args->hyps_opt, args->hyps, cfg.paths.hypotheses, "--hyps"));
        const auto gt = io::read_ground_truth(
            require_input(args->gt_opt, args->gt, cfg.paths.ground_truth, "--gt"));
        const auto dict = io::read_dictionary(
            require_input(args->dict_opt, args->dict, cfg.paths.dictionary, "--dict"),
            cfg.case_mode);
        const auto costs = io::read_cost_matrix(
            require_input(args->costs_opt, args->costs, cfg.paths.costs, "--costs"));
        const auto val = join_by_id(hyps, gt);
        const auto mask = load_mask_or_all_ones(args->mask_opt, args->mask, cfg.paths.mask,
                                                val.front().first.size());
        if (args->knot_min > args->knot_max) {
          throw InvalidArgument("--knot-min must not exceed --knot-max");
        }
        std::vector<int> abscissae;
        for (int d = args->knot_min; d <= args->knot_max; ++d) abscissae.push_back(d);

        FitOptions options;
        options.max_sweeps = args->max_sweeps;
        options.threads = args->threads;
        options.observer = [](std::size_t sweep, double crw) {
          std::cerr << "[adafuse] sweep " << sweep << ": validation crw = " << crw << "\n";
        };
        const FCurve curve =
            fit_f_curve(abscissae, parse_grid(args->grid), val, mask, dict, costs,
                        cfg.to_ensemble_config(), options);
        with_output(args->out, [&](std::ostream& out) { io::write_f_curve(out, curve); });
        return 0;
      };
    });
  }

  // --- prune ------------------------------------------------------------------
  auto* prune = app.add_subcommand("prune", "Select a snapshot subset with a GA");
  {
    struct Args {
      std::string hyps, gt, dict, costs, f_curve, out, trace;
      GaParams ga;
      double mutation_rate = -1.0;
      unsigned threads = 0;
      FusionArgs fusion;
      CLI::Option *hyps_opt, *gt_opt, *dict_opt, *costs_opt, *f_opt;
      CLI::Option *pop_opt, *gen_opt, *cx_opt, *mut_opt, *tour_opt, *elite_opt, *seed_opt;
    };
    auto args = std::make_shared<Args>();
    args->hyps_opt = prune->add_option("--hyps", args->hyps, "Hypotheses JSONL");
    args->gt_opt = prune->add_option("--gt", args->gt, "Ground-truth TSV");
    args->dict_opt = prune->add_option("--dict", args->dict, "Dictionary word list");
    args->costs_opt = prune->add_option("--costs", args->costs, "Cost matrix TSV");
    args->f_opt = prune->add_option("--f-curve", args->f_curve,
                                    "F-curve JSON (default: constant zero)");
    args->pop_opt = prune->add_option("--population", args->ga.population_size,
                                      "GA population size");
    args->gen_opt = prune->add_option("--generations", args->ga.generations,
                                      "GA generation count");
    args->cx_opt = prune->add_option("--crossover-rate", args->ga.crossover_rate,
                                     "Single-point crossover probability");
    args->mut_opt = prune->add_option("--mutation-rate", args->mutation_rate,
                                      "Per-bit flip probability (default 1/L)");
    args->tour_opt = prune->add_option("--tournament", args->ga.tournament_size,
                                       "Tournament size");
    args->elite_opt = prune->add_option("--elite", args->ga.elite_count,
                                        "Elite individuals kept per generation");
    args->seed_opt = prune->add_option("--seed", args->ga.seed, "Random seed");
    prune->add_option("--out", args->out, "Output mask file (default stdout)");
    prune->add_option("--trace", args->trace, "Optional GA trace CSV");
    prune->add_option("--threads", args->threads, "Worker threads (0 = auto)");
    args->fusion.add_to(*prune);
    prune->callback([args, &action] {
      action = [args] {
        const io::RunConfig cfg = args->fusion.resolve();
        const auto hyps = io::read_hypotheses(
            require_input(args->hyps_opt, args->hyps, cfg.paths.hypotheses, "--hyps"));
        const auto gt = io::read_ground_truth(
            require_input(args->gt_opt, args->gt, cfg.paths.ground_truth, "--gt"));
        const auto dict = io::read_dictionary(
            require_input(args->dict_opt, args->dict, cfg.paths.dictionary, "--dict"),
            cfg.case_mode);
        const auto costs = io::read_cost_matrix(
            require_input(args->costs_opt, args->costs, cfg.paths.costs, "--costs"));
        const auto val = join_by_id(hyps, gt);

        EnsembleConfig config = cfg.to_ensemble_config();
        if (args->f_opt->count() > 0) {
          config.f_curve = io::read_f_curve(args->f_curve);
        } else if (cfg.paths.f_curve) {
          config.f_curve = io::read_f_curve(*cfg.paths.f_curve);
        }

        GaParams ga = cfg.ga;
        if (args->pop_opt->count() > 0) ga.population_size = args->ga.population_size;
        if (args->gen_opt->count() > 0) ga.generations = args->ga.generations;
        if (args->cx_opt->count() > 0) ga.crossover_rate = args->ga.crossover_rate;
        if (args->mut_opt->count() > 0) ga.mutation_rate_per_bit = args->mutation_rate;
        if (args->tour_opt->count() > 0) ga.tournament_size = args->ga.tournament_size;
        if (args->elite_opt->count() > 0) ga.elite_count = args->ga.elite_count;
        if (args->seed_opt->count() > 0) ga.seed = args->ga.seed;

        const GaResult result = ga_prune(val.front().first.size(), val, dict, costs,
                                         config, ga, args->threads);
        with_output(args->out, [&](std::ostream& out) { io::write_mask(out, result.best_mask); });
        if (!args->trace.empty()) io::write_ga_trace_csv(args->trace, result.trace);
        std::cerr << "[adafuse] best mask " << result.best_mask.to_string()
                  << " fitness " << result.trace.generations.back().best_fitness << "\n";
        return 0;
      };
    });
  }

  // --- fuse --------------------------------------------------------------------
  auto* fuse = app.add_subcommand("fuse", "Fuse snapshot hypotheses into predictions");
  {
    struct Args {
      std::string hyps, dict, costs, f_curve, mask, out;
      bool unit_ed = false;
      bool dict_candidates = false;
      unsigned threads = 0;
      FusionArgs fusion;
      CLI::Option *hyps_opt, *dict_opt, *costs_opt, *f_opt, *mask_opt;
    };
    auto args = std::make_shared<Args>();
    args->hyps_opt = fuse->add_option("--hyps", args->hyps, "Hypotheses JSONL");
    args->dict_opt = fuse->add_option("--dict", args->dict, "Dictionary word list");
    args->costs_opt = fuse->add_option("--costs", args->costs, "Cost matrix TSV");
    args->f_opt = fuse->add_option("--f-curve", args->f_curve,
                                   "F-curve JSON (default: constant zero)");
    args->mask_opt = fuse->add_option("--mask", args->mask,
                                      "Pruning mask file (default: all snapshots)");
    fuse->add_flag("--unit-ed", args->unit_ed,
                   "Use unit-cost distances inside the candidate search");
    fuse->add_flag("--dict-candidates", args->dict_candidates,
                   "Also consider every dictionary word as a candidate");
    fuse->add_option("--out", args->out, "Output predictions TSV (default stdout)");
    fuse->add_option("--threads", args->threads, "Worker threads (0 = auto)");
    args->fusion.add_to(*fuse);
    fuse->callback([args, &action] {
      action = [args] {
        const io::RunConfig cfg = args->fusion.resolve();
        const auto hyps = io::read_hypotheses(
            require_input(args->hyps_opt, args->hyps, cfg.paths.hypotheses, "--hyps"));
        const auto dict = io::read_dictionary(
            require_input(args->dict_opt, args->dict, cfg.paths.dictionary, "--dict"),
            cfg.case_mode);
        const auto costs = io::read_cost_matrix(
            require_input(args->costs_opt, args->costs, cfg.paths.costs, "--costs"));
        EnsembleConfig config = cfg.to_ensemble_config();
        if (args->f_opt->count() > 0) {
          config.f_curve = io::read_f_curve(args->f_curve);
        } else if (cfg.paths.f_curve) {
          config.f_curve = io::read_f_curve(*cfg.paths.f_curve);
        }
        if (hyps.empty()) {
          with_output(args->out, [&](std::ostream&) {});
          return 0;
        }
        const auto mask = load_mask_or_all_ones(args->mask_opt, args->mask, cfg.paths.mask,
                                                hyps.front().size());

        const SubstitutionCostMatrix unit = SubstitutionCostMatrix::unit();
        CombineOptions options;
        options.dictionary_candidates = args->dict_candidates;
        if (args->unit_ed) options.candidate_ed = &unit;

        std::vector<io::Prediction> preds(hyps.size());
        parallel_for(hyps.size(), args->threads, [&](std::size_t i) {
          const ScoredCandidate sc = combine(hyps[i], mask, config, dict, costs, options);
          preds[i] = io::Prediction{hyps[i].sample_id(), sc.label, sc.score};
        });
        with_output(args->out, [&](std::ostream& out) { io::write_predictions(out, preds); });
        std::cerr << "[adafuse] fused " << preds.size() << " samples\n";
        return 0;
      };
    });
  }

  // --- eval ----------------------------------------------------------------------
  auto* eval = app.add_subcommand("eval", "Score predictions against ground truth");
  {
    struct Args {
      std::string pred, gt, json_out;
    };
    auto args = std::make_shared<Args>();
    eval->add_option("--pred", args->pred, "Predictions TSV (id, label[, score])")->required();
    eval->add_option("--gt", args->gt, "Ground-truth TSV")->required();
    eval->add_option("--json", args->json_out, "Also write the report as JSON");
    eval->callback([args, &action] {
      action = [args] {
        const auto preds = io::read_predictions(args->pred);
        const auto gt = io::read_ground_truth(args->gt);
        std::map<std::string, const Label*> by_id;
        for (const auto& s : gt) by_id[s.sample_id] = &s.ground_truth;
        std::vector<std::pair<Label, Label>> pairs;
        pairs.reserve(preds.size());
        for (const auto& p : preds) {
          const auto it = by_id.find(p.sample_id);
          if (it != by_id.end()) pairs.emplace_back(p.label, *it->second);
        }
        if (pairs.empty()) {
          throw EmptyInput("no sample ids are shared between predictions and ground truth");
        }
        if (pairs.size() < preds.size()) {
          std::cerr << "[adafuse] note: " << preds.size() - pairs.size()
                    << " predictions have no ground truth and were skipped\n";
        }
        const EvalReport report = evaluate(pairs);
        io::write_report_text(std::cout, report);
        if (!args->json_out.empty()) {
          std::ofstream out(args->json_out, std::ios::binary);
          if (!out) throw Error("cannot open '" + args->json_out + "' for writing");
          io::write_report_json(out, report);
        }
        return 0;
      };
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n";
    std::cerr << app.help() << "\n";
    return 1;
  }

  try {
    return action();
  } catch (const CLI::RequiredError& e) {
    std::cerr << "error: " << e.what() << "\n";
    std::cerr << "Run with --help for usage.\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}
