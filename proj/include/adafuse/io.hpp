#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include <json.hpp>

#include "adafuse/error.hpp"
#include "adafuse/metrics.hpp"
#include "adafuse/pruning.hpp"
#include "adafuse/types.hpp"
#include "adafuse/utf8.hpp"

namespace adafuse::io {

/// Shortest round-trip decimal form of a double.
inline std::string fmt_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view text, const std::string& path,
                           std::size_t line) {
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ParseError(path, line, "invalid number '" + std::string(text) + "'");
  }
  return value;
}

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path, 0, "cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError(path, 0, "cannot open file for writing");
  return out;
}

/// Splits into lines, tolerating CRLF and a missing final newline.
inline std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) {
      if (start < text.size()) lines.emplace_back(text.substr(start));
      break;
    }
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.emplace_back(line);
    start = end + 1;
  }
  return lines;
}

inline std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t end = line.find('\t', start);
    if (end == std::string_view::npos) {
      fields.emplace_back(line.substr(start));
      break;
    }
    fields.emplace_back(line.substr(start, end - start));
    start = end + 1;
  }
  return fields;
}

/// Escapes backslash, tab, newline and carriage return so any string fits in
/// one TSV field.
inline std::string escape_field(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (char c : raw) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

inline std::string unescape_field(std::string_view field, const std::string& path,
                                  std::size_t line) {
  std::string out;
  out.reserve(field.size());
  for (std::size_t i = 0; i < field.size(); ++i) {
    const char c = field[i];
    if (c != '\\') {
      out.push_back(c);
      continue;
    }
    if (i + 1 >= field.size()) throw ParseError(path, line, "dangling escape character");
    ++i;
    switch (field[i]) {
      case '\\': out.push_back('\\'); break;
      case 't': out.push_back('\t'); break;
      case 'n': out.push_back('\n'); break;
      case 'r': out.push_back('\r'); break;
      default:
        throw ParseError(path, line,
                         std::string("unknown escape '\\") + field[i] + "'");
    }
  }
  return out;
}

inline Label decode_label(std::string_view bytes, const std::string& path,
                          std::size_t line) {
  std::u32string cps;
  std::size_t bad = 0;
  if (!try_decode_utf8(bytes, cps, bad)) {
    throw ParseError(path, line,
                     "invalid UTF-8 at byte offset " + std::to_string(bad));
  }
  return Label(std::move(cps));
}

inline char32_t decode_single_char(std::string_view bytes, const std::string& path,
                                   std::size_t line) {
  const Label l = decode_label(bytes, path, line);
  if (l.size() != 1) {
    throw ParseError(path, line, "expected exactly one character, got '" +
                                     std::string(bytes) + "'");
  }
  return l.codepoints()[0];
}

}  // namespace detail

// ---------------------------------------------------------------------------
// hypotheses (JSON lines): {"id": "...", "hyps": ["...", ...]} per line

inline std::vector<HypothesisSet> read_hypotheses(const std::string& path) {
  const auto lines = detail::split_lines(detail::read_file(path));
  std::vector<HypothesisSet> sets;
  std::size_t expected_size = 0;
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const std::string& line = lines[ln];
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path, ln + 1, e.what());
    }
    if (!j.is_object()) throw ParseError(path, ln + 1, "expected a JSON object");
    if (!j.contains("id") || !j["id"].is_string()) {
      throw ParseError(path, ln + 1, "missing string field 'id'");
    }
    if (!j.contains("hyps") || !j["hyps"].is_array()) {
      throw ParseError(path, ln + 1, "missing array field 'hyps'");
    }
    std::vector<Label> outputs;
    outputs.reserve(j["hyps"].size());
    for (const auto& h : j["hyps"]) {
      if (!h.is_string()) throw ParseError(path, ln + 1, "'hyps' entries must be strings");
      outputs.push_back(detail::decode_label(h.get_ref<const std::string&>(), path, ln + 1));
    }
    if (outputs.empty()) {
      throw ParseError(path, ln + 1, "'hyps' must contain at least one output");
    }
    if (sets.empty()) {
      expected_size = outputs.size();
    } else if (outputs.size() != expected_size) {
      throw RaggedEnsemble(path + ":" + std::to_string(ln + 1) + ": found " +
                           std::to_string(outputs.size()) + " hypotheses, expected " +
                           std::to_string(expected_size));
    }
    sets.emplace_back(j["id"].get<std::string>(), std::move(outputs));
  }
  return sets;
}

inline void write_hypotheses(std::ostream& out, std::span<const HypothesisSet> sets) {
  for (const auto& hset : sets) {
    nlohmann::ordered_json j;
    j["id"] = hset.sample_id();
    auto& hyps = j["hyps"] = nlohmann::json::array();
    for (const auto& label : hset.outputs()) hyps.push_back(label.utf8());
    out << j.dump() << '\n';
  }
}

inline void write_hypotheses(const std::string& path, std::span<const HypothesisSet> sets) {
  auto out = detail::open_out(path);
  write_hypotheses(out, sets);
}

// ---------------------------------------------------------------------------
// dictionary: one UTF-8 word per line, blank lines skipped

inline Dictionary read_dictionary(const std::string& path, CaseMode case_mode) {
  const auto lines = detail::split_lines(detail::read_file(path));
  Dictionary dict(case_mode);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    if (lines[ln].empty()) continue;
    dict.insert(detail::decode_label(lines[ln], path, ln + 1));
  }
  return dict;
}

// ---------------------------------------------------------------------------
// ground truth (TSV): id <TAB> text, both fields escaped

inline std::vector<LabeledSample> read_ground_truth(const std::string& path) {
  const auto lines = detail::split_lines(detail::read_file(path));
  std::vector<LabeledSample> samples;
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    if (lines[ln].empty()) continue;
    const auto fields = detail::split_fields(lines[ln]);
    if (fields.size() != 2) {
      throw ParseError(path, ln + 1, "expected 2 tab-separated fields, got " +
                                         std::to_string(fields.size()));
    }
    LabeledSample s;
    s.sample_id = detail::unescape_field(fields[0], path, ln + 1);
    s.ground_truth = detail::decode_label(
        detail::unescape_field(fields[1], path, ln + 1), path, ln + 1);
    samples.push_back(std::move(s));
  }
  return samples;
}

inline void write_ground_truth(std::ostream& out, std::span<const LabeledSample> samples) {
  for (const auto& s : samples) {
    out << detail::escape_field(s.sample_id) << '\t'
        << detail::escape_field(s.ground_truth.utf8()) << '\n';
  }
}

inline void write_ground_truth(const std::string& path,
                               std::span<const LabeledSample> samples) {
  auto out = detail::open_out(path);
  write_ground_truth(out, samples);
}

// ---------------------------------------------------------------------------
// cost matrix (TSV): header row/column of alphabet characters, then one row
// per character, then a `default_cost` footer

inline void write_cost_matrix(std::ostream& out, const SubstitutionCostMatrix& m) {
  const auto& alphabet = m.alphabet();
  const std::size_t n = alphabet.size();
  for (char32_t c : alphabet) {
    std::string cell;
    append_utf8(cell, c);
    out << '\t' << detail::escape_field(cell);
  }
  out << '\n';
  for (std::size_t i = 0; i < n; ++i) {
    std::string cell;
    append_utf8(cell, alphabet[i]);
    out << detail::escape_field(cell);
    for (std::size_t j = 0; j < n; ++j) {
      out << '\t' << fmt_double(m.cells()[i * n + j]);
    }
    out << '\n';
  }
  out << "default_cost\t" << fmt_double(m.default_cost()) << '\n';
}

inline void write_cost_matrix(const std::string& path, const SubstitutionCostMatrix& m) {
  auto out = detail::open_out(path);
  write_cost_matrix(out, m);
}

inline SubstitutionCostMatrix read_cost_matrix(const std::string& path) {
  const auto lines = detail::split_lines(detail::read_file(path));
  if (lines.empty()) throw ParseError(path, 0, "empty cost matrix file");

  const auto header = detail::split_fields(lines[0]);
  if (!header[0].empty()) {
    throw ParseError(path, 1, "header must start with an empty cell");
  }
  std::vector<char32_t> alphabet;
  for (std::size_t k = 1; k < header.size(); ++k) {
    alphabet.push_back(detail::decode_single_char(
        detail::unescape_field(header[k], path, 1), path, 1));
  }
  const std::size_t n = alphabet.size();

  std::vector<double> cells(n * n, 0.0);
  if (lines.size() < n + 2) {
    throw ParseError(path, lines.size(), "truncated cost matrix");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t ln = i + 2;
    const auto fields = detail::split_fields(lines[i + 1]);
    if (fields.size() != n + 1) {
      throw ParseError(path, ln, "expected " + std::to_string(n + 1) + " fields, got " +
                                     std::to_string(fields.size()));
    }
    const char32_t row_char = detail::decode_single_char(
        detail::unescape_field(fields[0], path, ln), path, ln);
    if (row_char != alphabet[i]) {
      throw ParseError(path, ln, "row label does not match header order");
    }
    for (std::size_t j = 0; j < n; ++j) {
      cells[i * n + j] = parse_double(fields[j + 1], path, ln);
    }
  }
  const auto footer = detail::split_fields(lines[n + 1]);
  if (footer.size() != 2 || footer[0] != "default_cost") {
    throw ParseError(path, n + 2, "expected 'default_cost<TAB>value' footer");
  }
  const double default_cost = parse_double(footer[1], path, n + 2);
  for (std::size_t ln = n + 2; ln < lines.size(); ++ln) {
    if (!lines[ln].empty()) {
      throw ParseError(path, ln + 1, "unexpected content after footer");
    }
  }
  try {
    return SubstitutionCostMatrix(std::move(alphabet), std::move(cells), default_cost);
  } catch (const InvalidArgument& e) {
    throw ParseError(path, 0, e.what());
  }
}

// ---------------------------------------------------------------------------
// F-curve (JSON): [[d, v], ...]

inline void write_f_curve(std::ostream& out, const FCurve& f) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& [d, v] : f.knots()) {
    j.push_back(nlohmann::json::array({d, v}));
  }
  out << j.dump() << '\n';
}

inline void write_f_curve(const std::string& path, const FCurve& f) {
  auto out = detail::open_out(path);
  write_f_curve(out, f);
}

inline FCurve read_f_curve(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(detail::read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path, 0, e.what());
  }
  if (!j.is_array()) throw ParseError(path, 0, "expected a JSON array of [d, v] pairs");
  std::vector<std::pair<int, double>> knots;
  for (const auto& knot : j) {
    if (!knot.is_array() || knot.size() != 2 || !knot[0].is_number_integer() ||
        !knot[1].is_number()) {
      throw ParseError(path, 0, "each knot must be [integer, number]");
    }
    knots.emplace_back(knot[0].get<int>(), knot[1].get<double>());
  }
  try {
    return FCurve(std::move(knots));
  } catch (const InvalidArgument& e) {
    throw ParseError(path, 0, e.what());
  }
}

// ---------------------------------------------------------------------------
// mask: one line of '0'/'1'

inline void write_mask(std::ostream& out, const PruningMask& mask) {
  out << mask.to_string() << '\n';
}

inline void write_mask(const std::string& path, const PruningMask& mask) {
  auto out = detail::open_out(path);
  write_mask(out, mask);
}

inline PruningMask read_mask(const std::string& path) {
  const auto lines = detail::split_lines(detail::read_file(path));
  std::string bits_line;
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    if (lines[ln].empty()) continue;
    if (!bits_line.empty()) throw ParseError(path, ln + 1, "expected a single line");
    bits_line = lines[ln];
  }
  if (bits_line.empty()) throw ParseError(path, 0, "empty mask file");
  std::vector<std::uint8_t> bits;
  bits.reserve(bits_line.size());
  for (char c : bits_line) {
    if (c != '0' && c != '1') {
      throw ParseError(path, 1, std::string("invalid mask character '") + c + "'");
    }
    bits.push_back(c == '1' ? 1 : 0);
  }
  try {
    return PruningMask(std::move(bits));
  } catch (const Error& e) {
    throw ParseError(path, 1, e.what());
  }
}

// ---------------------------------------------------------------------------
// predictions (TSV): id <TAB> label [<TAB> score]

struct Prediction {
  std::string sample_id;
  Label label;
  std::optional<double> score;
};

inline void write_predictions(std::ostream& out, std::span<const Prediction> preds) {
  for (const auto& p : preds) {
    out << detail::escape_field(p.sample_id) << '\t'
        << detail::escape_field(p.label.utf8());
    if (p.score) out << '\t' << fmt_double(*p.score);
    out << '\n';
  }
}

inline void write_predictions(const std::string& path, std::span<const Prediction> preds) {
  auto out = detail::open_out(path);
  write_predictions(out, preds);
}

inline std::vector<Prediction> read_predictions(const std::string& path) {
  const auto lines = detail::split_lines(detail::read_file(path));
  std::vector<Prediction> preds;
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    if (lines[ln].empty()) continue;
    const auto fields = detail::split_fields(lines[ln]);
    if (fields.size() != 2 && fields.size() != 3) {
      throw ParseError(path, ln + 1, "expected 2 or 3 tab-separated fields");
    }
    Prediction p;
    p.sample_id = detail::unescape_field(fields[0], path, ln + 1);
    p.label = detail::decode_label(detail::unescape_field(fields[1], path, ln + 1), path,
                                   ln + 1);
    if (fields.size() == 3) p.score = parse_double(fields[2], path, ln + 1);
    preds.push_back(std::move(p));
  }
  return preds;
}

// ---------------------------------------------------------------------------
// run configuration (JSON, versioned, unknown keys rejected)

struct RunConfig {
  int version = 1;
  double lambda = 1.0;
  double likelihood_const = 1.0;
  double theta = std::numeric_limits<double>::infinity();
  std::size_t max_candidates = 256;
  CaseMode case_mode = CaseMode::Exact;
  std::optional<FCurve> f_curve;
  GaParams ga;

  struct Paths {
    std::optional<std::string> hypotheses;
    std::optional<std::string> ground_truth;
    std::optional<std::string> dictionary;
    std::optional<std::string> costs;
    std::optional<std::string> f_curve;
    std::optional<std::string> mask;
  } paths;

  EnsembleConfig to_ensemble_config() const {
    EnsembleConfig c;
    c.lambda = lambda;
    c.likelihood_const = likelihood_const;
    c.theta = theta;
    c.max_candidates = max_candidates;
    if (f_curve) c.f_curve = *f_curve;
    c.case_mode = case_mode;
    c.validate();
    return c;
  }
};

inline constexpr int kRunConfigVersion = 1;

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& j,
                                std::initializer_list<std::string_view> known,
                                const std::string& path, const char* scope) {
  for (const auto& [key, value] : j.items()) {
    (void)value;
    bool ok = false;
    for (const auto& k : known) ok = ok || key == k;
    if (!ok) {
      throw ParseError(path, 0,
                       std::string("unknown key '") + key + "' in " + scope);
    }
  }
}

inline double parse_theta(const nlohmann::json& j, const std::string& path) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
    throw ParseError(path, 0, "theta must be a number or \"inf\"");
  }
  if (!j.is_number()) throw ParseError(path, 0, "theta must be a number or \"inf\"");
  return j.get<double>();
}

}  // namespace detail

inline RunConfig read_run_config(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(detail::read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path, 0, e.what());
  }
  if (!j.is_object()) throw ParseError(path, 0, "expected a JSON object");
  detail::reject_unknown_keys(j,
                              {"version", "lambda", "likelihood_const", "theta",
                               "max_candidates", "case_mode", "f_curve", "ga", "paths"},
                              path, "run config");
  if (!j.contains("version") || !j["version"].is_number_integer()) {
    throw ParseError(path, 0, "missing integer field 'version'");
  }
  RunConfig cfg;
  cfg.version = j["version"].get<int>();
  if (cfg.version != kRunConfigVersion) {
    throw ParseError(path, 0, "unsupported config version " + std::to_string(cfg.version) +
                                  " (expected " + std::to_string(kRunConfigVersion) + ")");
  }
  try {
    if (j.contains("lambda")) cfg.lambda = j["lambda"].get<double>();
    if (j.contains("likelihood_const")) {
      cfg.likelihood_const = j["likelihood_const"].get<double>();
    }
    if (j.contains("theta")) cfg.theta = detail::parse_theta(j["theta"], path);
    if (j.contains("max_candidates")) {
      cfg.max_candidates = j["max_candidates"].get<std::size_t>();
    }
    if (j.contains("case_mode")) {
      cfg.case_mode = parse_case_mode(j["case_mode"].get<std::string>());
    }
    if (j.contains("f_curve")) {
      std::vector<std::pair<int, double>> knots;
      for (const auto& knot : j["f_curve"]) {
        if (!knot.is_array() || knot.size() != 2 || !knot[0].is_number_integer() ||
            !knot[1].is_number()) {
          throw ParseError(path, 0, "each f_curve knot must be [integer, number]");
        }
        knots.emplace_back(knot[0].get<int>(), knot[1].get<double>());
      }
      cfg.f_curve = FCurve(std::move(knots));
    }
    if (j.contains("ga")) {
      const auto& g = j["ga"];
      if (!g.is_object()) throw ParseError(path, 0, "'ga' must be an object");
      detail::reject_unknown_keys(g,
                                  {"population_size", "generations", "crossover_rate",
                                   "mutation_rate_per_bit", "tournament_size",
                                   "elite_count", "seed"},
                                  path, "'ga'");
      if (g.contains("population_size")) {
        cfg.ga.population_size = g["population_size"].get<std::size_t>();
      }
      if (g.contains("generations")) cfg.ga.generations = g["generations"].get<std::size_t>();
      if (g.contains("crossover_rate")) {
        cfg.ga.crossover_rate = g["crossover_rate"].get<double>();
      }
      if (g.contains("mutation_rate_per_bit")) {
        cfg.ga.mutation_rate_per_bit = g["mutation_rate_per_bit"].get<double>();
      }
      if (g.contains("tournament_size")) {
        cfg.ga.tournament_size = g["tournament_size"].get<std::size_t>();
      }
      if (g.contains("elite_count")) cfg.ga.elite_count = g["elite_count"].get<std::size_t>();
      if (g.contains("seed")) cfg.ga.seed = g["seed"].get<std::uint64_t>();
    }
    if (j.contains("paths")) {
      const auto& p = j["paths"];
      if (!p.is_object()) throw ParseError(path, 0, "'paths' must be an object");
      detail::reject_unknown_keys(p,
                                  {"hypotheses", "ground_truth", "dictionary", "costs",
                                   "f_curve", "mask"},
                                  path, "'paths'");
      const auto get = [&](const char* key) -> std::optional<std::string> {
        if (!p.contains(key)) return std::nullopt;
        return p[key].get<std::string>();
      };
      cfg.paths.hypotheses = get("hypotheses");
      cfg.paths.ground_truth = get("ground_truth");
      cfg.paths.dictionary = get("dictionary");
      cfg.paths.costs = get("costs");
      cfg.paths.f_curve = get("f_curve");
      cfg.paths.mask = get("mask");
    }
    cfg.to_ensemble_config();  // validates the numeric ranges
    cfg.ga.validate();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path, 0, e.what());
  } catch (const InvalidArgument& e) {
    throw ParseError(path, 0, e.what());
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// evaluation report

inline void write_report_text(std::ostream& out, const EvalReport& r) {
  char pct[32];
  out << "n_samples: " << r.n_samples << '\n';
  out << "ted: " << fmt_double(r.ted) << '\n';
  std::snprintf(pct, sizeof(pct), "%.2f", r.crw * 100.0);
  out << "crw: " << pct << "%\n";
  out << "ted_upper: " << fmt_double(r.ted_upper) << '\n';
  std::snprintf(pct, sizeof(pct), "%.2f", r.crw_upper * 100.0);
  out << "crw_upper: " << pct << "%\n";
}

inline void write_report_json(std::ostream& out, const EvalReport& r) {
  nlohmann::ordered_json j;
  j["version"] = 1;
  j["n_samples"] = r.n_samples;
  j["ted"] = r.ted;
  j["crw"] = r.crw;
  j["ted_upper"] = r.ted_upper;
  j["crw_upper"] = r.crw_upper;
  out << j.dump() << '\n';
}

// ---------------------------------------------------------------------------
// GA trace (CSV)

inline void write_ga_trace_csv(std::ostream& out, const GaTrace& trace) {
  out << "generation,best_fitness,mean_fitness,best_mask\n";
  for (std::size_t g = 0; g < trace.generations.size(); ++g) {
    const auto& row = trace.generations[g];
    out << g << ',' << fmt_double(row.best_fitness) << ',' << fmt_double(row.mean_fitness)
        << ',' << row.best_mask.to_string() << '\n';
  }
}

inline void write_ga_trace_csv(const std::string& path, const GaTrace& trace) {
  auto out = detail::open_out(path);
  write_ga_trace_csv(out, trace);
}

}  // namespace adafuse::io
