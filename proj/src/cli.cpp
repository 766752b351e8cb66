#include "pivot/cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "pivot/analysis.hpp"
#include "pivot/lexicon_pivot.hpp"
#include "pivot/pruning.hpp"
#include "pivot/table_model.hpp"
#include "pivot/temp_file.hpp"
#include "pivot/triangulation.hpp"

namespace pivot::cli {

namespace {

constexpr const char* kProgram = "pivot-smt";

struct GlobalOptions {
  std::string memory_budget = "1G";
  std::string temp_dir;
  std::string report;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
};

/// An input stream for a path, or stdin for "-".
class Input {
 public:
  explicit Input(const std::string& path) : path_(path) {
    if (path == "-") return;
    file_.open(path, std::ios::binary);
    if (!file_) throw std::runtime_error("cannot open " + path);
  }
  std::istream& stream() { return path_ == "-" ? std::cin : file_; }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ifstream file_;
};

template <class Parse>
auto load(const std::string& path, Parse&& parse) {
  Input in(path);
  try {
    return parse(in.stream());
  } catch (const ParseError& e) {
    throw e.with_source(path);
  }
}

PhraseTable load_table(const std::string& path) {
  return load(path, [](std::istream& in) { return parse_phrase_table(in); });
}

/// Sends a report to --report when given, otherwise to the diagnostic stream.
class ReportSink {
 public:
  explicit ReportSink(const std::string& path) {
    if (!path.empty()) file_ = std::make_unique<OutputFile>(path);
  }
  void write(const std::string& record) {
    if (file_) file_->stream() << record;
    else std::cerr << record;
  }
  void commit() {
    if (file_) file_->commit();
  }

 private:
  std::unique_ptr<OutputFile> file_;
};

std::string with_newline(std::string s) {
  if (s.empty() || s.back() != '\n') s += '\n';
  return s;
}

// --- subcommands -----------------------------------------------------------

struct TriangulateArgs {
  std::string src_pvt, pvt_tgt, out, counts;
};

int cmd_triangulate(const GlobalOptions& g, const TriangulateArgs& a) {
  TriangulationOptions options;
  options.memory_budget = parse_memory_budget(g.memory_budget);
  options.temp_dir = g.temp_dir;
  options.threads = g.threads;

  std::string counts_path = a.counts;
  if (counts_path.empty() && a.out != "-") counts_path = a.out + ".counts";

  Input left_in(a.src_pvt), right_in(a.pvt_tgt);
  PhraseTableReader left_reader(left_in.stream(), a.src_pvt);
  PhraseTableReader right_reader(right_in.stream(), a.pvt_tgt);
  ReaderSource left(left_reader), right(right_reader);

  OutputFile out(a.out);
  std::unique_ptr<OutputFile> counts_out;
  if (!counts_path.empty()) counts_out = std::make_unique<OutputFile>(counts_path);
  ReportSink report_sink(g.report);

  InducedWordCounts counts;
  auto report = triangulate_stream(
      left, right, [&](const PhraseEntry& e) { write_phrase_entry(out.stream(), e); }, counts,
      options);
  if (counts_out) write_word_counts(counts_out->stream(), counts);

  for (const auto& w : report.warnings) {
    if (w == "empty_join")
      std::cerr << kProgram << ": warning: no shared pivot phrase; induced table is empty\n";
  }
  std::cerr << kProgram << ": triangulate: " << report.induced_entries << " entries in "
            << std::fixed << std::setprecision(3) << report.elapsed.count() << " s\n";
  report_sink.write(with_newline(report.to_record()));

  out.commit();
  if (counts_out) counts_out->commit();
  report_sink.commit();
  return 0;
}

struct PruneArgs {
  std::string table, weights, n = "unlimited", m = "unlimited", out;
  double floor = kDefaultFeatureFloor;
};

int cmd_prune(const GlobalOptions& g, const PruneArgs& a) {
  PruneParams params;
  params.n = parse_top_limit(a.n);
  params.m = parse_top_limit(a.m);
  params.feature_floor = a.floor;
  if (a.weights.empty()) {
    std::cerr << kProgram << ": no weight file given; using default weights 0.25 0.25 0.25 0.25\n";
  } else {
    params.weights = load(a.weights, [](std::istream& in) { return parse_weight_config(in); });
  }
  PhraseTable table = load_table(a.table);

  OutputFile out(a.out);
  ReportSink report_sink(g.report);
  auto result = prune_modified(table, params);
  write_phrase_table(out.stream(), result.table);
  report_sink.write(result.report.to_record());
  out.commit();
  report_sink.commit();
  return 0;
}

struct PivotLexArgs {
  std::string s_given_p, p_given_s, p_given_t, t_given_p, out;
  std::size_t n = kDefaultLexiconTopN;
};

/// "GIVEN_LANG:CONDITION_LANG:PATH"
LexiconTable load_lexicon(const std::string& spec) {
  auto first = spec.find(':');
  auto second = first == std::string::npos ? first : spec.find(':', first + 1);
  if (second == std::string::npos || first == 0 || second == first + 1 ||
      second + 1 == spec.size())
    throw ConfigError("lexicon argument '" + spec + "' must be GIVEN_LANG:CONDITION_LANG:PATH");
  LexiconDirection dir{spec.substr(0, first), spec.substr(first + 1, second - first - 1)};
  return load(spec.substr(second + 1),
              [&](std::istream& in) { return parse_lexicon_table(in, dir); });
}

int cmd_pivot_lex(const GlobalOptions&, const PivotLexArgs& a) {
  if (a.n == 0) throw ConfigError("-n must be a positive integer");
  auto sp = load_lexicon(a.s_given_p);
  auto ps = load_lexicon(a.p_given_s);
  auto pt = load_lexicon(a.p_given_t);
  auto tp = load_lexicon(a.t_given_p);
  auto lex = prune_lexicon_topn(pivot_lexicon(sp, ps, pt, tp), a.n);

  OutputFile out(a.out);
  write_pivot_lexicon(out.stream(), lex);
  std::cerr << kProgram << ": pivot-lex: " << lex.size() << " pairs\n";
  out.commit();
  return 0;
}

struct AugmentArgs {
  std::string table, lexicon, strategy = "copy", counts, out;
};

int cmd_augment(const GlobalOptions& g, const AugmentArgs& a) {
  LexStrategy strategy;
  try {
    strategy = parse_lex_strategy(a.strategy);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  std::optional<InducedWordCounts> counts;
  if (std::holds_alternative<ReEstimateLex>(strategy)) {
    if (a.counts.empty())
      throw ConfigError("strategy re-estimate needs --counts (written by triangulate)");
    counts = load(a.counts, [](std::istream& in) { return parse_word_counts(in); });
  }
  PhraseTable table = load_table(a.table);
  auto lex = load(a.lexicon, [](std::istream& in) { return parse_pivot_lexicon(in); });

  auto additions = lexicon_to_entries(lex, strategy, counts ? &*counts : nullptr);
  auto result = augment_table(table, additions);

  OutputFile out(a.out);
  ReportSink report_sink(g.report);
  write_phrase_table(out.stream(), result.table);
  report_sink.write(result.report.to_record());
  out.commit();
  report_sink.commit();
  return 0;
}

struct AnalyzeArgs {
  std::string mode, table, test, baseline, out, oov_list;
};

int cmd_analyze(const GlobalOptions&, const AnalyzeArgs& a) {
  if (a.mode == "oov") {
    if (a.test.empty()) throw ConfigError("analyze --mode oov needs --test");
    PhraseTable table = load_table(a.table);
    auto sentences = load(a.test, [](std::istream& in) { return read_test_set(in); });
    auto report = oov_report(table, sentences);
    OutputFile out(a.out);
    std::unique_ptr<OutputFile> list;
    if (!a.oov_list.empty()) {
      list = std::make_unique<OutputFile>(a.oov_list);
      for (const auto& w : report.oov_type_list) list->stream() << w << '\n';
    }
    out.stream() << report.to_record();
    out.commit();
    if (list) list->commit();
    return 0;
  }
  if (a.mode == "stats") {
    PhraseTable table = load_table(a.table);
    std::optional<PhraseTable> baseline;
    if (!a.baseline.empty()) baseline = load_table(a.baseline);
    SizeReport report;
    try {
      report = size_report(table, baseline ? &*baseline : nullptr);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(a.baseline + ": " + e.what());
    }
    OutputFile out(a.out);
    out.stream() << report.to_record();
    out.commit();
    return 0;
  }
  throw ConfigError("unknown analyze mode '" + a.mode + "' (expected oov or stats)");
}

}  // namespace

std::size_t parse_memory_budget(std::string_view text) {
  std::size_t multiplier = 1;
  std::string_view digits = text;
  if (!text.empty()) {
    switch (text.back()) {
      case 'K': case 'k': multiplier = std::size_t{1} << 10; break;
      case 'M': case 'm': multiplier = std::size_t{1} << 20; break;
      case 'G': case 'g': multiplier = std::size_t{1} << 30; break;
      default: break;
    }
    if (multiplier != 1) digits.remove_suffix(1);
  }
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (digits.empty() || ec != std::errc{} || ptr != digits.data() + digits.size() || value == 0)
    throw std::invalid_argument("invalid memory budget '" + std::string(text) + "'");
  return value * multiplier;
}

int run(int argc, char** argv) {
  CLI::App app{"Pivot phrase-table induction, pruning and lexicon augmentation", kProgram};
  app.require_subcommand(1, 1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--memory-budget", g.memory_budget, "Sort memory budget (suffix K/M/G)")
      ->capture_default_str();
  app.add_option("--temp-dir", g.temp_dir, "Directory for sort runs");
  app.add_option("--report", g.report, "Write the command's report here instead of stderr");
  app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);

  TriangulateArgs tri;
  auto* tri_cmd = app.add_subcommand("triangulate", "Induce a source-target table through the pivot");
  tri_cmd->add_option("--src-pvt", tri.src_pvt, "Source-pivot phrase table")->required();
  tri_cmd->add_option("--pvt-tgt", tri.pvt_tgt, "Pivot-target phrase table")->required();
  tri_cmd->add_option("-o,--out", tri.out, "Induced phrase table")->required();
  tri_cmd->add_option("--counts", tri.counts, "Word link counts (default <out>.counts)");

  PruneArgs pr;
  auto* prune_cmd = app.add_subcommand("prune", "Top-N per source, then top-M per target");
  prune_cmd->add_option("--table", pr.table, "Phrase table")->required();
  prune_cmd->add_option("--weights", pr.weights, "Decoding weight file");
  prune_cmd->add_option("-N,--top-n", pr.n, "Per-source cap or 'unlimited'")->capture_default_str();
  prune_cmd->add_option("-M,--top-m", pr.m, "Per-target cap or 'unlimited'")->capture_default_str();
  prune_cmd->add_option("--floor", pr.floor, "Feature floor before the log")->capture_default_str();
  prune_cmd->add_option("-o,--out", pr.out, "Pruned phrase table")->required();

  PivotLexArgs pl;
  auto* lex_cmd = app.add_subcommand("pivot-lex", "Compose word lexicons through the pivot");
  lex_cmd->add_option("--src-given-pvt", pl.s_given_p, "psi(s|p) as GIVEN:COND:PATH")->required();
  lex_cmd->add_option("--pvt-given-src", pl.p_given_s, "psi(p|s) as GIVEN:COND:PATH")->required();
  lex_cmd->add_option("--pvt-given-tgt", pl.p_given_t, "psi(p|t) as GIVEN:COND:PATH")->required();
  lex_cmd->add_option("--tgt-given-pvt", pl.t_given_p, "psi(t|p) as GIVEN:COND:PATH")->required();
  lex_cmd->add_option("-n,--top-n", pl.n, "Pairs kept per source word")->capture_default_str();
  lex_cmd->add_option("-o,--out", pl.out, "Pivot lexicon")->required();

  AugmentArgs au;
  auto* aug_cmd = app.add_subcommand("augment", "Add lexicon pairs missing from a phrase table");
  aug_cmd->add_option("--table", au.table, "Phrase table")->required();
  aug_cmd->add_option("--lexicon", au.lexicon, "Pivot lexicon from pivot-lex")->required();
  aug_cmd->add_option("--strategy", au.strategy, "copy | constant[:value] | re-estimate")
      ->capture_default_str();
  aug_cmd->add_option("--counts", au.counts, "Word counts from triangulate (re-estimate)");
  aug_cmd->add_option("-o,--out", au.out, "Augmented phrase table")->required();

  AnalyzeArgs an;
  auto* an_cmd = app.add_subcommand("analyze", "Coverage (oov) or size (stats) report");
  an_cmd->add_option("--mode", an.mode, "oov | stats")->required();
  an_cmd->add_option("--table", an.table, "Phrase table")->required();
  an_cmd->add_option("--test", an.test, "Tokenized test set (oov)");
  an_cmd->add_option("--baseline", an.baseline, "Baseline phrase table (stats)");
  an_cmd->add_option("--oov-list", an.oov_list, "Write OOV types here, one per line");
  an_cmd->add_option("-o,--out", an.out, "Report file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*tri_cmd) return cmd_triangulate(g, tri);
    if (*prune_cmd) return cmd_prune(g, pr);
    if (*lex_cmd) return cmd_pivot_lex(g, pl);
    if (*aug_cmd) return cmd_augment(g, au);
    if (*an_cmd) return cmd_analyze(g, an);
  } catch (const ParseError& e) {
    std::cerr << kProgram << ": error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << kProgram << ": error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace pivot::cli
