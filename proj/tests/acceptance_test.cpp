// End-to-end acceptance suite.  Prints one PASS/FAIL line per criterion and
// exits nonzero when any criterion fails.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "pivot/analysis.hpp"
#include "pivot/lexicon_pivot.hpp"
#include "pivot/pruning.hpp"
#include "pivot/triangulation.hpp"
#include "support/cli_runner.hpp"
#include "support/oracles.hpp"

using namespace pivot;
using namespace pivot::testing;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool ok = true;
  std::string detail;

  void fail(const std::string& why) {
    if (ok) detail = why;
    ok = false;
  }
};

std::string serialize(const PhraseTable& t) {
  std::ostringstream out;
  write_phrase_table(out, t);
  return out.str();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// --- triangulation ---------------------------------------------------------

Outcome triangulation_oracle() {
  Outcome o;
  Rng rng(1001);
  std::uniform_int_distribution<std::size_t> size(200, 2000), vocab(10, 50), pvocab(5, 50);
  double run_time = 0.0, worst = 0.0;
  std::size_t compared = 0;
  for (int round = 0; round < 50; ++round) {
    std::size_t sv = vocab(rng), pv = pvocab(rng), tv = vocab(rng);
    auto sp = random_table(rng, {.entries = size(rng), .src_prefix = "s", .tgt_prefix = "p",
                                 .src_vocab = sv, .tgt_vocab = pv, .max_len = 2});
    auto pt = random_table(rng, {.entries = size(rng), .src_prefix = "p", .tgt_prefix = "t",
                                 .src_vocab = pv, .tgt_vocab = tv, .max_len = 2});
    auto t0 = Clock::now();
    auto got = triangulate(sp, pt);
    run_time += seconds_since(t0);
    auto brute = brute_triangulate(sp, pt);
    if (got.table.size() != brute.size()) {
      o.fail("round " + std::to_string(round) + ": pair count differs");
      continue;
    }
    for (const auto& e : got.table) {
      auto it = brute.find({e.source, e.target});
      if (it == brute.end()) {
        o.fail("unexpected pair " + e.source.str() + " / " + e.target.str());
        continue;
      }
      worst = std::max({worst, std::abs(e.features.inv_phrase_prob - it->second.inv),
                        std::abs(e.features.dir_phrase_prob - it->second.dir)});
      ++compared;
    }
  }
  if (worst > 1e-12) o.fail("max abs error " + fmt("%.3g", worst));
  if (run_time >= 10.0) o.fail("triangulate took " + fmt("%.2f", run_time) + " s");
  if (o.ok)
    o.detail = std::to_string(compared) + " pairs, max abs error " + fmt("%.3g", worst) +
               ", triangulate " + fmt("%.2f", run_time) + " s";
  return o;
}

Outcome normalization() {
  Outcome o;
  Rng rng(1002);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  std::uniform_int_distribution<int> dim(2, 15);
  double worst = 0.0;
  std::size_t targets_checked = 0;
  for (int round = 0; round < 20; ++round) {
    const int pivots = dim(rng), sources = dim(rng), targets = dim(rng);
    auto dist = [&](int n) {
      std::vector<double> w(n);
      double tot = 0.0;
      for (auto& x : w) tot += (x = u(rng));
      for (auto& x : w) x /= tot;
      return w;
    };
    // phi(s|p) is a distribution over s for each p; phi(p|t) over p for each t.
    std::vector<PhraseEntry> sp, pt;
    for (int p = 0; p < pivots; ++p) {
      auto w = dist(sources);
      for (int s = 0; s < sources; ++s)
        sp.push_back({Phrase{word("s", s)}, Phrase{word("p", p)}, {w[s], 1, random_prob(rng), 1},
                      Alignment{{0, 0}}});
    }
    for (int t = 0; t < targets; ++t) {
      auto w = dist(pivots);
      for (int p = 0; p < pivots; ++p)
        pt.push_back({Phrase{word("p", p)}, Phrase{word("t", t)}, {w[p], 1, random_prob(rng), 1},
                      Alignment{{0, 0}}});
    }
    auto got = triangulate(PhraseTable(sp), PhraseTable(pt));
    std::map<Phrase, double> mass;
    for (const auto& e : got.table) mass[e.target] += e.features.inv_phrase_prob;
    if (mass.size() != static_cast<std::size_t>(targets)) o.fail("missing targets");
    for (const auto& [t, m] : mass) worst = std::max(worst, std::abs(m - 1.0));
    targets_checked += mass.size();
  }
  if (worst > 1e-9) o.fail("max |sum - 1| = " + fmt("%.3g", worst));
  if (o.ok) o.detail = std::to_string(targets_checked) + " targets, max |sum - 1| " + fmt("%.3g", worst);
  return o;
}

// Alignments over an I x J grid as bitmasks, bit i*J + j.
Alignment mask_alignment(unsigned mask, unsigned rows, unsigned cols) {
  std::vector<Link> links;
  for (unsigned i = 0; i < rows; ++i)
    for (unsigned j = 0; j < cols; ++j)
      if (mask >> (i * cols + j) & 1u) links.push_back({i, j});
  return Alignment(std::move(links));
}

// Relational join on bitmasks: row i of the result is the union of a2's rows
// j for every (i, j) in a1.
std::array<unsigned, 4> mask_rows(unsigned a, unsigned rows, unsigned cols) {
  std::array<unsigned, 4> out{};
  for (unsigned r = 0; r < rows; ++r) out[r] = a >> (r * cols) & ((1u << cols) - 1);
  return out;
}

unsigned join_mask(unsigned a1, const std::array<unsigned, 4>& a2_rows, unsigned I, unsigned J,
                   unsigned K) {
  unsigned out = 0;
  for (unsigned i = 0; i < I; ++i) {
    unsigned row = 0;
    for (unsigned j = 0; j < J; ++j)
      if (a1 >> (i * J + j) & 1u) row |= a2_rows[j];
    out |= row << (i * K);
  }
  return out;
}

unsigned alignment_mask(const Alignment& a, unsigned rows, unsigned cols, bool& in_range) {
  unsigned m = 0;
  for (const auto& l : a.links()) {
    if (l.src >= rows || l.tgt >= cols) in_range = false;
    else m |= 1u << (l.src * cols + l.tgt);
  }
  return m;
}

Outcome alignment_composition() {
  // Every pair of alignments is enumerated for each shape with at most 2^18
  // pairs.  That covers all shapes with lengths <= 3 and most with a 4.  The
  // remaining shapes (up to 2^32 pairs each) cross every a1 with a structured
  // family of a2: empty, full, and every single link.
  Outcome o;
  std::size_t pairs = 0, exhaustive_shapes = 0, partial_shapes = 0;
  auto t0 = Clock::now();
  for (unsigned I = 1; I <= 4; ++I)
    for (unsigned J = 1; J <= 4; ++J) {
      unsigned n1 = 1u << (I * J);
      std::vector<Alignment> left(n1);
      for (unsigned m = 0; m < n1; ++m) left[m] = mask_alignment(m, I, J);
      for (unsigned K = 1; K <= 4; ++K) {
        unsigned n2 = 1u << (J * K);
        std::vector<unsigned> family;
        bool complete = (I * J + J * K) <= 18;
        if (complete) {
          for (unsigned m = 0; m < n2; ++m) family.push_back(m);
          ++exhaustive_shapes;
        } else {
          unsigned bits = J * K;
          family.push_back(0);
          family.push_back(n2 - 1);
          for (unsigned b = 0; b < bits; ++b) family.push_back(1u << b);
          ++partial_shapes;
        }
        for (unsigned m2 : family) {
          Alignment a2 = mask_alignment(m2, J, K);
          auto a2_rows = mask_rows(m2, J, K);
          for (unsigned m1 = 0; m1 < n1; ++m1) {
            bool in_range = true;
            unsigned got = alignment_mask(compose_alignment(left[m1], a2), I, K, in_range);
            if (!in_range || got != join_mask(m1, a2_rows, I, J, K)) {
              o.fail("mismatch at shape " + std::to_string(I) + "x" + std::to_string(J) + "x" +
                     std::to_string(K));
            }
            ++pairs;
          }
        }
      }
    }
  double elapsed = seconds_since(t0);
  if (elapsed >= 1.0) o.fail(std::to_string(pairs) + " pairs took " + fmt("%.2f", elapsed) + " s");
  if (o.ok)
    o.detail = std::to_string(pairs) + " pairs; " + std::to_string(exhaustive_shapes) +
               " shapes complete, " + std::to_string(partial_shapes) + " shapes a1-complete; " +
               fmt("%.2f", elapsed) + " s";
  return o;
}

// --- pruning ---------------------------------------------------------------

Outcome pruning_invariants() {
  Outcome o;
  Rng rng(1004);
  std::uniform_int_distribution<std::size_t> lim(1, 20);
  std::uniform_real_distribution<double> wd(-1.0, 2.0);
  std::size_t tables = 0;
  for (int round = 0; round < 30; ++round) {
    auto t = random_table(rng, {.entries = 1500, .src_vocab = 6, .tgt_vocab = 6, .max_len = 2});
    WeightConfig w{{wd(rng), wd(rng), wd(rng), wd(rng)}};
    std::size_t n = lim(rng), m = lim(rng);
    auto r = prune_modified(t, {n, m, w});
    std::map<Phrase, std::size_t> by_src, by_tgt;
    for (const auto& e : r.table) {
      ++by_src[e.source];
      ++by_tgt[e.target];
      const auto* orig = t.find(e.source, e.target);
      if (!orig) o.fail("entry not in input");
      else if (format_phrase_entry(*orig) != format_phrase_entry(e)) o.fail("entry modified");
    }
    for (const auto& [k, c] : by_src)
      if (c > n) o.fail("source group over n");
    for (const auto& [k, c] : by_tgt)
      if (c > m) o.fail("target group over m");
    if (r.report.after != r.table.size() || r.report.before != t.size()) o.fail("report counts");
    // Output size never shrinks as n grows (m fixed).
    std::size_t prev = 0;
    for (std::size_t nn = 1; nn <= 20; ++nn) {
      auto s = prune_modified(t, {nn, m, w}).table.size();
      if (s < prev) o.fail("size dropped from n=" + std::to_string(nn - 1) + " to n=" + std::to_string(nn));
      prev = s;
    }
    ++tables;
  }
  if (o.ok) o.detail = std::to_string(tables) + " tables, n in 1..20 sweeps";
  return o;
}

Outcome score_arithmetic() {
  Outcome o;
  PhraseEntry e{Phrase{"a"}, Phrase{"z"}, {0.5, 0.5, 0.5, 0.5}, {}};
  double s = score_entry(e, {{1, 1, 1, 1}});
  if (std::abs(s - 4 * std::log(0.5)) > 1e-12) o.fail("score " + fmt("%.17g", s));
  if (score_entry(e, {{0, 0, 0, 0}}) != 0.0) o.fail("zero weights not exactly 0");
  if (o.ok) o.detail = "score " + fmt("%.15f", s);
  return o;
}

Outcome percentage_arithmetic() {
  Outcome o;
  auto a = size_report(2763000, 8851000), b = size_report(5343000, 8851000);
  if (a.percentage->str() != "31.2") o.fail("got " + a.percentage->str());
  if (b.percentage->str() != "60.4") o.fail("got " + b.percentage->str());
  if (a.to_record().find("percentage=31.2\n") == std::string::npos) o.fail("record");
  if (o.ok) o.detail = a.percentage->str() + " and " + b.percentage->str();
  return o;
}

// --- lexicon ---------------------------------------------------------------

const LexiconDirection kSP{"src", "pvt"}, kPS{"pvt", "src"}, kPT{"pvt", "tgt"}, kTP{"tgt", "pvt"};

Outcome lexicon_pivoting() {
  Outcome o;
  Rng rng(1007);
  double worst = 0.0;
  std::size_t pairs = 0;
  for (int round = 0; round < 30; ++round) {
    auto sp = random_lexicon(rng, kSP, "s", 40, "p", 25, true);
    auto ps = random_lexicon(rng, kPS, "p", 25, "s", 40, true);
    auto pt = random_lexicon(rng, kPT, "p", 25, "t", 40, true);
    auto tp = random_lexicon(rng, kTP, "t", 40, "p", 25, true);
    auto got = pivot_lexicon(sp, ps, pt, tp);
    auto brute = brute_pivot_lexicon(sp, ps, pt, tp);
    if (got.size() != brute.size()) o.fail("pair count differs");
    for (const auto& p : got.pairs()) {
      auto it = brute.find({p.source, p.target});
      if (it == brute.end()) {
        o.fail("unexpected pair");
        continue;
      }
      worst = std::max({worst, std::abs(p.psi_s_given_t - it->second.first),
                        std::abs(p.psi_t_given_s - it->second.second)});
      ++pairs;
    }
    std::ostringstream text;
    write_pivot_lexicon(text, got);
    for (const auto& strategy : {LexStrategy{CopyLex{}}, LexStrategy{ConstantLex{}}}) {
      for (const auto& e : lexicon_to_entries(got, strategy)) text << format_phrase_entry(e) << '\n';
    }
    std::istringstream scan(text.str());
    for (std::string tok; scan >> tok;)
      if (tok == kNullWord) o.fail("NULL in output");
    for (const auto& e : lexicon_to_entries(got, ConstantLex{}))
      if (e.features.inv_lex_weight != 4.5399929762484854e-5 ||
          e.features.dir_lex_weight != 4.5399929762484854e-5)
        o.fail("constant weight differs");
  }
  if (worst > 1e-12) o.fail("max abs error " + fmt("%.3g", worst));
  if (kDefaultConstantLexWeight != 4.5399929762484854e-5 ||
      format_real(std::get<ConstantLex>(parse_lex_strategy("constant")).value) != "4.5399929762484854e-05")
    o.fail("default constant is not e^-10");
  if (o.ok)
    o.detail = std::to_string(pairs) + " pairs, max abs error " + fmt("%.3g", worst) +
               ", constant " + format_real(kDefaultConstantLexWeight);
  return o;
}

PivotLexicon random_pivot_lexicon(Rng& rng, std::size_t src_vocab, std::size_t tgt_vocab, int draws) {
  std::uniform_int_distribution<std::size_t> s(0, src_vocab - 1), t(0, tgt_vocab - 1);
  std::map<std::pair<std::string, std::string>, PivotLexiconPair> pairs;
  for (int k = 0; k < draws; ++k) {
    PivotLexiconPair p{word("s", s(rng)), word("t", t(rng)), random_prob(rng), random_prob(rng)};
    pairs.emplace(std::pair{p.source, p.target}, p);
  }
  std::vector<PivotLexiconPair> out;
  for (auto& [k, p] : pairs) out.push_back(p);
  return PivotLexicon(std::move(out));
}

Outcome augmentation_contract() {
  Outcome o;
  Rng rng(1008);
  std::size_t added = 0, skipped = 0;
  for (int round = 0; round < 30; ++round) {
    auto table = random_table(rng, {.entries = 400, .src_vocab = 15, .tgt_vocab = 15, .max_len = 2});
    auto lex = random_pivot_lexicon(rng, 15, 15, 120);
    InducedWordCounts counts = accumulate_word_counts(
        std::vector<PhraseEntry>(table.begin(), table.end()));
    for (const auto& strategy :
         {LexStrategy{CopyLex{}}, LexStrategy{ConstantLex{}}, LexStrategy{ReEstimateLex{}}}) {
      auto r = augment_table(table, lexicon_to_entries(lex, strategy, &counts));
      for (const auto& e : table) {
        const auto* after = r.table.find(e.source, e.target);
        if (!after) o.fail("input entry lost");
        else if (format_phrase_entry(*after) != format_phrase_entry(e)) o.fail("input entry modified");
      }
      if (r.report.added + r.report.skipped != lex.size()) o.fail("added + skipped != lexicon size");
      if (r.table.size() != table.size() + r.report.added) o.fail("size mismatch");
      added += r.report.added;
      skipped += r.report.skipped;
    }
  }
  if (o.ok) o.detail = std::to_string(added) + " added, " + std::to_string(skipped) + " skipped";
  return o;
}

Outcome oov_monotonicity() {
  Outcome o;
  Rng rng(1009);
  std::size_t before_total = 0, after_total = 0;
  for (int round = 0; round < 20; ++round) {
    auto table = random_table(rng, {.entries = 150, .src_vocab = 40, .tgt_vocab = 30, .max_len = 2});
    auto lex = random_pivot_lexicon(rng, 60, 30, 40);
    auto test = random_test_set(rng, "s", 60, 40);
    auto before = oov_report(table, test);
    auto after = oov_report(augment_table(table, lexicon_to_entries(lex, CopyLex{})).table, test);
    if (after.oov_tokens > before.oov_tokens) o.fail("token OOV increased");
    if (after.oov_types > before.oov_types) o.fail("type OOV increased");
    before_total += before.oov_tokens;
    after_total += after.oov_tokens;

    // A lexicon covering every test word leaves nothing uncovered.
    std::vector<PivotLexiconPair> full;
    std::set<std::string> seen;
    for (const auto& s : test)
      for (const auto& w : s)
        if (seen.insert(w).second) full.push_back({w, "t0", 0.5, 0.5});
    auto covered = oov_report(
        augment_table(table, lexicon_to_entries(PivotLexicon(full), CopyLex{})).table, test);
    if (covered.oov_tokens != 0 || covered.oov_types != 0) o.fail("full coverage left OOVs");
  }
  if (o.ok)
    o.detail = "OOV tokens " + std::to_string(before_total) + " -> " + std::to_string(after_total) +
               " over 20 triples; full coverage 0";
  return o;
}

// --- determinism -----------------------------------------------------------

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism_round_trip() {
  Outcome o;
  CliSandbox box("acceptance");
  write_pipeline_inputs(box, 1010);
  std::map<std::string, std::string> first;
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& cmd : pipeline_commands()) {
      auto r = box.run(cmd);
      if (r.exit_code != 0) o.fail("command failed: " + r.err);
    }
    auto snap = box.snapshot();
    if (pass == 0) first = snap;
    else if (snap != first) {
      for (const auto& [name, bytes] : snap)
        if (first[name] != bytes) o.fail(name + " differs between runs");
    }
  }
  auto corpus = slurp(PIVOT_TEST_DATA "/canonical_corpus.pt");
  std::size_t lines = std::count(corpus.begin(), corpus.end(), '\n');
  std::size_t empty_align = 0, multi_link = 0;
  std::istringstream scan(corpus);
  for (std::string l; std::getline(scan, l);) {
    if (l.ends_with(" ||| ")) ++empty_align;
    auto a = l.substr(l.rfind("||| ") + 4);
    if (std::count(a.begin(), a.end(), '-') > 1) ++multi_link;
  }
  if (lines < 100 || empty_align == 0 || multi_link == 0) o.fail("fixture corpus too thin");
  std::istringstream in(corpus);
  if (serialize(parse_phrase_table(in)) != corpus) o.fail("corpus does not round-trip");
  if (o.ok)
    o.detail = std::to_string(pipeline_commands().size()) + " commands x2 identical; corpus " +
               std::to_string(lines) + " lines (" + std::to_string(empty_align) + " empty, " +
               std::to_string(multi_link) + " multi-link) round-trips";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"triangulation oracle", triangulation_oracle},
      {"normalization preservation", normalization},
      {"alignment composition", alignment_composition},
      {"pruning invariants", pruning_invariants},
      {"score arithmetic", score_arithmetic},
      {"size percentages 31.2 / 60.4", percentage_arithmetic},
      {"lexicon pivoting", lexicon_pivoting},
      {"augmentation contract", augmentation_contract},
      {"OOV monotonicity", oov_monotonicity},
      {"determinism and round trip", determinism_round_trip},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome r;
    try {
      r = check();
    } catch (const std::exception& e) {
      r.fail(std::string("exception: ") + e.what());
    }
    std::cout << (r.ok ? "PASS" : "FAIL") << "  " << name << "  (" << r.detail << ")\n";
    failed += !r.ok;
  }
  std::cout << (failed ? "acceptance: " + std::to_string(failed) + " criteria failed\n"
                       : std::string("acceptance: all criteria passed\n"));
  return failed ? 1 : 0;
}
