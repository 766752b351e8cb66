#include <doctest.h>

#include <cmath>
#include <sstream>

#include "pivot/lexicon_pivot.hpp"
#include "pivot/triangulation.hpp"
#include "support/oracles.hpp"

using namespace pivot;
using pivot::testing::Rng;

namespace {

const LexiconDirection kSP{"src", "pvt"}, kPS{"pvt", "src"}, kPT{"pvt", "tgt"}, kTP{"tgt", "pvt"};

LexiconTable lex(LexiconDirection d, std::vector<LexiconEntry> e) {
  return LexiconTable(std::move(d), std::move(e));
}

std::string serialize(const PhraseTable& t) {
  std::ostringstream out;
  write_phrase_table(out, t);
  return out.str();
}

}  // namespace

TEST_CASE("unit composition") {
  auto out = pivot_lexicon(lex(kSP, {{"s", "p", 1}}), lex(kPS, {{"p", "s", 1}}),
                           lex(kPT, {{"p", "t", 1}}), lex(kTP, {{"t", "p", 1}}));
  REQUIRE(out.size() == 1);
  CHECK(out.pairs()[0] == PivotLexiconPair{"s", "t", 1.0, 1.0});
}

TEST_CASE("two pivots sum") {
  // psi(s|t) = 0.5*0.4 + 0.5*0.6
  auto out = pivot_lexicon(lex(kSP, {{"s", "p1", 0.5}, {"s", "p2", 0.5}}),
                           lex(kPS, {{"p1", "s", 0.3}, {"p2", "s", 0.7}}),
                           lex(kPT, {{"p1", "t", 0.4}, {"p2", "t", 0.6}}),
                           lex(kTP, {{"t", "p1", 1.0}, {"t", "p2", 0.5}}));
  REQUIRE(out.size() == 1);
  CHECK(out.pairs()[0].psi_s_given_t == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(out.pairs()[0].psi_t_given_s == doctest::Approx(0.3 * 1.0 + 0.7 * 0.5).epsilon(1e-15));
}

TEST_CASE("NULL never reaches the output") {
  auto out = pivot_lexicon(
      lex(kSP, {{"s", "p", 0.5}, {"NULL", "p", 0.4}, {"s", "NULL", 0.3}}),
      lex(kPS, {{"p", "s", 0.5}, {"NULL", "s", 0.2}, {"p", "NULL", 0.9}}),
      lex(kPT, {{"p", "t", 0.5}, {"NULL", "t", 0.1}, {"p", "NULL", 0.4}}),
      lex(kTP, {{"t", "p", 0.5}, {"t", "NULL", 0.3}, {"NULL", "p", 0.2}}));
  REQUIRE(out.size() == 1);
  CHECK(out.pairs()[0] == PivotLexiconPair{"s", "t", 0.25, 0.25});
}

TEST_CASE("one-sided pairs are dropped") {
  auto out = pivot_lexicon(lex(kSP, {{"s", "p", 0.5}}), lex(kPS, {{"q", "s", 0.5}}),
                           lex(kPT, {{"p", "t", 0.5}}), lex(kTP, {{"t", "p", 0.5}}));
  CHECK(out.empty());
}

TEST_CASE("direction mismatch is a configuration error") {
  CHECK_THROWS_AS(pivot_lexicon(lex(kSP, {}), lex(kPS, {}), lex(kTP, {}), lex(kPT, {})),
                  ConfigError);
  CHECK_THROWS_AS(pivot_lexicon(lex(kSP, {}), lex({"pvt", "xx"}, {}), lex(kPT, {}), lex(kTP, {})),
                  ConfigError);
}

TEST_CASE("random word tables against the triple loop") {
  Rng rng(31);
  for (int round = 0; round < 20; ++round) {
    bool with_null = round % 2 == 0;
    auto sp = testing::random_lexicon(rng, kSP, "s", 15, "p", 10, with_null);
    auto ps = testing::random_lexicon(rng, kPS, "p", 10, "s", 15, with_null);
    auto pt = testing::random_lexicon(rng, kPT, "p", 10, "t", 15, with_null);
    auto tp = testing::random_lexicon(rng, kTP, "t", 15, "p", 10, with_null);
    auto got = pivot_lexicon(sp, ps, pt, tp);
    auto brute = testing::brute_pivot_lexicon(sp, ps, pt, tp);
    REQUIRE(got.size() == brute.size());
    for (const auto& p : got.pairs()) {
      CHECK(p.source != kNullWord);
      CHECK(p.target != kNullWord);
      const auto& b = brute.at({p.source, p.target});
      CHECK(std::abs(p.psi_s_given_t - b.first) <= 1e-12);
      CHECK(std::abs(p.psi_t_given_s - b.second) <= 1e-12);
    }
  }
}

TEST_CASE("top-n per source word by psi(t|s)") {
  PivotLexicon l({{"a", "x", 0.9, 0.1}, {"a", "y", 0.1, 0.5}, {"a", "w", 0.2, 0.5},
                  {"b", "x", 0.3, 0.3}});
  auto kept = prune_lexicon_topn(l, 1);
  REQUIRE(kept.size() == 2);
  CHECK(kept.pairs()[0].target == "w");
  CHECK(kept.pairs()[1].source == "b");
  CHECK(prune_lexicon_topn(l, 20) == l);
  CHECK_THROWS_AS(prune_lexicon_topn(l, 0), std::invalid_argument);
}

TEST_CASE("pivot lexicon file round-trips") {
  PivotLexicon l({{"b", "x", 0.3, 0.25}, {"a", "y", 1, 1e-5}});
  std::ostringstream out;
  write_pivot_lexicon(out, l);
  CHECK(out.str() == "a y 1 1e-05\nb x 0.3 0.25\n");
  std::istringstream in(out.str());
  CHECK(parse_pivot_lexicon(in) == l);
  std::istringstream bad("a NULL 0.5 0.5\n");
  CHECK_THROWS_AS(parse_pivot_lexicon(bad), ParseError);
}

TEST_CASE("strategies") {
  CHECK(std::holds_alternative<CopyLex>(parse_lex_strategy("copy")));
  CHECK(std::get<ConstantLex>(parse_lex_strategy("constant")).value == 4.5399929762484854e-5);
  CHECK(std::get<ConstantLex>(parse_lex_strategy("constant:0.01")).value == 0.01);
  CHECK(std::holds_alternative<ReEstimateLex>(parse_lex_strategy("re-estimate")));
  CHECK_THROWS(parse_lex_strategy("bogus"));
  CHECK_THROWS(parse_lex_strategy("constant:2"));
  CHECK(kDefaultConstantLexWeight == std::exp(-10.0));

  PivotLexicon l({{"a", "z", 0.3, 0.6}});
  auto copy = lexicon_to_entries(l, CopyLex{});
  REQUIRE(copy.size() == 1);
  CHECK(copy[0].features == FeatureVector{0.3, 0.3, 0.6, 0.6});
  CHECK(copy[0].alignment == Alignment{{0, 0}});

  auto constant = lexicon_to_entries(l, ConstantLex{});
  CHECK(constant[0].features == FeatureVector{0.3, 4.5399929762484854e-5, 0.6, 4.5399929762484854e-5});

  InducedWordCounts counts;
  counts.add("a", "z", 1);
  counts.add("b", "z", 1);
  auto re = lexicon_to_entries(l, ReEstimateLex{}, &counts);
  CHECK(re[0].features.inv_lex_weight == 0.5);
  CHECK(re[0].features.dir_lex_weight == 1.0);
  CHECK_THROWS_AS(lexicon_to_entries(l, ReEstimateLex{}), ConfigError);

  InducedWordCounts unrelated;
  unrelated.add("q", "r", 2);
  auto fallback = lexicon_to_entries(l, ReEstimateLex{}, &unrelated);
  CHECK(fallback[0].features == copy[0].features);
}

TEST_CASE("augmentation adds only missing pairs") {
  PhraseTable base({{Phrase{"a"}, Phrase{"z"}, {0.9, 0.9, 0.9, 0.9}, Alignment{{0, 0}}},
                    {Phrase{"b", "c"}, Phrase{"y"}, {0.5, 0.5, 0.5, 0.5}, {}}});
  auto adds = lexicon_to_entries(PivotLexicon({{"a", "z", 0.1, 0.1}, {"d", "w", 0.2, 0.2}}), CopyLex{});
  auto r = augment_table(base, adds);
  CHECK(r.report.added == 1);
  CHECK(r.report.skipped == 1);
  CHECK(r.report.to_record() == "added=1\nskipped=1\n");
  CHECK(r.table.find(Phrase{"a"}, Phrase{"z"})->features.inv_phrase_prob == 0.9);
  CHECK(r.table.contains(Phrase{"d"}, Phrase{"w"}));
}

TEST_CASE("augmentation contract on random inputs") {
  Rng rng(47);
  for (int round = 0; round < 20; ++round) {
    auto table = testing::random_table(rng, {.entries = 200, .src_vocab = 12, .tgt_vocab = 12, .max_len = 2});
    std::vector<PivotLexiconPair> pairs;
    std::set<std::pair<std::string, std::string>> seen;
    std::uniform_int_distribution<int> w(0, 11);
    for (int k = 0; k < 60; ++k) {
      auto s = testing::word("s", w(rng)), t = testing::word("t", w(rng));
      if (seen.emplace(s, t).second)
        pairs.push_back({s, t, testing::random_prob(rng), testing::random_prob(rng)});
    }
    PivotLexicon l(pairs);
    auto r = augment_table(table, lexicon_to_entries(l, CopyLex{}));
    CHECK(r.report.added + r.report.skipped == l.size());
    CHECK(r.table.size() == table.size() + r.report.added);
    for (const auto& e : table) {
      const auto* after = r.table.find(e.source, e.target);
      REQUIRE(after != nullptr);
      CHECK(format_phrase_entry(*after) == format_phrase_entry(e));
    }
    // Re-augmenting with the same lexicon changes nothing.
    auto again = augment_table(r.table, lexicon_to_entries(l, CopyLex{}));
    CHECK(again.report.added == 0);
    CHECK(serialize(again.table) == serialize(r.table));
  }
}
