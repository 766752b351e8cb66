// Word lexicons composed through the pivot language and turned into
// single-word phrase entries that fill gaps in a pivot phrase table.
//
//   psi(s|t) = sum_p psi(s|p) * psi(p|t)
//   psi(t|s) = sum_p psi(p|s) * psi(t|p)
//
// NULL never takes part in either sum.

#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "pivot/table_model.hpp"
#include "pivot/triangulation.hpp"

namespace pivot {

struct PivotLexiconPair {
  std::string source;
  std::string target;
  double psi_s_given_t = 0.0;
  double psi_t_given_s = 0.0;

  friend bool operator==(const PivotLexiconPair&, const PivotLexiconPair&) = default;
};

/// Source-target word pairs ordered by (source, target).
class PivotLexicon {
 public:
  PivotLexicon() = default;
  /// Sorts.  Throws std::invalid_argument on NULL words, duplicates, or
  /// probabilities outside (0,1].
  explicit PivotLexicon(std::vector<PivotLexiconPair> pairs);

  std::span<const PivotLexiconPair> pairs() const noexcept { return pairs_; }
  std::size_t size() const noexcept { return pairs_.size(); }
  bool empty() const noexcept { return pairs_.empty(); }

  friend bool operator==(const PivotLexicon&, const PivotLexicon&) = default;

 private:
  std::vector<PivotLexiconPair> pairs_;
};

/// "S T PSI_S_GIVEN_T PSI_T_GIVEN_S" per line.
void write_pivot_lexicon(std::ostream& out, const PivotLexicon& lex);
PivotLexicon parse_pivot_lexicon(std::istream& in);

/// The four inputs are psi(s|p), psi(p|s), psi(p|t), psi(t|p).  Their declared
/// directions must chain through one source, one pivot and one target
/// language, or ConfigError is thrown.
PivotLexicon pivot_lexicon(const LexiconTable& s_given_p, const LexiconTable& p_given_s,
                           const LexiconTable& p_given_t, const LexiconTable& t_given_p);

inline constexpr std::size_t kDefaultLexiconTopN = 20;

/// Keeps the n pairs with the highest psi(t|s) per source word; equal values
/// prefer the smaller target word.
PivotLexicon prune_lexicon_topn(const PivotLexicon& lex, std::size_t n);

inline constexpr double kDefaultConstantLexWeight = 4.5399929762484854e-5;  // e^-10

struct CopyLex {};
struct ConstantLex {
  double value = kDefaultConstantLexWeight;
};
struct ReEstimateLex {};

/// How lexicon-derived entries get their two lexical weights.
using LexStrategy = std::variant<CopyLex, ConstantLex, ReEstimateLex>;

/// "copy", "constant", "constant:<value>" or "re-estimate".
LexStrategy parse_lex_strategy(std::string_view text);
std::string format_lex_strategy(const LexStrategy& strategy);

/// One single-word entry per pair with alignment {(0,0)}.  ReEstimateLex
/// requires counts (ConfigError otherwise).
std::vector<PhraseEntry> lexicon_to_entries(const PivotLexicon& lex, const LexStrategy& strategy,
                                            const InducedWordCounts* counts = nullptr);

struct AugmentReport {
  std::size_t added = 0;
  std::size_t skipped = 0;

  /// "added=..\nskipped=..\n"
  std::string to_record() const;
};

struct AugmentResult {
  PhraseTable table;
  AugmentReport report;
};

/// Inserts each addition whose (source, target) pair is not already present.
AugmentResult augment_table(const PhraseTable& table, std::span<const PhraseEntry> additions);

}  // namespace pivot
