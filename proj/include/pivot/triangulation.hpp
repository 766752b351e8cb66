// Source->target phrase table induction through a shared pivot language.
//
// Both legs are sorted by pivot phrase (externally when they exceed the memory
// budget) and merge-joined.  Every (s, p, t) path contributes
//   phi(s|t) += phi(s|p) * phi(p|t)      phi(t|s) += phi(t|p) * phi(p|s)
// and the best path (largest phi(s|p) * phi(p|t), smallest pivot on ties)
// supplies the composed word alignment.  Word-pair link counts over all
// induced pairs then re-estimate both lexical weights.

#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pivot/table_model.hpp"

namespace pivot {

/// {(i,k) | exists j: (i,j) in a1 and (j,k) in a2}
Alignment compose_alignment(const Alignment& a1, const Alignment& a2);

/// Word link counts over induced entries, with per-word totals for both sides.
class InducedWordCounts {
 public:
  void add(std::string_view source_word, std::string_view target_word, std::uint64_t n = 1);
  /// Counts every link of the entry once.
  void add_entry(const Phrase& source, const Phrase& target, const Alignment& alignment);
  void merge(const InducedWordCounts& other);

  std::uint64_t count(std::string_view source_word, std::string_view target_word) const;
  /// Sum over s' of count(s', t).
  std::uint64_t total_target(std::string_view target_word) const;
  /// Sum over t' of count(s, t').
  std::uint64_t total_source(std::string_view source_word) const;

  std::size_t pairs() const noexcept { return counts_.size(); }
  bool empty() const noexcept { return counts_.empty(); }

  /// (source word, target word, count), sorted.
  std::vector<std::tuple<std::string, std::string, std::uint64_t>> sorted() const;

  friend bool operator==(const InducedWordCounts&, const InducedWordCounts&) = default;

 private:
  static std::string key(std::string_view s, std::string_view t);

  std::unordered_map<std::string, std::uint64_t> counts_;
  std::unordered_map<std::string, std::uint64_t> target_totals_;
  std::unordered_map<std::string, std::uint64_t> source_totals_;
};

/// Counts links over a sequence of entries.
InducedWordCounts accumulate_word_counts(std::span<const PhraseEntry> entries);

/// count(s,t) / total_target(t).  Throws std::invalid_argument when the total is zero.
double word_prob(const InducedWordCounts& counts, std::string_view s, std::string_view t);

/// Side file format: "S T COUNT" per line, sorted.
void write_word_counts(std::ostream& out, const InducedWordCounts& counts);
InducedWordCounts parse_word_counts(std::istream& in);

enum class LexDirection {
  target_given_source,  // lex(t|s): product over target words
  source_given_target,  // lex(s|t): product over source words
};

/// w(given | condition); nullopt when the pair is unknown.  The condition may
/// be the NULL word.
using WordProbFn = std::function<std::optional<double>(std::string_view given,
                                                       std::string_view condition)>;

inline constexpr double kUnalignedFloor = 1e-7;
inline constexpr double kLexWeightFloor = 1e-12;

/// Standard phrase lexical weight.  For each word on the generated side, the
/// mean of w over its links, or w(word|NULL) when unaligned (kUnalignedFloor
/// if that is unknown).  Product floored at kLexWeightFloor.
double lexical_weight(const Phrase& source, const Phrase& target, const Alignment& alignment,
                      const WordProbFn& w, LexDirection direction);

/// count(s,t) / total word probabilities drawn from induced counts.  Never knows NULL.
WordProbFn induced_word_prob(const InducedWordCounts& counts, LexDirection direction);

struct TriangulatedPair {
  double inv_prob = 0.0;  // phi(s|t)
  double dir_prob = 0.0;  // phi(t|s)
  Alignment alignment;
  double best_path_weight = 0.0;
  Phrase best_pivot;
};

using TriangulatedProbs = std::map<std::pair<Phrase, Phrase>, TriangulatedPair>;

struct TriangulationOptions {
  std::size_t memory_budget = std::size_t{1} << 30;
  std::filesystem::path temp_dir;
  unsigned threads = 1;
};

struct TriangulationReport {
  std::size_t src_pvt_entries = 0;
  std::size_t pvt_tgt_entries = 0;
  std::size_t shared_pivots = 0;
  std::size_t induced_entries = 0;
  std::size_t dropped_unjoined_src = 0;
  std::size_t spilled_runs = 0;
  std::chrono::duration<double> elapsed{0};
  std::vector<std::string> warnings;

  /// Single-line key=value record.  Timing is left out so that reports of
  /// identical runs are identical.
  std::string to_record() const;
};

/// Pulls entries one at a time from some origin (file, table, ...).
class EntrySource {
 public:
  virtual ~EntrySource() = default;
  virtual bool next(PhraseEntry& entry) = 0;
  /// 1-based position of the entry last returned (line number for files).
  virtual std::size_t position() const = 0;
  virtual std::string name() const { return {}; }
};

class TableSource final : public EntrySource {
 public:
  explicit TableSource(const PhraseTable& table, std::string name = {})
      : table_(table), name_(std::move(name)) {}
  bool next(PhraseEntry& entry) override;
  std::size_t position() const override { return pos_; }
  std::string name() const override { return name_; }

 private:
  const PhraseTable& table_;
  std::string name_;
  std::size_t pos_ = 0;
};

class ReaderSource final : public EntrySource {
 public:
  explicit ReaderSource(PhraseTableReader& reader) : reader_(reader) {}
  bool next(PhraseEntry& entry) override { return reader_.next(entry); }
  std::size_t position() const override { return reader_.line_number(); }
  std::string name() const override { return reader_.name(); }

 private:
  PhraseTableReader& reader_;
};

/// Pivot-marginalized probabilities and best-path alignments for every reachable (s, t).
TriangulatedProbs triangulate_probs(const PhraseTable& src_pvt, const PhraseTable& pvt_tgt,
                                    const TriangulationOptions& options = {});

struct TriangulationResult {
  PhraseTable table;
  InducedWordCounts counts;
  TriangulationReport report;
};

TriangulationResult triangulate(const PhraseTable& src_pvt, const PhraseTable& pvt_tgt,
                                const TriangulationOptions& options = {});

/// Streaming form: entries reach `sink` in canonical order.  Duplicate pairs
/// within a leg raise ParseError attributed to that source.
TriangulationReport triangulate_stream(EntrySource& src_pvt, EntrySource& pvt_tgt,
                                       const std::function<void(const PhraseEntry&)>& sink,
                                       InducedWordCounts& counts,
                                       const TriangulationOptions& options = {});

}  // namespace pivot
