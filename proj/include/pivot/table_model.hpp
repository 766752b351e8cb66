// Phrase-table and lexicon domain types plus their text formats.
//
// Phrase table line:   SRC ||| TGT ||| F1 F2 F3 F4 ||| i-j i-j ...
// Lexicon line:        GIVEN CONDITION PROB
// Weight file:         W1 W2 W3 W4
//
// Features follow the Moses order: phi(src|tgt), lex(src|tgt), phi(tgt|src),
// lex(tgt|src).  Numbers are written in their shortest round-trippable form.

#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pivot {

/// Raised for malformed input.  line() is 1-based; 0 when not tied to a line.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& message);
  ParseError(std::string source, std::size_t line, const std::string& message);

  std::size_t line() const noexcept { return line_; }
  const std::string& source() const noexcept { return source_; }
  const std::string& detail() const noexcept { return detail_; }

  /// Same error, attributed to a named input (usually a file path).
  ParseError with_source(std::string source) const;

 private:
  std::string source_;
  std::size_t line_;
  std::string detail_;
};

/// Raised when inputs are individually valid but do not fit together.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::string_view kNullWord = "NULL";

/// Non-empty, no whitespace or control bytes, no "|||".
bool is_valid_token(std::string_view token) noexcept;

/// Shortest decimal string that parses back to exactly `value`.
std::string format_real(double value);
/// Parses a full decimal token; rejects trailing garbage and non-finite values.
std::optional<double> parse_real(std::string_view text) noexcept;

class Phrase {
 public:
  Phrase() = default;
  /// Throws std::invalid_argument when empty or a token is invalid or NULL.
  explicit Phrase(std::vector<std::string> tokens);
  Phrase(std::initializer_list<std::string_view> tokens);

  /// Splits on single spaces.
  static Phrase parse(std::string_view text);

  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  std::size_t size() const noexcept { return tokens_.size(); }
  bool empty() const noexcept { return tokens_.empty(); }
  const std::string& operator[](std::size_t i) const { return tokens_[i]; }

  std::string str() const;
  std::size_t footprint() const noexcept;

  friend bool operator==(const Phrase&, const Phrase&) = default;
  friend std::strong_ordering operator<=>(const Phrase& a, const Phrase& b) {
    return a.tokens_ <=> b.tokens_;
  }

 private:
  std::vector<std::string> tokens_;
};

struct Link {
  std::uint32_t src = 0;
  std::uint32_t tgt = 0;
  friend auto operator<=>(const Link&, const Link&) = default;
};

/// Set of word links, kept sorted by (src, tgt).
class Alignment {
 public:
  Alignment() = default;
  /// Sorts; throws std::invalid_argument on duplicate links.
  explicit Alignment(std::vector<Link> links);
  Alignment(std::initializer_list<Link> links);

  std::span<const Link> links() const noexcept { return links_; }
  std::size_t size() const noexcept { return links_.size(); }
  bool empty() const noexcept { return links_.empty(); }

  bool fits(std::size_t src_len, std::size_t tgt_len) const noexcept;
  /// Space-joined "i-j" links.
  std::string str() const;

  friend bool operator==(const Alignment&, const Alignment&) = default;

 private:
  std::vector<Link> links_;
};

inline constexpr std::size_t kNumFeatures = 4;

struct FeatureVector {
  double inv_phrase_prob = 1.0;  // phi(src|tgt)
  double inv_lex_weight = 1.0;   // lex(src|tgt)
  double dir_phrase_prob = 1.0;  // phi(tgt|src)
  double dir_lex_weight = 1.0;   // lex(tgt|src)

  std::array<double, kNumFeatures> values() const noexcept {
    return {inv_phrase_prob, inv_lex_weight, dir_phrase_prob, dir_lex_weight};
  }
  /// Every value finite and in (0, 1].
  bool valid() const noexcept;

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

struct PhraseEntry {
  Phrase source;
  Phrase target;
  FeatureVector features;
  Alignment alignment;

  /// Throws std::invalid_argument if any invariant is broken.
  void validate() const;

  friend bool operator==(const PhraseEntry&, const PhraseEntry&) = default;
};

/// Canonical order: (source tokens, target tokens).
bool canonical_less(const PhraseEntry& a, const PhraseEntry& b) noexcept;

/// Immutable, canonically ordered, duplicate-free set of phrase pairs.
class PhraseTable {
 public:
  PhraseTable() = default;
  /// Validates and sorts.  Throws std::invalid_argument on duplicates.
  explicit PhraseTable(std::vector<PhraseEntry> entries);

  /// Entries must already be strictly increasing in canonical order.
  static PhraseTable from_canonical(std::vector<PhraseEntry> entries);

  std::span<const PhraseEntry> entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  auto begin() const noexcept { return entries_.cbegin(); }
  auto end() const noexcept { return entries_.cend(); }
  const PhraseEntry& operator[](std::size_t i) const { return entries_[i]; }

  const PhraseEntry* find(const Phrase& source, const Phrase& target) const;
  bool contains(const Phrase& source, const Phrase& target) const {
    return find(source, target) != nullptr;
  }

  friend bool operator==(const PhraseTable&, const PhraseTable&) = default;

 private:
  std::vector<PhraseEntry> entries_;
};

// --- phrase table text format ---------------------------------------------

/// Parses one line.  A fifth (counts) field is accepted and ignored.
PhraseEntry parse_phrase_line(std::string_view line, std::size_t line_no);
std::string format_phrase_entry(const PhraseEntry& entry);
void write_phrase_entry(std::ostream& out, const PhraseEntry& entry);

/// Reads a whole table; the result is canonical.  Duplicates are errors.
PhraseTable parse_phrase_table(std::istream& in);
void write_phrase_table(std::ostream& out, const PhraseTable& table);

/// Line-at-a-time reader over an unordered, unchecked-for-duplicates stream.
class PhraseTableReader {
 public:
  explicit PhraseTableReader(std::istream& in, std::string name = {});

  bool next(PhraseEntry& out);
  std::size_t line_number() const noexcept { return line_no_; }
  const std::string& name() const noexcept { return name_; }

 private:
  std::istream& in_;
  std::string name_;
  std::string line_;
  std::size_t line_no_ = 0;
};

// --- lexicons --------------------------------------------------------------

/// Which language is generated given which.  A lexicon with given_lang "zh"
/// and condition_lang "en" holds psi(zh word | en word).
struct LexiconDirection {
  std::string given_lang;
  std::string condition_lang;

  std::string str() const { return given_lang + "|" + condition_lang; }
  friend bool operator==(const LexiconDirection&, const LexiconDirection&) = default;
};

struct LexiconEntry {
  std::string given;
  std::string condition;
  double prob = 0.0;

  friend bool operator==(const LexiconEntry&, const LexiconEntry&) = default;
};

inline constexpr double kLexiconMassTolerance = 1e-6;

class LexiconTable {
 public:
  LexiconTable() = default;
  /// Sorts by (given, condition).  Throws std::invalid_argument on duplicate
  /// pairs, probabilities outside (0,1], or a condition whose mass exceeds 1.
  LexiconTable(LexiconDirection direction, std::vector<LexiconEntry> entries);

  const LexiconDirection& direction() const noexcept { return direction_; }
  std::span<const LexiconEntry> entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

 private:
  LexiconDirection direction_;
  std::vector<LexiconEntry> entries_;
};

LexiconTable parse_lexicon_table(std::istream& in, LexiconDirection direction);
void write_lexicon_table(std::ostream& out, const LexiconTable& table);

// --- decoding weights ------------------------------------------------------

struct WeightConfig {
  std::array<double, kNumFeatures> weights{0.25, 0.25, 0.25, 0.25};

  static WeightConfig uniform() { return {}; }
  friend bool operator==(const WeightConfig&, const WeightConfig&) = default;
};

WeightConfig parse_weight_config(std::istream& in);

}  // namespace pivot
