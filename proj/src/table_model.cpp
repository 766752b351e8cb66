#include "pivot/table_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

namespace pivot {

namespace {

constexpr std::string_view kFieldSep = " ||| ";

std::string compose_message(const std::string& source, std::size_t line,
                            const std::string& detail) {
  std::string msg;
  if (!source.empty()) msg += source + ":";
  if (line > 0) msg += "line " + std::to_string(line) + ": ";
  else if (!source.empty()) msg += " ";
  return msg + detail;
}

std::vector<std::string_view> split_on(std::string_view text, std::string_view sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(text.substr(start));
      return parts;
    }
    parts.push_back(text.substr(start, pos - start));
    start = pos + sep.size();
  }
}

std::optional<std::uint32_t> parse_index(std::string_view text) {
  std::uint32_t value = 0;
  if (text.empty()) return std::nullopt;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

bool in_unit_interval(double v) { return std::isfinite(v) && v > 0.0 && v <= 1.0; }

}  // namespace

// --- errors ----------------------------------------------------------------

ParseError::ParseError(std::size_t line, const std::string& message)
    : ParseError(std::string{}, line, message) {}

ParseError::ParseError(std::string source, std::size_t line, const std::string& message)
    : std::runtime_error(compose_message(source, line, message)),
      source_(std::move(source)),
      line_(line),
      detail_(message) {}

ParseError ParseError::with_source(std::string source) const {
  return ParseError(std::move(source), line_, detail_);
}

// --- tokens and numbers ----------------------------------------------------

bool is_valid_token(std::string_view token) noexcept {
  if (token.empty()) return false;
  for (unsigned char c : token) {
    if (c <= 0x20 || c == 0x7f) return false;
  }
  return token.find("|||") == std::string_view::npos;
}

std::string format_real(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

std::optional<double> parse_real(std::string_view text) noexcept {
  if (text.empty()) return std::nullopt;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  if (!std::isfinite(value)) return std::nullopt;
  return value;
}

// --- Phrase ----------------------------------------------------------------

Phrase::Phrase(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  if (tokens_.empty()) throw std::invalid_argument("empty phrase");
  for (const auto& tok : tokens_) {
    if (!is_valid_token(tok)) throw std::invalid_argument("invalid token '" + tok + "'");
    if (tok == kNullWord) throw std::invalid_argument("reserved token NULL in phrase");
  }
}

Phrase::Phrase(std::initializer_list<std::string_view> tokens)
    : Phrase(std::vector<std::string>(tokens.begin(), tokens.end())) {}

Phrase Phrase::parse(std::string_view text) {
  std::vector<std::string> tokens;
  for (auto part : split_on(text, " ")) {
    if (part.empty()) throw std::invalid_argument("empty token");
    tokens.emplace_back(part);
  }
  return Phrase(std::move(tokens));
}

std::string Phrase::str() const {
  std::string out;
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (i) out += ' ';
    out += tokens_[i];
  }
  return out;
}

std::size_t Phrase::footprint() const noexcept {
  std::size_t bytes = sizeof(Phrase) + tokens_.size() * sizeof(std::string);
  for (const auto& t : tokens_) bytes += t.size() > 15 ? t.size() + 1 : 0;
  return bytes;
}

// --- Alignment -------------------------------------------------------------

Alignment::Alignment(std::vector<Link> links) : links_(std::move(links)) {
  std::sort(links_.begin(), links_.end());
  if (std::adjacent_find(links_.begin(), links_.end()) != links_.end())
    throw std::invalid_argument("duplicate alignment link");
}

Alignment::Alignment(std::initializer_list<Link> links)
    : Alignment(std::vector<Link>(links)) {}

bool Alignment::fits(std::size_t src_len, std::size_t tgt_len) const noexcept {
  return std::all_of(links_.begin(), links_.end(), [&](const Link& l) {
    return l.src < src_len && l.tgt < tgt_len;
  });
}

std::string Alignment::str() const {
  std::string out;
  for (std::size_t i = 0; i < links_.size(); ++i) {
    if (i) out += ' ';
    out += std::to_string(links_[i].src);
    out += '-';
    out += std::to_string(links_[i].tgt);
  }
  return out;
}

// --- entries and tables ----------------------------------------------------

bool FeatureVector::valid() const noexcept {
  auto v = values();
  return std::all_of(v.begin(), v.end(), in_unit_interval);
}

void PhraseEntry::validate() const {
  if (source.empty() || target.empty()) throw std::invalid_argument("empty phrase in entry");
  if (!features.valid()) throw std::invalid_argument("feature outside (0,1]");
  if (!alignment.fits(source.size(), target.size()))
    throw std::invalid_argument("alignment index out of range");
}

bool canonical_less(const PhraseEntry& a, const PhraseEntry& b) noexcept {
  if (auto c = a.source <=> b.source; c != 0) return c < 0;
  return a.target < b.target;
}

namespace {

bool same_pair(const PhraseEntry& a, const PhraseEntry& b) {
  return a.source == b.source && a.target == b.target;
}

}  // namespace

PhraseTable::PhraseTable(std::vector<PhraseEntry> entries) : entries_(std::move(entries)) {
  for (const auto& e : entries_) e.validate();
  std::sort(entries_.begin(), entries_.end(), canonical_less);
  auto dup = std::adjacent_find(entries_.begin(), entries_.end(), same_pair);
  if (dup != entries_.end())
    throw std::invalid_argument("duplicate phrase pair '" + dup->source.str() + " ||| " +
                                dup->target.str() + "'");
}

PhraseTable PhraseTable::from_canonical(std::vector<PhraseEntry> entries) {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    entries[i].validate();
    if (i > 0 && !canonical_less(entries[i - 1], entries[i]))
      throw std::invalid_argument("entries not in strictly increasing canonical order");
  }
  PhraseTable table;
  table.entries_ = std::move(entries);
  return table;
}

const PhraseEntry* PhraseTable::find(const Phrase& source, const Phrase& target) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), std::tie(source, target),
                             [](const PhraseEntry& e, const auto& key) {
                               if (auto c = e.source <=> std::get<0>(key); c != 0) return c < 0;
                               return e.target < std::get<1>(key);
                             });
  if (it == entries_.end() || it->source != source || it->target != target) return nullptr;
  return &*it;
}

// --- phrase table text format ----------------------------------------------

PhraseEntry parse_phrase_line(std::string_view line, std::size_t line_no) {
  std::string padded;
  if (line.ends_with(" |||")) {
    padded.assign(line);
    padded += ' ';
    line = padded;
  }
  auto fields = split_on(line, kFieldSep);
  if (fields.size() != 4 && fields.size() != 5)
    throw ParseError(line_no, "wrong field count (expected 4, got " +
                                  std::to_string(fields.size()) + ")");

  PhraseEntry entry;
  try {
    entry.source = Phrase::parse(fields[0]);
  } catch (const std::invalid_argument& e) {
    throw ParseError(line_no, std::string("invalid source phrase: ") + e.what());
  }
  try {
    entry.target = Phrase::parse(fields[1]);
  } catch (const std::invalid_argument& e) {
    throw ParseError(line_no, std::string("invalid target phrase: ") + e.what());
  }

  auto feats = split_on(fields[2], " ");
  if (feats.size() != kNumFeatures)
    throw ParseError(line_no, "wrong feature count (expected 4, got " +
                                  std::to_string(feats.size()) + ")");
  std::array<double, kNumFeatures> values{};
  for (std::size_t i = 0; i < kNumFeatures; ++i) {
    auto v = parse_real(feats[i]);
    if (!v) throw ParseError(line_no, "non-numeric feature '" + std::string(feats[i]) + "'");
    if (!in_unit_interval(*v))
      throw ParseError(line_no, "feature out of range (0,1]: " + std::string(feats[i]));
    values[i] = *v;
  }
  entry.features = {values[0], values[1], values[2], values[3]};

  std::vector<Link> links;
  if (!fields[3].empty()) {
    for (auto tok : split_on(fields[3], " ")) {
      auto dash = tok.find('-');
      std::optional<std::uint32_t> i, j;
      if (dash != std::string_view::npos) {
        i = parse_index(tok.substr(0, dash));
        j = parse_index(tok.substr(dash + 1));
      }
      if (!i || !j)
        throw ParseError(line_no, "malformed alignment link '" + std::string(tok) + "'");
      if (*i >= entry.source.size() || *j >= entry.target.size())
        throw ParseError(line_no, "alignment index out of range '" + std::string(tok) + "'");
      links.push_back({*i, *j});
    }
  }
  try {
    entry.alignment = Alignment(std::move(links));
  } catch (const std::invalid_argument&) {
    throw ParseError(line_no, "duplicate alignment link");
  }
  return entry;
}

std::string format_phrase_entry(const PhraseEntry& entry) {
  std::string out = entry.source.str();
  out += kFieldSep;
  out += entry.target.str();
  out += kFieldSep;
  auto v = entry.features.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ' ';
    out += format_real(v[i]);
  }
  out += kFieldSep;
  out += entry.alignment.str();
  return out;
}

void write_phrase_entry(std::ostream& out, const PhraseEntry& entry) {
  out << format_phrase_entry(entry) << '\n';
}

PhraseTableReader::PhraseTableReader(std::istream& in, std::string name)
    : in_(in), name_(std::move(name)) {}

bool PhraseTableReader::next(PhraseEntry& out) {
  if (!std::getline(in_, line_)) return false;
  ++line_no_;
  try {
    out = parse_phrase_line(line_, line_no_);
  } catch (const ParseError& e) {
    if (name_.empty()) throw;
    throw e.with_source(name_);
  }
  return true;
}

PhraseTable parse_phrase_table(std::istream& in) {
  PhraseTableReader reader(in);
  std::vector<PhraseEntry> entries;
  std::vector<std::size_t> lines;
  PhraseEntry entry;
  while (reader.next(entry)) {
    entries.push_back(std::move(entry));
    lines.push_back(reader.line_number());
  }

  std::vector<std::size_t> order(entries.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (canonical_less(entries[a], entries[b])) return true;
    if (canonical_less(entries[b], entries[a])) return false;
    return a < b;
  });
  std::vector<PhraseEntry> sorted;
  sorted.reserve(entries.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (k > 0 && same_pair(sorted.back(), entries[order[k]]))
      throw ParseError(lines[order[k]], "duplicate (source,target) pair, first seen at line " +
                                            std::to_string(lines[order[k - 1]]));
    sorted.push_back(std::move(entries[order[k]]));
  }
  return PhraseTable::from_canonical(std::move(sorted));
}

void write_phrase_table(std::ostream& out, const PhraseTable& table) {
  for (const auto& e : table) write_phrase_entry(out, e);
}

// --- lexicons --------------------------------------------------------------

namespace {

struct LexiconCheck {
  std::size_t index;  // position in the unsorted input
  std::string problem;
};

/// Sorts `entries` in place and returns the first invariant violation, if any.
std::optional<LexiconCheck> sort_and_check(std::vector<LexiconEntry>& entries,
                                           std::vector<std::size_t>& origin) {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (!in_unit_interval(entries[i].prob))
      return LexiconCheck{origin[i], "probability out of range (0,1]"};
  }
  std::vector<std::size_t> order(entries.size());
  std::iota(order.begin(), order.end(), 0);
  auto key = [&](std::size_t i) { return std::tie(entries[i].given, entries[i].condition); };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (key(a) != key(b)) return key(a) < key(b);
    return origin[a] < origin[b];
  });
  for (std::size_t k = 1; k < order.size(); ++k) {
    if (key(order[k - 1]) == key(order[k]))
      return LexiconCheck{origin[order[k]], "duplicate pair '" + entries[order[k]].given + " " +
                                                entries[order[k]].condition + "'"};
  }

  // Per-condition mass, accumulated in input order so the offending line is
  // the one that first pushes the total over.
  std::map<std::string_view, double> mass;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    double& m = mass[entries[i].condition];
    m += entries[i].prob;
    if (m > 1.0 + kLexiconMassTolerance)
      return LexiconCheck{origin[i], "probability mass for condition '" +
                                         entries[i].condition + "' exceeds 1"};
  }

  std::vector<LexiconEntry> sorted;
  std::vector<std::size_t> sorted_origin;
  sorted.reserve(entries.size());
  for (auto i : order) {
    sorted.push_back(std::move(entries[i]));
    sorted_origin.push_back(origin[i]);
  }
  entries = std::move(sorted);
  origin = std::move(sorted_origin);
  return std::nullopt;
}

}  // namespace

LexiconTable::LexiconTable(LexiconDirection direction, std::vector<LexiconEntry> entries)
    : direction_(std::move(direction)), entries_(std::move(entries)) {
  for (const auto& e : entries_) {
    if (!is_valid_token(e.given) || !is_valid_token(e.condition))
      throw std::invalid_argument("invalid lexicon word");
  }
  std::vector<std::size_t> origin(entries_.size());
  std::iota(origin.begin(), origin.end(), 0);
  if (auto bad = sort_and_check(entries_, origin)) throw std::invalid_argument(bad->problem);
}

LexiconTable parse_lexicon_table(std::istream& in, LexiconDirection direction) {
  std::vector<LexiconEntry> entries;
  std::vector<std::size_t> lines;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto fields = split_on(line, " ");
    if (fields.size() != 3)
      throw ParseError(line_no, "malformed line (expected 'GIVEN CONDITION PROB')");
    if (!is_valid_token(fields[0]) || !is_valid_token(fields[1]))
      throw ParseError(line_no, "malformed line (invalid word)");
    auto prob = parse_real(fields[2]);
    if (!prob) throw ParseError(line_no, "non-numeric probability '" + std::string(fields[2]) + "'");
    if (!in_unit_interval(*prob)) throw ParseError(line_no, "probability out of range (0,1]");
    entries.push_back({std::string(fields[0]), std::string(fields[1]), *prob});
    lines.push_back(line_no);
  }
  if (auto bad = sort_and_check(entries, lines)) throw ParseError(bad->index, bad->problem);
  return LexiconTable(std::move(direction), std::move(entries));
}

void write_lexicon_table(std::ostream& out, const LexiconTable& table) {
  for (const auto& e : table.entries())
    out << e.given << ' ' << e.condition << ' ' << format_real(e.prob) << '\n';
}

// --- weights ---------------------------------------------------------------

WeightConfig parse_weight_config(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::size_t content_line = 0;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string tok;
    bool any = false;
    while (fields >> tok) {
      any = true;
      auto v = parse_real(tok);
      if (!v) throw ParseError(line_no, "non-numeric weight '" + tok + "'");
      values.push_back(*v);
    }
    if (any) {
      if (content_line) throw ParseError(line_no, "weight file must contain a single line");
      content_line = line_no;
    }
  }
  if (values.size() != kNumFeatures)
    throw ParseError(content_line, "expected 4 weights, got " + std::to_string(values.size()));
  WeightConfig w;
  std::copy(values.begin(), values.end(), w.weights.begin());
  return w;
}

}  // namespace pivot
