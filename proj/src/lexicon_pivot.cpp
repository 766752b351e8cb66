#include "pivot/lexicon_pivot.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <stdexcept>

namespace pivot {

namespace {

bool in_unit_interval(double v) { return std::isfinite(v) && v > 0.0 && v <= 1.0; }

auto pair_key(const PivotLexiconPair& p) { return std::tie(p.source, p.target); }

std::vector<std::string_view> split_spaces(std::string_view text) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    auto pos = text.find(' ', start);
    parts.push_back(text.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) return parts;
    start = pos + 1;
  }
}

}  // namespace

PivotLexicon::PivotLexicon(std::vector<PivotLexiconPair> pairs) : pairs_(std::move(pairs)) {
  for (const auto& p : pairs_) {
    if (p.source == kNullWord || p.target == kNullWord)
      throw std::invalid_argument("NULL word in pivot lexicon");
    if (!is_valid_token(p.source) || !is_valid_token(p.target))
      throw std::invalid_argument("invalid word in pivot lexicon");
    if (!in_unit_interval(p.psi_s_given_t) || !in_unit_interval(p.psi_t_given_s))
      throw std::invalid_argument("pivot lexicon probability outside (0,1]");
  }
  std::sort(pairs_.begin(), pairs_.end(),
            [](const auto& a, const auto& b) { return pair_key(a) < pair_key(b); });
  auto dup = std::adjacent_find(pairs_.begin(), pairs_.end(), [](const auto& a, const auto& b) {
    return pair_key(a) == pair_key(b);
  });
  if (dup != pairs_.end())
    throw std::invalid_argument("duplicate pair '" + dup->source + " " + dup->target + "'");
}

void write_pivot_lexicon(std::ostream& out, const PivotLexicon& lex) {
  for (const auto& p : lex.pairs()) {
    out << p.source << ' ' << p.target << ' ' << format_real(p.psi_s_given_t) << ' '
        << format_real(p.psi_t_given_s) << '\n';
  }
}

PivotLexicon parse_pivot_lexicon(std::istream& in) {
  std::vector<PivotLexiconPair> pairs;
  std::map<std::pair<std::string, std::string>, std::size_t> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto f = split_spaces(line);
    if (f.size() != 4)
      throw ParseError(line_no, "malformed line (expected 'S T PSI_S_GIVEN_T PSI_T_GIVEN_S')");
    if (!is_valid_token(f[0]) || !is_valid_token(f[1]))
      throw ParseError(line_no, "malformed line (invalid word)");
    if (f[0] == kNullWord || f[1] == kNullWord)
      throw ParseError(line_no, "NULL word in pivot lexicon");
    auto a = parse_real(f[2]);
    auto b = parse_real(f[3]);
    if (!a || !b) throw ParseError(line_no, "non-numeric probability");
    if (!in_unit_interval(*a) || !in_unit_interval(*b))
      throw ParseError(line_no, "probability out of range (0,1]");
    auto [it, fresh] = seen.emplace(std::pair{std::string(f[0]), std::string(f[1])}, line_no);
    if (!fresh)
      throw ParseError(line_no, "duplicate pair, first seen at line " + std::to_string(it->second));
    pairs.push_back({std::string(f[0]), std::string(f[1]), *a, *b});
  }
  return PivotLexicon(std::move(pairs));
}

// --- composition -----------------------------------------------------------

namespace {

using WordProbs = std::vector<std::pair<std::string_view, double>>;
/// pivot word -> (other-language word, probability)
using PivotIndex = std::map<std::string_view, WordProbs>;

enum class PivotSide { given, condition };

PivotIndex index_by_pivot(const LexiconTable& table, PivotSide side) {
  PivotIndex index;
  for (const auto& e : table.entries()) {
    if (e.given == kNullWord || e.condition == kNullWord) continue;
    if (side == PivotSide::given) index[e.given].emplace_back(e.condition, e.prob);
    else index[e.condition].emplace_back(e.given, e.prob);
  }
  return index;
}

using PairSums = std::map<std::pair<std::string_view, std::string_view>, double>;

/// sum over shared pivots of source_leg(s, p) * target_leg(p, t)
PairSums compose(const PivotIndex& source_leg, const PivotIndex& target_leg) {
  PairSums sums;
  for (const auto& [pivot, sources] : source_leg) {
    auto it = target_leg.find(pivot);
    if (it == target_leg.end()) continue;
    for (const auto& [s, a] : sources) {
      for (const auto& [t, b] : it->second) sums[{s, t}] += a * b;
    }
  }
  return sums;
}

void expect_direction(const LexiconTable& table, const char* role, const std::string& given,
                      const std::string& condition) {
  const auto& d = table.direction();
  if (d.given_lang != given || d.condition_lang != condition)
    throw ConfigError(std::string("lexicon direction mismatch: ") + role + " must be " + given +
                      "|" + condition + ", declared " + d.str());
}

}  // namespace

PivotLexicon pivot_lexicon(const LexiconTable& s_given_p, const LexiconTable& p_given_s,
                           const LexiconTable& p_given_t, const LexiconTable& t_given_p) {
  const std::string src = s_given_p.direction().given_lang;
  const std::string pvt = s_given_p.direction().condition_lang;
  const std::string tgt = p_given_t.direction().condition_lang;
  if (src == pvt) throw ConfigError("lexicon direction mismatch: source and pivot languages are both " + src);
  if (tgt == pvt) throw ConfigError("lexicon direction mismatch: target and pivot languages are both " + tgt);
  expect_direction(p_given_s, "p_given_s", pvt, src);
  expect_direction(p_given_t, "p_given_t", pvt, tgt);
  expect_direction(t_given_p, "t_given_p", tgt, pvt);

  // psi(s|t): psi(s|p) keyed by its condition, psi(p|t) keyed by its given word.
  PairSums inverse = compose(index_by_pivot(s_given_p, PivotSide::condition),
                             index_by_pivot(p_given_t, PivotSide::given));
  // psi(t|s): psi(p|s) keyed by its given word, psi(t|p) keyed by its condition.
  PairSums direct = compose(index_by_pivot(p_given_s, PivotSide::given),
                            index_by_pivot(t_given_p, PivotSide::condition));

  std::vector<PivotLexiconPair> pairs;
  for (const auto& [key, inv] : inverse) {
    auto it = direct.find(key);
    if (it == direct.end() || it->second <= 0.0 || inv <= 0.0) continue;
    pairs.push_back({std::string(key.first), std::string(key.second), std::min(inv, 1.0),
                     std::min(it->second, 1.0)});
  }
  return PivotLexicon(std::move(pairs));
}

PivotLexicon prune_lexicon_topn(const PivotLexicon& lex, std::size_t n) {
  if (n == 0) throw std::invalid_argument("lexicon top-n must be >= 1");
  auto pairs = lex.pairs();
  std::vector<PivotLexiconPair> kept;
  std::vector<std::size_t> group;
  for (std::size_t i = 0; i < pairs.size();) {
    std::size_t j = i;
    group.clear();
    for (; j < pairs.size() && pairs[j].source == pairs[i].source; ++j) group.push_back(j);
    if (group.size() > n) {
      // Targets ascend with the index, so the smaller index wins ties.
      std::partial_sort(group.begin(), group.begin() + static_cast<std::ptrdiff_t>(n), group.end(),
                        [&](std::size_t a, std::size_t b) {
                          if (pairs[a].psi_t_given_s != pairs[b].psi_t_given_s)
                            return pairs[a].psi_t_given_s > pairs[b].psi_t_given_s;
                          return a < b;
                        });
      group.resize(n);
    }
    for (auto k : group) kept.push_back(pairs[k]);
    i = j;
  }
  return PivotLexicon(std::move(kept));
}

// --- entries ---------------------------------------------------------------

LexStrategy parse_lex_strategy(std::string_view text) {
  if (text == "copy") return CopyLex{};
  if (text == "re-estimate") return ReEstimateLex{};
  if (text == "constant") return ConstantLex{};
  if (text.starts_with("constant:")) {
    auto v = parse_real(text.substr(9));
    if (!v || !in_unit_interval(*v))
      throw std::invalid_argument("constant lexical weight must be in (0,1]");
    return ConstantLex{*v};
  }
  throw std::invalid_argument("unknown strategy '" + std::string(text) +
                              "' (expected copy, constant[:value] or re-estimate)");
}

std::string format_lex_strategy(const LexStrategy& strategy) {
  if (std::holds_alternative<CopyLex>(strategy)) return "copy";
  if (std::holds_alternative<ReEstimateLex>(strategy)) return "re-estimate";
  return "constant:" + format_real(std::get<ConstantLex>(strategy).value);
}

std::vector<PhraseEntry> lexicon_to_entries(const PivotLexicon& lex, const LexStrategy& strategy,
                                            const InducedWordCounts* counts) {
  if (std::holds_alternative<ReEstimateLex>(strategy) && counts == nullptr)
    throw ConfigError("re-estimate strategy needs induced word counts");
  if (auto* c = std::get_if<ConstantLex>(&strategy); c && !in_unit_interval(c->value))
    throw ConfigError("constant lexical weight must be in (0,1]");

  std::vector<PhraseEntry> entries;
  entries.reserve(lex.size());
  for (const auto& p : lex.pairs()) {
    PhraseEntry e{Phrase{p.source}, Phrase{p.target}, {}, Alignment{{0, 0}}};
    e.features.inv_phrase_prob = p.psi_s_given_t;
    e.features.dir_phrase_prob = p.psi_t_given_s;
    if (auto* c = std::get_if<ConstantLex>(&strategy)) {
      e.features.inv_lex_weight = c->value;
      e.features.dir_lex_weight = c->value;
    } else if (std::holds_alternative<ReEstimateLex>(strategy)) {
      // Zero is not a legal weight, so unseen words keep the copied value.
      auto n = counts->count(p.source, p.target);
      auto tt = counts->total_target(p.target);
      auto ts = counts->total_source(p.source);
      e.features.inv_lex_weight =
          n > 0 && tt > 0 ? static_cast<double>(n) / static_cast<double>(tt) : p.psi_s_given_t;
      e.features.dir_lex_weight =
          n > 0 && ts > 0 ? static_cast<double>(n) / static_cast<double>(ts) : p.psi_t_given_s;
    } else {
      e.features.inv_lex_weight = p.psi_s_given_t;
      e.features.dir_lex_weight = p.psi_t_given_s;
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

// --- augmentation ----------------------------------------------------------

std::string AugmentReport::to_record() const {
  return "added=" + std::to_string(added) + "\nskipped=" + std::to_string(skipped) + "\n";
}

AugmentResult augment_table(const PhraseTable& table, std::span<const PhraseEntry> additions) {
  AugmentResult result;
  std::vector<PhraseEntry> accepted;
  std::set<std::pair<Phrase, Phrase>> taken;
  for (const auto& a : additions) {
    a.validate();
    if (table.contains(a.source, a.target) || !taken.emplace(a.source, a.target).second) {
      ++result.report.skipped;
      continue;
    }
    accepted.push_back(a);
  }
  result.report.added = accepted.size();
  std::sort(accepted.begin(), accepted.end(), canonical_less);

  std::vector<PhraseEntry> merged;
  merged.reserve(table.size() + accepted.size());
  std::merge(table.begin(), table.end(), accepted.begin(), accepted.end(),
             std::back_inserter(merged), canonical_less);
  result.table = PhraseTable::from_canonical(std::move(merged));
  return result;
}

}  // namespace pivot
