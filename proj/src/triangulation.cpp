#include "pivot/triangulation.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "pivot/binary_io.hpp"
#include "pivot/external_sort.hpp"

namespace pivot {

// --- alignment composition -------------------------------------------------

Alignment compose_alignment(const Alignment& a1, const Alignment& a2) {
  // a2 is sorted by its pivot-side index, so each a1 link finds its partners
  // with one binary search.
  auto links2 = a2.links();
  std::vector<Link> out;
  for (const Link& l1 : a1.links()) {
    auto it = std::lower_bound(links2.begin(), links2.end(), Link{l1.tgt, 0});
    for (; it != links2.end() && it->src == l1.tgt; ++it) out.push_back({l1.src, it->tgt});
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return Alignment(std::move(out));
}

// --- induced counts --------------------------------------------------------

std::string InducedWordCounts::key(std::string_view s, std::string_view t) {
  std::string k;
  k.reserve(s.size() + t.size() + 1);
  k.append(s);
  k.push_back('\t');
  k.append(t);
  return k;
}

void InducedWordCounts::add(std::string_view s, std::string_view t, std::uint64_t n) {
  if (n == 0) return;
  counts_[key(s, t)] += n;
  target_totals_[std::string(t)] += n;
  source_totals_[std::string(s)] += n;
}

void InducedWordCounts::add_entry(const Phrase& source, const Phrase& target,
                                  const Alignment& alignment) {
  for (const Link& l : alignment.links()) add(source[l.src], target[l.tgt]);
}

void InducedWordCounts::merge(const InducedWordCounts& other) {
  for (const auto& [k, n] : other.counts_) counts_[k] += n;
  for (const auto& [w, n] : other.target_totals_) target_totals_[w] += n;
  for (const auto& [w, n] : other.source_totals_) source_totals_[w] += n;
}

std::uint64_t InducedWordCounts::count(std::string_view s, std::string_view t) const {
  auto it = counts_.find(key(s, t));
  return it == counts_.end() ? 0 : it->second;
}

std::uint64_t InducedWordCounts::total_target(std::string_view t) const {
  auto it = target_totals_.find(std::string(t));
  return it == target_totals_.end() ? 0 : it->second;
}

std::uint64_t InducedWordCounts::total_source(std::string_view s) const {
  auto it = source_totals_.find(std::string(s));
  return it == source_totals_.end() ? 0 : it->second;
}

std::vector<std::tuple<std::string, std::string, std::uint64_t>> InducedWordCounts::sorted() const {
  std::vector<std::tuple<std::string, std::string, std::uint64_t>> out;
  out.reserve(counts_.size());
  for (const auto& [k, n] : counts_) {
    auto tab = k.find('\t');
    out.emplace_back(k.substr(0, tab), k.substr(tab + 1), n);
  }
  std::sort(out.begin(), out.end());
  return out;
}

InducedWordCounts accumulate_word_counts(std::span<const PhraseEntry> entries) {
  InducedWordCounts counts;
  for (const auto& e : entries) counts.add_entry(e.source, e.target, e.alignment);
  return counts;
}

double word_prob(const InducedWordCounts& counts, std::string_view s, std::string_view t) {
  auto total = counts.total_target(t);
  if (total == 0) throw std::invalid_argument("word_prob: target word '" + std::string(t) + "' unseen");
  return static_cast<double>(counts.count(s, t)) / static_cast<double>(total);
}

void write_word_counts(std::ostream& out, const InducedWordCounts& counts) {
  for (const auto& [s, t, n] : counts.sorted()) out << s << ' ' << t << ' ' << n << '\n';
}

InducedWordCounts parse_word_counts(std::istream& in) {
  InducedWordCounts counts;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto a = line.find(' ');
    auto b = a == std::string::npos ? a : line.find(' ', a + 1);
    if (b == std::string::npos || line.find(' ', b + 1) != std::string::npos)
      throw ParseError(line_no, "malformed line (expected 'S T COUNT')");
    std::string_view sv(line);
    auto s = sv.substr(0, a), t = sv.substr(a + 1, b - a - 1), c = sv.substr(b + 1);
    if (!is_valid_token(s) || !is_valid_token(t))
      throw ParseError(line_no, "malformed line (invalid word)");
    std::uint64_t n = 0;
    auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), n);
    if (ec != std::errc{} || ptr != c.data() + c.size() || n == 0)
      throw ParseError(line_no, "count must be a positive integer");
    if (counts.count(s, t) != 0) throw ParseError(line_no, "duplicate pair");
    counts.add(s, t, n);
  }
  return counts;
}

// --- lexical weights -------------------------------------------------------

double lexical_weight(const Phrase& source, const Phrase& target, const Alignment& alignment,
                      const WordProbFn& w, LexDirection direction) {
  const bool by_target = direction == LexDirection::target_given_source;
  const Phrase& generated = by_target ? target : source;
  const Phrase& conditioning = by_target ? source : target;

  std::vector<std::vector<std::uint32_t>> partners(generated.size());
  for (const Link& l : alignment.links()) {
    if (by_target) partners[l.tgt].push_back(l.src);
    else partners[l.src].push_back(l.tgt);
  }

  double weight = 1.0;
  for (std::size_t g = 0; g < generated.size(); ++g) {
    double factor;
    if (partners[g].empty()) {
      factor = w(generated[g], kNullWord).value_or(kUnalignedFloor);
    } else {
      double sum = 0.0;
      for (auto c : partners[g]) sum += w(generated[g], conditioning[c]).value_or(0.0);
      factor = sum / static_cast<double>(partners[g].size());
    }
    weight *= factor;
  }
  return std::clamp(weight, kLexWeightFloor, 1.0);
}

WordProbFn induced_word_prob(const InducedWordCounts& counts, LexDirection direction) {
  if (direction == LexDirection::target_given_source) {
    return [&counts](std::string_view t, std::string_view s) -> std::optional<double> {
      if (s == kNullWord) return std::nullopt;
      auto total = counts.total_source(s);
      if (total == 0) return std::nullopt;
      return static_cast<double>(counts.count(s, t)) / static_cast<double>(total);
    };
  }
  return [&counts](std::string_view s, std::string_view t) -> std::optional<double> {
    if (t == kNullWord) return std::nullopt;
    auto total = counts.total_target(t);
    if (total == 0) return std::nullopt;
    return static_cast<double>(counts.count(s, t)) / static_cast<double>(total);
  };
}

// --- report ----------------------------------------------------------------

std::string TriangulationReport::to_record() const {
  std::ostringstream out;
  out << "src_pvt_entries=" << src_pvt_entries << " pvt_tgt_entries=" << pvt_tgt_entries
      << " shared_pivots=" << shared_pivots << " induced_entries=" << induced_entries
      << " dropped_unjoined_src=" << dropped_unjoined_src << " spilled_runs=" << spilled_runs;
  for (const auto& w : warnings) out << " warning=" << w;
  return out.str();
}

bool TableSource::next(PhraseEntry& entry) {
  if (pos_ >= table_.size()) return false;
  entry = table_[pos_++];
  return true;
}

// --- the join --------------------------------------------------------------

namespace {

/// One leg entry keyed by its pivot phrase.
struct LegRecord {
  Phrase pivot;
  Phrase other;
  double inv = 0.0;  // phi(other|pivot) for the source leg, phi(pivot|other) for the target leg
  double dir = 0.0;
  Alignment alignment;
  std::uint64_t origin = 0;
};

struct LegLess {
  bool operator()(const LegRecord& a, const LegRecord& b) const {
    if (auto c = a.pivot <=> b.pivot; c != 0) return c < 0;
    return a.other < b.other;
  }
};

struct LegCodec {
  static void write(std::ostream& out, const LegRecord& r) {
    binio::put_phrase(out, r.pivot);
    binio::put_phrase(out, r.other);
    binio::put(out, r.inv);
    binio::put(out, r.dir);
    binio::put_alignment(out, r.alignment);
    binio::put(out, r.origin);
  }
  static bool read(std::istream& in, LegRecord& r) {
    return binio::get_phrase(in, r.pivot) && binio::get_phrase(in, r.other) &&
           binio::get(in, r.inv) && binio::get(in, r.dir) &&
           binio::get_alignment(in, r.alignment) && binio::get(in, r.origin);
  }
  static std::size_t footprint(const LegRecord& r) {
    return sizeof(LegRecord) + r.pivot.footprint() + r.other.footprint() +
           r.alignment.size() * sizeof(Link);
  }
};

/// One (s, p, t) path.
struct PathRecord {
  Phrase source;
  Phrase target;
  Phrase pivot;
  double inv = 0.0;
  double dir = 0.0;
  Alignment alignment;
};

struct PathLess {
  bool operator()(const PathRecord& a, const PathRecord& b) const {
    if (auto c = a.source <=> b.source; c != 0) return c < 0;
    if (auto c = a.target <=> b.target; c != 0) return c < 0;
    return a.pivot < b.pivot;
  }
};

struct PathCodec {
  static void write(std::ostream& out, const PathRecord& r) {
    binio::put_phrase(out, r.source);
    binio::put_phrase(out, r.target);
    binio::put_phrase(out, r.pivot);
    binio::put(out, r.inv);
    binio::put(out, r.dir);
    binio::put_alignment(out, r.alignment);
  }
  static bool read(std::istream& in, PathRecord& r) {
    return binio::get_phrase(in, r.source) && binio::get_phrase(in, r.target) &&
           binio::get_phrase(in, r.pivot) && binio::get(in, r.inv) && binio::get(in, r.dir) &&
           binio::get_alignment(in, r.alignment);
  }
  static std::size_t footprint(const PathRecord& r) {
    return sizeof(PathRecord) + r.source.footprint() + r.target.footprint() +
           r.pivot.footprint() + r.alignment.size() * sizeof(Link);
  }
};

struct PhraseCodec {
  static void write(std::ostream& out, const Phrase& p) { binio::put_phrase(out, p); }
  static bool read(std::istream& in, Phrase& p) { return binio::get_phrase(in, p); }
  static std::size_t footprint(const Phrase& p) { return p.footprint(); }
};

/// Induced pair before lexical weights are known.
struct ReducedPair {
  Phrase source;
  Phrase target;
  double inv = 0.0;
  double dir = 0.0;
  Alignment alignment;
  double best_weight = 0.0;
  Phrase best_pivot;
};

struct ReducedCodec {
  static void write(std::ostream& out, const ReducedPair& r) {
    binio::put_phrase(out, r.source);
    binio::put_phrase(out, r.target);
    binio::put(out, r.inv);
    binio::put(out, r.dir);
    binio::put_alignment(out, r.alignment);
    binio::put(out, r.best_weight);
    binio::put_phrase(out, r.best_pivot);
  }
  static bool read(std::istream& in, ReducedPair& r) {
    return binio::get_phrase(in, r.source) && binio::get_phrase(in, r.target) &&
           binio::get(in, r.inv) && binio::get(in, r.dir) &&
           binio::get_alignment(in, r.alignment) && binio::get(in, r.best_weight) &&
           binio::get_phrase(in, r.best_pivot);
  }
  static std::size_t footprint(const ReducedPair& r) {
    return sizeof(ReducedPair) + r.source.footprint() + r.target.footprint() +
           r.best_pivot.footprint() + r.alignment.size() * sizeof(Link);
  }
};

using LegSorter = ExternalSorter<LegRecord, LegCodec, LegLess>;

/// Reads a sorted leg one pivot group at a time, rejecting duplicate pairs.
class LegGroups {
 public:
  LegGroups(LegSorter& sorter, std::string name) : sorter_(sorter), name_(std::move(name)) {
    has_ = sorter_.next(pending_);
  }

  bool next(std::vector<LegRecord>& group) {
    group.clear();
    if (!has_) return false;
    group.push_back(std::move(pending_));
    while ((has_ = sorter_.next(pending_))) {
      if (pending_.pivot != group.front().pivot) break;
      if (pending_.other == group.back().other)
        throw ParseError(name_, pending_.origin,
                         "duplicate (source,target) pair, first seen at line " +
                             std::to_string(group.back().origin));
      group.push_back(std::move(pending_));
    }
    return true;
  }

 private:
  LegSorter& sorter_;
  std::string name_;
  LegRecord pending_;
  bool has_ = false;
};

struct JoinStats {
  std::size_t src_entries = 0;
  std::size_t tgt_entries = 0;
  std::size_t shared_pivots = 0;
  std::size_t distinct_sources = 0;
  std::size_t spilled_runs = 0;
};

std::size_t share_of(const TriangulationOptions& o, std::size_t parts) {
  return std::max<std::size_t>(o.memory_budget / parts, 1);
}

SortOptions sort_options(const TriangulationOptions& o, std::size_t parts) {
  return {share_of(o, parts), o.temp_dir, std::max(1u, o.threads)};
}

constexpr std::size_t kBudgetParts = 5;

double capped(double p) {
  // A product of tiny legs can underflow; keep the feature strictly positive.
  return std::clamp(p, std::numeric_limits<double>::min(), 1.0);
}

/// Sorts both legs by pivot, joins, and reduces per (s,t).  `emit` receives
/// pairs in canonical order.
template <class Emit>
JoinStats join_and_reduce(EntrySource& src_pvt, EntrySource& pvt_tgt,
                          const TriangulationOptions& options, Emit&& emit) {
  JoinStats stats;
  LegSorter left(sort_options(options, kBudgetParts));
  LegSorter right(sort_options(options, kBudgetParts));
  ExternalSorter<Phrase, PhraseCodec> sources(sort_options(options, kBudgetParts));

  PhraseEntry e;
  while (src_pvt.next(e)) {
    sources.add(e.source);
    left.add({std::move(e.target), std::move(e.source), e.features.inv_phrase_prob,
              e.features.dir_phrase_prob, std::move(e.alignment), src_pvt.position()});
  }
  while (pvt_tgt.next(e)) {
    right.add({std::move(e.source), std::move(e.target), e.features.inv_phrase_prob,
               e.features.dir_phrase_prob, std::move(e.alignment), pvt_tgt.position()});
  }
  stats.src_entries = left.size();
  stats.tgt_entries = right.size();

  {
    Phrase prev, cur;
    bool first = true;
    while (sources.next(cur)) {
      if (first || cur != prev) ++stats.distinct_sources;
      prev = std::move(cur);
      first = false;
    }
  }

  ExternalSorter<PathRecord, PathCodec, PathLess> paths(sort_options(options, kBudgetParts));
  {
    LegGroups lg(left, src_pvt.name());
    LegGroups rg(right, pvt_tgt.name());
    std::vector<LegRecord> lgroup, rgroup;
    bool hl = lg.next(lgroup), hr = rg.next(rgroup);
    while (hl && hr) {
      auto c = lgroup.front().pivot <=> rgroup.front().pivot;
      if (c < 0) {
        hl = lg.next(lgroup);
      } else if (c > 0) {
        hr = rg.next(rgroup);
      } else {
        ++stats.shared_pivots;
        for (const auto& l : lgroup) {
          for (const auto& r : rgroup) {
            paths.add({l.other, r.other, l.pivot, l.inv * r.inv, l.dir * r.dir,
                       compose_alignment(l.alignment, r.alignment)});
          }
        }
        hl = lg.next(lgroup);
        hr = rg.next(rgroup);
      }
    }
    // Finish scanning both legs so duplicates are reported wherever they are.
    while (hl) hl = lg.next(lgroup);
    while (hr) hr = rg.next(rgroup);
  }
  stats.spilled_runs = left.spilled_runs() + right.spilled_runs() + sources.spilled_runs() +
                       paths.spilled_runs();

  PathRecord path;
  std::optional<ReducedPair> cur;
  while (paths.next(path)) {
    if (cur && (cur->source != path.source || cur->target != path.target)) {
      cur->inv = capped(cur->inv);
      cur->dir = capped(cur->dir);
      emit(std::move(*cur));
      cur.reset();
    }
    if (!cur) {
      cur = ReducedPair{std::move(path.source), std::move(path.target), path.inv, path.dir,
                        std::move(path.alignment), path.inv, std::move(path.pivot)};
      continue;
    }
    cur->inv += path.inv;
    cur->dir += path.dir;
    // Pivots arrive in ascending order, so strict improvement keeps the
    // smallest pivot among equal-weight paths.
    if (path.inv > cur->best_weight) {
      cur->best_weight = path.inv;
      cur->alignment = std::move(path.alignment);
      cur->best_pivot = std::move(path.pivot);
    }
  }
  if (cur) {
    cur->inv = capped(cur->inv);
    cur->dir = capped(cur->dir);
    emit(std::move(*cur));
  }
  return stats;
}

}  // namespace

TriangulatedProbs triangulate_probs(const PhraseTable& src_pvt, const PhraseTable& pvt_tgt,
                                    const TriangulationOptions& options) {
  TableSource a(src_pvt), b(pvt_tgt);
  TriangulatedProbs out;
  join_and_reduce(a, b, options, [&](ReducedPair&& r) {
    out.emplace_hint(out.end(), std::pair{r.source, r.target},
                     TriangulatedPair{r.inv, r.dir, std::move(r.alignment), r.best_weight,
                                      std::move(r.best_pivot)});
  });
  return out;
}

TriangulationReport triangulate_stream(EntrySource& src_pvt, EntrySource& pvt_tgt,
                                       const std::function<void(const PhraseEntry&)>& sink,
                                       InducedWordCounts& counts,
                                       const TriangulationOptions& options) {
  auto start = std::chrono::steady_clock::now();
  RecordSpool<ReducedPair, ReducedCodec> spool(share_of(options, kBudgetParts), options.temp_dir);
  std::size_t output_sources = 0;
  Phrase last_source;

  JoinStats stats = join_and_reduce(src_pvt, pvt_tgt, options, [&](ReducedPair&& r) {
    if (spool.size() == 0 || r.source != last_source) {
      ++output_sources;
      last_source = r.source;
    }
    counts.add_entry(r.source, r.target, r.alignment);
    spool.append(std::move(r));
  });

  auto w_tgt = induced_word_prob(counts, LexDirection::target_given_source);
  auto w_src = induced_word_prob(counts, LexDirection::source_given_target);
  spool.for_each([&](const ReducedPair& r) {
    PhraseEntry entry{r.source, r.target, {}, r.alignment};
    entry.features.inv_phrase_prob = r.inv;
    entry.features.dir_phrase_prob = r.dir;
    entry.features.inv_lex_weight =
        lexical_weight(r.source, r.target, r.alignment, w_src, LexDirection::source_given_target);
    entry.features.dir_lex_weight =
        lexical_weight(r.source, r.target, r.alignment, w_tgt, LexDirection::target_given_source);
    sink(entry);
  });

  TriangulationReport report;
  report.src_pvt_entries = stats.src_entries;
  report.pvt_tgt_entries = stats.tgt_entries;
  report.shared_pivots = stats.shared_pivots;
  report.induced_entries = spool.size();
  report.dropped_unjoined_src = stats.distinct_sources - output_sources;
  report.spilled_runs = stats.spilled_runs + (spool.spilled() ? 1 : 0);
  if (stats.shared_pivots == 0) report.warnings.emplace_back("empty_join");
  report.elapsed = std::chrono::steady_clock::now() - start;
  return report;
}

TriangulationResult triangulate(const PhraseTable& src_pvt, const PhraseTable& pvt_tgt,
                                const TriangulationOptions& options) {
  TableSource a(src_pvt), b(pvt_tgt);
  TriangulationResult result;
  std::vector<PhraseEntry> entries;
  result.report = triangulate_stream(
      a, b, [&](const PhraseEntry& e) { entries.push_back(e); }, result.counts, options);
  result.table = PhraseTable::from_canonical(std::move(entries));
  return result;
}

}  // namespace pivot
