#include "pivot/pruning.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace pivot {

TopLimit parse_top_limit(std::string_view text) {
  if (text == "unlimited") return std::nullopt;
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size() || value == 0)
    throw std::invalid_argument("expected a positive integer or 'unlimited', got '" +
                                std::string(text) + "'");
  return value;
}

std::string format_top_limit(const TopLimit& limit) {
  return limit ? std::to_string(*limit) : "unlimited";
}

double score_entry(const PhraseEntry& entry, const WeightConfig& weights, double floor) {
  auto f = entry.features.values();
  double score = 0.0;
  for (std::size_t i = 0; i < kNumFeatures; ++i) {
    if (weights.weights[i] == 0.0) continue;
    score += weights.weights[i] * std::log(std::max(f[i], floor));
  }
  return score;
}

namespace {

/// Marks the `limit` best entries of one group.  `group` lists table indices
/// in ascending order of the opposite-side phrase, so the smaller index wins
/// a tie.
void keep_best(std::span<std::size_t> group, std::size_t limit, const std::vector<double>& scores,
               std::vector<char>& keep) {
  if (group.size() <= limit) {
    for (auto i : group) keep[i] = 1;
    return;
  }
  auto better = [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  };
  std::partial_sort(group.begin(), group.begin() + static_cast<std::ptrdiff_t>(limit), group.end(),
                    better);
  for (std::size_t k = 0; k < limit; ++k) keep[group[k]] = 1;
}

PhraseTable filtered(const PhraseTable& table, const std::vector<char>& keep) {
  std::vector<PhraseEntry> out;
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (keep[i]) out.push_back(table[i]);
  }
  return PhraseTable::from_canonical(std::move(out));
}

std::vector<double> all_scores(const PhraseTable& table, const WeightConfig& weights,
                               double floor) {
  std::vector<double> scores(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) scores[i] = score_entry(table[i], weights, floor);
  return scores;
}

}  // namespace

PhraseTable prune_source_topn(const PhraseTable& table, TopLimit n, const WeightConfig& weights,
                              double floor) {
  if (!n) return table;
  auto scores = all_scores(table, weights, floor);
  std::vector<char> keep(table.size(), 0);
  std::vector<std::size_t> group;
  for (std::size_t i = 0; i < table.size();) {
    group.clear();
    std::size_t j = i;
    for (; j < table.size() && table[j].source == table[i].source; ++j) group.push_back(j);
    keep_best(group, *n, scores, keep);
    i = j;
  }
  return filtered(table, keep);
}

PhraseTable prune_target_topm(const PhraseTable& table, TopLimit m, const WeightConfig& weights,
                              double floor) {
  if (!m) return table;
  auto scores = all_scores(table, weights, floor);
  // Canonical order already sorts sources within a target, so a stable sort
  // by target leaves each group ordered by source.
  std::vector<std::size_t> by_target(table.size());
  std::iota(by_target.begin(), by_target.end(), 0);
  std::stable_sort(by_target.begin(), by_target.end(),
                   [&](std::size_t a, std::size_t b) { return table[a].target < table[b].target; });
  std::vector<char> keep(table.size(), 0);
  for (std::size_t i = 0; i < by_target.size();) {
    std::size_t j = i;
    while (j < by_target.size() && table[by_target[j]].target == table[by_target[i]].target) ++j;
    keep_best(std::span(by_target).subspan(i, j - i), *m, scores, keep);
    i = j;
  }
  return filtered(table, keep);
}

Percentage Percentage::of(std::uint64_t part, std::uint64_t whole) {
  if (whole == 0) throw std::invalid_argument("percentage of an empty whole");
  // round(1000 * part / whole) with halves rounded up, in integers.
  return {(2000 * part + whole) / (2 * whole)};
}

std::string Percentage::str() const {
  return std::to_string(tenths / 10) + "." + std::to_string(tenths % 10);
}

std::string PruneReport::to_record() const {
  return "before=" + std::to_string(before) + "\nafter=" + std::to_string(after) +
         "\npercentage=" + percentage.str() + "\n";
}

PruneResult prune_modified(const PhraseTable& table, const PruneParams& params) {
  if (params.n && *params.n == 0) throw std::invalid_argument("n must be >= 1");
  if (params.m && *params.m == 0) throw std::invalid_argument("m must be >= 1");
  if (!(params.feature_floor > 0.0)) throw std::invalid_argument("feature floor must be > 0");

  PruneResult result;
  result.table = prune_target_topm(
      prune_source_topn(table, params.n, params.weights, params.feature_floor), params.m,
      params.weights, params.feature_floor);
  result.report.before = table.size();
  result.report.after = result.table.size();
  // An empty input prunes to itself.
  result.report.percentage = table.empty() ? Percentage{1000}
                                           : Percentage::of(result.report.after,
                                                            result.report.before);
  return result;
}

}  // namespace pivot
