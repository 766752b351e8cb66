// Log-linear scoring and two-sided top-N / top-M pruning.

#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "pivot/table_model.hpp"

namespace pivot {

/// A per-group cap; nullopt means unlimited.
using TopLimit = std::optional<std::size_t>;

/// Accepts a positive integer or "unlimited".  Throws std::invalid_argument.
TopLimit parse_top_limit(std::string_view text);
std::string format_top_limit(const TopLimit& limit);

inline constexpr double kDefaultFeatureFloor = 1e-40;

struct PruneParams {
  TopLimit n;  // per source phrase
  TopLimit m;  // per target phrase
  WeightConfig weights = WeightConfig::uniform();
  double feature_floor = kDefaultFeatureFloor;
};

/// sum_i w_i * ln(max(F_i, floor))
double score_entry(const PhraseEntry& entry, const WeightConfig& weights,
                   double floor = kDefaultFeatureFloor);

/// Keeps the n best-scoring targets of every source phrase; equal scores
/// prefer the lexicographically smaller target.
PhraseTable prune_source_topn(const PhraseTable& table, TopLimit n, const WeightConfig& weights,
                              double floor = kDefaultFeatureFloor);

/// Mirror of prune_source_topn grouped by target phrase.
PhraseTable prune_target_topm(const PhraseTable& table, TopLimit m, const WeightConfig& weights,
                              double floor = kDefaultFeatureFloor);

/// Percentage with one decimal, kept as an exact count of tenths.
struct Percentage {
  std::uint64_t tenths = 0;

  /// 100 * part / whole rounded half-up to one decimal.  whole must be > 0.
  static Percentage of(std::uint64_t part, std::uint64_t whole);
  std::string str() const;

  friend bool operator==(const Percentage&, const Percentage&) = default;
};

struct PruneReport {
  std::size_t before = 0;
  std::size_t after = 0;
  Percentage percentage;

  /// "before=..\nafter=..\npercentage=..\n"
  std::string to_record() const;
};

struct PruneResult {
  PhraseTable table;
  PruneReport report;
};

/// Source-side top-n, then target-side top-m on the survivors.
PruneResult prune_modified(const PhraseTable& table, const PruneParams& params);

}  // namespace pivot
