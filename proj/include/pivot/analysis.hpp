// Unigram coverage and table-size accounting.

#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pivot/pruning.hpp"
#include "pivot/table_model.hpp"

namespace pivot {

using Sentence = std::vector<std::string>;

/// One whitespace-tokenized sentence per line.
std::vector<Sentence> read_test_set(std::istream& in);

struct OovReport {
  std::size_t total_tokens = 0;
  std::size_t oov_tokens = 0;
  std::size_t total_types = 0;
  std::size_t oov_types = 0;
  std::vector<std::string> oov_type_list;  // sorted

  /// key=value lines; the type list is not included.
  std::string to_record() const;
};

/// A token is covered when some entry's source phrase is exactly that token.
OovReport oov_report(const PhraseTable& table, const std::vector<Sentence>& test_sentences);

struct SizeReport {
  std::size_t entries = 0;
  std::optional<std::size_t> baseline_entries;
  std::optional<Percentage> percentage;

  std::string to_record() const;
};

/// Throws std::invalid_argument("empty baseline") for a zero-size baseline.
SizeReport size_report(std::size_t entries, std::optional<std::size_t> baseline_entries);
SizeReport size_report(const PhraseTable& table, const PhraseTable* baseline = nullptr);

}  // namespace pivot
