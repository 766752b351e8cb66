#include "pivot/analysis.hpp"

#include <algorithm>
#include <istream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace pivot {

std::vector<Sentence> read_test_set(std::istream& in) {
  std::vector<Sentence> sentences;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream words(line);
    Sentence s;
    for (std::string w; words >> w;) s.push_back(std::move(w));
    sentences.push_back(std::move(s));
  }
  return sentences;
}

std::string OovReport::to_record() const {
  return "total_tokens=" + std::to_string(total_tokens) + "\noov_tokens=" +
         std::to_string(oov_tokens) + "\ntotal_types=" + std::to_string(total_types) +
         "\noov_types=" + std::to_string(oov_types) + "\n";
}

OovReport oov_report(const PhraseTable& table, const std::vector<Sentence>& test_sentences) {
  std::unordered_set<std::string> covered;
  for (const auto& e : table) {
    if (e.source.size() == 1) covered.insert(e.source[0]);
  }

  OovReport report;
  std::set<std::string_view> types, oov_types;
  for (const auto& sentence : test_sentences) {
    for (const auto& tok : sentence) {
      ++report.total_tokens;
      types.insert(tok);
      if (!covered.contains(tok)) {
        ++report.oov_tokens;
        oov_types.insert(tok);
      }
    }
  }
  report.total_types = types.size();
  report.oov_types = oov_types.size();
  report.oov_type_list.assign(oov_types.begin(), oov_types.end());
  return report;
}

std::string SizeReport::to_record() const {
  std::string out = "entries=" + std::to_string(entries) + "\n";
  if (baseline_entries) out += "baseline_entries=" + std::to_string(*baseline_entries) + "\n";
  if (percentage) out += "percentage=" + percentage->str() + "\n";
  return out;
}

SizeReport size_report(std::size_t entries, std::optional<std::size_t> baseline_entries) {
  SizeReport report;
  report.entries = entries;
  if (baseline_entries) {
    if (*baseline_entries == 0) throw std::invalid_argument("empty baseline");
    report.baseline_entries = baseline_entries;
    report.percentage = Percentage::of(entries, *baseline_entries);
  }
  return report;
}

SizeReport size_report(const PhraseTable& table, const PhraseTable* baseline) {
  return size_report(table.size(),
                     baseline ? std::optional<std::size_t>(baseline->size()) : std::nullopt);
}

}  // namespace pivot
