// Budgeted external merge sort and an append-only record spool.
//
// Records are buffered in memory until their estimated footprint passes the
// budget; the buffer is then stably sorted and spilled to a temporary run
// file.  Reading back performs a k-way merge over all runs plus whatever is
// still in memory.  When nothing spilled, the sorter is a plain in-memory
// stable sort.
//
// A Codec provides:
//   static void write(std::ostream&, const Record&);
//   static bool read(std::istream&, Record&);
//   static std::size_t footprint(const Record&);

#pragma once

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

#include "pivot/temp_file.hpp"

namespace pivot {

struct SortOptions {
  std::size_t memory_budget = std::size_t{1} << 30;
  std::filesystem::path temp_dir;
  unsigned threads = 1;
};

/// Stable sort, splitting the work over up to `threads` workers.
template <class T, class Less>
void parallel_stable_sort(std::vector<T>& items, Less less, unsigned threads) {
  constexpr std::size_t kMinChunk = 1 << 14;
  std::size_t n = items.size();
  std::size_t chunks = std::min<std::size_t>(std::max(1u, threads), n / kMinChunk);
  if (chunks <= 1) {
    std::stable_sort(items.begin(), items.end(), less);
    return;
  }
  std::vector<std::size_t> bounds(chunks + 1);
  for (std::size_t c = 0; c <= chunks; ++c) bounds[c] = n * c / chunks;
  {
    std::vector<std::jthread> workers;
    for (std::size_t c = 0; c < chunks; ++c) {
      workers.emplace_back([&, c] {
        std::stable_sort(items.begin() + bounds[c], items.begin() + bounds[c + 1], less);
      });
    }
  }
  // Pairwise merges of neighbouring chunks keep the result stable.
  for (std::size_t width = 1; width < chunks; width *= 2) {
    for (std::size_t c = 0; c + width < chunks; c += 2 * width) {
      std::size_t hi = std::min(c + 2 * width, chunks);
      std::inplace_merge(items.begin() + bounds[c], items.begin() + bounds[c + width],
                         items.begin() + bounds[hi], less);
    }
  }
}

template <class Record, class Codec, class Less = std::less<Record>>
class ExternalSorter {
 public:
  explicit ExternalSorter(SortOptions options = {}, Less less = {})
      : options_(std::move(options)), less_(std::move(less)) {}

  void add(Record record) {
    if (finished_) throw std::logic_error("ExternalSorter::add after finish");
    buffer_bytes_ += Codec::footprint(record);
    buffer_.push_back(std::move(record));
    ++count_;
    if (buffer_bytes_ > options_.memory_budget) spill();
  }

  /// Ends input.  Call once before next().
  void finish() {
    if (finished_) return;
    finished_ = true;
    parallel_stable_sort(buffer_, less_, options_.threads);
    if (runs_.empty()) return;
    for (std::size_t i = 0; i < runs_.size(); ++i) {
      auto& run = *runs_[i];
      run.in.open(run.file.path(), std::ios::binary);
      if (!run.in) throw std::runtime_error("cannot reopen sort run " + run.file.path().string());
      if (Codec::read(run.in, run.head)) heap_.push_back(i);
    }
    if (mem_pos_ < buffer_.size()) heap_.push_back(runs_.size());
    std::make_heap(heap_.begin(), heap_.end(), heap_order());
  }

  /// Yields records in sorted order; equal records keep insertion order.
  bool next(Record& out) {
    if (!finished_) finish();
    if (runs_.empty()) {
      if (mem_pos_ >= buffer_.size()) return false;
      out = std::move(buffer_[mem_pos_++]);
      return true;
    }
    if (heap_.empty()) return false;
    std::pop_heap(heap_.begin(), heap_.end(), heap_order());
    std::size_t src = heap_.back();
    heap_.pop_back();
    if (src == runs_.size()) {
      out = std::move(buffer_[mem_pos_++]);
      if (mem_pos_ < buffer_.size()) push(src);
    } else {
      auto& run = *runs_[src];
      out = std::move(run.head);
      if (Codec::read(run.in, run.head)) push(src);
      else run.in.close();
    }
    return true;
  }

  std::size_t size() const noexcept { return count_; }
  std::size_t spilled_runs() const noexcept { return runs_.size(); }

 private:
  struct Run {
    TempFile file;
    std::ifstream in;
    Record head{};
  };

  void spill() {
    parallel_stable_sort(buffer_, less_, options_.threads);
    auto run = std::make_unique<Run>(Run{TempFile(options_.temp_dir, "pivot-sort"), {}, {}});
    {
      std::ofstream out(run->file.path(), std::ios::binary | std::ios::trunc);
      for (const auto& r : buffer_) Codec::write(out, r);
      out.flush();
      if (!out) throw std::runtime_error("write to sort run " + run->file.path().string() + " failed");
    }
    runs_.push_back(std::move(run));
    buffer_.clear();
    buffer_.shrink_to_fit();
    buffer_bytes_ = 0;
  }

  const Record& head(std::size_t src) const {
    return src == runs_.size() ? buffer_[mem_pos_] : runs_[src]->head;
  }

  // std heap is a max-heap: "a after b" puts the smallest record on top.
  auto heap_order() const {
    return [this](std::size_t a, std::size_t b) {
      const Record& ra = head(a);
      const Record& rb = head(b);
      if (less_(rb, ra)) return true;
      if (less_(ra, rb)) return false;
      return a > b;
    };
  }

  void push(std::size_t src) {
    heap_.push_back(src);
    std::push_heap(heap_.begin(), heap_.end(), heap_order());
  }

  SortOptions options_;
  Less less_;
  std::vector<Record> buffer_;
  std::size_t buffer_bytes_ = 0;
  std::size_t count_ = 0;
  std::size_t mem_pos_ = 0;
  bool finished_ = false;
  std::vector<std::unique_ptr<Run>> runs_;
  std::vector<std::size_t> heap_;
};

/// Append-only sequence that moves to disk once it outgrows its budget.
template <class Record, class Codec>
class RecordSpool {
 public:
  explicit RecordSpool(std::size_t memory_budget, std::filesystem::path temp_dir = {})
      : budget_(memory_budget), temp_dir_(std::move(temp_dir)) {}

  void append(Record record) {
    ++count_;
    if (file_) {
      Codec::write(out_, record);
      return;
    }
    bytes_ += Codec::footprint(record);
    records_.push_back(std::move(record));
    if (bytes_ > budget_) {
      file_.emplace(temp_dir_, "pivot-spool");
      out_.open(file_->path(), std::ios::binary | std::ios::trunc);
      for (const auto& r : records_) Codec::write(out_, r);
      records_.clear();
      records_.shrink_to_fit();
    }
  }

  std::size_t size() const noexcept { return count_; }
  bool spilled() const noexcept { return file_.has_value(); }

  /// Visits every record in append order.
  template <class Visit>
  void for_each(Visit&& visit) {
    if (!file_) {
      for (const auto& r : records_) visit(r);
      return;
    }
    out_.flush();
    if (!out_) throw std::runtime_error("write to spool " + file_->path().string() + " failed");
    std::ifstream in(file_->path(), std::ios::binary);
    Record r{};
    std::size_t seen = 0;
    while (Codec::read(in, r)) {
      visit(std::as_const(r));
      ++seen;
    }
    if (seen != count_) throw std::runtime_error("spool " + file_->path().string() + " truncated");
  }

 private:
  std::size_t budget_;
  std::filesystem::path temp_dir_;
  std::vector<Record> records_;
  std::size_t bytes_ = 0;
  std::size_t count_ = 0;
  std::optional<TempFile> file_;
  std::ofstream out_;
};

}  // namespace pivot
