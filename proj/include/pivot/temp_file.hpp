#pragma once

#include <filesystem>
#include <fstream>
#include <string>

namespace pivot {

/// A uniquely named scratch file, deleted when the object dies.
class TempFile {
 public:
  /// Creates the file in `dir`, or the system temp directory when empty.
  explicit TempFile(const std::filesystem::path& dir = {}, const std::string& stem = "pivot");
  ~TempFile();

  TempFile(TempFile&& other) noexcept;
  TempFile& operator=(TempFile&& other) noexcept;
  TempFile(const TempFile&) = delete;
  TempFile& operator=(const TempFile&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

/// Writes to `<path>.partial` and renames over `path` on commit().  An
/// uncommitted file is removed on destruction.  The path "-" maps to stdout.
class OutputFile {
 public:
  explicit OutputFile(std::filesystem::path path);
  ~OutputFile();

  OutputFile(const OutputFile&) = delete;
  OutputFile& operator=(const OutputFile&) = delete;

  std::ostream& stream();
  /// Flushes and moves the file into place.  Throws std::runtime_error on I/O failure.
  void commit();

  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  std::filesystem::path partial_;
  std::ofstream file_;
  bool to_stdout_ = false;
  bool committed_ = false;
};

}  // namespace pivot
