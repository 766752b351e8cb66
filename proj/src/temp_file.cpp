#include "pivot/temp_file.hpp"

#include <cstdlib>
#include <iostream>
#include <stdexcept>
#include <system_error>
#include <vector>

#include <unistd.h>

namespace fs = std::filesystem;

namespace pivot {

TempFile::TempFile(const fs::path& dir, const std::string& stem) {
  fs::path base = dir.empty() ? fs::temp_directory_path() : dir;
  std::string pattern = (base / (stem + ".XXXXXX")).string();
  std::vector<char> buf(pattern.begin(), pattern.end());
  buf.push_back('\0');
  int fd = ::mkstemp(buf.data());
  if (fd < 0)
    throw std::system_error(errno, std::generic_category(),
                            "cannot create temporary file in " + base.string());
  ::close(fd);
  path_ = fs::path(buf.data());
}

TempFile::~TempFile() {
  if (!path_.empty()) {
    std::error_code ec;
    fs::remove(path_, ec);
  }
}

TempFile::TempFile(TempFile&& other) noexcept : path_(std::move(other.path_)) {
  other.path_.clear();
}

TempFile& TempFile::operator=(TempFile&& other) noexcept {
  if (this != &other) {
    if (!path_.empty()) {
      std::error_code ec;
      fs::remove(path_, ec);
    }
    path_ = std::move(other.path_);
    other.path_.clear();
  }
  return *this;
}

OutputFile::OutputFile(fs::path path) : path_(std::move(path)) {
  if (path_ == "-") {
    to_stdout_ = true;
    return;
  }
  partial_ = path_;
  partial_ += ".partial";
  file_.open(partial_, std::ios::binary | std::ios::trunc);
  if (!file_) throw std::runtime_error("cannot open " + partial_.string() + " for writing");
}

OutputFile::~OutputFile() {
  if (!to_stdout_ && !committed_) {
    file_.close();
    std::error_code ec;
    fs::remove(partial_, ec);
  }
}

std::ostream& OutputFile::stream() { return to_stdout_ ? std::cout : file_; }

void OutputFile::commit() {
  if (to_stdout_) {
    std::cout.flush();
    if (!std::cout) throw std::runtime_error("write to stdout failed");
    committed_ = true;
    return;
  }
  file_.flush();
  if (!file_) throw std::runtime_error("write to " + partial_.string() + " failed");
  file_.close();
  fs::rename(partial_, path_);
  committed_ = true;
}

}  // namespace pivot
