#pragma once

#include <cstddef>
#include <string_view>

namespace pivot::cli {

/// Parses "512", "64K", "512M", "1G" (binary multiples).  Throws
/// std::invalid_argument.
std::size_t parse_memory_budget(std::string_view text);

/// Entry point for the pivot-smt tool.  Returns the process exit status.
int run(int argc, char** argv);

}  // namespace pivot::cli
