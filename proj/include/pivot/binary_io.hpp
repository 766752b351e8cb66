// Little helpers for the length-prefixed binary records used in sort runs.
#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "pivot/table_model.hpp"

namespace pivot::binio {

template <class T>
  requires std::is_trivially_copyable_v<T>
void put(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof value);
}

template <class T>
  requires std::is_trivially_copyable_v<T>
bool get(std::istream& in, T& value) {
  return static_cast<bool>(in.read(reinterpret_cast<char*>(&value), sizeof value));
}

inline void put_string(std::ostream& out, std::string_view s) {
  put(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline bool get_string(std::istream& in, std::string& s) {
  std::uint32_t n = 0;
  if (!get(in, n)) return false;
  s.resize(n);
  return n == 0 || static_cast<bool>(in.read(s.data(), n));
}

void put_phrase(std::ostream& out, const Phrase& p);
bool get_phrase(std::istream& in, Phrase& p);

void put_alignment(std::ostream& out, const Alignment& a);
bool get_alignment(std::istream& in, Alignment& a);

}  // namespace pivot::binio
