#include "pivot/binary_io.hpp"

namespace pivot::binio {

void put_phrase(std::ostream& out, const Phrase& p) {
  put(out, static_cast<std::uint32_t>(p.size()));
  for (const auto& tok : p.tokens()) put_string(out, tok);
}

bool get_phrase(std::istream& in, Phrase& p) {
  std::uint32_t n = 0;
  if (!get(in, n)) return false;
  std::vector<std::string> tokens(n);
  for (auto& tok : tokens) {
    if (!get_string(in, tok)) return false;
  }
  p = Phrase(std::move(tokens));
  return true;
}

void put_alignment(std::ostream& out, const Alignment& a) {
  put(out, static_cast<std::uint32_t>(a.size()));
  for (const auto& link : a.links()) put(out, link);
}

bool get_alignment(std::istream& in, Alignment& a) {
  std::uint32_t n = 0;
  if (!get(in, n)) return false;
  std::vector<Link> links(n);
  for (auto& link : links) {
    if (!get(in, link)) return false;
  }
  a = Alignment(std::move(links));
  return true;
}

}  // namespace pivot::binio
