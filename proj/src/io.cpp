#include "renewal/io.hpp"

#include <charconv>
#include <stdexcept>
#include <system_error>

namespace renewal {

std::string format_double(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, end);
}

std::string format_u64(std::uint64_t value) {
  char buf[24];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw std::runtime_error("format_u64 failed");
  return std::string(buf, end);
}

std::string fnv1a_hex(std::string_view text) {
  std::uint64_t hash = 0xCBF29CE484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001B3ULL;
  }
  char buf[17];
  static const char digits[] = "0123456789abcdef";
  for (int i = 15; i >= 0; --i) {
    buf[i] = digits[hash & 0xF];
    hash >>= 4;
  }
  return std::string(buf, 16);
}

std::vector<long> parse_grid(const std::string& text, const std::string& flag) {
  std::vector<long> grid;
  const char* p = text.data();
  const char* end = p + text.size();
  while (p < end) {
    long value = 0;
    auto [next, ec] = std::from_chars(p, end, value);
    if (ec != std::errc() || value < 1)
      throw std::invalid_argument(flag + ": expected comma-separated positive integers, got '" +
                                  text + "'");
    grid.push_back(value);
    p = next;
    if (p < end) {
      if (*p != ',')
        throw std::invalid_argument(flag + ": expected comma-separated positive integers, got '" +
                                    text + "'");
      ++p;
      if (p == end)
        throw std::invalid_argument(flag + ": trailing comma in '" + text + "'");
    }
  }
  if (grid.empty())
    throw std::invalid_argument(flag + ": grid must not be empty");
  return grid;
}

}  // namespace renewal
