#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace renewal {

// Shortest decimal that round-trips through double; keeps repeated runs
// byte-identical.
std::string format_double(double value);

std::string format_u64(std::uint64_t value);

// FNV-1a 64-bit, hex-encoded; used for the config hash echoed in every row.
std::string fnv1a_hex(std::string_view text);

// Comma-separated positive integers, e.g. "10,30,100". Throws on malformed
// input, naming the flag.
std::vector<long> parse_grid(const std::string& text, const std::string& flag);

struct Provenance {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string version;
};

}  // namespace renewal
