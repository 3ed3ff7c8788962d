#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace blse {

// Throws std::runtime_error with the given message.
[[noreturn]] void fail(const std::string& message);

inline void require(bool condition, const std::string& message) {
  if (!condition) fail(message);
}

// Formats a double with 17 significant digits so that text round-trips
// reproduce the exact bit pattern.
std::string format_g17(double value);

// Strict double parser; rejects trailing garbage, accepts inf/nan spellings.
bool try_parse_double(std::string_view text, double& out);

bool try_parse_long(std::string_view text, long long& out);

// Splits on runs of blanks/tabs; never returns empty fields.
std::vector<std::string_view> split_whitespace(std::string_view line);

// ASCII-only lowercasing. Corpus text and embedding vocabularies are expected
// to share this single normalization pass.
std::string to_lower_ascii(std::string_view text);

// FNV-1a 64-bit, used for run-manifest artifact hashes.
std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t fnv1a64_file(const std::string& path);

// Reads a whole file; fails if it cannot be opened.
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace blse
