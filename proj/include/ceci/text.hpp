#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ceci {

// Domain error carrying a human-readable diagnostic. The CLI maps these to
// exit code 1.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shortest round-trip decimal form. Every double written to a text artifact
// goes through this so output bytes are stable across runs and platforms.
std::string format_double(double v);

double parse_double(std::string_view token, const std::string& context);
long long parse_int(std::string_view token, const std::string& context);
uint64_t parse_u64(std::string_view token, const std::string& context);

// Whitespace-separated tokens; empty input gives an empty list.
std::vector<std::string> split_tokens(std::string_view line);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);
bool file_exists(const std::string& path);

uint64_t fnv1a64(std::string_view data);
std::string fnv1a64_hex(std::string_view data);

std::string hex_u64(uint64_t v);  // zero-padded 16-digit lowercase hex
uint64_t parse_hex_u64(std::string_view token, const std::string& context);

// Sectioned structured-text config:
//   # comment
//   [section arg1 arg2]
//   token token token
// Tokens are whitespace-separated; lines before the first header are
// rejected unless blank or comment.
struct ConfigSection {
  std::string name;
  std::vector<std::string> args;
  std::vector<std::vector<std::string>> lines;
  std::vector<int> line_numbers;  // 1-based, parallel to `lines`
  int header_line = 0;
};

std::vector<ConfigSection> parse_sections(std::string_view text,
                                          const std::string& origin);

}  // namespace ceci
