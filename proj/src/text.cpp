#include "ceci/text.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <sys/stat.h>

namespace ceci {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view token, const std::string& context) {
  if (token == "nan") return std::nan("");
  if (token == "inf") return HUGE_VAL;
  if (token == "-inf") return -HUGE_VAL;
  double out = 0.0;
  auto res = std::from_chars(token.data(), token.data() + token.size(), out);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
    throw Error(context + ": expected a number, got '" + std::string(token) + "'");
  }
  return out;
}

long long parse_int(std::string_view token, const std::string& context) {
  long long out = 0;
  auto res = std::from_chars(token.data(), token.data() + token.size(), out);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
    throw Error(context + ": expected an integer, got '" + std::string(token) + "'");
  }
  return out;
}

uint64_t parse_u64(std::string_view token, const std::string& context) {
  uint64_t out = 0;
  auto res = std::from_chars(token.data(), token.data() + token.size(), out);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
    throw Error(context + ": expected an unsigned integer, got '" + std::string(token) + "'");
  }
  return out;
}

std::vector<std::string> split_tokens(std::string_view line) {
  std::vector<std::string> out;
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.emplace_back(line.substr(start, i - start));
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(path + ": cannot open file for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(path + ": write failed");
}

bool file_exists(const std::string& path) {
  struct stat st;
  return ::stat(path.c_str(), &st) == 0;
}

uint64_t fnv1a64(std::string_view data) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string fnv1a64_hex(std::string_view data) { return hex_u64(fnv1a64(data)); }

std::string hex_u64(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return std::string(buf);
}

uint64_t parse_hex_u64(std::string_view token, const std::string& context) {
  uint64_t out = 0;
  auto res = std::from_chars(token.data(), token.data() + token.size(), out, 16);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
    throw Error(context + ": expected a hex value, got '" + std::string(token) + "'");
  }
  return out;
}

std::vector<ConfigSection> parse_sections(std::string_view text,
                                          const std::string& origin) {
  std::vector<ConfigSection> sections;
  int lineno = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t eol = text.find('\n', pos);
    std::string_view line = (eol == std::string_view::npos)
                                ? text.substr(pos)
                                : text.substr(pos, eol - pos);
    pos = (eol == std::string_view::npos) ? text.size() + 1 : eol + 1;
    ++lineno;

    size_t hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    auto tokens = split_tokens(line);
    if (tokens.empty()) continue;

    std::string joined;
    for (size_t i = 0; i < tokens.size(); ++i) {
      if (i) joined += ' ';
      joined += tokens[i];
    }
    if (joined.front() == '[') {
      if (joined.back() != ']') {
        throw Error(origin + ":" + std::to_string(lineno) + ": unterminated section header");
      }
      auto inner = split_tokens(std::string_view(joined).substr(1, joined.size() - 2));
      if (inner.empty()) {
        throw Error(origin + ":" + std::to_string(lineno) + ": empty section header");
      }
      ConfigSection s;
      s.name = inner[0];
      s.args.assign(inner.begin() + 1, inner.end());
      s.header_line = lineno;
      sections.push_back(std::move(s));
    } else {
      if (sections.empty()) {
        throw Error(origin + ":" + std::to_string(lineno) +
                    ": content before any [section] header");
      }
      sections.back().lines.push_back(tokens);
      sections.back().line_numbers.push_back(lineno);
    }
  }
  return sections;
}

}  // namespace ceci
