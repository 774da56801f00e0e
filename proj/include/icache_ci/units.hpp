/* SPDX-License-Identifier: Apache-2.0 */
#pragma once

#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "icache_ci/error.hpp"

namespace icache_ci {

/// Parses a non-negative decimal integer, returning false on any junk.
inline bool parse_uint(std::string_view text, std::uint64_t& out) {
  if (text.empty()) return false;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

inline bool parse_double(std::string_view text, double& out) {
  if (text.empty()) return false;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

/// Byte sizes: "1024", "1K", "1KB", "1kB", "2M".
inline std::uint64_t parse_size(std::string_view text) {
  std::string_view digits = text;
  std::uint64_t scale = 1;
  auto strip = [&](std::string_view suffix) {
    if (digits.size() > suffix.size()) {
      std::string_view tail = digits.substr(digits.size() - suffix.size());
      bool match = true;
      for (std::size_t i = 0; i < suffix.size(); ++i)
        if (std::toupper(static_cast<unsigned char>(tail[i])) != suffix[i]) match = false;
      if (match) {
        digits.remove_suffix(suffix.size());
        return true;
      }
    }
    return false;
  };
  if (strip("KB") || strip("K")) {
    scale = 1024;
  } else if (strip("MB") || strip("M")) {
    scale = 1024 * 1024;
  } else {
    strip("B");
  }
  std::uint64_t value = 0;
  if (!parse_uint(digits, value) || value == 0)
    throw Error(ErrorKind::config, "bad size '" + std::string(text) + "'");
  return value * scale;
}

inline std::vector<std::uint64_t> parse_size_list(std::string_view text) {
  std::vector<std::uint64_t> sizes;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string_view::npos) comma = text.size();
    std::string_view item = text.substr(pos, comma - pos);
    if (!item.empty()) sizes.push_back(parse_size(item));
    pos = comma + 1;
  }
  return sizes;
}

inline std::string size_label(std::uint64_t bytes) {
  if (bytes % (1024 * 1024) == 0) return std::to_string(bytes / (1024 * 1024)) + "M";
  if (bytes % 1024 == 0) return std::to_string(bytes / 1024) + "K";
  return std::to_string(bytes);
}

/// Report formatting: 6 significant digits.
inline std::string format_number(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", value);
  return buf;
}

inline bool is_power_of_two(std::uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }

/// Splits on whitespace after dropping a trailing `#` comment.
inline std::vector<std::string_view> tokenize_line(std::string_view line) {
  if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) tokens.push_back(line.substr(start, i - start));
  }
  return tokens;
}

}  // namespace icache_ci
