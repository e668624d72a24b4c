/* Copyright 2026 The previous-kit Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Locale-independent number formatting and the small CSV dialect shared by
// every file the toolkit reads and writes.

#ifndef PKIT_DETAIL_TEXT_HPP_
#define PKIT_DETAIL_TEXT_HPP_

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "pkit/error.hpp"

namespace pkit {

// First line of every CSV the toolkit writes. Readers skip '#' lines.
inline constexpr std::string_view kCsvVersionLine = "# previous-kit v1";

namespace detail {

// Shortest round-trip representation in plain (non-exponent) notation.
inline std::string format_decimal(double v) {
  if (!std::isfinite(v)) throw DomainError("cannot format non-finite value");
  if (v == 0.0) return "0";
  char buf[512];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed);
  if (res.ec != std::errc()) throw DomainError("number formatting failed");
  return std::string(buf, res.ptr);
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

inline double parse_decimal(std::string_view s, std::string_view what) {
  s = trim(s);
  double v = 0.0;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v))
    throw ParseError("invalid decimal '" + std::string(s) + "' for " + std::string(what));
  return v;
}

inline std::int64_t parse_int(std::string_view s, std::string_view what) {
  s = trim(s);
  std::int64_t v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ParseError("invalid integer '" + std::string(s) + "' for " + std::string(what));
  return v;
}

inline std::vector<std::string_view> split(std::string_view line, char sep = ',') {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error reading '" + path + "'");
  return ss.str();
}

inline void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("error writing '" + path + "'");
}

// One data row of a CSV document with its 1-based line number.
struct CsvRow {
  std::size_t line = 0;
  std::vector<std::string> cells;
};

// Parses a CSV document whose first non-comment line must equal `header`.
// Blank lines and lines starting with '#' are skipped.
inline std::vector<CsvRow> parse_csv(std::string_view text, std::string_view header,
                                     std::string_view source) {
  std::vector<CsvRow> rows;
  bool seen_header = false;
  const auto expected = split(header);
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = trim(text.substr(pos, end - pos));
    ++line_no;
    pos = end + 1;
    if (line.empty() || line.front() == '#') {
      if (end == text.size()) break;
      continue;
    }
    auto cells = split(line);
    if (!seen_header) {
      if (cells != expected)
        throw ParseError(std::string(source) + ":" + std::to_string(line_no) +
                         ": expected header '" + std::string(header) + "'");
      seen_header = true;
    } else {
      if (cells.size() != expected.size())
        throw ParseError(std::string(source) + ":" + std::to_string(line_no) + ": expected " +
                         std::to_string(expected.size()) + " columns, got " +
                         std::to_string(cells.size()));
      CsvRow row;
      row.line = line_no;
      row.cells.assign(cells.begin(), cells.end());
      rows.push_back(std::move(row));
    }
    if (end == text.size()) break;
  }
  if (!seen_header)
    throw ParseError(std::string(source) + ": missing header '" + std::string(header) + "'");
  return rows;
}

inline std::string where(std::string_view source, const CsvRow& row) {
  return std::string(source) + ":" + std::to_string(row.line);
}

}  // namespace detail
}  // namespace pkit

#endif  // PKIT_DETAIL_TEXT_HPP_
