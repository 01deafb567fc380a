// Copyright 2026 The dtta Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DTTA_UTIL_TEXT_HPP_
#define DTTA_UTIL_TEXT_HPP_

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "dtta/error.hpp"

namespace dtta {

// Shortest decimal that round-trips to the same double.
inline std::string format_exact(double v) { return fmt::format("{}", v); }

// Two-decimal presentation; negative zero prints as 0.00.
inline std::string format_2dp(double v) {
  std::string s = fmt::format("{:.2f}", v);
  if (s == "-0.00") s = "0.00";
  return s;
}

// A field written into a CSV row or Markdown cell must not break the row.
inline void check_tag(std::string_view tag, std::string_view what) {
  require(!tag.empty() && tag.find_first_of(",|\n\r\"") == std::string_view::npos,
          ErrorKind::kInvalidArgument,
          std::string(what) + " '" + std::string(tag) + "' is empty or contains , | \" or a newline");
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line of each row
};

inline std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.emplace_back(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

// Plain comma-separated text without quoting. Blank lines are skipped; every
// row must have as many fields as the header.
inline CsvTable parse_csv(std::string_view text, const std::string& source) {
  CsvTable t;
  std::size_t line_no = 0, pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    auto fields = split_fields(line);
    if (t.header.empty()) {
      t.header = std::move(fields);
      continue;
    }
    require(fields.size() == t.header.size(), ErrorKind::kFormat,
            source + ":" + std::to_string(line_no) + ": expected " +
                std::to_string(t.header.size()) + " fields, found " +
                std::to_string(fields.size()));
    t.rows.push_back(std::move(fields));
    t.line_numbers.push_back(line_no);
  }
  require(!t.header.empty(), ErrorKind::kFormat, source + ": empty CSV");
  return t;
}

inline double parse_number(const std::string& s, const std::string& where) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  require(used == s.size() && !s.empty() && std::isfinite(v), ErrorKind::kFormat,
          where + ": '" + s + "' is not a finite number");
  return v;
}

}  // namespace dtta

#endif  // DTTA_UTIL_TEXT_HPP_
