// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "vigil/errors.hpp"

namespace vigil {

// ---------------------------------------------------------------------------
// Number formatting and parsing.
//
// All machine-readable output goes through format_double, which emits the
// shortest decimal string that parses back to the identical IEEE-754 value.
// That makes write -> read -> write a byte-level fixed point.
// ---------------------------------------------------------------------------

inline std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) throw std::logic_error("format_double: buffer too small");
  return std::string(buf, ptr);
}

inline std::string format_int(std::int64_t value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) throw std::logic_error("format_int: buffer too small");
  return std::string(buf, ptr);
}

inline bool try_parse_double(std::string_view text, double& out) {
  if (text.empty()) return false;
  if (text == "inf") {
    out = std::numeric_limits<double>::infinity();
    return true;
  }
  const char* first = text.data();
  const char* last = text.data() + text.size();
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) return false;
  out = value;
  return true;
}

inline bool try_parse_int(std::string_view text, std::int64_t& out) {
  if (text.empty()) return false;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) return false;
  out = value;
  return true;
}

// ---------------------------------------------------------------------------
// CSV reading and writing.
//
// Dialect: comma-separated, first row is a header, "\n" or "\r\n" row
// endings, optional UTF-8 BOM, RFC 4180 quoting ("..." with doubled quotes,
// embedded commas/newlines allowed). Blank lines are skipped.
// ---------------------------------------------------------------------------

inline std::string csv_escape(std::string_view field) {
  const bool needs_quotes = field.find_first_of(",\"\r\n") != std::string_view::npos;
  if (!needs_quotes) return std::string(field);
  std::string out;
  out.reserve(field.size() + 2);
  out.push_back('"');
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline std::string csv_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i != 0) out.push_back(',');
    out += csv_escape(fields[i]);
  }
  out.push_back('\n');
  return out;
}

struct CsvRow {
  std::vector<std::string> fields;
  std::size_t line = 0;  // 1-based line of the row's first character
};

// Streaming CSV parser over an in-memory buffer. Keeps the source filename so
// error messages can point at the offending record.
class CsvReader {
 public:
  CsvReader(std::string_view text, std::string filename)
      : text_(text), filename_(std::move(filename)) {
    if (text_.substr(0, 3) == "\xEF\xBB\xBF") {
      pos_ = 3;  // UTF-8 byte-order mark
    }
  }

  const std::string& filename() const { return filename_; }

  // Reads the next row. Returns false at end of input. Skips blank lines.
  bool next(CsvRow& row) {
    while (pos_ < text_.size()) {
      const std::size_t row_line = line_;
      if (text_[pos_] == '\n') {
        ++pos_;
        ++line_;
        continue;
      }
      if (text_[pos_] == '\r' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '\n') {
        pos_ += 2;
        ++line_;
        continue;
      }
      row.fields.clear();
      row.line = row_line;
      parse_record(row.fields);
      return true;
    }
    return false;
  }

  // Reads the header row and verifies it matches `expected` exactly.
  void expect_header(const std::vector<std::string>& expected) {
    CsvRow row;
    if (!next(row)) {
      throw ValidationError(filename_, 1, "missing header row");
    }
    if (row.fields != expected) {
      std::string want;
      for (std::size_t i = 0; i < expected.size(); ++i) {
        if (i != 0) want.push_back(',');
        want += expected[i];
      }
      std::string got;
      for (std::size_t i = 0; i < row.fields.size(); ++i) {
        if (i != 0) got.push_back(',');
        got += row.fields[i];
      }
      throw ValidationError(filename_, row.line,
                            "unexpected header: got \"" + got + "\", want \"" + want + "\"");
    }
  }

  // Convenience: throws a ValidationError anchored at `row`.
  [[noreturn]] void fail(const CsvRow& row, const std::string& reason) const {
    throw ValidationError(filename_, row.line, reason);
  }

 private:
  void parse_record(std::vector<std::string>& fields) {
    std::string field;
    bool in_quotes = false;
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (in_quotes) {
        if (c == '"') {
          if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '"') {
            field.push_back('"');
            pos_ += 2;
          } else {
            in_quotes = false;
            ++pos_;
          }
        } else {
          if (c == '\n') ++line_;
          field.push_back(c);
          ++pos_;
        }
        continue;
      }
      switch (c) {
        case '"':
          if (field.empty()) {
            in_quotes = true;
            ++pos_;
          } else {
            field.push_back(c);
            ++pos_;
          }
          break;
        case ',':
          fields.push_back(std::move(field));
          field.clear();
          ++pos_;
          break;
        case '\r':
          if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '\n') {
            fields.push_back(std::move(field));
            pos_ += 2;
            ++line_;
            return;
          }
          field.push_back(c);
          ++pos_;
          break;
        case '\n':
          fields.push_back(std::move(field));
          ++pos_;
          ++line_;
          return;
        default:
          field.push_back(c);
          ++pos_;
          break;
      }
    }
    if (in_quotes) {
      throw ValidationError(filename_, line_, "unterminated quoted field");
    }
    fields.push_back(std::move(field));
  }

  std::string_view text_;
  std::string filename_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

}  // namespace vigil
