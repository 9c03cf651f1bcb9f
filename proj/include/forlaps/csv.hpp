#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "forlaps/error.hpp"

namespace forlaps::csv {

/// One parsed record with the 1-based line number on which it started.
struct Record {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

/// RFC 4180 style reader: quoted fields may contain the delimiter, doubled
/// quotes, and line breaks. CRLF and LF line endings are accepted; a leading
/// UTF-8 BOM is skipped. Blank lines are ignored.
inline std::vector<Record> parse(std::string_view text, char delimiter = ',') {
  if (text.size() >= 3 && static_cast<unsigned char>(text[0]) == 0xEF &&
      static_cast<unsigned char>(text[1]) == 0xBB && static_cast<unsigned char>(text[2]) == 0xBF) {
    text.remove_prefix(3);
  }
  std::vector<Record> records;
  Record current;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t line = 1;
  current.line = 1;

  auto end_field = [&] {
    current.fields.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    const bool blank = current.fields.size() == 1 && current.fields[0].empty() && !field_started;
    if (!blank) records.push_back(std::move(current));
    current = Record{};
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && field.empty() && !field_started) {
      in_quotes = true;
      field_started = true;
    } else if (c == delimiter) {
      end_field();
      field_started = false;
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      const bool had_quote = field_started;
      end_field();
      field_started = had_quote;
      end_record();
      field_started = false;
      ++line;
      current.line = line;
    } else {
      field.push_back(c);
    }
  }
  if (in_quotes) throw RowError(current.line, "unterminated quoted field");
  if (!field.empty() || field_started || !current.fields.empty()) {
    end_field();
    end_record();
  }
  return records;
}

inline bool needs_quoting(std::string_view value, char delimiter) {
  for (const char c : value) {
    if (c == delimiter || c == '"' || c == '\n' || c == '\r') return true;
  }
  return !value.empty() && (value.front() == ' ' || value.back() == ' ');
}

inline void append_field(std::string& out, std::string_view value, char delimiter = ',') {
  if (!needs_quoting(value, delimiter)) {
    out.append(value);
    return;
  }
  out.push_back('"');
  for (const char c : value) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
}

inline void append_row(std::string& out, const std::vector<std::string>& fields, char delimiter = ',') {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out.push_back(delimiter);
    append_field(out, fields[i], delimiter);
  }
  out.push_back('\n');
}

}  // namespace forlaps::csv
