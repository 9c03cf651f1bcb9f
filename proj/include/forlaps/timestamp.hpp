#pragma once

#include <charconv>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <iomanip>
#include <locale>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

namespace forlaps {

/// UTC instant with millisecond precision.
using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;
using Millis = std::chrono::milliseconds;

namespace detail {

inline bool read_digits(std::string_view s, std::size_t& pos, std::size_t count, int& out) {
  if (pos + count > s.size()) return false;
  int value = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const char c = s[pos + i];
    if (c < '0' || c > '9') return false;
    value = value * 10 + (c - '0');
  }
  pos += count;
  out = value;
  return true;
}

inline std::optional<Timestamp> make_timestamp(int y, int mo, int d, int h, int mi, int sec, int ms) {
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || sec > 60 || ms > 999) return std::nullopt;
  return Timestamp{sys_days{ymd}} + hours{h} + minutes{mi} + seconds{sec} + milliseconds{ms};
}

}  // namespace detail

/// Parses ISO-8601: `YYYY-MM-DD`, optionally followed by `T` or a space and
/// `hh:mm[:ss[.fraction]]`, optionally followed by `Z` or a `+hh:mm`/`-hhmm`
/// offset. Offsets are normalised to UTC. Fractions beyond milliseconds are
/// truncated.
inline std::optional<Timestamp> parse_iso8601(std::string_view s) {
  std::size_t pos = 0;
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0, ms = 0;
  if (!detail::read_digits(s, pos, 4, y) || pos >= s.size() || s[pos++] != '-' ||
      !detail::read_digits(s, pos, 2, mo) || pos >= s.size() || s[pos++] != '-' ||
      !detail::read_digits(s, pos, 2, d)) {
    return std::nullopt;
  }
  int offset_minutes = 0;
  if (pos < s.size()) {
    if (s[pos] != 'T' && s[pos] != ' ') return std::nullopt;
    ++pos;
    if (!detail::read_digits(s, pos, 2, h) || pos >= s.size() || s[pos++] != ':' ||
        !detail::read_digits(s, pos, 2, mi)) {
      return std::nullopt;
    }
    if (pos < s.size() && s[pos] == ':') {
      ++pos;
      if (!detail::read_digits(s, pos, 2, sec)) return std::nullopt;
      if (pos < s.size() && (s[pos] == '.' || s[pos] == ',')) {
        ++pos;
        int digits = 0;
        while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
          if (digits < 3) ms = ms * 10 + (s[pos] - '0');
          ++digits;
          ++pos;
        }
        if (digits == 0) return std::nullopt;
        for (int i = digits; i < 3; ++i) ms *= 10;
      }
    }
    if (pos < s.size()) {
      if (s[pos] == 'Z') {
        ++pos;
      } else if (s[pos] == '+' || s[pos] == '-') {
        const int sign = s[pos] == '-' ? -1 : 1;
        ++pos;
        int oh = 0, om = 0;
        if (!detail::read_digits(s, pos, 2, oh)) return std::nullopt;
        if (pos < s.size() && s[pos] == ':') ++pos;
        if (!detail::read_digits(s, pos, 2, om)) return std::nullopt;
        offset_minutes = sign * (oh * 60 + om);
      } else {
        return std::nullopt;
      }
    }
  }
  if (pos != s.size()) return std::nullopt;
  auto ts = detail::make_timestamp(y, mo, d, h, mi, sec, ms);
  if (!ts) return std::nullopt;
  return *ts - std::chrono::minutes{offset_minutes};
}

/// Parses with a strftime-style format (`%Y-%m-%d %H:%M:%S`, `%d/%m/%Y %H:%M`,
/// ...). The value is interpreted as UTC with whole-second precision. The
/// special format "iso8601" routes to parse_iso8601.
inline std::optional<Timestamp> parse_timestamp(std::string_view s, std::string_view format) {
  if (format.empty() || format == "iso8601") return parse_iso8601(s);
  std::tm tm{};
  std::istringstream in{std::string(s)};
  in.imbue(std::locale::classic());
  in >> std::get_time(&tm, std::string(format).c_str());
  if (in.fail()) return std::nullopt;
  in >> std::ws;
  if (!in.eof()) return std::nullopt;
  return detail::make_timestamp(tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour,
                                tm.tm_min, tm.tm_sec, 0);
}

/// Canonical form: `YYYY-MM-DDThh:mm:ss.mmmZ`.
inline std::string format_timestamp(Timestamp ts) {
  using namespace std::chrono;
  const auto day_point = floor<days>(ts);
  const year_month_day ymd{day_point};
  auto rest = ts - day_point;
  const auto h = duration_cast<hours>(rest);
  rest -= h;
  const auto mi = duration_cast<minutes>(rest);
  rest -= mi;
  const auto sec = duration_cast<seconds>(rest);
  rest -= sec;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d.%03dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(h.count()), static_cast<int>(mi.count()),
                static_cast<int>(sec.count()), static_cast<int>(rest.count()));
  return buf;
}

}  // namespace forlaps
