#pragma once

#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

#include "testkg/errors.hpp"

// ISO-8601 instants. Timestamps must carry an explicit timezone (Z or
// +hh:mm); everything is normalized to UTC milliseconds since the Unix
// epoch. Cross-laboratory records with implicit local time are rejected.

namespace testkg::timeutil {

using Millis = std::int64_t;

namespace detail {

inline bool leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

inline int days_in_month(int y, int m) {
  static constexpr int d[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (m == 2 && leap(y)) return 29;
  return d[m - 1];
}

inline std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = static_cast<unsigned>((153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1);
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  y = static_cast<int>(yy + (m <= 2));
}

inline int read_digits(std::string_view text, std::size_t& pos, int count, const char* what) {
  int value = 0;
  for (int i = 0; i < count; ++i) {
    if (pos >= text.size() || !std::isdigit(static_cast<unsigned char>(text[pos])))
      throw Error(Errc::InvalidTimestamp, std::string("expected digit in ") + what);
    value = value * 10 + (text[pos] - '0');
    ++pos;
  }
  return value;
}

inline void expect(std::string_view text, std::size_t& pos, char c) {
  if (pos >= text.size() || text[pos] != c)
    throw Error(Errc::InvalidTimestamp, std::string("expected '") + c + "' in timestamp");
  ++pos;
}

}  // namespace detail

/// Parses "YYYY-MM-DDThh:mm:ss[.fff](Z|±hh:mm)". A missing timezone is an
/// error, not an assumption.
inline Millis parse_instant(std::string_view text) {
  using namespace detail;
  std::size_t pos = 0;
  int year = read_digits(text, pos, 4, "year");
  expect(text, pos, '-');
  int month = read_digits(text, pos, 2, "month");
  expect(text, pos, '-');
  int day = read_digits(text, pos, 2, "day");
  expect(text, pos, 'T');
  int hour = read_digits(text, pos, 2, "hour");
  expect(text, pos, ':');
  int minute = read_digits(text, pos, 2, "minute");
  expect(text, pos, ':');
  int second = read_digits(text, pos, 2, "second");

  if (month < 1 || month > 12)
    throw Error(Errc::InvalidTimestamp, "month out of range: " + std::string(text));
  if (day < 1 || day > days_in_month(year, month))
    throw Error(Errc::InvalidTimestamp, "day out of range: " + std::string(text));
  if (hour > 23 || minute > 59 || second > 59)
    throw Error(Errc::InvalidTimestamp, "time of day out of range: " + std::string(text));

  std::int64_t millis = 0;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    int digits = 0;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
      if (digits < 3) millis = millis * 10 + (text[pos] - '0');
      ++digits;
      ++pos;
    }
    if (digits == 0)
      throw Error(Errc::InvalidTimestamp, "empty fractional seconds: " + std::string(text));
    while (digits < 3) {
      millis *= 10;
      ++digits;
    }
  }

  std::int64_t offset_min = 0;
  if (pos >= text.size())
    throw Error(Errc::InvalidTimestamp, "missing timezone: " + std::string(text));
  char tz = text[pos];
  if (tz == 'Z') {
    ++pos;
  } else if (tz == '+' || tz == '-') {
    ++pos;
    int oh = read_digits(text, pos, 2, "offset hours");
    expect(text, pos, ':');
    int om = read_digits(text, pos, 2, "offset minutes");
    if (oh > 14 || om > 59)
      throw Error(Errc::InvalidTimestamp, "timezone offset out of range: " + std::string(text));
    offset_min = oh * 60 + om;
    if (tz == '-') offset_min = -offset_min;
  } else {
    throw Error(Errc::InvalidTimestamp, "missing timezone: " + std::string(text));
  }
  if (pos != text.size())
    throw Error(Errc::InvalidTimestamp, "trailing characters in timestamp: " + std::string(text));

  std::int64_t days = days_from_civil(year, month, day);
  std::int64_t secs = days * 86400 + hour * 3600 + minute * 60 + second - offset_min * 60;
  return secs * 1000 + millis;
}

/// Formats as "YYYY-MM-DDThh:mm:ssZ", with ".fff" only when sub-second
/// precision is present.
inline std::string format_instant(Millis ms) {
  std::int64_t total_s = ms >= 0 ? ms / 1000 : (ms - 999) / 1000;
  int frac = static_cast<int>(ms - total_s * 1000);
  std::int64_t days = total_s >= 0 ? total_s / 86400 : (total_s - 86399) / 86400;
  int rem = static_cast<int>(total_s - days * 86400);
  int y, mo, d;
  detail::civil_from_days(days, y, mo, d);
  char buf[40];
  if (frac != 0)
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", y, mo, d,
                  rem / 3600, (rem / 60) % 60, rem % 60, frac);
  else
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02dZ", y, mo, d,
                  rem / 3600, (rem / 60) % 60, rem % 60);
  return buf;
}

inline bool is_valid_instant(std::string_view text) {
  try {
    parse_instant(text);
    return true;
  } catch (const Error&) {
    return false;
  }
}

}  // namespace testkg::timeutil
