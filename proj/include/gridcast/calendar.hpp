#pragma once

// Naive local civil time on an hourly grid. No timezone or DST arithmetic is
// performed: every timestamp is interpreted as wall-clock time of the grid.

#include <charconv>
#include <chrono>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

#include "gridcast/error.hpp"

namespace gridcast {

using Date = std::chrono::sys_days;
using HourStamp = std::chrono::sys_time<std::chrono::hours>;

struct YearMonth {
  int year = 0;
  unsigned month = 0;  // 1..12

  friend constexpr auto operator<=>(const YearMonth&, const YearMonth&) = default;
};

namespace calendar {

inline Date make_date(int y, unsigned m, unsigned d) {
  return Date{std::chrono::year{y} / std::chrono::month{m} / std::chrono::day{d}};
}

inline HourStamp make_stamp(int y, unsigned m, unsigned d, unsigned hour) {
  return HourStamp{make_date(y, m, d)} + std::chrono::hours{hour};
}

inline Date date_of(HourStamp t) { return std::chrono::floor<std::chrono::days>(t); }

inline unsigned hour_of(HourStamp t) {
  return static_cast<unsigned>((t - HourStamp{date_of(t)}).count());
}

inline std::chrono::year_month_day ymd(Date d) { return std::chrono::year_month_day{d}; }

inline int year_of(Date d) { return static_cast<int>(ymd(d).year()); }
inline unsigned month_of(Date d) { return static_cast<unsigned>(ymd(d).month()); }
inline unsigned day_of(Date d) { return static_cast<unsigned>(ymd(d).day()); }
inline YearMonth year_month_of(Date d) { return {year_of(d), month_of(d)}; }

// 1-based ordinal day within the year.
inline unsigned day_of_year(Date d) {
  const Date jan1 = make_date(year_of(d), 1, 1);
  return static_cast<unsigned>((d - jan1).count()) + 1;
}

inline unsigned days_in_month(int y, unsigned m) {
  const auto last = std::chrono::year_month_day_last{std::chrono::year{y} / std::chrono::month{m} / std::chrono::last};
  return static_cast<unsigned>(last.day());
}

inline Date first_of_month(YearMonth ym) { return make_date(ym.year, ym.month, 1); }
inline Date last_of_month(YearMonth ym) { return make_date(ym.year, ym.month, days_in_month(ym.year, ym.month)); }

inline YearMonth next_month(YearMonth ym) {
  return ym.month == 12 ? YearMonth{ym.year + 1, 1} : YearMonth{ym.year, ym.month + 1};
}

// 0 = Sunday .. 6 = Saturday
inline unsigned weekday_of(Date d) { return std::chrono::weekday{d}.c_encoding(); }

namespace detail {

inline std::optional<unsigned> fixed_digits(std::string_view s) {
  unsigned v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') return std::nullopt;
    v = v * 10 + static_cast<unsigned>(c - '0');
  }
  return v;
}

}  // namespace detail

// Parses "YYYY-MM-DD". Returns nullopt on malformed or out-of-range input.
inline std::optional<Date> parse_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  auto y = detail::fixed_digits(s.substr(0, 4));
  auto m = detail::fixed_digits(s.substr(5, 2));
  auto d = detail::fixed_digits(s.substr(8, 2));
  if (!y || !m || !d) return std::nullopt;
  const std::chrono::year_month_day v{std::chrono::year{static_cast<int>(*y)}, std::chrono::month{*m},
                                      std::chrono::day{*d}};
  if (!v.ok()) return std::nullopt;
  return Date{v};
}

struct StampParse {
  std::optional<HourStamp> stamp;
  std::string problem;
};

// Parses "YYYY-MM-DDTHH:MM" where MM must be 00.
inline StampParse parse_stamp(std::string_view s) {
  if (s.size() != 16 || s[10] != 'T' || s[13] != ':') return {std::nullopt, "expected YYYY-MM-DDTHH:MM"};
  auto date = parse_date(s.substr(0, 10));
  if (!date) return {std::nullopt, "invalid calendar date"};
  auto hh = detail::fixed_digits(s.substr(11, 2));
  auto mm = detail::fixed_digits(s.substr(14, 2));
  if (!hh || !mm) return {std::nullopt, "expected YYYY-MM-DDTHH:MM"};
  if (*hh > 23) return {std::nullopt, "hour out of range"};
  if (*mm != 0) return {std::nullopt, "timestamp not on the hourly grid (minutes must be 00)"};
  return {HourStamp{*date} + std::chrono::hours{*hh}, {}};
}

inline Date parse_date_or_throw(std::string_view s) {
  auto d = parse_date(s);
  if (!d) fail(ErrorKind::Parse, "invalid date '" + std::string(s) + "' (expected YYYY-MM-DD)");
  return *d;
}

inline std::string format_date(Date d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", year_of(d), month_of(d), day_of(d));
  return buf;
}

inline std::string format_stamp(HourStamp t) {
  char buf[24];
  const Date d = date_of(t);
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02u:00", year_of(d), month_of(d), day_of(d), hour_of(t));
  return buf;
}

inline std::string format_year_month(YearMonth ym) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u", ym.year, ym.month);
  return buf;
}

inline std::optional<YearMonth> parse_year_month(std::string_view s) {
  if (s.size() != 7 || s[4] != '-') return std::nullopt;
  auto y = detail::fixed_digits(s.substr(0, 4));
  auto m = detail::fixed_digits(s.substr(5, 2));
  if (!y || !m || *m < 1 || *m > 12) return std::nullopt;
  return YearMonth{static_cast<int>(*y), *m};
}

}  // namespace calendar
}  // namespace gridcast
