#pragma once

// Descriptive load statistics: intraday profiles, yearly daily-average
// curves, weekday/weekend splits, load factor and monthly energy.

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "gridcast/calendar.hpp"
#include "gridcast/error.hpp"
#include "gridcast/timeseries.hpp"

namespace gridcast {

struct DailyProfile {
  YearMonth period;
  std::array<double, 24> hourly_means{};
};

struct DatedValue {
  Date date;
  double value = 0.0;

  friend bool operator==(const DatedValue&, const DatedValue&) = default;
};

struct YearlyProfile {
  int year = 0;
  std::vector<DatedValue> daily_means;
};

struct LoadFactorResult {
  Date start;
  Date end;
  double average_load = 0.0;
  double peak_load = 0.0;
  double load_factor = 0.0;
};

struct GenerationDelta {
  YearMonth period;
  double delta_gwh = 0.0;
};

// Days of week using 0 = Sunday .. 6 = Saturday.
using WeekdaySet = std::set<unsigned>;

// Friday and Saturday.
inline WeekdaySet default_weekend() { return {5, 6}; }

inline std::optional<unsigned> parse_weekday(std::string_view name) {
  static constexpr std::array<std::string_view, 7> names{"sunday",   "monday", "tuesday", "wednesday",
                                                         "thursday", "friday", "saturday"};
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  for (unsigned i = 0; i < names.size(); ++i)
    if (lower == names[i] || lower == names[i].substr(0, 3)) return i;
  return std::nullopt;
}

namespace detail {

inline void require_hourly(const LoadSeries& s, std::string_view op) {
  if (s.resolution() != Resolution::Hourly)
    fail(ErrorKind::Resolution, std::string(op) + " requires an hourly series");
}

}  // namespace detail

inline DailyProfile hourly_average_profile(const LoadSeries& series, YearMonth period) {
  detail::require_hourly(series, "hourly_average_profile");
  std::array<double, 24> sum{};
  std::array<std::size_t, 24> count{};
  for (const auto& r : series) {
    if (!r.demand || calendar::year_month_of(calendar::date_of(r.timestamp)) != period) continue;
    const unsigned h = calendar::hour_of(r.timestamp);
    sum[h] += *r.demand;
    ++count[h];
  }
  DailyProfile p{period, {}};
  for (unsigned h = 0; h < 24; ++h) {
    if (count[h] == 0)
      fail(ErrorKind::Coverage, "no observations at hour " + std::to_string(h) + " in " +
                                    calendar::format_year_month(period));
    p.hourly_means[h] = sum[h] / static_cast<double>(count[h]);
  }
  return p;
}

// Mean of each calendar day that has all 24 hourly observations.
inline std::vector<DatedValue> complete_daily_means(const LoadSeries& series) {
  detail::require_hourly(series, "daily means");
  std::vector<DatedValue> out;
  const auto& recs = series.records();
  std::size_t i = 0;
  while (i < recs.size()) {
    const Date day = calendar::date_of(recs[i].timestamp);
    double sum = 0.0;
    std::size_t observed = 0;
    std::size_t j = i;
    for (; j < recs.size() && calendar::date_of(recs[j].timestamp) == day; ++j) {
      if (recs[j].demand) {
        sum += *recs[j].demand;
        ++observed;
      }
    }
    if (observed == 24) out.push_back({day, sum / 24.0});
    i = j;
  }
  return out;
}

inline YearlyProfile yearly_daily_average(const LoadSeries& series, int year) {
  YearlyProfile p{year, {}};
  for (const auto& dv : complete_daily_means(series))
    if (calendar::year_of(dv.date) == year) p.daily_means.push_back(dv);
  if (p.daily_means.empty()) fail(ErrorKind::EmptyData, "no complete days in " + std::to_string(year));
  return p;
}

struct WeekSplit {
  YearlyProfile weekend;
  YearlyProfile weekday;
};

inline WeekSplit weekday_weekend_split(const YearlyProfile& profile, const WeekdaySet& weekend = default_weekend()) {
  WeekSplit out{{profile.year, {}}, {profile.year, {}}};
  for (const auto& dv : profile.daily_means)
    (weekend.contains(calendar::weekday_of(dv.date)) ? out.weekend : out.weekday).daily_means.push_back(dv);
  return out;
}

// Average over peak of the observed demands on dates [start, end].
inline LoadFactorResult load_factor(const LoadSeries& series, Date start, Date end) {
  double sum = 0.0;
  double peak = -std::numeric_limits<double>::infinity();
  std::size_t n = 0;
  for (const auto& r : series) {
    const Date d = calendar::date_of(r.timestamp);
    if (!r.demand || d < start || d > end) continue;
    sum += *r.demand;
    peak = std::max(peak, *r.demand);
    ++n;
  }
  if (n == 0)
    fail(ErrorKind::EmptyData, "no observations between " + calendar::format_date(start) + " and " +
                                   calendar::format_date(end));
  if (peak <= 0.0) fail(ErrorKind::Validation, "peak demand is not positive");
  const double avg = sum / static_cast<double>(n);
  return {start, end, avg, peak, avg / peak};
}

// Energy in GWh of a fully covered month (MW x 1 h per sample).
inline double monthly_energy(const LoadSeries& series, YearMonth period) {
  detail::require_hourly(series, "monthly_energy");
  const std::size_t expected = calendar::days_in_month(period.year, period.month) * 24u;
  double mwh = 0.0;
  std::size_t n = 0;
  for (const auto& r : series) {
    if (!r.demand || calendar::year_month_of(calendar::date_of(r.timestamp)) != period) continue;
    mwh += *r.demand;
    ++n;
  }
  if (n != expected)
    fail(ErrorKind::Coverage, calendar::format_year_month(period) + " has " + std::to_string(n) + " of " +
                                  std::to_string(expected) + " hourly observations");
  return mwh / 1000.0;
}

inline GenerationDelta generation_delta(YearMonth period, double this_year_gwh, double prev_year_gwh) {
  return {period, this_year_gwh - prev_year_gwh};
}

inline double percent_change(double current, double reference) {
  if (reference == 0.0) fail(ErrorKind::Division, "percent change against a zero reference");
  return 100.0 * (current - reference) / reference;
}

// ---- export -----------------------------------------------------------------

inline std::string to_csv(const DailyProfile& p) {
  std::string out = "hour,mean_mw\n";
  for (unsigned h = 0; h < 24; ++h) out += std::to_string(h) + ',' + detail::format_double(p.hourly_means[h]) + '\n';
  return out;
}

inline std::string to_csv(const YearlyProfile& p) {
  std::string out = "date,mean_mw\n";
  for (const auto& dv : p.daily_means) out += calendar::format_date(dv.date) + ',' + detail::format_double(dv.value) + '\n';
  return out;
}

inline std::string to_csv(const LoadFactorResult& r) {
  return "start,end,average_load_mw,peak_load_mw,load_factor\n" + calendar::format_date(r.start) + ',' +
         calendar::format_date(r.end) + ',' + detail::format_double(r.average_load) + ',' +
         detail::format_double(r.peak_load) + ',' + detail::format_double(r.load_factor) + '\n';
}

// Plot-ready documents of the form {kind, period, values[]}.
inline nlohmann::json to_json(const DailyProfile& p) {
  nlohmann::json values = nlohmann::json::array();
  for (unsigned h = 0; h < 24; ++h) values.push_back({{"hour", h}, {"mean_mw", p.hourly_means[h]}});
  return {{"kind", "hourly_profile"}, {"period", calendar::format_year_month(p.period)}, {"values", values}};
}

inline nlohmann::json to_json(const YearlyProfile& p, std::string_view kind = "yearly_profile") {
  nlohmann::json values = nlohmann::json::array();
  for (const auto& dv : p.daily_means) values.push_back({{"date", calendar::format_date(dv.date)}, {"mean_mw", dv.value}});
  return {{"kind", kind}, {"period", std::to_string(p.year)}, {"values", values}};
}

inline nlohmann::json to_json(const LoadFactorResult& r) {
  return {{"kind", "load_factor"},
          {"period", calendar::format_date(r.start) + "/" + calendar::format_date(r.end)},
          {"values",
           {{{"average_load_mw", r.average_load}, {"peak_load_mw", r.peak_load}, {"load_factor", r.load_factor}}}}};
}

}  // namespace gridcast
