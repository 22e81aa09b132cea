#pragma once

// Actual-vs-counterfactual comparison of daily demand, aggregated by
// calendar month.

#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gridcast/calendar.hpp"
#include "gridcast/error.hpp"
#include "gridcast/timeseries.hpp"

namespace gridcast {

struct ImpactRow {
  YearMonth month;
  std::optional<double> actual_mean;    // MW
  std::optional<double> forecast_mean;  // MW
  std::optional<double> gap_percent;
  unsigned days_covered = 0;  // dates present in both series
  unsigned days_in_month = 0;
  bool flagged = false;  // coverage below the threshold

  friend bool operator==(const ImpactRow&, const ImpactRow&) = default;
};

struct ImpactReport {
  Date window_start;
  Date window_end;
  std::vector<ImpactRow> rows;
  std::optional<Date> crossover_date;
};

struct ImpactOptions {
  double min_coverage = 0.9;
  // Number of consecutive days with actual >= forecast that marks recovery.
  unsigned crossover_run = 1;
};

inline double gap_percent(double actual_mean, double forecast_mean) {
  if (!(forecast_mean > 0.0)) fail(ErrorKind::Validation, "forecast mean must be positive");
  return 100.0 * (actual_mean - forecast_mean) / forecast_mean;
}

namespace detail {

inline std::map<Date, double> observed_by_date(const LoadSeries& s, std::string_view name) {
  if (s.resolution() != Resolution::Daily)
    fail(ErrorKind::Resolution, std::string(name) + " series must be daily");
  std::map<Date, double> out;
  for (const auto& r : s)
    if (r.demand) out.emplace(calendar::date_of(r.timestamp), *r.demand);
  return out;
}

}  // namespace detail

inline ImpactReport counterfactual_gap(const LoadSeries& actual, const LoadSeries& forecast, Date window_start,
                                       Date window_end, const ImpactOptions& options = {}) {
  require(options.crossover_run >= 1, ErrorKind::Validation, "crossover run must be at least one day");
  const auto a = detail::observed_by_date(actual, "actual");
  const auto f = detail::observed_by_date(forecast, "forecast");

  ImpactReport report{window_start, window_end, {}, std::nullopt};
  if (window_end < window_start) return report;

  // Dates present in both series, across their whole span.
  std::map<Date, std::pair<double, double>> common;
  for (const auto& [d, va] : a)
    if (auto it = f.find(d); it != f.end()) common.emplace(d, std::make_pair(va, it->second));

  const auto in_window = [&](Date d) { return d >= window_start && d <= window_end; };
  bool any = false;
  for (const auto& [d, v] : common) any = any || in_window(d);
  if (!any)
    fail(ErrorKind::Coverage, "actual and forecast share no dates between " + calendar::format_date(window_start) +
                                  " and " + calendar::format_date(window_end));

  const YearMonth last = calendar::year_month_of(window_end);
  for (YearMonth ym = calendar::year_month_of(window_start); ym <= last; ym = calendar::next_month(ym)) {
    ImpactRow row;
    row.month = ym;
    row.days_in_month = calendar::days_in_month(ym.year, ym.month);
    double sum_a = 0.0, sum_f = 0.0;
    for (auto it = common.lower_bound(calendar::first_of_month(ym));
         it != common.end() && it->first <= calendar::last_of_month(ym); ++it) {
      if (!in_window(it->first)) continue;
      sum_a += it->second.first;
      sum_f += it->second.second;
      ++row.days_covered;
    }
    if (row.days_covered > 0) {
      row.actual_mean = sum_a / row.days_covered;
      row.forecast_mean = sum_f / row.days_covered;
      row.gap_percent = gap_percent(*row.actual_mean, *row.forecast_mean);
    }
    row.flagged = static_cast<double>(row.days_covered) < options.min_coverage * row.days_in_month;
    report.rows.push_back(row);
  }

  // Recovery: first run of actual >= forecast from the start of the deepest month.
  const ImpactRow* deepest = nullptr;
  for (const auto& row : report.rows)
    if (row.gap_percent && (!deepest || *row.gap_percent < *deepest->gap_percent)) deepest = &row;
  if (deepest) {
    unsigned run = 0;
    std::optional<Date> run_start, prev;
    for (auto it = common.lower_bound(calendar::first_of_month(deepest->month)); it != common.end(); ++it) {
      const bool above = it->second.first >= it->second.second;
      const bool contiguous = prev && it->first == *prev + std::chrono::days{1};
      prev = it->first;
      if (!above) {
        run = 0;
        continue;
      }
      if (run == 0 || !contiguous) {
        run = 0;
        run_start = it->first;
      }
      if (++run >= options.crossover_run) {
        report.crossover_date = run_start;
        break;
      }
    }
  }
  return report;
}

// ---- rendering ----------------------------------------------------------------

namespace detail {

inline std::string fixed2(const std::optional<double>& v) {
  if (!v) return {};
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.2f", *v);
  return buf;
}

}  // namespace detail

inline constexpr std::string_view kImpactCsvHeader =
    "month,actual_mean_mw,forecast_mean_mw,gap_percent,days_covered,days_in_month,flagged";

inline std::string to_csv(const ImpactReport& r) {
  std::string out(kImpactCsvHeader);
  out += '\n';
  for (const auto& row : r.rows) {
    out += calendar::format_year_month(row.month) + ',' + detail::fixed2(row.actual_mean) + ',' +
           detail::fixed2(row.forecast_mean) + ',' + detail::fixed2(row.gap_percent) + ',' +
           std::to_string(row.days_covered) + ',' + std::to_string(row.days_in_month) + ',' +
           (row.flagged ? "1" : "0") + '\n';
  }
  return out;
}

inline std::vector<ImpactRow> parse_impact_csv(std::string_view text) {
  const auto lines = detail::split_lines(detail::strip_bom(text));
  if (lines.empty() || lines.front() != kImpactCsvHeader)
    throw ParseError(1, "expected header '" + std::string(kImpactCsvHeader) + "'");
  std::vector<ImpactRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto line_no = i + 1;
    auto f = detail::split_fields(lines[i]);
    if (f.size() != 7) throw ParseError(line_no, "expected 7 fields");
    ImpactRow row;
    auto ym = calendar::parse_year_month(f[0]);
    if (!ym) throw ParseError(line_no, "invalid month '" + std::string(f[0]) + "'");
    row.month = *ym;
    auto number = [&](std::string_view s) -> std::optional<double> {
      if (s.empty()) return std::nullopt;
      auto v = detail::parse_double(s);
      if (!v) throw ParseError(line_no, "invalid number '" + std::string(s) + "'");
      return v;
    };
    row.actual_mean = number(f[1]);
    row.forecast_mean = number(f[2]);
    row.gap_percent = number(f[3]);
    auto covered = number(f[4]), days = number(f[5]);
    if (!covered || !days) throw ParseError(line_no, "missing day counts");
    row.days_covered = static_cast<unsigned>(*covered);
    row.days_in_month = static_cast<unsigned>(*days);
    if (f[6] != "0" && f[6] != "1") throw ParseError(line_no, "flagged must be 0 or 1");
    row.flagged = f[6] == "1";
    rows.push_back(row);
  }
  return rows;
}

inline nlohmann::json to_json(const ImpactReport& r) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  nlohmann::json months = nlohmann::json::array();
  for (const auto& row : r.rows)
    months.push_back({{"month", calendar::format_year_month(row.month)},
                      {"actual_mean_mw", opt(row.actual_mean)},
                      {"forecast_mean_mw", opt(row.forecast_mean)},
                      {"gap_percent", opt(row.gap_percent)},
                      {"days_covered", row.days_covered},
                      {"days_in_month", row.days_in_month},
                      {"flagged", row.flagged}});
  return {{"kind", "impact_report"},
          {"period", calendar::format_date(r.window_start) + "/" + calendar::format_date(r.window_end)},
          {"values", months},
          {"crossover_date", r.crossover_date ? nlohmann::json(calendar::format_date(*r.crossover_date))
                                              : nlohmann::json(nullptr)}};
}

inline std::string to_text(const ImpactReport& r) {
  std::string out = "Impact " + calendar::format_date(r.window_start) + " .. " + calendar::format_date(r.window_end) + "\n";
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-8s %14s %14s %10s %9s\n", "month", "actual_mw", "forecast_mw", "gap_%", "coverage");
  out += buf;
  for (const auto& row : r.rows) {
    std::snprintf(buf, sizeof buf, "%-8s %14s %14s %10s %4u/%-2u%s\n", calendar::format_year_month(row.month).c_str(),
                  detail::fixed2(row.actual_mean).c_str(), detail::fixed2(row.forecast_mean).c_str(),
                  detail::fixed2(row.gap_percent).c_str(), row.days_covered, row.days_in_month,
                  row.flagged ? " *" : "");
    out += buf;
  }
  out += "crossover: " + (r.crossover_date ? calendar::format_date(*r.crossover_date) : std::string("none")) + "\n";
  return out;
}

}  // namespace gridcast
