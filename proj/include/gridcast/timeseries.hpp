#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gridcast/calendar.hpp"
#include "gridcast/error.hpp"

namespace gridcast {

enum class Resolution { Hourly, Daily };

inline std::chrono::hours step_of(Resolution r) {
  return r == Resolution::Hourly ? std::chrono::hours{1} : std::chrono::hours{24};
}

inline std::string_view to_string(Resolution r) { return r == Resolution::Hourly ? "hourly" : "daily"; }

struct LoadRecord {
  HourStamp timestamp;
  std::optional<double> demand;  // MW; nullopt marks a missing observation

  bool missing() const { return !demand.has_value(); }
  friend bool operator==(const LoadRecord&, const LoadRecord&) = default;
};

// Ordered, uniformly spaced demand observations. Holes in the grid are
// explicit missing records, never absent rows.
class LoadSeries {
 public:
  LoadSeries() = default;

  LoadSeries(std::vector<LoadRecord> records, Resolution resolution)
      : records_(std::move(records)), resolution_(resolution) {
    const auto step = step_of(resolution_);
    for (std::size_t i = 0; i < records_.size(); ++i) {
      const auto& r = records_[i];
      if (r.demand && (!std::isfinite(*r.demand) || *r.demand < 0.0))
        fail(ErrorKind::Validation, "demand at " + calendar::format_stamp(r.timestamp) + " is negative or non-finite");
      if (resolution_ == Resolution::Daily && calendar::hour_of(r.timestamp) != 0)
        fail(ErrorKind::Resolution, "daily record " + calendar::format_stamp(r.timestamp) + " is not at T00:00");
      if (i > 0 && r.timestamp - records_[i - 1].timestamp != step)
        fail(ErrorKind::Validation, "records are not uniformly spaced at " +
                                        calendar::format_stamp(r.timestamp));
    }
  }

  const std::vector<LoadRecord>& records() const { return records_; }
  Resolution resolution() const { return resolution_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const LoadRecord& operator[](std::size_t i) const { return records_[i]; }

  auto begin() const { return records_.begin(); }
  auto end() const { return records_.end(); }

  std::size_t missing_count() const {
    return static_cast<std::size_t>(std::count_if(records_.begin(), records_.end(),
                                                  [](const LoadRecord& r) { return r.missing(); }));
  }

  // Demands as a plain vector; throws if any value is missing.
  std::vector<double> values() const {
    std::vector<double> out;
    out.reserve(records_.size());
    for (const auto& r : records_) {
      require(r.demand.has_value(), ErrorKind::Validation,
              "missing demand at " + calendar::format_stamp(r.timestamp));
      out.push_back(*r.demand);
    }
    return out;
  }

  // Records with timestamps in [from, to).
  LoadSeries slice(HourStamp from, HourStamp to) const {
    std::vector<LoadRecord> out;
    for (const auto& r : records_)
      if (r.timestamp >= from && r.timestamp < to) out.push_back(r);
    return LoadSeries(std::move(out), resolution_);
  }

  friend bool operator==(const LoadSeries&, const LoadSeries&) = default;

 private:
  std::vector<LoadRecord> records_;
  Resolution resolution_ = Resolution::Hourly;
};

namespace detail {

inline std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = nl + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

inline std::vector<std::string_view> split_fields(std::string_view line, char sep = ',') {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    auto p = line.find(sep, pos);
    if (p == std::string_view::npos) {
      out.push_back(line.substr(pos));
      return out;
    }
    out.push_back(line.substr(pos, p - pos));
    pos = p + 1;
  }
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

// Shortest representation that parses back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

inline std::string_view strip_bom(std::string_view text) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  return text;
}

}  // namespace detail

// Picks Daily when every stamp sits at midnight and consecutive stamps are at
// least a day apart; anything else is Hourly.
inline Resolution detect_resolution(const std::vector<LoadRecord>& sorted) {
  if (sorted.size() < 2) {
    return (!sorted.empty() && calendar::hour_of(sorted.front().timestamp) != 0) ? Resolution::Hourly
                                                                                : Resolution::Daily;
  }
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (calendar::hour_of(sorted[i].timestamp) != 0) return Resolution::Hourly;
    if (i > 0 && sorted[i].timestamp - sorted[i - 1].timestamp < std::chrono::hours{24}) return Resolution::Hourly;
  }
  return Resolution::Daily;
}

// Parses `timestamp,demand_mw` CSV. Absent grid points between the first and
// last row become missing records so the result is uniformly spaced.
inline LoadSeries parse_load_csv(std::string_view text, std::optional<Resolution> resolution = std::nullopt) {
  const auto lines = detail::split_lines(detail::strip_bom(text));
  if (lines.empty()) throw ParseError(1, "empty document");
  {
    auto header = detail::split_fields(lines.front());
    if (header.size() != 2 || detail::trim(header[0]) != "timestamp" || detail::trim(header[1]) != "demand_mw")
      throw ParseError(1, "expected header 'timestamp,demand_mw'");
  }

  std::vector<std::pair<LoadRecord, std::size_t>> rows;  // record, source line
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    if (lines[i].empty()) continue;
    auto fields = detail::split_fields(lines[i]);
    if (fields.size() != 2) throw ParseError(line_no, "expected 2 fields, found " + std::to_string(fields.size()));
    auto stamp = calendar::parse_stamp(detail::trim(fields[0]));
    if (!stamp.stamp) throw ParseError(line_no, stamp.problem + " in '" + std::string(fields[0]) + "'");
    LoadRecord rec{*stamp.stamp, std::nullopt};
    auto field = detail::trim(fields[1]);
    if (!field.empty()) {
      auto v = detail::parse_double(field);
      if (!v || !std::isfinite(*v)) throw ParseError(line_no, "invalid demand '" + std::string(field) + "'");
      if (*v < 0.0)
        fail(ErrorKind::Validation, "line " + std::to_string(line_no) + ": negative demand " + std::string(field));
      rec.demand = *v;
    }
    rows.emplace_back(rec, line_no);
  }

  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto& a, const auto& b) { return a.first.timestamp < b.first.timestamp; });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].first.timestamp == rows[i - 1].first.timestamp)
      fail(ErrorKind::Duplicate, "timestamp " + calendar::format_stamp(rows[i].first.timestamp) +
                                     " appears on lines " + std::to_string(rows[i - 1].second) + " and " +
                                     std::to_string(rows[i].second));
  }

  std::vector<LoadRecord> sorted;
  sorted.reserve(rows.size());
  for (auto& [rec, line] : rows) sorted.push_back(rec);

  const Resolution res = resolution.value_or(detect_resolution(sorted));
  const auto step = step_of(res);
  std::vector<LoadRecord> filled;
  filled.reserve(sorted.size());
  for (const auto& rec : sorted) {
    if (res == Resolution::Daily && calendar::hour_of(rec.timestamp) != 0)
      fail(ErrorKind::Resolution, "daily series has non-midnight stamp " + calendar::format_stamp(rec.timestamp));
    if (!filled.empty()) {
      auto gap = rec.timestamp - filled.back().timestamp;
      if (gap % step != std::chrono::hours{0})
        fail(ErrorKind::Resolution, "stamp " + calendar::format_stamp(rec.timestamp) + " is off the " +
                                        std::string(to_string(res)) + " grid");
      for (auto t = filled.back().timestamp + step; t < rec.timestamp; t += step) filled.push_back({t, std::nullopt});
    }
    filled.push_back(rec);
  }
  return LoadSeries(std::move(filled), res);
}

inline std::string to_csv(const LoadSeries& series) {
  std::string out = "timestamp,demand_mw\n";
  for (const auto& r : series) {
    out += calendar::format_stamp(r.timestamp);
    out += ',';
    if (r.demand) out += detail::format_double(*r.demand);
    out += '\n';
  }
  return out;
}

constexpr std::chrono::hours kDefaultMaxGap{72};

// Fills missing demands on the straight line between the nearest observed
// neighbours. Runs of missing data longer than `max_gap` are rejected.
inline LoadSeries interpolate_missing(const LoadSeries& series, std::chrono::hours max_gap = kDefaultMaxGap) {
  const auto& recs = series.records();
  const bool any = std::any_of(recs.begin(), recs.end(), [](const LoadRecord& r) { return !r.missing(); });
  if (!any) fail(ErrorKind::EmptyData, "series has no observed demand");
  if (recs.front().missing() || recs.back().missing())
    fail(ErrorKind::Boundary, "cannot interpolate a missing value at the series boundary");

  const auto step = step_of(series.resolution());
  std::vector<LoadRecord> out = recs;
  std::size_t i = 0;
  while (i < out.size()) {
    if (!out[i].missing()) {
      ++i;
      continue;
    }
    const std::size_t left = i - 1;
    std::size_t right = i;
    while (out[right].missing()) ++right;
    const std::size_t run = right - left - 1;
    if (step * static_cast<long>(run) > max_gap)
      fail(ErrorKind::GapTooLong, std::to_string(run) + " consecutive missing " + std::string(to_string(series.resolution())) +
                                      " values starting " + calendar::format_stamp(out[i].timestamp) +
                                      " exceed the " + std::to_string(max_gap.count()) + "h limit");
    const double y0 = *out[left].demand;
    const double y1 = *out[right].demand;
    const double span = static_cast<double>(right - left);
    for (std::size_t k = left + 1; k < right; ++k)
      out[k].demand = y0 + (y1 - y0) * (static_cast<double>(k - left) / span);
    i = right;
  }
  return LoadSeries(std::move(out), series.resolution());
}

// Daily means of a gap-free hourly series; partial days at the ends are dropped.
inline LoadSeries resample_daily(const LoadSeries& series) {
  if (series.resolution() != Resolution::Hourly) fail(ErrorKind::Resolution, "resample_daily requires an hourly series");
  if (series.missing_count() != 0)
    fail(ErrorKind::Validation, "resample_daily requires a gap-free series; interpolate first");

  std::vector<LoadRecord> out;
  const auto& recs = series.records();
  std::size_t i = 0;
  while (i < recs.size() && calendar::hour_of(recs[i].timestamp) != 0) ++i;
  for (; i + 24 <= recs.size(); i += 24) {
    double sum = 0.0;
    for (std::size_t h = 0; h < 24; ++h) sum += *recs[i + h].demand;
    out.push_back({recs[i].timestamp, sum / 24.0});
  }
  return LoadSeries(std::move(out), Resolution::Daily);
}

}  // namespace gridcast
