#include <gtest/gtest.h>

#include <map>
#include <random>

#include "gridcast/analytics.hpp"

namespace gridcast {
namespace {

using calendar::make_date;
using calendar::make_stamp;

LoadSeries random_hourly(std::size_t n, std::uint64_t seed, HourStamp first = make_stamp(2019, 1, 27, 5),
                         double missing = 0.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(500.0, 15000.0);
  std::bernoulli_distribution drop(missing);
  std::vector<LoadRecord> recs;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = u(rng);
    recs.push_back({first + std::chrono::hours{i}, drop(rng) ? std::nullopt : std::optional<double>(v)});
  }
  return LoadSeries(std::move(recs), Resolution::Hourly);
}

LoadSeries constant_month(YearMonth ym, double mw) {
  std::vector<LoadRecord> recs;
  const auto first = HourStamp{calendar::first_of_month(ym)};
  for (unsigned i = 0; i < calendar::days_in_month(ym.year, ym.month) * 24; ++i)
    recs.push_back({first + std::chrono::hours{i}, mw});
  return LoadSeries(std::move(recs), Resolution::Hourly);
}

TEST(HourlyProfile, MatchesGroupByOracle) {
  const auto s = random_hourly(1000, 1, make_stamp(2019, 1, 27, 5), 0.05);
  const YearMonth feb{2019, 2};
  std::map<unsigned, std::pair<double, int>> groups;
  for (const auto& r : s)
    if (r.demand && calendar::year_month_of(calendar::date_of(r.timestamp)) == feb) {
      groups[calendar::hour_of(r.timestamp)].first += *r.demand;
      groups[calendar::hour_of(r.timestamp)].second++;
    }
  const auto p = hourly_average_profile(s, feb);
  ASSERT_EQ(groups.size(), 24u);
  for (const auto& [h, g] : groups) EXPECT_NEAR(p.hourly_means[h], g.first / g.second, 1e-9);
}

TEST(HourlyProfile, UncoveredHourIsReported) {
  std::vector<LoadRecord> recs;
  for (unsigned h = 0; h < 24; ++h) recs.push_back({make_stamp(2020, 4, 1, h), h == 3 ? std::nullopt : std::optional(1.0)});
  try {
    hourly_average_profile(LoadSeries(recs, Resolution::Hourly), {2020, 4});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Coverage);
    EXPECT_NE(std::string(e.what()).find("hour 3"), std::string::npos);
  }
}

TEST(YearlyDailyAverage, MatchesGroupByOracle) {
  const auto s = random_hourly(1000, 2, make_stamp(2018, 12, 20, 7), 0.01);
  std::map<Date, std::pair<double, int>> groups;
  for (const auto& r : s)
    if (r.demand) {
      groups[calendar::date_of(r.timestamp)].first += *r.demand;
      groups[calendar::date_of(r.timestamp)].second++;
    }
  const auto p = yearly_daily_average(s, 2019);
  std::size_t expected = 0;
  for (const auto& [d, g] : groups)
    if (g.second == 24 && calendar::year_of(d) == 2019) ++expected;
  ASSERT_EQ(p.daily_means.size(), expected);
  for (const auto& dv : p.daily_means) {
    const auto& g = groups.at(dv.date);
    EXPECT_EQ(g.second, 24);
    EXPECT_NEAR(dv.value, g.first / 24.0, 1e-9);
  }
  EXPECT_THROW(yearly_daily_average(s, 2021), Error);
}

TEST(WeekdayWeekend, CountsForFullYears) {
  for (int year : {2019, 2020}) {
    std::vector<LoadRecord> recs;
    auto t = make_stamp(year, 1, 1, 0);
    const int days = year == 2020 ? 366 : 365;
    for (int i = 0; i < days * 24; ++i, t += std::chrono::hours{1}) recs.push_back({t, 100.0});
    const auto split = weekday_weekend_split(yearly_daily_average(LoadSeries(recs, Resolution::Hourly), year));
    // 2019 starts on a Tuesday; 2020 is a leap year starting on Wednesday.
    EXPECT_EQ(split.weekend.daily_means.size(), 104u);
    EXPECT_EQ(split.weekday.daily_means.size() + split.weekend.daily_means.size(), static_cast<std::size_t>(days));
  }
  // A year starting on Friday has 105 Friday/Saturday days.
  std::vector<LoadRecord> recs;
  auto t = make_stamp(2021, 1, 1, 0);
  for (int i = 0; i < 365 * 24; ++i, t += std::chrono::hours{1}) recs.push_back({t, 1.0});
  EXPECT_EQ(weekday_weekend_split(yearly_daily_average(LoadSeries(recs, Resolution::Hourly), 2021)).weekend.daily_means.size(),
            105u);
}

TEST(WeekdayWeekend, ConfigurableWeekend) {
  YearlyProfile week{2023, {}};
  for (int i = 0; i < 7; ++i) week.daily_means.push_back({make_date(2023, 1, 1) + std::chrono::days{i}, 1.0});
  EXPECT_EQ(calendar::weekday_of(make_date(2023, 1, 1)), 0u);
  const auto split = weekday_weekend_split(week, {0, 6});
  EXPECT_EQ(split.weekend.daily_means.size(), 2u);
  EXPECT_EQ(split.weekday.daily_means.size(), 5u);
  EXPECT_EQ(parse_weekday("Fri"), 5u);
  EXPECT_EQ(parse_weekday("saturday"), 6u);
  EXPECT_FALSE(parse_weekday("someday"));
}

TEST(LoadFactor, SimpleAndOracle) {
  std::vector<LoadRecord> recs{{make_stamp(2020, 1, 1, 0), 50.0}, {make_stamp(2020, 1, 1, 1), 100.0}};
  EXPECT_DOUBLE_EQ(load_factor(LoadSeries(recs, Resolution::Hourly), make_date(2020, 1, 1), make_date(2020, 1, 1)).load_factor,
                   0.75);

  const auto s = random_hourly(1000, 3, make_stamp(2019, 1, 27, 5), 0.03);
  const Date a = make_date(2019, 2, 3), b = make_date(2019, 2, 20);
  double sum = 0.0, peak = 0.0;
  int n = 0;
  for (const auto& r : s) {
    const Date d = calendar::date_of(r.timestamp);
    if (!r.demand || d < a || d > b) continue;
    sum += *r.demand;
    peak = std::max(peak, *r.demand);
    ++n;
  }
  const auto lf = load_factor(s, a, b);
  EXPECT_NEAR(lf.average_load, sum / n, 1e-9);
  EXPECT_EQ(lf.peak_load, peak);
  EXPECT_NEAR(lf.load_factor, sum / n / peak, 1e-9);
  EXPECT_GT(lf.load_factor, 0.0);
  EXPECT_LE(lf.load_factor, 1.0);

  EXPECT_THROW(load_factor(s, make_date(2021, 1, 1), make_date(2021, 2, 1)), Error);
  std::vector<LoadRecord> zeros{{make_stamp(2020, 1, 1, 0), 0.0}};
  EXPECT_THROW(load_factor(LoadSeries(zeros, Resolution::Hourly), make_date(2020, 1, 1), make_date(2020, 1, 1)), Error);
}

TEST(MonthlyEnergy, ConstantAndOracle) {
  EXPECT_DOUBLE_EQ(monthly_energy(constant_month({2019, 6}, 6000.0), {2019, 6}), 4320.0);
  EXPECT_NEAR(monthly_energy(constant_month({2019, 2}, 1000.0 / 672.0 * 1000.0), {2019, 2}), 1000.0, 1e-9);

  const auto s = random_hourly(1000, 4, make_stamp(2019, 1, 27, 5));
  double sum = 0.0;
  for (const auto& r : s)
    if (calendar::year_month_of(calendar::date_of(r.timestamp)) == YearMonth{2019, 2}) sum += *r.demand;
  EXPECT_NEAR(monthly_energy(s, {2019, 2}), sum / 1000.0, 1e-9);
  // January is only partly covered.
  try {
    monthly_energy(s, {2019, 1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Coverage);
  }
}

TEST(GenerationDelta, ReproducesAprilDrop) {
  const double this_year = monthly_energy(constant_month({2020, 4}, 6000.0 * 1000.0 / 720.0), {2020, 4});
  const double last_year = monthly_energy(constant_month({2019, 4}, 7826.0 * 1000.0 / 720.0), {2019, 4});
  const auto d = generation_delta({2020, 4}, this_year, last_year);
  EXPECT_NEAR(d.delta_gwh, -1826.0, 1e-9);
  EXPECT_NEAR(generation_delta({2020, 2}, 4627.87, 4048.0).delta_gwh, 579.87, 1e-9);
}

TEST(PercentChange, Cases) {
  EXPECT_DOUBLE_EQ(percent_change(110.0, 100.0), 10.0);
  EXPECT_DOUBLE_EQ(percent_change(80.0, 100.0), -20.0);
  EXPECT_THROW(percent_change(1.0, 0.0), Error);
}

TEST(AnalyticsExport, JsonShape) {
  const auto p = hourly_average_profile(constant_month({2019, 6}, 5.0), {2019, 6});
  const auto j = to_json(p);
  EXPECT_EQ(j["kind"], "hourly_profile");
  EXPECT_EQ(j["period"], "2019-06");
  EXPECT_EQ(j["values"].size(), 24u);
  EXPECT_EQ(to_csv(p).substr(0, 13), "hour,mean_mw\n");
}

}  // namespace
}  // namespace gridcast
