#include <gtest/gtest.h>

#include <random>

#include "gridcast/emissions.hpp"
#include "support/published_figures.hpp"

namespace gridcast {
namespace {

TEST(Emissions, ReproducesPublishedTotals) {
  const auto mixes = testing::published_mixes();
  for (const auto& row : testing::published_emissions())
    for (std::size_t y = 0; y < 3; ++y)
      EXPECT_NEAR(emission_report(mixes[y]).mass(row.fuel), row.kt[y], row.tolerance)
          << to_string(row.fuel) << ' ' << mixes[y].period;
}

TEST(Emissions, GasSpotValue) {
  EXPECT_NEAR(co2_mass(4207.443, cef_lookup(Fuel::Gas).avg_cef), 2243.282, 0.001);
}

TEST(Emissions, DieselAndFurnaceOilShareAFactor) {
  GenerationMix m{"x", 0, 100.0, 50.0, 0, 0, 0, 0};
  EXPECT_DOUBLE_EQ(emission_report(m).mass(Fuel::FurnaceOilAndDiesel), 150.0 * 773.80 / 1000.0);
}

TEST(Emissions, ImportHasNoFactor) {
  try {
    cef_lookup(Fuel::Import);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoFactor);
  }
  GenerationMix m{"x", 0, 0, 0, 0, 0, 0, 1234.0};
  const auto r = emission_report(m);
  EXPECT_EQ(r.import_gwh, 1234.0);
  EXPECT_EQ(r.total_kt, 0.0);
}

TEST(Emissions, LinearAndMonotone) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 5000.0);
  for (Fuel f : kEmittingFuels) {
    const double cef = cef_lookup(f).avg_cef;
    for (int i = 0; i < 50; ++i) {
      const double a = u(rng), b = u(rng);
      EXPECT_NEAR(co2_mass(a + b, cef), co2_mass(a, cef) + co2_mass(b, cef), 1e-9);
      EXPECT_NEAR(co2_mass(3.0 * a, cef), 3.0 * co2_mass(a, cef), 1e-9);
      EXPECT_EQ(co2_mass(a, cef) <= co2_mass(a + b, cef), true);
    }
  }
  EXPECT_EQ(co2_mass(0.0, 533.17), 0.0);
  EXPECT_THROW(co2_mass(-1.0, 533.17), Error);
}

TEST(Emissions, TotalIsSumOfFuels) {
  const auto r = emission_report(testing::published_mixes()[0]);
  double sum = 0.0;
  for (const auto& e : r.by_fuel) sum += e.co2_kt;
  EXPECT_DOUBLE_EQ(r.total_kt, sum);
  EXPECT_EQ(r.by_fuel.size(), 5u);
}

TEST(CefRegistry, ValidationAndCsv) {
  CefRegistry r;
  EXPECT_THROW(r.add({Fuel::Gas, 0.0, 10.0, 5.0}), Error);
  EXPECT_THROW(r.add({Fuel::Gas, 6.0, 10.0, 5.0}), Error);
  EXPECT_THROW(r.add({Fuel::Gas, 1.0, 4.0, 5.0}), Error);
  EXPECT_THROW(r.lookup(Fuel::Gas), Error);

  const auto defaults = CefRegistry::defaults();
  const auto back = parse_cef_csv(to_csv(defaults));
  for (Fuel f : kEmittingFuels) EXPECT_EQ(back.lookup(f).avg_cef, defaults.lookup(f).avg_cef);
  EXPECT_THROW(parse_cef_csv("fuel,min_cef,max_cef,avg_cef\nplutonium,1,2,3\n"), ParseError);
  EXPECT_THROW(parse_cef_csv("fuel,cef\n"), ParseError);
}

TEST(MixCsv, ParsesAndValidates) {
  const auto mixes = parse_mix_csv(
      "period,gas_gwh,diesel_gwh,furnace_oil_gwh,hydro_gwh,solar_gwh,coal_gwh,import_gwh\n"
      "2021,4207.443,303.51026,1285.10725,57.14505,18.63133,428.6752,586.38808\n");
  ASSERT_EQ(mixes.size(), 1u);
  EXPECT_EQ(mixes[0].period, "2021");
  EXPECT_EQ(mixes[0].coal, 428.6752);
  EXPECT_THROW(parse_mix_csv("period,gas_gwh,diesel_gwh,furnace_oil_gwh,hydro_gwh,solar_gwh,coal_gwh,import_gwh\n"
                             "2021,-1,0,0,0,0,0,0\n"),
               Error);
  EXPECT_THROW(parse_mix_csv("period,gas\n"), ParseError);
}

TEST(EmissionsExport, CsvAndJson) {
  const auto r = emission_report(testing::published_mixes()[2]);
  const auto csv = to_csv(std::vector<EmissionReport>{r});
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "period,fuel,energy_gwh,co2_kt");
  EXPECT_NE(csv.find("2019,import,"), std::string::npos);
  const auto j = to_json(r);
  EXPECT_EQ(j["fuels"].size(), 5u);
  EXPECT_DOUBLE_EQ(j["total_co2_kt"].get<double>(), r.total_kt);
}

}  // namespace
}  // namespace gridcast
