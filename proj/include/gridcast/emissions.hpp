#pragma once

// Fuel-mix CO2 accounting. Mass in kilotons is energy (GWh) times the
// average emission factor (g/kWh) divided by 1000, since 1 GWh at 1 g/kWh
// emits exactly one tonne.

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "gridcast/error.hpp"
#include "gridcast/timeseries.hpp"

namespace gridcast {

enum class Fuel { Gas, FurnaceOilAndDiesel, Solar, Coal, Hydro, Import };

inline constexpr std::array<Fuel, 5> kEmittingFuels{Fuel::Gas, Fuel::FurnaceOilAndDiesel, Fuel::Solar, Fuel::Coal,
                                                    Fuel::Hydro};

inline std::string_view to_string(Fuel f) {
  switch (f) {
    case Fuel::Gas: return "gas";
    case Fuel::FurnaceOilAndDiesel: return "furnace_oil_and_diesel";
    case Fuel::Solar: return "solar";
    case Fuel::Coal: return "coal";
    case Fuel::Hydro: return "hydro";
    case Fuel::Import: return "import";
  }
  return "unknown";
}

inline std::optional<Fuel> parse_fuel(std::string_view name) {
  for (Fuel f : {Fuel::Gas, Fuel::FurnaceOilAndDiesel, Fuel::Solar, Fuel::Coal, Fuel::Hydro, Fuel::Import})
    if (to_string(f) == name) return f;
  return std::nullopt;
}

// Grams of CO2 per kWh generated.
struct CefEntry {
  Fuel fuel = Fuel::Gas;
  double min_cef = 0.0;
  double max_cef = 0.0;
  double avg_cef = 0.0;
};

class CefRegistry {
 public:
  CefRegistry() = default;

  void add(const CefEntry& e) {
    if (!(e.min_cef > 0.0 && e.min_cef <= e.avg_cef && e.avg_cef <= e.max_cef && std::isfinite(e.max_cef)))
      fail(ErrorKind::Validation, "emission factors for " + std::string(to_string(e.fuel)) +
                                      " must satisfy 0 < min <= avg <= max");
    entries_[e.fuel] = e;
  }

  const CefEntry& lookup(Fuel f) const {
    auto it = entries_.find(f);
    if (it == entries_.end()) fail(ErrorKind::NoFactor, "no emission factor registered for " + std::string(to_string(f)));
    return it->second;
  }

  bool contains(Fuel f) const { return entries_.contains(f); }
  const std::map<Fuel, CefEntry>& entries() const { return entries_; }

  // Average factors by generation source, as surveyed for the Bangladesh grid.
  static CefRegistry defaults() {
    CefRegistry r;
    r.add({Fuel::Gas, 380.0, 1000.0, 533.17});
    r.add({Fuel::FurnaceOilAndDiesel, 530.0, 890.0, 773.80});
    r.add({Fuel::Solar, 13.0, 190.0, 65.05});
    r.add({Fuel::Coal, 660.0, 1370.0, 942.33});
    r.add({Fuel::Hydro, 2.0, 20.0, 8.22});
    return r;
  }

 private:
  std::map<Fuel, CefEntry> entries_;
};

inline const CefEntry& cef_lookup(const CefRegistry& registry, Fuel f) { return registry.lookup(f); }
inline const CefEntry& cef_lookup(Fuel f) {
  static const CefRegistry registry = CefRegistry::defaults();
  return registry.lookup(f);
}

// CSV `fuel,min_cef,max_cef,avg_cef`.
inline CefRegistry parse_cef_csv(std::string_view text) {
  const auto lines = detail::split_lines(detail::strip_bom(text));
  if (lines.empty() || lines.front() != "fuel,min_cef,max_cef,avg_cef")
    throw ParseError(1, "expected header 'fuel,min_cef,max_cef,avg_cef'");
  CefRegistry r;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto f = detail::split_fields(lines[i]);
    if (f.size() != 4) throw ParseError(i + 1, "expected 4 fields");
    auto fuel = parse_fuel(detail::trim(f[0]));
    if (!fuel) throw ParseError(i + 1, "unknown fuel '" + std::string(f[0]) + "'");
    auto lo = detail::parse_double(f[1]), hi = detail::parse_double(f[2]), avg = detail::parse_double(f[3]);
    if (!lo || !hi || !avg) throw ParseError(i + 1, "invalid emission factor");
    r.add({*fuel, *lo, *hi, *avg});
  }
  return r;
}

inline std::string to_csv(const CefRegistry& r) {
  std::string out = "fuel,min_cef,max_cef,avg_cef\n";
  for (const auto& [fuel, e] : r.entries())
    out += std::string(to_string(fuel)) + ',' + detail::format_double(e.min_cef) + ',' +
           detail::format_double(e.max_cef) + ',' + detail::format_double(e.avg_cef) + '\n';
  return out;
}

// Energy generated per source over an accounting period, in GWh.
struct GenerationMix {
  std::string period;
  double gas = 0.0;
  double diesel = 0.0;
  double furnace_oil = 0.0;
  double hydro = 0.0;
  double solar = 0.0;
  double coal = 0.0;
  double import_ = 0.0;

  void check() const {
    for (double v : {gas, diesel, furnace_oil, hydro, solar, coal, import_})
      if (!std::isfinite(v) || v < 0.0)
        fail(ErrorKind::Validation, "generation mix '" + period + "' has a negative or non-finite energy");
  }

  // Energy billed against each emission factor; diesel and furnace oil share one.
  double energy_for(Fuel f) const {
    switch (f) {
      case Fuel::Gas: return gas;
      case Fuel::FurnaceOilAndDiesel: return diesel + furnace_oil;
      case Fuel::Solar: return solar;
      case Fuel::Coal: return coal;
      case Fuel::Hydro: return hydro;
      case Fuel::Import: return import_;
    }
    return 0.0;
  }
};

inline double co2_mass(double energy_gwh, double cef_g_per_kwh) {
  if (!(energy_gwh >= 0.0)) fail(ErrorKind::Validation, "energy must be non-negative");
  return energy_gwh * cef_g_per_kwh / 1000.0;
}

struct FuelEmission {
  Fuel fuel;
  double energy_gwh = 0.0;
  double co2_kt = 0.0;
};

struct EmissionReport {
  std::string period;
  std::vector<FuelEmission> by_fuel;  // emitting fuels in registry order
  double import_gwh = 0.0;            // reported, carries no factor
  double total_kt = 0.0;

  double mass(Fuel f) const {
    for (const auto& e : by_fuel)
      if (e.fuel == f) return e.co2_kt;
    fail(ErrorKind::NoFactor, "report has no entry for " + std::string(to_string(f)));
  }
};

inline EmissionReport emission_report(const GenerationMix& mix, const CefRegistry& registry = CefRegistry::defaults()) {
  mix.check();
  EmissionReport r{mix.period, {}, mix.import_, 0.0};
  for (Fuel f : kEmittingFuels) {
    const double energy = mix.energy_for(f);
    const double kt = co2_mass(energy, cef_lookup(registry, f).avg_cef);
    r.by_fuel.push_back({f, energy, kt});
    r.total_kt += kt;
  }
  return r;
}

// CSV `period,gas_gwh,diesel_gwh,furnace_oil_gwh,hydro_gwh,solar_gwh,coal_gwh,import_gwh`.
inline std::vector<GenerationMix> parse_mix_csv(std::string_view text) {
  const auto lines = detail::split_lines(detail::strip_bom(text));
  if (lines.empty() || lines.front() != "period,gas_gwh,diesel_gwh,furnace_oil_gwh,hydro_gwh,solar_gwh,coal_gwh,import_gwh")
    throw ParseError(1, "expected header 'period,gas_gwh,diesel_gwh,furnace_oil_gwh,hydro_gwh,solar_gwh,coal_gwh,import_gwh'");
  std::vector<GenerationMix> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto f = detail::split_fields(lines[i]);
    if (f.size() != 8) throw ParseError(i + 1, "expected 8 fields");
    std::array<double, 7> v{};
    for (std::size_t k = 0; k < 7; ++k) {
      auto x = detail::parse_double(f[k + 1]);
      if (!x) throw ParseError(i + 1, "invalid energy '" + std::string(f[k + 1]) + "'");
      v[k] = *x;
    }
    GenerationMix m{std::string(detail::trim(f[0])), v[0], v[1], v[2], v[3], v[4], v[5], v[6]};
    m.check();
    out.push_back(std::move(m));
  }
  return out;
}

inline std::string to_csv(const std::vector<EmissionReport>& reports) {
  std::string out = "period,fuel,energy_gwh,co2_kt\n";
  for (const auto& r : reports) {
    for (const auto& e : r.by_fuel)
      out += r.period + ',' + std::string(to_string(e.fuel)) + ',' + detail::format_double(e.energy_gwh) + ',' +
             detail::format_double(e.co2_kt) + '\n';
    out += r.period + ",import," + detail::format_double(r.import_gwh) + ",\n";
    out += r.period + ",total,," + detail::format_double(r.total_kt) + '\n';
  }
  return out;
}

inline nlohmann::json to_json(const EmissionReport& r) {
  nlohmann::json fuels = nlohmann::json::array();
  for (const auto& e : r.by_fuel)
    fuels.push_back({{"fuel", to_string(e.fuel)}, {"energy_gwh", e.energy_gwh}, {"co2_kt", e.co2_kt}});
  return {{"period", r.period}, {"fuels", fuels}, {"import_gwh", r.import_gwh}, {"total_co2_kt", r.total_kt}};
}

}  // namespace gridcast
