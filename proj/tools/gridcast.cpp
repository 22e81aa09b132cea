#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "gridcast/gridcast.hpp"

using namespace gridcast;
namespace fs = std::filesystem;

namespace {

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
};

ToolkitConfig load_config(const Globals& g) {
  ToolkitConfig c = g.config_path.empty() ? ToolkitConfig{} : parse_config(read_file(g.config_path));
  if (g.seed) c.train.seed = *g.seed;
  return c;
}

std::string out_path(const Globals& g, const std::string& name) {
  std::error_code ec;
  fs::create_directories(g.out_dir, ec);
  if (ec) fail(ErrorKind::Io, "cannot create output directory " + g.out_dir + ": " + ec.message());
  return (fs::path(g.out_dir) / name).string();
}

void emit(const Globals& g, const std::string& name, const std::string& contents) {
  const auto path = out_path(g, name);
  write_file(path, contents);
  std::printf("wrote %s\n", path.c_str());
}

LoadSeries load_series(const std::string& path) { return parse_load_csv(read_file(path)); }

LoadSeries load_daily(const std::string& path, const ToolkitConfig& c) {
  LoadSeries raw = load_series(path);
  if (raw.missing_count()) raw = interpolate_missing(raw, std::chrono::hours{c.max_gap_hours});
  return raw.resolution() == Resolution::Hourly ? resample_daily(raw) : raw;
}

Date parse_date_arg(const std::string& s) { return calendar::parse_date_or_throw(s); }

YearMonth parse_month_arg(const std::string& s) {
  auto ym = calendar::parse_year_month(s);
  if (!ym) fail(ErrorKind::Parse, "expected YYYY-MM, got '" + s + "'");
  return *ym;
}

int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::Parse:
    case ErrorKind::Duplicate:
    case ErrorKind::Io: return 2;
    default: return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gridcast: load forecasting, demand analytics and emissions accounting"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "JSON config file");
  app.add_option("--seed", g.seed, "override train.seed");
  app.add_option("--out", g.out_dir, "output directory")->capture_default_str();

  // ingest
  auto* ingest = app.add_subcommand("ingest", "validate, interpolate and resample a load CSV");
  std::string ingest_input;
  ingest->add_option("input", ingest_input, "CSV with timestamp,demand_mw")->required();

  // train
  auto* train_cmd = app.add_subcommand("train", "fit the LSTM on a load history");
  std::string train_input, split_arg;
  train_cmd->add_option("input", train_input, "hourly or daily load CSV")->required();
  train_cmd->add_option("--split-date", split_arg, "first date held out of training (YYYY-MM-DD)");

  // forecast
  auto* forecast_cmd = app.add_subcommand("forecast", "roll a trained model forward day by day");
  std::string model_path, history_path, start_arg;
  std::size_t days = 365;
  forecast_cmd->add_option("--model", model_path, "model JSON written by train")->required();
  forecast_cmd->add_option("--history", history_path, "load CSV preceding the horizon")->required();
  forecast_cmd->add_option("--start", start_arg, "first forecast date (default: day after history)");
  forecast_cmd->add_option("--days", days, "horizon length")->capture_default_str();

  // analyze
  auto* analyze = app.add_subcommand("analyze", "descriptive load statistics");
  std::string analyze_input, month_arg, from_arg, to_arg;
  int year = 0;
  auto* a_profile = analyze->add_subcommand("profile", "average hourly profile of a month");
  a_profile->add_option("input", analyze_input)->required();
  a_profile->add_option("--month", month_arg, "YYYY-MM")->required();
  auto* a_yearly = analyze->add_subcommand("yearly", "daily averages of a year");
  a_yearly->add_option("input", analyze_input)->required();
  a_yearly->add_option("--year", year)->required();
  auto* a_weekend = analyze->add_subcommand("weekend", "daily averages split into weekdays and weekends");
  a_weekend->add_option("input", analyze_input)->required();
  a_weekend->add_option("--year", year)->required();
  auto* a_lf = analyze->add_subcommand("load-factor", "average over peak demand between two dates");
  a_lf->add_option("input", analyze_input)->required();
  a_lf->add_option("--from", from_arg)->required();
  a_lf->add_option("--to", to_arg)->required();
  auto* a_energy = analyze->add_subcommand("energy", "monthly energy and change against the previous year");
  a_energy->add_option("input", analyze_input)->required();
  a_energy->add_option("--month", month_arg, "YYYY-MM")->required();
  analyze->require_subcommand(1);

  // emissions
  auto* emissions_cmd = app.add_subcommand("emissions", "CO2 mass by fuel from a generation mix");
  std::string mix_path, registry_path;
  emissions_cmd->add_option("mix", mix_path, "generation mix CSV")->required();
  emissions_cmd->add_option("--registry", registry_path, "emission factor CSV (overrides the config)");

  // impact
  auto* impact_cmd = app.add_subcommand("impact", "monthly gap between actual and forecast demand");
  std::string actual_path, forecast_path;
  impact_cmd->add_option("--actual", actual_path)->required();
  impact_cmd->add_option("--forecast", forecast_path)->required();
  impact_cmd->add_option("--from", from_arg)->required();
  impact_cmd->add_option("--to", to_arg)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const ToolkitConfig config = load_config(g);

    if (*ingest) {
      const auto raw = load_series(ingest_input);
      std::printf("%zu %s records, %zu missing\n", raw.size(), std::string(to_string(raw.resolution())).c_str(),
                  raw.missing_count());
      const auto filled = raw.missing_count() ? interpolate_missing(raw, std::chrono::hours{config.max_gap_hours}) : raw;
      emit(g, "interpolated.csv", to_csv(filled));
      if (filled.resolution() == Resolution::Hourly) emit(g, "daily.csv", to_csv(resample_daily(filled)));
    } else if (*train_cmd) {
      const auto daily = load_daily(train_input, config);
      require(daily.size() > 0, ErrorKind::EmptyData, "no data in " + train_input);
      Date split;
      if (!split_arg.empty())
        split = parse_date_arg(split_arg);
      else if (config.split_date)
        split = *config.split_date;
      else
        split = calendar::make_date(calendar::year_of(calendar::date_of(daily.records().back().timestamp)), 1, 1);
      const auto data = prepare_training(daily, split, config.lookback, config.train.validation_fraction);
      std::printf("%zu training and %zu validation windows, split at %s\n", data.train.size(), data.validation.size(),
                  calendar::format_date(split).c_str());
      const auto result = train(data.train, data.validation, config.train, [](const EpochStats& e) {
        std::printf("epoch %3zu  train %.5f  val %.5f  lr %.6f\n", e.epoch, e.train_mse, e.val_mse, e.lr);
        std::fflush(stdout);
        return true;
      });
      std::printf("best epoch %zu (val %.5f)\n", result.report.best_epoch, result.report.best_val_mse());
      emit(g, "model.json", serialize_model(result.model));
      emit(g, "train_report.csv", to_csv(result.report));
    } else if (*forecast_cmd) {
      const auto model = load_model(model_path);
      const auto daily = load_daily(history_path, config);
      require(daily.size() > 0, ErrorKind::EmptyData, "no data in " + history_path);
      const Date start = start_arg.empty() ? calendar::date_of(daily.records().back().timestamp) + std::chrono::days{1}
                                           : parse_date_arg(start_arg);
      const auto fc = forecast(model, history_for(model, daily, start), date_range(start, days));
      emit(g, "forecast.csv", to_csv(fc));
    } else if (*analyze) {
      const auto series = load_series(analyze_input);
      if (*a_profile) {
        const auto p = hourly_average_profile(series, parse_month_arg(month_arg));
        emit(g, "profile_" + month_arg + ".csv", to_csv(p));
        emit(g, "profile_" + month_arg + ".json", to_json(p).dump(1) + "\n");
      } else if (*a_yearly) {
        const auto p = yearly_daily_average(series, year);
        emit(g, "yearly_" + std::to_string(year) + ".csv", to_csv(p));
        emit(g, "yearly_" + std::to_string(year) + ".json", to_json(p).dump(1) + "\n");
      } else if (*a_weekend) {
        const auto split = weekday_weekend_split(yearly_daily_average(series, year), config.weekend);
        std::printf("%zu weekend days, %zu weekdays\n", split.weekend.daily_means.size(),
                    split.weekday.daily_means.size());
        emit(g, "weekend_" + std::to_string(year) + ".csv", to_csv(split.weekend));
        emit(g, "weekday_" + std::to_string(year) + ".csv", to_csv(split.weekday));
        nlohmann::json j{to_json(split.weekend, "weekend_profile"), to_json(split.weekday, "weekday_profile")};
        emit(g, "week_split_" + std::to_string(year) + ".json", j.dump(1) + "\n");
      } else if (*a_lf) {
        const auto r = load_factor(series, parse_date_arg(from_arg), parse_date_arg(to_arg));
        std::printf("load factor %.4f (average %.2f MW, peak %.2f MW)\n", r.load_factor, r.average_load, r.peak_load);
        emit(g, "load_factor.csv", to_csv(r));
        emit(g, "load_factor.json", to_json(r).dump(1) + "\n");
      } else if (*a_energy) {
        const YearMonth ym = parse_month_arg(month_arg);
        const double now = monthly_energy(series, ym);
        std::string csv = "month,energy_gwh,previous_year_gwh,delta_gwh,percent_change\n";
        std::printf("%s: %.2f GWh\n", month_arg.c_str(), now);
        const YearMonth prev{ym.year - 1, ym.month};
        try {
          const double before = monthly_energy(series, prev);
          const auto d = generation_delta(ym, now, before);
          std::printf("change against %s: %+.2f GWh (%+.2f%%)\n", calendar::format_year_month(prev).c_str(), d.delta_gwh,
                      percent_change(now, before));
          csv += month_arg + ',' + detail::format_double(now) + ',' + detail::format_double(before) + ',' +
                 detail::format_double(d.delta_gwh) + ',' + detail::format_double(percent_change(now, before)) + '\n';
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::Coverage) throw;
          csv += month_arg + ',' + detail::format_double(now) + ",,,\n";
        }
        emit(g, "energy_" + month_arg + ".csv", csv);
      }
    } else if (*emissions_cmd) {
      std::string reg = registry_path.empty() ? config.cef_registry_path.value_or("") : registry_path;
      const CefRegistry registry = reg.empty() ? CefRegistry::defaults() : parse_cef_csv(read_file(reg));
      std::vector<EmissionReport> reports;
      nlohmann::json j = nlohmann::json::array();
      for (const auto& mix : parse_mix_csv(read_file(mix_path))) {
        reports.push_back(emission_report(mix, registry));
        j.push_back(to_json(reports.back()));
        std::printf("%s: %.3f kt CO2\n", mix.period.c_str(), reports.back().total_kt);
      }
      emit(g, "emissions.csv", to_csv(reports));
      emit(g, "emissions.json", j.dump(1) + "\n");
    } else if (*impact_cmd) {
      const auto actual = load_daily(actual_path, config);
      const auto fc = load_daily(forecast_path, config);
      const auto r = counterfactual_gap(actual, fc, parse_date_arg(from_arg), parse_date_arg(to_arg), config.impact);
      std::fputs(to_text(r).c_str(), stdout);
      emit(g, "impact.csv", to_csv(r));
      emit(g, "impact.json", to_json(r).dump(1) + "\n");
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "gridcast: %s\n", e.what());
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "gridcast: %s\n", e.what());
    return 2;
  }
  return 0;
}
