#pragma once

// Toolkit configuration document (JSON). Every key is optional; absent keys
// keep their defaults and unknown keys are rejected.

#include <optional>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "gridcast/analytics.hpp"
#include "gridcast/calendar.hpp"
#include "gridcast/error.hpp"
#include "gridcast/impact.hpp"
#include "gridcast/train.hpp"

namespace gridcast {

struct ToolkitConfig {
  TrainConfig train;
  std::size_t lookback = 30;
  std::optional<Date> split_date;  // default: Jan 1 of the last year in the data
  WeekdaySet weekend = default_weekend();
  std::optional<std::string> cef_registry_path;
  long max_gap_hours = 72;
  ImpactOptions impact;
};

namespace detail {

inline void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [key, value] : j.items())
    if (!known.contains(key)) fail(ErrorKind::Validation, "unknown config key '" + where + key + "'");
}

template <class T>
void read_if(const nlohmann::json& j, const char* key, T& dst) {
  if (j.contains(key)) dst = j.at(key).get<T>();
}

}  // namespace detail

inline ToolkitConfig parse_config(std::string_view text) {
  ToolkitConfig c;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Parse, std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) fail(ErrorKind::Parse, "config must be a JSON object");

  try {
    detail::reject_unknown(j, {"train", "lookback", "split_date", "weekend_days", "cef_registry", "max_gap_hours", "impact"},
                           "");
    detail::read_if(j, "lookback", c.lookback);
    detail::read_if(j, "max_gap_hours", c.max_gap_hours);
    if (j.contains("split_date")) c.split_date = calendar::parse_date_or_throw(j.at("split_date").get<std::string>());
    if (j.contains("cef_registry")) c.cef_registry_path = j.at("cef_registry").get<std::string>();
    if (j.contains("weekend_days")) {
      c.weekend.clear();
      for (const auto& d : j.at("weekend_days")) {
        auto wd = parse_weekday(d.get<std::string>());
        if (!wd) fail(ErrorKind::Validation, "unknown weekday '" + d.get<std::string>() + "'");
        c.weekend.insert(*wd);
      }
    }
    if (j.contains("impact")) {
      const auto& im = j.at("impact");
      detail::reject_unknown(im, {"min_coverage", "crossover_run"}, "impact.");
      detail::read_if(im, "min_coverage", c.impact.min_coverage);
      detail::read_if(im, "crossover_run", c.impact.crossover_run);
    }
    if (j.contains("train")) {
      const auto& t = j.at("train");
      detail::reject_unknown(t,
                             {"learning_rate", "beta1", "beta2", "epsilon", "decay_rate", "max_epochs", "patience",
                              "batch_size", "seed", "clip_norm", "validation_fraction", "layers", "hidden",
                              "dropout_rate"},
                             "train.");
      auto& tc = c.train;
      detail::read_if(t, "learning_rate", tc.learning_rate);
      detail::read_if(t, "beta1", tc.beta1);
      detail::read_if(t, "beta2", tc.beta2);
      detail::read_if(t, "epsilon", tc.epsilon);
      detail::read_if(t, "decay_rate", tc.decay_rate);
      detail::read_if(t, "max_epochs", tc.max_epochs);
      detail::read_if(t, "patience", tc.patience);
      detail::read_if(t, "batch_size", tc.batch_size);
      detail::read_if(t, "seed", tc.seed);
      detail::read_if(t, "clip_norm", tc.clip_norm);
      detail::read_if(t, "validation_fraction", tc.validation_fraction);
      detail::read_if(t, "layers", tc.shape.layers);
      detail::read_if(t, "hidden", tc.shape.hidden);
      detail::read_if(t, "dropout_rate", tc.shape.dropout_rate);
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Validation, std::string("bad config value: ") + e.what());
  }
  c.train.check();
  require(c.lookback >= 1, ErrorKind::Validation, "lookback must be positive");
  require(c.max_gap_hours >= 0, ErrorKind::Validation, "max_gap_hours must be non-negative");
  return c;
}

}  // namespace gridcast
