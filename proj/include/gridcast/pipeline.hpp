#pragma once

// Glue between the ingestion steps and the trainer: hourly CSV -> cleaned
// daily series -> standardized windows, with the scaler fit on the
// training rows only.

#include <utility>

#include "gridcast/features.hpp"
#include "gridcast/timeseries.hpp"
#include "gridcast/train.hpp"

namespace gridcast {

struct PreparedData {
  ScalerParams scaler;
  FeatureMatrix train_rows;  // standardized
  FeatureMatrix test_rows;   // standardized with the training scaler
  WindowSet train;
  WindowSet validation;
};

// Interpolates an hourly series and averages it to days; daily input is only
// interpolated.
inline LoadSeries clean_daily(const LoadSeries& raw) {
  LoadSeries filled = raw.missing_count() ? interpolate_missing(raw) : raw;
  return filled.resolution() == Resolution::Hourly ? resample_daily(filled) : filled;
}

inline PreparedData prepare_training(const LoadSeries& daily, Date split, std::size_t lookback,
                                     double validation_fraction) {
  const FeatureMatrix features = add_time_features(daily);
  auto [train_raw, test_raw] = split_at(features, HourStamp{split});
  PreparedData out;
  out.scaler = fit_scaler(train_raw);
  out.train_rows = apply_scaler(train_raw, out.scaler);
  out.test_rows = apply_scaler(test_raw, out.scaler);
  auto [tr, val] = split_validation(make_windows(out.train_rows, lookback), validation_fraction);
  out.train = std::move(tr);
  out.validation = std::move(val);
  return out;
}

// Standardized features of `daily` restricted to stamps before `until`, for
// seeding a forecast.
inline FeatureMatrix history_for(const LstmModel& model, const LoadSeries& daily, Date until) {
  auto [head, tail] = split_at(add_time_features(daily), HourStamp{until});
  return apply_scaler(head, model.scaler);
}

}  // namespace gridcast
