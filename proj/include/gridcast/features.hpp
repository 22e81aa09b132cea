#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "gridcast/calendar.hpp"
#include "gridcast/error.hpp"
#include "gridcast/timeseries.hpp"

namespace gridcast {

// Per-column z-score parameters. Stds are strictly positive.
struct ScalerParams {
  Eigen::VectorXd means;
  Eigen::VectorXd stds;

  Eigen::Index columns() const { return means.size(); }
  friend bool operator==(const ScalerParams& a, const ScalerParams& b) {
    return a.means.size() == b.means.size() && a.stds.size() == b.stds.size() && a.means == b.means &&
           a.stds == b.stds;
  }
};

// One row per time step. Column 0 is always the demand (the training
// target); the remaining columns are calendar features.
struct FeatureMatrix {
  std::vector<HourStamp> stamps;
  Resolution resolution = Resolution::Daily;
  std::vector<std::string> columns;
  Eigen::MatrixXd values;
  std::optional<ScalerParams> scaler;  // set once the values are standardized

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
  auto demand() const { return values.col(0); }
};

inline std::vector<std::string> feature_columns(Resolution r) {
  std::vector<std::string> cols{"demand_mw", "year", "month_sin", "month_cos", "doy_sin", "doy_cos"};
  if (r == Resolution::Hourly) {
    cols.emplace_back("hour_sin");
    cols.emplace_back("hour_cos");
  }
  return cols;
}

// Calendar features (everything except demand) for one stamp.
inline Eigen::VectorXd calendar_features(HourStamp t, Resolution r) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  const Date d = calendar::date_of(t);
  Eigen::VectorXd f(r == Resolution::Hourly ? 7 : 5);
  const double month_angle = two_pi * static_cast<double>(calendar::month_of(d)) / 12.0;
  const double doy_angle = two_pi * static_cast<double>(calendar::day_of_year(d)) / 365.25;
  f(0) = static_cast<double>(calendar::year_of(d));
  f(1) = std::sin(month_angle);
  f(2) = std::cos(month_angle);
  f(3) = std::sin(doy_angle);
  f(4) = std::cos(doy_angle);
  if (r == Resolution::Hourly) {
    const double hour_angle = two_pi * static_cast<double>(calendar::hour_of(t)) / 24.0;
    f(5) = std::sin(hour_angle);
    f(6) = std::cos(hour_angle);
  }
  return f;
}

inline FeatureMatrix add_time_features(const LoadSeries& series) {
  if (series.missing_count() != 0) fail(ErrorKind::Validation, "time features require a gap-free series");
  FeatureMatrix fm;
  fm.resolution = series.resolution();
  fm.columns = feature_columns(series.resolution());
  fm.values.resize(static_cast<Eigen::Index>(series.size()), static_cast<Eigen::Index>(fm.columns.size()));
  fm.stamps.reserve(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& r = series[i];
    const auto row = static_cast<Eigen::Index>(i);
    fm.stamps.push_back(r.timestamp);
    fm.values(row, 0) = *r.demand;
    fm.values.row(row).tail(fm.cols() - 1) = calendar_features(r.timestamp, series.resolution()).transpose();
  }
  return fm;
}

// Population mean/std per column (Welford). Columns whose spread is
// numerically zero get std = 1 so they pass through centred.
inline ScalerParams fit_scaler(const Eigen::MatrixXd& rows) {
  if (rows.rows() < 2) fail(ErrorKind::InsufficientData, "fit_scaler needs at least 2 rows");
  const Eigen::Index n = rows.rows();
  const Eigen::Index c = rows.cols();
  ScalerParams p{Eigen::VectorXd::Zero(c), Eigen::VectorXd::Ones(c)};
  for (Eigen::Index j = 0; j < c; ++j) {
    double mean = 0.0;
    double m2 = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double x = rows(i, j);
      const double delta = x - mean;
      mean += delta / static_cast<double>(i + 1);
      m2 += delta * (x - mean);
    }
    const double sd = std::sqrt(m2 / static_cast<double>(n));
    p.means(j) = mean;
    p.stds(j) = (sd > 1e-12 * std::max(1.0, std::abs(mean))) ? sd : 1.0;
  }
  return p;
}

inline ScalerParams fit_scaler(const FeatureMatrix& fm) { return fit_scaler(fm.values); }

inline Eigen::MatrixXd apply_scaler(const Eigen::MatrixXd& rows, const ScalerParams& p) {
  require(rows.cols() == p.columns(), ErrorKind::Shape,
          "scaler has " + std::to_string(p.columns()) + " columns, rows have " + std::to_string(rows.cols()));
  return (rows.rowwise() - p.means.transpose()).array().rowwise() / p.stds.transpose().array();
}

inline Eigen::MatrixXd invert_scaler(const Eigen::MatrixXd& rows, const ScalerParams& p) {
  require(rows.cols() == p.columns(), ErrorKind::Shape,
          "scaler has " + std::to_string(p.columns()) + " columns, rows have " + std::to_string(rows.cols()));
  return (rows.array().rowwise() * p.stds.transpose().array()).matrix().rowwise() + p.means.transpose();
}

inline FeatureMatrix apply_scaler(const FeatureMatrix& fm, const ScalerParams& p) {
  if (fm.scaler) fail(ErrorKind::State, "feature matrix is already standardized");
  FeatureMatrix out = fm;
  out.values = apply_scaler(fm.values, p);
  out.scaler = p;
  return out;
}

inline FeatureMatrix invert_scaler(const FeatureMatrix& fm) {
  if (!fm.scaler) fail(ErrorKind::State, "feature matrix is not standardized");
  FeatureMatrix out = fm;
  out.values = invert_scaler(fm.values, *fm.scaler);
  out.scaler.reset();
  return out;
}

// Rows with stamps strictly before `split` and the rest.
inline std::pair<FeatureMatrix, FeatureMatrix> split_at(const FeatureMatrix& fm, HourStamp split) {
  Eigen::Index k = 0;
  while (k < fm.rows() && fm.stamps[static_cast<std::size_t>(k)] < split) ++k;
  FeatureMatrix head = fm, tail = fm;
  head.stamps.assign(fm.stamps.begin(), fm.stamps.begin() + k);
  head.values = fm.values.topRows(k);
  tail.stamps.assign(fm.stamps.begin() + k, fm.stamps.end());
  tail.values = fm.values.bottomRows(fm.rows() - k);
  return {std::move(head), std::move(tail)};
}

// Sliding windows over a feature matrix. Window i covers rows
// [starts[i], starts[i] + lookback) and predicts the demand of the next row.
struct WindowSet {
  FeatureMatrix rows;
  std::size_t lookback = 0;
  std::vector<std::size_t> starts;

  std::size_t size() const { return starts.size(); }
  bool empty() const { return starts.empty(); }
  Eigen::Index input_size() const { return rows.cols(); }

  auto window(std::size_t i) const {
    return rows.values.middleRows(static_cast<Eigen::Index>(starts[i]), static_cast<Eigen::Index>(lookback));
  }
  double target(std::size_t i) const { return rows.values(static_cast<Eigen::Index>(starts[i] + lookback), 0); }
  HourStamp target_stamp(std::size_t i) const { return rows.stamps[starts[i] + lookback]; }
};

inline WindowSet make_windows(const FeatureMatrix& rows, std::size_t lookback) {
  if (lookback == 0) fail(ErrorKind::Validation, "lookback must be positive");
  const auto n = static_cast<std::size_t>(rows.rows());
  if (n <= lookback)
    fail(ErrorKind::InsufficientData,
         std::to_string(n) + " rows cannot form a window of lookback " + std::to_string(lookback));
  WindowSet ws{rows, lookback, {}};
  ws.starts.resize(n - lookback);
  for (std::size_t i = 0; i < ws.starts.size(); ++i) ws.starts[i] = i;
  return ws;
}

// Chronological split: the final ceil(fraction * n) windows become the
// validation set.
inline std::pair<WindowSet, WindowSet> split_validation(const WindowSet& ws, double fraction) {
  require(fraction > 0.0 && fraction < 1.0, ErrorKind::Validation, "validation fraction must lie in (0, 1)");
  const auto n = ws.size();
  const auto n_val = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n)));
  if (n_val == 0 || n_val >= n)
    fail(ErrorKind::InsufficientData, std::to_string(n) + " windows are too few for a validation split");
  WindowSet train{ws.rows, ws.lookback, {ws.starts.begin(), ws.starts.end() - static_cast<long>(n_val)}};
  WindowSet val{ws.rows, ws.lookback, {ws.starts.end() - static_cast<long>(n_val), ws.starts.end()}};
  return {std::move(train), std::move(val)};
}

}  // namespace gridcast
