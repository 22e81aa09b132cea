#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "gridcast/adam.hpp"
#include "gridcast/calendar.hpp"
#include "gridcast/error.hpp"
#include "gridcast/features.hpp"
#include "gridcast/lstm.hpp"
#include "gridcast/timeseries.hpp"

namespace gridcast {

struct TrainConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double decay_rate = 0.01;  // per epoch
  std::size_t max_epochs = 200;
  std::size_t patience = 10;
  std::size_t batch_size = 32;
  std::uint64_t seed = 42;
  double clip_norm = 5.0;
  double validation_fraction = 0.1;
  ModelShape shape{};

  void check() const {
    require(learning_rate > 0.0, ErrorKind::Validation, "learning_rate must be positive");
    require(beta1 > 0.0 && beta1 < beta2 && beta2 < 1.0, ErrorKind::Validation, "need 0 < beta1 < beta2 < 1");
    require(epsilon > 0.0, ErrorKind::Validation, "epsilon must be positive");
    require(decay_rate >= 0.0, ErrorKind::Validation, "decay_rate must be non-negative");
    require(patience >= 1, ErrorKind::Validation, "patience must be at least 1");
    require(batch_size >= 1, ErrorKind::Validation, "batch_size must be at least 1");
    require(max_epochs >= 1, ErrorKind::Validation, "max_epochs must be at least 1");
    require(shape.layers >= 1 && shape.hidden >= 1, ErrorKind::Validation, "model needs at least one unit");
    require(shape.dropout_rate >= 0.0 && shape.dropout_rate < 1.0, ErrorKind::Validation,
            "dropout rate must lie in [0, 1)");
  }

  AdamHyper adam() const { return {beta1, beta2, epsilon}; }
};

struct EpochStats {
  std::size_t epoch = 0;  // 1-based
  double train_mse = 0.0;
  double val_mse = 0.0;
  double lr = 0.0;

  friend bool operator==(const EpochStats&, const EpochStats&) = default;
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  std::size_t stopped_epoch = 0;
  std::size_t best_epoch = 0;

  double best_val_mse() const { return epochs.at(best_epoch - 1).val_mse; }
  friend bool operator==(const TrainReport&, const TrainReport&) = default;
};

inline std::string to_csv(const TrainReport& report) {
  std::string out = "epoch,train_mse,val_mse,lr\n";
  for (const auto& e : report.epochs) {
    out += std::to_string(e.epoch) + ',' + detail::format_double(e.train_mse) + ',' +
           detail::format_double(e.val_mse) + ',' + detail::format_double(e.lr) + '\n';
  }
  return out;
}

// Patience-based stopping on a validation metric that keeps a snapshot of
// whatever state produced the best value so far.
template <class Snapshot>
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience) : patience_(patience) {}

  // Records one epoch's metric; returns true once training should stop.
  bool observe(double val_loss, const Snapshot& state) {
    ++epoch_;
    if (!best_ || val_loss < best_loss_) {
      best_loss_ = val_loss;
      best_ = state;
      best_epoch_ = epoch_;
      waited_ = 0;
      return false;
    }
    return ++waited_ >= patience_;
  }

  const Snapshot& best() const { return *best_; }
  std::size_t best_epoch() const { return best_epoch_; }
  double best_loss() const { return best_loss_; }

 private:
  std::size_t patience_;
  std::size_t epoch_ = 0;
  std::size_t waited_ = 0;
  std::size_t best_epoch_ = 0;
  double best_loss_ = std::numeric_limits<double>::infinity();
  std::optional<Snapshot> best_;
};

struct TrainResult {
  LstmModel model;
  TrainReport report;
};

// Called after every epoch; returning false stops training early.
using EpochCallback = std::function<bool(const EpochStats&)>;

inline TrainResult train(const WindowSet& windows, const WindowSet& val_windows, const TrainConfig& config,
                         const EpochCallback& on_epoch = {}) {
  config.check();
  if (windows.empty()) fail(ErrorKind::EmptyData, "no training windows");
  if (val_windows.empty()) fail(ErrorKind::EmptyData, "no validation windows");
  require(windows.input_size() == val_windows.input_size() && windows.lookback == val_windows.lookback,
          ErrorKind::Shape, "training and validation windows differ in shape");

  LstmModel model = init_model(windows.input_size(), config.shape, config.seed);
  model.lookback = windows.lookback;
  model.resolution = windows.rows.resolution;
  model.columns = windows.rows.columns;
  if (windows.rows.scaler) model.scaler = *windows.rows.scaler;

  // Separate streams so the dropout draws do not depend on the shuffle.
  std::mt19937_64 shuffle_rng(config.seed ^ 0x9E3779B97F4A7C15ULL);
  std::mt19937_64 dropout_rng(config.seed + 1);
  AdamState adam = AdamState::for_model(model);
  EarlyStopping<LstmModel> stopper(config.patience);
  TrainReport report;

  const Vector val_targets = targets_of(val_windows);
  std::vector<std::size_t> order(windows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const double lr = lr_schedule(epoch - 1, config.learning_rate, config.decay_rate);
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double sq_sum = 0.0;
    for (std::size_t first = 0; first < order.size(); first += config.batch_size) {
      const std::size_t count = std::min(config.batch_size, order.size() - first);
      auto [pred, cache] = forward_batch(gather_batch(windows, order, first, count), model, Mode::Train, &dropout_rng);
      RowVector target(static_cast<Eigen::Index>(count));
      for (std::size_t b = 0; b < count; ++b) target(static_cast<Eigen::Index>(b)) = windows.target(order[first + b]);

      const RowVector residual = pred - target;
      sq_sum += residual.squaredNorm();
      const RowVector loss_grad = residual * (2.0 / static_cast<double>(count));
      ModelGradients grads = backward(cache, model, loss_grad);
      clip_global_norm(grads, config.clip_norm);
      adam_step(model, grads, adam, lr, config.adam());
    }

    EpochStats stats{epoch, sq_sum / static_cast<double>(order.size()), 0.0, lr};
    if (!std::isfinite(stats.train_mse))
      fail(ErrorKind::Divergence, "training loss became non-finite at epoch " + std::to_string(epoch));
    stats.val_mse = mse(predict(model, val_windows), val_targets);
    if (!std::isfinite(stats.val_mse))
      fail(ErrorKind::Divergence, "validation loss became non-finite at epoch " + std::to_string(epoch));
    report.epochs.push_back(stats);
    report.stopped_epoch = epoch;

    const bool stop = stopper.observe(stats.val_mse, model);
    if (stop || (on_epoch && !on_epoch(stats))) break;
  }

  report.best_epoch = stopper.best_epoch();
  return {stopper.best(), std::move(report)};
}

// Autoregressive daily rollout. `history` must be standardized with the
// model's scaler and end the day before `horizon.front()`.
inline LoadSeries forecast(const LstmModel& model, const FeatureMatrix& history, const std::vector<Date>& horizon) {
  model.check();
  if (model.resolution != Resolution::Daily) fail(ErrorKind::Resolution, "forecast rolls out daily models only");
  if (horizon.empty()) return LoadSeries({}, Resolution::Daily);

  const auto lookback = static_cast<Eigen::Index>(model.lookback);
  require(history.cols() == model.input_size(), ErrorKind::Shape, "history columns differ from the model input");
  if (history.rows() < lookback)
    fail(ErrorKind::InsufficientData, "forecast needs " + std::to_string(lookback) + " seed rows");
  const Date last_seen = calendar::date_of(history.stamps.back());
  for (std::size_t i = 0; i < horizon.size(); ++i) {
    const Date expected = (i == 0 ? last_seen : horizon[i - 1]) + std::chrono::days{1};
    if (horizon[i] != expected)
      fail(ErrorKind::Calendar, "horizon date " + calendar::format_date(horizon[i]) + " should be " +
                                    calendar::format_date(expected));
  }

  const auto& sc = model.scaler;
  require(sc.columns() == model.input_size(), ErrorKind::Shape, "model scaler does not match its input size");
  Matrix window = history.values.bottomRows(lookback);
  std::vector<LoadRecord> out;
  out.reserve(horizon.size());
  for (const Date d : horizon) {
    auto [z, cache] = forward(window, model, Mode::Infer);
    Vector row(model.input_size());
    row(0) = z;
    row.tail(row.size() - 1) = (calendar_features(HourStamp{d}, Resolution::Daily) - sc.means.tail(row.size() - 1))
                                   .cwiseQuotient(sc.stds.tail(row.size() - 1));
    window.topRows(lookback - 1) = window.bottomRows(lookback - 1).eval();
    window.row(lookback - 1) = row.transpose();
    out.push_back({HourStamp{d}, std::max(0.0, z * sc.stds(0) + sc.means(0))});
  }
  return LoadSeries(std::move(out), Resolution::Daily);
}

inline std::vector<Date> date_range(Date first, std::size_t days) {
  std::vector<Date> out;
  out.reserve(days);
  for (std::size_t i = 0; i < days; ++i) out.push_back(first + std::chrono::days{static_cast<long>(i)});
  return out;
}

}  // namespace gridcast
