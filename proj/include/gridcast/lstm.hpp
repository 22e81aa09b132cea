#pragma once

// Stacked LSTM regressor with inverted dropout between layers and a linear
// head on the last step of the top layer. All batched quantities are stored
// column-per-sample: a (features x batch) matrix per time step.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "gridcast/error.hpp"
#include "gridcast/features.hpp"

namespace gridcast {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

// Gate weights act on the concatenation [h_{t-1}; x_t], so each matrix is
// hidden x (hidden + input) with the recurrent block in the leading columns.
struct LstmLayerParams {
  Matrix w_forget, w_input, w_candidate, w_output;
  Vector b_forget, b_input, b_candidate, b_output;

  Eigen::Index hidden_size() const { return w_forget.rows(); }
  Eigen::Index input_size() const { return w_forget.cols() - w_forget.rows(); }

  static LstmLayerParams zeros(Eigen::Index hidden, Eigen::Index input) {
    const Eigen::Index cols = hidden + input;
    return {Matrix::Zero(hidden, cols), Matrix::Zero(hidden, cols), Matrix::Zero(hidden, cols),
            Matrix::Zero(hidden, cols), Vector::Zero(hidden),       Vector::Zero(hidden),
            Vector::Zero(hidden),       Vector::Zero(hidden)};
  }

  void check() const {
    const auto h = w_forget.rows();
    const auto c = w_forget.cols();
    const bool same = w_input.rows() == h && w_input.cols() == c && w_candidate.rows() == h &&
                      w_candidate.cols() == c && w_output.rows() == h && w_output.cols() == c;
    require(same && c > h, ErrorKind::Shape, "gate weight matrices disagree in shape");
    require(b_forget.size() == h && b_input.size() == h && b_candidate.size() == h && b_output.size() == h,
            ErrorKind::Shape, "gate bias length differs from hidden size");
  }
};

// Calls f on matching tensors of every argument, in declaration order.
template <class F, class... Layers>
void visit_tensors(F&& f, Layers&... layers) {
  f(layers.w_forget...);
  f(layers.w_input...);
  f(layers.w_candidate...);
  f(layers.w_output...);
  f(layers.b_forget...);
  f(layers.b_input...);
  f(layers.b_candidate...);
  f(layers.b_output...);
}

struct LstmState {
  Matrix h;  // hidden x batch
  Matrix c;

  static LstmState zeros(Eigen::Index hidden, Eigen::Index batch) {
    return {Matrix::Zero(hidden, batch), Matrix::Zero(hidden, batch)};
  }
};

struct CellCache {
  Matrix concat;  // [h_{t-1}; x_t]
  Matrix forget, input, candidate, output;
  Matrix c_prev, c, tanh_c;
};

namespace detail {

inline Matrix sigmoid(const Matrix& z) { return (1.0 / (1.0 + (-z.array()).exp())).matrix(); }

}  // namespace detail

inline std::pair<LstmState, CellCache> cell_forward(const Matrix& x, const LstmState& state,
                                                    const LstmLayerParams& p) {
  const auto hidden = p.hidden_size();
  require(x.rows() == p.input_size(), ErrorKind::Shape,
          "cell input has " + std::to_string(x.rows()) + " features, layer expects " + std::to_string(p.input_size()));
  require(state.h.rows() == hidden && state.c.rows() == hidden && state.h.cols() == x.cols() &&
              state.c.cols() == x.cols(),
          ErrorKind::Shape, "state dimensions do not match the layer");

  CellCache cache;
  cache.concat.resize(hidden + x.rows(), x.cols());
  cache.concat.topRows(hidden) = state.h;
  cache.concat.bottomRows(x.rows()) = x;

  cache.forget = detail::sigmoid((p.w_forget * cache.concat).colwise() + p.b_forget);
  cache.input = detail::sigmoid((p.w_input * cache.concat).colwise() + p.b_input);
  cache.candidate = ((p.w_candidate * cache.concat).colwise() + p.b_candidate).array().tanh().matrix();
  cache.output = detail::sigmoid((p.w_output * cache.concat).colwise() + p.b_output);
  cache.c_prev = state.c;
  cache.c = cache.input.cwiseProduct(cache.candidate) + cache.forget.cwiseProduct(state.c);
  cache.tanh_c = cache.c.array().tanh().matrix();

  LstmState next{cache.output.cwiseProduct(cache.tanh_c), cache.c};
  return {std::move(next), std::move(cache)};
}

struct CellGradients {
  Matrix dh_prev;
  Matrix dc_prev;
  Matrix dx;
};

// Backpropagates one step. dh and dc are the gradients flowing into h_t and
// C_t; parameter gradients are accumulated into `grads`.
inline CellGradients cell_backward(const CellCache& cache, const LstmLayerParams& p, const Matrix& dh,
                                   const Matrix& dc_next, LstmLayerParams& grads) {
  const auto hidden = p.hidden_size();
  const auto one = [](const Matrix& m) { return Matrix::Ones(m.rows(), m.cols()); };

  const Matrix d_output = dh.cwiseProduct(cache.tanh_c);
  const Matrix dc =
      dc_next + dh.cwiseProduct(cache.output).cwiseProduct(one(cache.tanh_c) - cache.tanh_c.cwiseAbs2());

  const Matrix dz_forget =
      dc.cwiseProduct(cache.c_prev).cwiseProduct(cache.forget.cwiseProduct(one(cache.forget) - cache.forget));
  const Matrix dz_input =
      dc.cwiseProduct(cache.candidate).cwiseProduct(cache.input.cwiseProduct(one(cache.input) - cache.input));
  const Matrix dz_candidate =
      dc.cwiseProduct(cache.input).cwiseProduct(one(cache.candidate) - cache.candidate.cwiseAbs2());
  const Matrix dz_output = d_output.cwiseProduct(cache.output.cwiseProduct(one(cache.output) - cache.output));

  grads.w_forget.noalias() += dz_forget * cache.concat.transpose();
  grads.w_input.noalias() += dz_input * cache.concat.transpose();
  grads.w_candidate.noalias() += dz_candidate * cache.concat.transpose();
  grads.w_output.noalias() += dz_output * cache.concat.transpose();
  grads.b_forget += dz_forget.rowwise().sum();
  grads.b_input += dz_input.rowwise().sum();
  grads.b_candidate += dz_candidate.rowwise().sum();
  grads.b_output += dz_output.rowwise().sum();

  Matrix d_concat = p.w_forget.transpose() * dz_forget;
  d_concat.noalias() += p.w_input.transpose() * dz_input;
  d_concat.noalias() += p.w_candidate.transpose() * dz_candidate;
  d_concat.noalias() += p.w_output.transpose() * dz_output;

  return {d_concat.topRows(hidden), dc.cwiseProduct(cache.forget), d_concat.bottomRows(d_concat.rows() - hidden)};
}

struct LstmModel {
  std::vector<LstmLayerParams> layers;
  double dropout_rate = 0.2;
  Matrix head_w;  // 1 x hidden of the top layer
  Vector head_b;  // length 1
  ScalerParams scaler;
  std::size_t lookback = 30;
  Resolution resolution = Resolution::Daily;
  std::vector<std::string> columns;

  Eigen::Index input_size() const { return layers.empty() ? 0 : layers.front().input_size(); }
  Eigen::Index top_hidden() const { return layers.empty() ? 0 : layers.back().hidden_size(); }

  void check() const {
    require(!layers.empty(), ErrorKind::Shape, "model has no layers");
    for (std::size_t i = 0; i < layers.size(); ++i) {
      layers[i].check();
      if (i > 0)
        require(layers[i].input_size() == layers[i - 1].hidden_size(), ErrorKind::Shape,
                "layer " + std::to_string(i) + " input size differs from the previous hidden size");
    }
    require(dropout_rate >= 0.0 && dropout_rate < 1.0, ErrorKind::Validation, "dropout rate must lie in [0, 1)");
    require(head_w.rows() == 1 && head_w.cols() == top_hidden() && head_b.size() == 1, ErrorKind::Shape,
            "output head does not match the top layer");
    require(lookback > 0, ErrorKind::Validation, "lookback must be positive");
  }
};

// Gradient container mirroring the trainable part of LstmModel.
struct ModelGradients {
  std::vector<LstmLayerParams> layers;
  Matrix head_w;
  Vector head_b;

  static ModelGradients zeros_like(const LstmModel& m) {
    ModelGradients g;
    for (const auto& l : m.layers) g.layers.push_back(LstmLayerParams::zeros(l.hidden_size(), l.input_size()));
    g.head_w = Matrix::Zero(m.head_w.rows(), m.head_w.cols());
    g.head_b = Vector::Zero(m.head_b.size());
    return g;
  }
};

// Visits every trainable tensor of structurally identical models/gradients.
template <class F, class... Ms>
void visit_model_tensors(F&& f, Ms&... ms) {
  const std::size_t n = std::get<0>(std::forward_as_tuple(ms...)).layers.size();
  for (std::size_t i = 0; i < n; ++i) visit_tensors(f, ms.layers[i]...);
  f(ms.head_w...);
  f(ms.head_b...);
}

inline double global_norm(ModelGradients& g) {
  double sq = 0.0;
  visit_model_tensors([&](auto& t) { sq += t.squaredNorm(); }, g);
  return std::sqrt(sq);
}

// Rescales gradients so their global L2 norm is at most max_norm. Returns the
// norm before clipping.
inline double clip_global_norm(ModelGradients& g, double max_norm) {
  const double norm = global_norm(g);
  if (max_norm > 0.0 && norm > max_norm) {
    const double scale = max_norm / norm;
    visit_model_tensors([&](auto& t) { t *= scale; }, g);
  }
  return norm;
}

struct ModelShape {
  std::size_t layers = 4;
  Eigen::Index hidden = 50;
  double dropout_rate = 0.2;
};

// Glorot-uniform weights, zero biases except the forget gate at 1.
inline LstmModel init_model(Eigen::Index input_size, const ModelShape& shape, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto glorot = [&](Eigen::Index rows, Eigen::Index cols, double fan_in, double fan_out) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = limit * u(rng);
    return m;
  };

  LstmModel model;
  model.dropout_rate = shape.dropout_rate;
  Eigen::Index in = input_size;
  for (std::size_t l = 0; l < shape.layers; ++l) {
    const auto h = shape.hidden;
    const auto fan_in = static_cast<double>(h + in);
    const auto fan_out = static_cast<double>(h);
    LstmLayerParams p = LstmLayerParams::zeros(h, in);
    p.w_forget = glorot(h, h + in, fan_in, fan_out);
    p.w_input = glorot(h, h + in, fan_in, fan_out);
    p.w_candidate = glorot(h, h + in, fan_in, fan_out);
    p.w_output = glorot(h, h + in, fan_in, fan_out);
    p.b_forget.setOnes();
    model.layers.push_back(std::move(p));
    in = h;
  }
  model.head_w = glorot(1, in, static_cast<double>(in), 1.0);
  model.head_b = Vector::Zero(1);
  return model;
}

enum class Mode { Train, Infer };

struct ForwardCache {
  Mode mode = Mode::Infer;
  // steps[layer][t]
  std::vector<std::vector<CellCache>> steps;
  // masks[layer][t]: 0 or 1/(1-p) per unit; empty in Infer mode or when p == 0
  std::vector<std::vector<Matrix>> masks;
  Matrix top_output;  // dropped-out final hidden state fed to the head
  Eigen::Index batch = 0;
};

// Runs the stack over a sequence of (input x batch) matrices from zero states.
inline std::pair<RowVector, ForwardCache> forward_batch(const std::vector<Matrix>& sequence, const LstmModel& model,
                                                        Mode mode, std::mt19937_64* rng = nullptr) {
  require(!sequence.empty(), ErrorKind::Shape, "empty input sequence");
  const Eigen::Index batch = sequence.front().cols();
  const bool drop = mode == Mode::Train && model.dropout_rate > 0.0;
  if (drop) require(rng != nullptr, ErrorKind::State, "train-mode dropout needs a random generator");

  ForwardCache cache;
  cache.mode = mode;
  cache.batch = batch;
  cache.steps.resize(model.layers.size());
  cache.masks.resize(model.layers.size());

  const double keep = 1.0 - model.dropout_rate;
  std::bernoulli_distribution keep_unit(keep);

  std::vector<Matrix> inputs = sequence;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const auto& p = model.layers[l];
    LstmState state = LstmState::zeros(p.hidden_size(), batch);
    std::vector<Matrix> outputs;
    outputs.reserve(inputs.size());
    cache.steps[l].reserve(inputs.size());
    for (const auto& x : inputs) {
      auto [next, step] = cell_forward(x, state, p);
      state = std::move(next);
      cache.steps[l].push_back(std::move(step));
      outputs.push_back(state.h);
    }
    if (drop) {
      for (auto& out : outputs) {
        Matrix mask(out.rows(), out.cols());
        for (Eigen::Index j = 0; j < mask.cols(); ++j)
          for (Eigen::Index i = 0; i < mask.rows(); ++i) mask(i, j) = keep_unit(*rng) ? 1.0 / keep : 0.0;
        out = out.cwiseProduct(mask);
        cache.masks[l].push_back(std::move(mask));
      }
    }
    inputs = std::move(outputs);
  }

  cache.top_output = inputs.back();
  RowVector pred = (model.head_w * cache.top_output).array() + model.head_b(0);
  return {std::move(pred), std::move(cache)};
}

// Converts a (lookback x features) window into a batch-of-one sequence.
inline std::vector<Matrix> as_sequence(const Eigen::Ref<const Matrix>& window) {
  std::vector<Matrix> seq;
  seq.reserve(static_cast<std::size_t>(window.rows()));
  for (Eigen::Index t = 0; t < window.rows(); ++t) seq.push_back(window.row(t).transpose());
  return seq;
}

// Gathers windows [first, first + count) of `order` into per-step batches.
inline std::vector<Matrix> gather_batch(const WindowSet& ws, const std::vector<std::size_t>& order,
                                        std::size_t first, std::size_t count) {
  std::vector<Matrix> seq(ws.lookback, Matrix(ws.input_size(), static_cast<Eigen::Index>(count)));
  for (std::size_t b = 0; b < count; ++b) {
    const auto start = static_cast<Eigen::Index>(ws.starts[order[first + b]]);
    for (std::size_t t = 0; t < ws.lookback; ++t)
      seq[t].col(static_cast<Eigen::Index>(b)) = ws.rows.values.row(start + static_cast<Eigen::Index>(t)).transpose();
  }
  return seq;
}

inline std::pair<double, ForwardCache> forward(const Eigen::Ref<const Matrix>& window, const LstmModel& model,
                                               Mode mode, std::mt19937_64* rng = nullptr) {
  require(static_cast<std::size_t>(window.rows()) == model.lookback, ErrorKind::Shape,
          "window length " + std::to_string(window.rows()) + " differs from lookback " +
              std::to_string(model.lookback));
  auto [pred, cache] = forward_batch(as_sequence(window), model, mode, rng);
  return {pred(0), std::move(cache)};
}

// Gradients of sum_b loss_grad(b) * prediction(b) with respect to every
// parameter, by backpropagation through time over the whole sequence.
inline ModelGradients backward(const ForwardCache& cache, const LstmModel& model, const RowVector& loss_grad) {
  require(cache.steps.size() == model.layers.size(), ErrorKind::State, "cache was produced by a different model");
  require(loss_grad.size() == cache.batch, ErrorKind::Shape, "loss gradient length differs from batch size");
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    require(!cache.steps[l].empty() && cache.steps[l].front().c.rows() == model.layers[l].hidden_size(),
            ErrorKind::State, "cache layer " + std::to_string(l) + " does not match the model");
  }

  ModelGradients g = ModelGradients::zeros_like(model);
  g.head_w = loss_grad * cache.top_output.transpose();
  g.head_b(0) = loss_grad.sum();

  const std::size_t steps = cache.steps.front().size();
  const Eigen::Index batch = cache.batch;

  // Gradient w.r.t. each (pre-dropout) output of the current layer.
  std::vector<Matrix> d_out(steps);
  const Eigen::Index top_h = model.top_hidden();
  for (auto& d : d_out) d = Matrix::Zero(top_h, batch);
  d_out.back() = model.head_w.transpose() * loss_grad;

  for (std::size_t li = model.layers.size(); li-- > 0;) {
    const auto& p = model.layers[li];
    const auto& masks = cache.masks[li];
    if (!masks.empty())
      for (std::size_t t = 0; t < steps; ++t) d_out[t] = d_out[t].cwiseProduct(masks[t]);

    Matrix dh_next = Matrix::Zero(p.hidden_size(), batch);
    Matrix dc_next = Matrix::Zero(p.hidden_size(), batch);
    std::vector<Matrix> d_in(steps);
    for (std::size_t t = steps; t-- > 0;) {
      const Matrix dh = d_out[t] + dh_next;
      auto step = cell_backward(cache.steps[li][t], p, dh, dc_next, g.layers[li]);
      dh_next = std::move(step.dh_prev);
      dc_next = std::move(step.dc_prev);
      d_in[t] = std::move(step.dx);
    }
    d_out = std::move(d_in);
  }
  return g;
}

inline ModelGradients backward(const ForwardCache& cache, const LstmModel& model, double loss_grad) {
  RowVector g(1);
  g(0) = loss_grad;
  return backward(cache, model, g);
}

template <class A, class B>
double mse(const Eigen::MatrixBase<A>& predictions, const Eigen::MatrixBase<B>& targets) {
  if (predictions.size() == 0) fail(ErrorKind::EmptyData, "mse of an empty vector");
  require(predictions.size() == targets.size(), ErrorKind::Shape, "prediction and target lengths differ");
  const auto n = predictions.size();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = targets.reshaped()(i) - predictions.reshaped()(i);
    sum += r * r;
  }
  return sum / static_cast<double>(n);
}

inline double mse(const std::vector<double>& predictions, const std::vector<double>& targets) {
  return mse(Eigen::Map<const Vector>(predictions.data(), static_cast<Eigen::Index>(predictions.size())),
             Eigen::Map<const Vector>(targets.data(), static_cast<Eigen::Index>(targets.size())));
}

// Infer-mode predictions for every window, in order.
inline Vector predict(const LstmModel& model, const WindowSet& ws, std::size_t batch_size = 256) {
  Vector out(static_cast<Eigen::Index>(ws.size()));
  std::vector<std::size_t> order(ws.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t first = 0; first < ws.size(); first += batch_size) {
    const std::size_t count = std::min(batch_size, ws.size() - first);
    auto [pred, cache] = forward_batch(gather_batch(ws, order, first, count), model, Mode::Infer);
    out.segment(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(count)) = pred.transpose();
  }
  return out;
}

inline Vector targets_of(const WindowSet& ws) {
  Vector y(static_cast<Eigen::Index>(ws.size()));
  for (std::size_t i = 0; i < ws.size(); ++i) y(static_cast<Eigen::Index>(i)) = ws.target(i);
  return y;
}

}  // namespace gridcast
