#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>

#include "gridcast/error.hpp"
#include "gridcast/lstm.hpp"

namespace gridcast {

struct AdamHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// One bias-corrected Adam update of a single tensor. `step` is 1-based.
template <class P, class G, class M>
void adam_step(Eigen::MatrixBase<P>& param, const Eigen::MatrixBase<G>& grad, Eigen::MatrixBase<M>& first,
               Eigen::MatrixBase<M>& second, std::size_t step, double lr, const AdamHyper& h = {}) {
  require(step >= 1, ErrorKind::Validation, "adam step index starts at 1");
  require(param.rows() == grad.rows() && param.cols() == grad.cols() && first.rows() == param.rows() &&
              first.cols() == param.cols() && second.rows() == param.rows() && second.cols() == param.cols(),
          ErrorKind::Shape, "adam tensors disagree in shape");
  const double t = static_cast<double>(step);
  const double c1 = 1.0 - std::pow(h.beta1, t);
  const double c2 = 1.0 - std::pow(h.beta2, t);
  first.derived() = h.beta1 * first.derived() + (1.0 - h.beta1) * grad.derived();
  second.derived() = h.beta2 * second.derived() + (1.0 - h.beta2) * grad.derived().cwiseAbs2();
  param.derived().array() -=
      lr * (first.derived().array() / c1) / ((second.derived().array() / c2).sqrt() + h.epsilon);
}

// Moment buffers for a whole model plus the shared step counter.
struct AdamState {
  ModelGradients first;
  ModelGradients second;
  std::size_t step = 0;

  static AdamState for_model(const LstmModel& m) {
    return {ModelGradients::zeros_like(m), ModelGradients::zeros_like(m), 0};
  }
};

inline void adam_step(LstmModel& model, ModelGradients& grads, AdamState& state, double lr, const AdamHyper& h = {}) {
  require(grads.layers.size() == model.layers.size() && state.first.layers.size() == model.layers.size(),
          ErrorKind::Shape, "gradient layout differs from the model");
  ++state.step;
  visit_model_tensors([&](auto& p, auto& g, auto& m, auto& v) { adam_step(p, g, m, v, state.step, lr, h); }, model,
                      grads, state.first, state.second);
}

// Time-based decay: lr0 / (1 + decay_rate * epoch), epoch counted from 0.
inline double lr_schedule(std::size_t epoch, double initial_lr, double decay_rate) {
  return initial_lr / (1.0 + decay_rate * static_cast<double>(epoch));
}

}  // namespace gridcast
