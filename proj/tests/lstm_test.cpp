#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gridcast/lstm.hpp"
#include "support/gradcheck.hpp"

namespace gridcast {
namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

Matrix random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Matrix m(r, c);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = u(rng);
  return m;
}

TEST(CellForward, ZeroParametersGiveHalfGates) {
  const auto p = LstmLayerParams::zeros(4, 3);
  std::mt19937_64 rng(1);
  const Matrix x = random_matrix(3, 1, rng, 5.0);
  auto [state, cache] = cell_forward(x, LstmState::zeros(4, 1), p);
  EXPECT_TRUE(cache.forget.isConstant(0.5));
  EXPECT_TRUE(cache.input.isConstant(0.5));
  EXPECT_TRUE(cache.output.isConstant(0.5));
  EXPECT_TRUE(cache.candidate.isZero());
  EXPECT_TRUE(state.c.isZero());
  EXPECT_TRUE(state.h.isZero());
}

TEST(CellForward, SaturatedGatesRememberCell) {
  auto p = LstmLayerParams::zeros(3, 2);
  p.b_forget.setConstant(20.0);
  p.b_input.setConstant(-20.0);
  std::mt19937_64 rng(2);
  LstmState s{Matrix::Zero(3, 1), random_matrix(3, 1, rng, 2.0)};
  auto [next, cache] = cell_forward(random_matrix(2, 1, rng), s, p);
  EXPECT_LT((next.c - s.c).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(CellForward, MatchesScalarRecomputation) {
  std::mt19937_64 rng(3);
  const Eigen::Index hidden = 3, in = 4;
  LstmLayerParams p{random_matrix(hidden, hidden + in, rng), random_matrix(hidden, hidden + in, rng),
                    random_matrix(hidden, hidden + in, rng), random_matrix(hidden, hidden + in, rng),
                    random_matrix(hidden, 1, rng),           random_matrix(hidden, 1, rng),
                    random_matrix(hidden, 1, rng),           random_matrix(hidden, 1, rng)};
  const Matrix x = random_matrix(in, 1, rng);
  const LstmState s{random_matrix(hidden, 1, rng, 0.9), random_matrix(hidden, 1, rng, 2.0)};
  auto [next, cache] = cell_forward(x, s, p);

  std::vector<double> concat;
  for (Eigen::Index k = 0; k < hidden; ++k) concat.push_back(s.h(k, 0));
  for (Eigen::Index k = 0; k < in; ++k) concat.push_back(x(k, 0));
  for (Eigen::Index j = 0; j < hidden; ++j) {
    double zf = p.b_forget(j), zi = p.b_input(j), zc = p.b_candidate(j), zo = p.b_output(j);
    for (std::size_t k = 0; k < concat.size(); ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      zf += p.w_forget(j, kk) * concat[k];
      zi += p.w_input(j, kk) * concat[k];
      zc += p.w_candidate(j, kk) * concat[k];
      zo += p.w_output(j, kk) * concat[k];
    }
    const double f = sigmoid(zf), i = sigmoid(zi), c_hat = std::tanh(zc), o = sigmoid(zo);
    const double c = i * c_hat + f * s.c(j, 0);
    const double h = o * std::tanh(c);
    EXPECT_NEAR(cache.forget(j, 0), f, 1e-12);
    EXPECT_NEAR(cache.input(j, 0), i, 1e-12);
    EXPECT_NEAR(cache.candidate(j, 0), c_hat, 1e-12);
    EXPECT_NEAR(cache.output(j, 0), o, 1e-12);
    EXPECT_NEAR(next.c(j, 0), c, 1e-12);
    EXPECT_NEAR(next.h(j, 0), h, 1e-12);
  }
}

TEST(CellForward, GateRangesAndHiddenBound) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    auto p = LstmLayerParams::zeros(5, 3);
    visit_tensors([&](auto& t) { t = random_matrix(t.rows(), t.cols(), rng, 4.0); }, p);
    LstmState s{random_matrix(5, 7, rng, 1.0), random_matrix(5, 7, rng, 10.0)};
    auto [next, cache] = cell_forward(random_matrix(3, 7, rng, 10.0), s, p);
    for (const Matrix* g : {&cache.forget, &cache.input, &cache.output}) {
      EXPECT_GE(g->minCoeff(), 0.0);
      EXPECT_LE(g->maxCoeff(), 1.0);
    }
    EXPECT_LE(cache.candidate.cwiseAbs().maxCoeff(), 1.0);
    EXPECT_LE(next.h.cwiseAbs().maxCoeff(), 1.0);
  }
}

TEST(CellForward, ShapeMismatch) {
  const auto p = LstmLayerParams::zeros(3, 2);
  EXPECT_THROW(cell_forward(Matrix::Zero(4, 1), LstmState::zeros(3, 1), p), Error);
  EXPECT_THROW(cell_forward(Matrix::Zero(2, 1), LstmState::zeros(2, 1), p), Error);
}

TEST(Forward, NoDropoutMeansTrainEqualsInfer) {
  auto m = testing::random_model(3, 6, 2, 5, 9);
  m.dropout_rate = 0.0;
  std::mt19937_64 rng(1), data(2);
  const Matrix w = random_matrix(5, 3, data);
  EXPECT_EQ(forward(w, m, Mode::Train, &rng).first, forward(w, m, Mode::Infer).first);
}

TEST(Forward, InferIsDeterministic) {
  auto m = testing::random_model(3, 6, 4, 5, 10);
  m.dropout_rate = 0.2;
  std::mt19937_64 data(2);
  const Matrix w = random_matrix(5, 3, data);
  EXPECT_EQ(forward(w, m, Mode::Infer).first, forward(w, m, Mode::Infer).first);
}

TEST(Forward, DropFractionMatchesRate) {
  // 100 units x 100 samples = 10^4 independent mask entries.
  LstmModel m = init_model(2, ModelShape{1, 100, 0.2}, 5);
  m.lookback = 1;
  std::mt19937_64 rng(77);
  auto [pred, cache] = forward_batch({Matrix::Ones(2, 100)}, m, Mode::Train, &rng);
  const Matrix& mask = cache.masks[0][0];
  ASSERT_EQ(mask.size(), 10000);
  const double dropped = static_cast<double>((mask.array() == 0.0).count()) / static_cast<double>(mask.size());
  EXPECT_NEAR(dropped, 0.2, 0.03);
  EXPECT_NEAR(mask.maxCoeff(), 1.0 / 0.8, 1e-15);
}

TEST(Forward, WindowLengthMismatch) {
  auto m = testing::random_model(3, 4, 1, 5, 1);
  EXPECT_THROW(forward(Matrix::Zero(4, 3), m, Mode::Infer), Error);
}

TEST(Mse, Basics) {
  EXPECT_EQ(mse(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 3}), 0.0);
  EXPECT_EQ(mse(std::vector<double>{1, 1}, std::vector<double>{0, 0}), 1.0);
  EXPECT_THROW(mse(std::vector<double>{}, std::vector<double>{}), Error);
  EXPECT_THROW(mse(std::vector<double>{1}, std::vector<double>{1, 2}), Error);
}

TEST(Mse, MatchesSummationOracle) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> n(0.0, 3.0);
  std::vector<double> a(50), b(50);
  double sum = 0.0;
  for (std::size_t i = 0; i < 50; ++i) {
    a[i] = n(rng);
    b[i] = n(rng);
    sum += (a[i] - b[i]) * (a[i] - b[i]);
  }
  EXPECT_NEAR(mse(a, b), sum / 50.0, 1e-12 * sum / 50.0);
  EXPECT_GT(mse(a, b), 0.0);
}

TEST(Backward, ZeroLossGradientGivesZeroGradients) {
  auto m = testing::random_model(3, 4, 2, 5, 3);
  std::mt19937_64 data(2);
  auto [pred, cache] = forward(random_matrix(5, 3, data), m, Mode::Infer);
  auto g = backward(cache, m, 0.0);
  visit_model_tensors([](auto& t) { EXPECT_TRUE(t.isZero()); }, g);
}

TEST(Backward, SingleLayerMatchesFiniteDifferences) {
  auto m = testing::random_model(2, 2, 1, 3, 21);
  std::mt19937_64 data(5);
  const auto result = testing::gradient_check(m, random_matrix(3, 2, data), 0.7);
  EXPECT_LT(result.max_rel_error, 1e-4);
  EXPECT_EQ(result.entries, 4u * 2u * 4u + 4u * 2u + 2u + 1u);
}

TEST(Backward, StackedLayersMatchFiniteDifferences) {
  auto m = testing::random_model(3, 3, 3, 4, 22);
  std::mt19937_64 data(6);
  EXPECT_LT(testing::gradient_check(m, random_matrix(4, 3, data), -0.3).max_rel_error, 1e-4);
}

TEST(Backward, DropoutMasksArePropagated) {
  // With a fixed mask, the Train-mode loss is a deterministic function of the
  // parameters; check the analytic gradient against differences that replay
  // the same dropout draws.
  auto m = testing::random_model(2, 3, 2, 3, 23);
  m.dropout_rate = 0.3;
  std::mt19937_64 data(7);
  const Matrix w = random_matrix(3, 2, data);
  const double target = 0.2;
  auto loss_with_seed = [&](const LstmModel& model) {
    std::mt19937_64 rng(99);
    auto [p, c] = forward(w, model, Mode::Train, &rng);
    return (p - target) * (p - target);
  };
  std::mt19937_64 rng(99);
  auto [pred, cache] = forward(w, m, Mode::Train, &rng);
  auto g = backward(cache, m, 2.0 * (pred - target));

  const double h = 1e-5;
  double worst = 0.0;
  visit_model_tensors(
      [&](auto& param, auto& grad) {
        for (Eigen::Index k = 0; k < param.size(); ++k) {
          const double saved = param.data()[k];
          param.data()[k] = saved + h;
          const double up = loss_with_seed(m);
          param.data()[k] = saved - h;
          const double down = loss_with_seed(m);
          param.data()[k] = saved;
          const double num = (up - down) / (2 * h);
          worst = std::max(worst, std::abs(num - grad.data()[k]) / std::max({std::abs(num), std::abs(grad.data()[k]), 1e-7}));
        }
      },
      m, g);
  EXPECT_LT(worst, 1e-4);
}

TEST(Backward, StepAlongNegativeGradientReducesLoss) {
  LstmModel m = init_model(6, ModelShape{}, 31);
  m.lookback = 30;
  m.dropout_rate = 0.0;
  std::mt19937_64 data(8);
  const Matrix w = random_matrix(30, 6, data);
  const double target = 1.5;
  auto [pred, cache] = forward(w, m, Mode::Infer);
  const double before = (pred - target) * (pred - target);
  auto g = backward(cache, m, 2.0 * (pred - target));
  visit_model_tensors([](auto& p, auto& d) { p -= 1e-4 * d; }, m, g);
  const double after = testing::window_loss(m, w, target);
  EXPECT_LT(after, before);
}

TEST(Backward, RejectsForeignCache) {
  auto a = testing::random_model(2, 3, 2, 3, 1);
  auto b = testing::random_model(2, 3, 1, 3, 1);
  auto [pred, cache] = forward(Matrix::Zero(3, 2), a, Mode::Infer);
  EXPECT_THROW(backward(cache, b, 1.0), Error);
}

TEST(Backward, BatchGradientIsSumOfSingles) {
  auto m = testing::random_model(2, 3, 2, 4, 40);
  std::mt19937_64 data(9);
  std::vector<Matrix> windows{random_matrix(4, 2, data), random_matrix(4, 2, data), random_matrix(4, 2, data)};
  std::vector<Matrix> seq(4, Matrix(2, 3));
  for (int b = 0; b < 3; ++b)
    for (int t = 0; t < 4; ++t) seq[static_cast<std::size_t>(t)].col(b) = windows[static_cast<std::size_t>(b)].row(t).transpose();
  RowVector lg(3);
  lg << 0.3, -1.2, 0.8;
  auto [pred, cache] = forward_batch(seq, m, Mode::Infer);
  auto batched = backward(cache, m, lg);

  ModelGradients summed = ModelGradients::zeros_like(m);
  for (int b = 0; b < 3; ++b) {
    auto [p1, c1] = forward(windows[static_cast<std::size_t>(b)], m, Mode::Infer);
    EXPECT_NEAR(p1, pred(b), 1e-12);
    auto g1 = backward(c1, m, lg(b));
    visit_model_tensors([](auto& acc, auto& x) { acc += x; }, summed, g1);
  }
  visit_model_tensors([](auto& x, auto& y) { EXPECT_LT((x - y).cwiseAbs().maxCoeff(), 1e-12); }, batched, summed);
}

TEST(ClipGlobalNorm, ScalesOnlyAboveThreshold) {
  auto m = testing::random_model(2, 3, 1, 3, 1);
  auto g = ModelGradients::zeros_like(m);
  g.head_b(0) = 3.0;
  g.head_w(0, 0) = 4.0;
  EXPECT_DOUBLE_EQ(clip_global_norm(g, 10.0), 5.0);
  EXPECT_DOUBLE_EQ(g.head_b(0), 3.0);
  clip_global_norm(g, 1.0);
  EXPECT_NEAR(global_norm(g), 1.0, 1e-15);
}

TEST(InitModel, ShapesAndBiases) {
  const auto m = init_model(6, ModelShape{}, 1);
  EXPECT_EQ(m.layers.size(), 4u);
  EXPECT_EQ(m.layers[0].input_size(), 6);
  EXPECT_EQ(m.layers[1].input_size(), 50);
  EXPECT_EQ(m.top_hidden(), 50);
  EXPECT_TRUE(m.layers[2].b_forget.isOnes());
  EXPECT_TRUE(m.layers[2].b_input.isZero());
  const double limit = std::sqrt(6.0 / (56.0 + 50.0));
  EXPECT_LE(m.layers[0].w_candidate.cwiseAbs().maxCoeff(), limit);
}

}  // namespace
}  // namespace gridcast
