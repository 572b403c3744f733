#include "zkroa/smooth.hpp"

#include <cmath>
#include <cstring>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "zkroa/systems.hpp"

namespace zkroa {
namespace {

using testutil::Rng;

std::vector<Vec> grid_1d(int count, double lo, double hi) {
  std::vector<Vec> out;
  for (int i = 0; i < count; ++i) {
    Vec x(1);
    x[0] = lo + (hi - lo) * i / (count - 1);
    out.push_back(x);
  }
  return out;
}

TEST(Smooth, AllZeroTargetsConvergeToZero) {
  const auto samples = grid_1d(101, -1.0, 1.0);
  const std::vector<double> targets(samples.size(), 0.0);
  const SmoothModel m = train(samples, targets, {8}, 5000, 1e-11, 3);
  EXPECT_LE(m.final_mse, 1e-10);
  EXPECT_EQ(m.eval(samples[10]), 0.0);
}

TEST(Smooth, FitsClosedFormWithinTolerance) {
  const auto samples = grid_1d(501, -1.5, 1.5);
  std::vector<double> targets;
  for (const Vec& x : samples) targets.push_back(closed_form_u_1d(x[0]));
  TrainOptions opt;
  opt.learning_rate = 0.2;
  const SmoothModel m = train(samples, targets, {15, 15}, 5000, 1e-9, 7, opt);
  EXPECT_LE(m.final_mse, 1e-4);
  EXPECT_EQ(static_cast<int>(m.layer_sizes.size()), 4);
}

TEST(Smooth, StoredMseMatchesRecomputation) {
  const auto samples = grid_1d(64, -1.0, 1.0);
  std::vector<double> targets;
  for (const Vec& x : samples) targets.push_back(std::sin(2.0 * x[0]));
  const SmoothModel m = train(samples, targets, {6}, 200, 1e-12, 11);
  double acc = 0.0;
  for (size_t i = 0; i < samples.size(); ++i) {
    const double d = m.eval(samples[i]) - targets[i];
    acc += d * d;
  }
  EXPECT_NEAR(m.final_mse, acc / samples.size(), 1e-12);
}

TEST(Smooth, DeterministicForFixedSeed) {
  const auto samples = grid_1d(64, -1.0, 1.0);
  std::vector<double> targets;
  for (const Vec& x : samples) targets.push_back(x[0] * x[0]);
  const SmoothModel a = train(samples, targets, {5, 5}, 100, 1e-12, 42);
  const SmoothModel b = train(samples, targets, {5, 5}, 100, 1e-12, 42);
  for (size_t l = 0; l < a.weights.size(); ++l) {
    ASSERT_EQ(a.weights[l].size(), b.weights[l].size());
    EXPECT_EQ(std::memcmp(a.weights[l].data(), b.weights[l].data(),
                          sizeof(double) * a.weights[l].size()),
              0);
  }
}

TEST(Smooth, DivergenceReportsEpoch) {
  const auto samples = grid_1d(32, -1.0, 1.0);
  std::vector<double> targets;
  for (const Vec& x : samples) targets.push_back(x[0]);
  TrainOptions opt;
  opt.learning_rate = 1e3;
  try {
    train(samples, targets, {8, 8}, 500, 1e-12, 5, opt);
    FAIL() << "expected DivergenceError";
  } catch (const DivergenceError& e) {
    EXPECT_NE(std::string(e.what()).find("epoch"), std::string::npos);
  }
}

TEST(Smooth, InputGradientMatchesFiniteDifferences) {
  const auto samples = grid_1d(64, -1.5, 1.5);
  std::vector<double> targets;
  for (const Vec& x : samples) targets.push_back(closed_form_u_1d(x[0]));
  const SmoothModel m = train(samples, targets, {7, 5}, 300, 1e-12, 9);
  Rng rng(31);
  for (int i = 0; i < 100; ++i) {
    Vec x(1);
    x[0] = rng.uniform(-1.5, 1.5);
    const Vec g = m.grad_x(x);
    const Vec fd = testutil::fd_gradient([&](const Vec& y) { return m.eval(y); }, x);
    EXPECT_LE((g - fd).norm() / std::max(1.0, g.norm()), 1e-6);
  }
}

TEST(Smooth, ZeroWeightModelIsConstant) {
  SmoothModel m;
  m.layer_sizes = {2, 3, 1};
  m.weights = {Mat::Zero(2, 3), Mat::Zero(3, 1)};
  m.biases = {Vec::Zero(3), Vec::Constant(1, 0.7)};
  m.in_mean = Vec::Zero(2);
  m.in_scale = Vec::Ones(2);
  Vec x(2);
  x << 0.3, -0.9;
  EXPECT_EQ(m.eval(x), 0.7);
  EXPECT_EQ(m.grad_x(x).norm(), 0.0);
}

TEST(Smooth, SingleLinearLayerGradientIsTheWeight) {
  SmoothModel m;
  m.layer_sizes = {2, 1};
  Mat w(2, 1);
  w << 1.5, -2.25;
  m.weights = {w};
  m.biases = {Vec::Constant(1, 0.5)};
  m.in_mean = Vec::Zero(2);
  m.in_scale = Vec::Ones(2);
  Vec x(2);
  x << 0.1, 0.2;
  EXPECT_NEAR(m.eval(x), 1.5 * 0.1 - 2.25 * 0.2 + 0.5, 1e-15);
  const Vec g = m.grad_x(x);
  EXPECT_EQ(g[0], 1.5);
  EXPECT_EQ(g[1], -2.25);
}

TEST(Smooth, ParameterGradientsMatchFiniteDifferences) {
  // Tiny (2, 3, 1) network, every weight and bias checked.
  const int m_count = 16;
  Mat x_std(m_count, 2);
  Vec y_std(m_count);
  Rng rng(17);
  for (int i = 0; i < m_count; ++i) {
    x_std(i, 0) = rng.uniform(-1.0, 1.0);
    x_std(i, 1) = rng.uniform(-1.0, 1.0);
    y_std[i] = std::sin(x_std(i, 0)) * x_std(i, 1);
  }
  SmoothModel model;
  model.layer_sizes = {2, 3, 1};
  model.in_mean = Vec::Zero(2);
  model.in_scale = Vec::Ones(2);
  model.weights = {Mat(2, 3), Mat(3, 1)};
  model.biases = {Vec(3), Vec(1)};
  for (auto& w : model.weights) {
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform(-0.8, 0.8);
  }
  for (auto& b : model.biases) {
    for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = rng.uniform(-0.5, 0.5);
  }
  std::vector<Mat> gw;
  std::vector<Vec> gb;
  mse_and_gradients(model, x_std, y_std, &gw, &gb);
  const double h = 1e-6;
  for (size_t l = 0; l < model.weights.size(); ++l) {
    for (Eigen::Index k = 0; k < model.weights[l].size(); ++k) {
      SmoothModel pert = model;
      pert.weights[l].data()[k] += h;
      const double up = mse_and_gradients(pert, x_std, y_std, nullptr, nullptr);
      pert.weights[l].data()[k] -= 2.0 * h;
      const double dn = mse_and_gradients(pert, x_std, y_std, nullptr, nullptr);
      const double fd = (up - dn) / (2.0 * h);
      EXPECT_LE(std::abs(gw[l].data()[k] - fd) / std::max(1e-3, std::abs(fd)), 1e-5);
    }
    for (Eigen::Index k = 0; k < model.biases[l].size(); ++k) {
      SmoothModel pert = model;
      pert.biases[l][k] += h;
      const double up = mse_and_gradients(pert, x_std, y_std, nullptr, nullptr);
      pert.biases[l][k] -= 2.0 * h;
      const double dn = mse_and_gradients(pert, x_std, y_std, nullptr, nullptr);
      const double fd = (up - dn) / (2.0 * h);
      EXPECT_LE(std::abs(gb[l][k] - fd) / std::max(1e-3, std::abs(fd)), 1e-5);
    }
  }
}

TEST(Smooth, InvalidInputsAreConfigErrors) {
  EXPECT_THROW(train({}, {}, {4}, 10, 1e-8, 1), ConfigError);
  const auto samples = grid_1d(8, -1.0, 1.0);
  std::vector<double> targets(8, 0.0);
  EXPECT_THROW(train(samples, targets, {}, 10, 1e-8, 1), ConfigError);
}

}  // namespace
}  // namespace zkroa
