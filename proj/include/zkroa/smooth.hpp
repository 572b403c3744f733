#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "zkroa/roa.hpp"
#include "zkroa/types.hpp"

namespace zkroa {

// Small tanh multilayer perceptron fitted to (sample, value) pairs so that
// gradients come from a genuinely smooth surrogate. Inputs and targets are
// standardized internally; eval/grad_x undo the scaling.
struct SmoothModel {
  std::vector<int> layer_sizes;  // input dim, hidden widths..., 1
  std::vector<Mat> weights;      // weights[l]: layer_sizes[l] x layer_sizes[l+1]
  std::vector<Vec> biases;
  Vec in_mean, in_scale;
  double out_mean = 0.0, out_scale = 1.0;
  int epochs_run = 0;
  double final_mse = 0.0;  // on the training set, original units

  int input_dim() const { return layer_sizes.front(); }

  double eval(const Vec& x) const {
    Vec h = (x - in_mean).cwiseQuotient(in_scale);
    const int layers = static_cast<int>(weights.size());
    for (int l = 0; l < layers; ++l) {
      Vec z = weights[l].transpose() * h + biases[l];
      h = (l + 1 < layers) ? z.array().tanh().matrix() : z;
    }
    return h[0] * out_scale + out_mean;
  }

  // Reverse-mode derivative of eval with respect to the input.
  Vec grad_x(const Vec& x) const {
    const int layers = static_cast<int>(weights.size());
    Vec h = (x - in_mean).cwiseQuotient(in_scale);
    std::vector<Vec> activations;  // post-tanh activations per hidden layer
    activations.reserve(layers);
    for (int l = 0; l < layers; ++l) {
      Vec z = weights[l].transpose() * h + biases[l];
      if (l + 1 < layers) {
        h = z.array().tanh().matrix();
        activations.push_back(h);
      } else {
        h = z;
      }
    }
    Vec delta = Vec::Ones(1);
    for (int l = layers - 1; l >= 0; --l) {
      delta = weights[l] * delta;
      if (l > 0) {
        const Vec& act = activations[l - 1];
        delta = delta.cwiseProduct(Vec::Ones(act.size()) - act.cwiseProduct(act));
      }
    }
    return out_scale * delta.cwiseQuotient(in_scale);
  }
};

inline ScalarField as_field(const SmoothModel& m) {
  return ScalarField{[m](const Vec& x) { return m.eval(x); },
                     [m](const Vec& x) { return m.grad_x(x); }};
}

namespace detail {
// Portable uniform doubles in [0,1) from a 64-bit SplitMix stream; keeps
// trained weights bit-identical across standard libraries.
struct SeededUniform {
  std::uint64_t state;
  explicit SeededUniform(std::uint64_t seed) : state(seed) {}
  double next() {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    z = z ^ (z >> 31);
    return static_cast<double>(z >> 11) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * next(); }
};
}  // namespace detail

struct TrainOptions {
  double learning_rate = 1e-2;
  double momentum = 0.9;
};

// Standardized-space training loss and its gradients with respect to every
// weight and bias, for the model's current parameters. Rows of x_std are
// standardized samples; y_std the standardized targets.
inline double mse_and_gradients(const SmoothModel& model, const Mat& x_std,
                                const Vec& y_std, std::vector<Mat>* grad_w,
                                std::vector<Vec>* grad_b) {
  const int m = static_cast<int>(x_std.rows());
  const int layers = static_cast<int>(model.weights.size());
  std::vector<Mat> acts(layers + 1);
  acts[0] = x_std;
  for (int l = 0; l < layers; ++l) {
    Mat z = acts[l] * model.weights[l];
    z.rowwise() += model.biases[l].transpose();
    acts[l + 1] = (l + 1 < layers) ? z.array().tanh().matrix() : z;
  }
  const Vec err = acts[layers].col(0) - y_std;
  const double mse = err.squaredNorm() / m;
  if (grad_w && grad_b) {
    grad_w->resize(layers);
    grad_b->resize(layers);
    Mat delta = (2.0 / m) * err;
    for (int l = layers - 1; l >= 0; --l) {
      (*grad_w)[l] = acts[l].transpose() * delta;
      (*grad_b)[l] = delta.colwise().sum().transpose();
      if (l > 0) {
        delta = (delta * model.weights[l].transpose())
                    .cwiseProduct(Mat::Ones(m, acts[l].cols()) -
                                  acts[l].cwiseProduct(acts[l]));
      }
    }
  }
  return mse;
}

// Full-batch gradient descent with momentum on the mean squared error.
// Deterministic for a fixed seed; stops when the training MSE (original
// units) reaches mse_tol or at the epoch cap.
inline SmoothModel train(const std::vector<Vec>& samples,
                         const std::vector<double>& targets,
                         const std::vector<int>& widths, int epochs,
                         double mse_tol, std::uint64_t seed,
                         const TrainOptions& opt = {}) {
  if (samples.empty()) throw ConfigError("train: no samples");
  if (widths.empty()) throw ConfigError("train: no hidden widths");
  if (samples.size() != targets.size()) {
    throw ConfigError("train: samples/targets size mismatch");
  }
  const int m = static_cast<int>(samples.size());
  const int n = static_cast<int>(samples.front().size());

  SmoothModel model;
  model.layer_sizes.push_back(n);
  for (int w : widths) model.layer_sizes.push_back(w);
  model.layer_sizes.push_back(1);

  // Standardization constants.
  Mat x_raw(m, n);
  for (int i = 0; i < m; ++i) x_raw.row(i) = samples[i].transpose();
  model.in_mean = x_raw.colwise().mean();
  model.in_scale.resize(n);
  for (int a = 0; a < n; ++a) {
    const double var = (x_raw.col(a).array() - model.in_mean[a]).square().mean();
    model.in_scale[a] = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  Vec y_raw(m);
  for (int i = 0; i < m; ++i) y_raw[i] = targets[i];
  model.out_mean = y_raw.mean();
  {
    // Zero target variance: the constant out_mean is already the exact fit.
    const double var = (y_raw.array() - model.out_mean).square().mean();
    model.out_scale = var > 0.0 ? std::sqrt(var) : 0.0;
  }
  Mat x_std = x_raw;
  for (int a = 0; a < n; ++a) {
    x_std.col(a) = (x_raw.col(a).array() - model.in_mean[a]) / model.in_scale[a];
  }
  const Vec y_std = model.out_scale > 0.0
                        ? Vec((y_raw.array() - model.out_mean) / model.out_scale)
                        : Vec(Vec::Zero(m));

  // Glorot-style uniform init from the seeded stream.
  detail::SeededUniform rng(seed);
  const int layers = static_cast<int>(model.layer_sizes.size()) - 1;
  for (int l = 0; l < layers; ++l) {
    const int fan_in = model.layer_sizes[l];
    const int fan_out = model.layer_sizes[l + 1];
    const double lim = std::sqrt(6.0 / (fan_in + fan_out));
    Mat w(fan_in, fan_out);
    for (int i = 0; i < fan_in; ++i) {
      for (int j = 0; j < fan_out; ++j) w(i, j) = rng.uniform(-lim, lim);
    }
    model.weights.push_back(std::move(w));
    model.biases.push_back(Vec::Zero(fan_out));
  }

  std::vector<Mat> vel_w;
  std::vector<Vec> vel_b;
  for (int l = 0; l < layers; ++l) {
    vel_w.push_back(Mat::Zero(model.weights[l].rows(), model.weights[l].cols()));
    vel_b.push_back(Vec::Zero(model.biases[l].size()));
  }

  const double y_var = model.out_scale * model.out_scale;
  std::vector<Mat> grad_w;
  std::vector<Vec> grad_b;
  int epoch = 0;
  for (; epoch < epochs; ++epoch) {
    const double mse_std = mse_and_gradients(model, x_std, y_std, &grad_w, &grad_b);
    const double mse_orig = mse_std * y_var;
    if (!std::isfinite(mse_orig)) {
      throw DivergenceError("train: non-finite loss at epoch " +
                            std::to_string(epoch));
    }
    if (mse_orig <= mse_tol) break;
    for (int l = 0; l < layers; ++l) {
      vel_w[l] = opt.momentum * vel_w[l] - opt.learning_rate * grad_w[l];
      vel_b[l] = opt.momentum * vel_b[l] - opt.learning_rate * grad_b[l];
      model.weights[l] += vel_w[l];
      model.biases[l] += vel_b[l];
    }
  }
  model.epochs_run = epoch;

  // Recompute the final loss from the stored weights so the recorded value
  // matches exactly what eval() reproduces.
  double acc = 0.0;
  for (int i = 0; i < m; ++i) {
    const double diff = model.eval(samples[i]) - targets[i];
    acc += diff * diff;
  }
  model.final_mse = acc / m;
  return model;
}

}  // namespace zkroa
