// Copyright (c) 2026 The bofscan Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "bofscan/core.hpp"

namespace bofscan {

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + e^z) without overflow.
inline double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

/// One-hidden-layer perceptron with logistic activations and a single
/// sigmoid output read as P(MA).
struct MlpModel {
  std::size_t input_dim = 0;
  std::size_t hidden = 0;
  Matrix w1;               // hidden x input
  std::vector<double> b1;  // hidden
  std::vector<double> w2;  // hidden
  double b2 = 0.0;
  InputScaling scaling;  // applied to inputs before the first layer

  MlpModel() = default;
  MlpModel(std::size_t input, std::size_t hidden_units)
      : input_dim(input), hidden(hidden_units), w1(hidden_units, input), b1(hidden_units, 0.0), w2(hidden_units, 0.0) {}

  /// Output pre-activation; fills `h` with hidden activations when given.
  double logit(std::span<const double> x, std::vector<double>* h = nullptr) const {
    if (x.size() != input_dim) throw DataError("MLP input has dimension " + std::to_string(x.size()) +
                                               ", model expects " + std::to_string(input_dim));
    std::vector<double> buf;
    const auto xs = scaling.apply(x, buf);
    double z2 = b2;
    if (h) h->resize(hidden);
    for (std::size_t j = 0; j < hidden; ++j) {
      const double a = sigmoid(dot(w1.row(j), xs) + b1[j]);
      if (h) (*h)[j] = a;
      z2 += w2[j] * a;
    }
    return z2;
  }

  double forward(std::span<const double> x) const { return sigmoid(logit(x)); }

  Label predict(std::span<const double> x) const { return forward(x) >= 0.5 ? Label::MA : Label::Normal; }

  bool finite() const {
    auto ok = [](double v) { return std::isfinite(v); };
    return std::all_of(w1.data().begin(), w1.data().end(), ok) && std::all_of(b1.begin(), b1.end(), ok) &&
           std::all_of(w2.begin(), w2.end(), ok) && std::isfinite(b2);
  }

  bool operator==(const MlpModel&) const = default;
};

/// Glorot-uniform weights, zero biases.
inline MlpModel mlp_init(std::size_t input_dim, std::size_t hidden, std::uint64_t seed) {
  if (input_dim < 1 || hidden < 1) throw DataError("MLP dimensions must be at least 1");
  MlpModel m(input_dim, hidden);
  Rng rng(seed);
  const double r1 = std::sqrt(6.0 / static_cast<double>(input_dim + hidden));
  for (double& w : m.w1.data()) w = rng.uniform(-r1, r1);
  const double r2 = std::sqrt(6.0 / static_cast<double>(hidden + 1));
  for (double& w : m.w2) w = rng.uniform(-r2, r2);
  return m;
}

inline double label_target(Label l) { return l == Label::MA ? 1.0 : 0.0; }

/// Mean binary cross-entropy.
inline double mlp_loss(const MlpModel& m, const Matrix& X, std::span<const Label> y) {
  if (X.rows() != y.size()) throw DataError("feature rows and labels differ in length");
  if (X.empty()) throw DataError("empty dataset");
  double loss = 0.0;
  for (std::size_t i = 0; i < X.rows(); ++i) {
    const double z = m.logit(X.row(i));
    loss += softplus(z) - label_target(y[i]) * z;
  }
  return loss / static_cast<double>(X.rows());
}

struct MlpGradient {
  Matrix w1;
  std::vector<double> b1;
  std::vector<double> w2;
  double b2 = 0.0;
  double loss = 0.0;

  double norm() const {
    double s = b2 * b2;
    for (double v : w1.data()) s += v * v;
    for (double v : b1) s += v * v;
    for (double v : w2) s += v * v;
    return std::sqrt(s);
  }
};

/// Backpropagated gradient of the mean binary cross-entropy.
inline MlpGradient mlp_gradient(const MlpModel& m, const Matrix& X, std::span<const Label> y) {
  if (X.rows() != y.size()) throw DataError("feature rows and labels differ in length");
  if (X.empty()) throw DataError("empty dataset");
  if (X.cols() != m.input_dim) throw DataError("feature dimension does not match the MLP input");
  MlpGradient g{Matrix(m.hidden, m.input_dim), std::vector<double>(m.hidden, 0.0),
                std::vector<double>(m.hidden, 0.0), 0.0, 0.0};
  const double inv_n = 1.0 / static_cast<double>(X.rows());
  std::vector<double> h, buf;
  for (std::size_t i = 0; i < X.rows(); ++i) {
    const double z = m.logit(X.row(i), &h);
    const auto x = m.scaling.apply(X.row(i), buf);
    const double t = label_target(y[i]);
    g.loss += softplus(z) - t * z;
    const double delta2 = (sigmoid(z) - t) * inv_n;
    g.b2 += delta2;
    for (std::size_t j = 0; j < m.hidden; ++j) {
      g.w2[j] += delta2 * h[j];
      const double delta1 = delta2 * m.w2[j] * h[j] * (1.0 - h[j]);
      g.b1[j] += delta1;
      auto row = g.w1.row(j);
      for (std::size_t k = 0; k < m.input_dim; ++k) row[k] += delta1 * x[k];
    }
  }
  g.loss *= inv_n;
  return g;
}

struct TrainConfig {
  double learning_rate = 0.1;
  int epochs = 2000;
  bool full_batch = true;
  std::uint64_t seed = 0;
  int early_stop_patience = 200;  // 0 disables early stopping
  bool standardize = true;        // fit a z-score input scaling on the training set

  void validate() const {
    if (!(learning_rate > 0.0)) throw DataError("learning_rate must be positive");
    if (epochs < 1) throw DataError("epochs must be at least 1");
    if (early_stop_patience < 0) throw DataError("early_stop_patience must be non-negative");
    if (!full_batch) throw DataError("only full-batch gradient descent is supported");
  }
};

struct TrainResult {
  MlpModel model;
  std::vector<double> train_loss;
  std::vector<double> val_loss;  // empty when no validation set was given
  int best_epoch = 0;
};

/// Full-batch gradient descent on mean BCE. Returns the parameters with the
/// lowest validation loss (training loss when the validation set is empty).
inline TrainResult mlp_train(MlpModel m, const Matrix& X, std::span<const Label> y, const Matrix& val_X,
                             std::span<const Label> val_y, const TrainConfig& cfg) {
  cfg.validate();
  if (X.empty() || X.rows() != y.size()) throw DataError("training set is empty or mislabeled");
  if (val_X.rows() != val_y.size()) throw DataError("validation features and labels differ in length");
  const bool use_val = !val_X.empty();
  if (cfg.standardize) m.scaling = InputScaling::fit(X);

  TrainResult r;
  r.model = m;
  double best = std::numeric_limits<double>::infinity();
  int since_best = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const MlpGradient g = mlp_gradient(m, X, y);
    if (!std::isfinite(g.loss)) throw NumericError("MLP training loss became non-finite (learning rate too high?)");
    const double monitored = use_val ? mlp_loss(m, val_X, val_y) : g.loss;
    r.train_loss.push_back(g.loss);
    if (use_val) r.val_loss.push_back(monitored);
    if (monitored < best) {
      best = monitored;
      r.model = m;
      r.best_epoch = epoch;
      since_best = 0;
    } else if (cfg.early_stop_patience > 0 && ++since_best >= cfg.early_stop_patience) {
      break;
    }

    const double lr = cfg.learning_rate;
    for (std::size_t i = 0; i < m.w1.data().size(); ++i) m.w1.data()[i] -= lr * g.w1.data()[i];
    for (std::size_t j = 0; j < m.hidden; ++j) {
      m.b1[j] -= lr * g.b1[j];
      m.w2[j] -= lr * g.w2[j];
    }
    m.b2 -= lr * g.b2;
    if (!m.finite()) throw NumericError("MLP parameters became non-finite (learning rate too high?)");
  }
  return r;
}

}  // namespace bofscan
