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

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "bofscan/core.hpp"

namespace bofscan {

/// Anything that maps a feature vector to a class label.
template <class C>
concept Classifier = requires(const C& c, std::span<const double> x) {
  { c.predict(x) } -> std::same_as<Label>;
};

// ---------------------------------------------------------------------------
// k nearest neighbours

struct KnnModel {
  Matrix X;
  std::vector<Label> y;
  std::size_t k = 5;

  /// Majority among the k nearest (ties in distance -> lower index,
  /// ties in votes -> MA).
  Label predict(std::span<const double> x) const {
    if (X.empty()) throw DataError("KNN has an empty training set");
    if (x.size() != X.cols()) throw DataError("KNN input dimension mismatch");
    const std::size_t kk = std::min(k, X.rows());
    std::vector<std::pair<double, std::size_t>> d(X.rows());
    for (std::size_t i = 0; i < X.rows(); ++i) d[i] = {squared_distance(X.row(i), x), i};
    std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(kk), d.end());
    std::size_t ma = 0;
    for (std::size_t i = 0; i < kk; ++i) ma += y[d[i].second] == Label::MA;
    return 2 * ma >= kk ? Label::MA : Label::Normal;
  }
};

inline KnnModel knn_fit(Matrix X, std::vector<Label> y, std::size_t k) {
  if (X.empty()) throw DataError("KNN needs a non-empty training set");
  if (X.rows() != y.size()) throw DataError("KNN features and labels differ in length");
  if (k < 1 || k > X.rows()) throw DataError("KNN k must lie in [1, training size]");
  return {std::move(X), std::move(y), k};
}

inline Label knn_predict(const Matrix& train_X, std::span<const Label> train_y, std::span<const double> x,
                         std::size_t k) {
  return knn_fit(train_X, std::vector<Label>(train_y.begin(), train_y.end()), k).predict(x);
}

// ---------------------------------------------------------------------------
// Gaussian naive Bayes

inline constexpr double kGnbVarianceFloor = 1e-9;

struct GnbModel {
  // index 0 = NORMAL, 1 = MA
  std::array<std::vector<double>, 2> mean;
  std::array<std::vector<double>, 2> var;
  std::array<double, 2> log_prior{};

  std::array<double, 2> log_posterior(std::span<const double> x) const {
    if (x.size() != mean[0].size()) throw DataError("naive Bayes input dimension mismatch");
    std::array<double, 2> lp = log_prior;
    for (int c = 0; c < 2; ++c) {
      for (std::size_t k = 0; k < x.size(); ++k) {
        const double d = x[k] - mean[c][k];
        lp[c] -= 0.5 * (std::log(2.0 * 3.14159265358979323846 * var[c][k]) + d * d / var[c][k]);
      }
    }
    return lp;
  }

  Label predict(std::span<const double> x) const {
    const auto lp = log_posterior(x);
    return lp[1] >= lp[0] ? Label::MA : Label::Normal;
  }
};

/// Per-class maximum-likelihood means and variances (floored), priors from
/// class frequencies.
inline GnbModel gnb_fit(const Matrix& X, std::span<const Label> y) {
  if (X.rows() != y.size()) throw DataError("naive Bayes features and labels differ in length");
  GnbModel m;
  std::array<std::size_t, 2> count{};
  for (Label l : y) ++count[static_cast<int>(l)];
  for (int c = 0; c < 2; ++c) {
    if (count[c] == 0) {
      throw DataError(std::string("naive Bayes: class ") + std::string(to_string(static_cast<Label>(c))) +
                      " is absent from the training data");
    }
    m.mean[c].assign(X.cols(), 0.0);
    m.var[c].assign(X.cols(), 0.0);
    m.log_prior[c] = std::log(static_cast<double>(count[c]) / static_cast<double>(y.size()));
  }
  for (std::size_t i = 0; i < X.rows(); ++i) {
    const int c = static_cast<int>(y[i]);
    for (std::size_t k = 0; k < X.cols(); ++k) m.mean[c][k] += X(i, k);
  }
  for (int c = 0; c < 2; ++c)
    for (double& v : m.mean[c]) v /= static_cast<double>(count[c]);
  for (std::size_t i = 0; i < X.rows(); ++i) {
    const int c = static_cast<int>(y[i]);
    for (std::size_t k = 0; k < X.cols(); ++k) {
      const double d = X(i, k) - m.mean[c][k];
      m.var[c][k] += d * d;
    }
  }
  for (int c = 0; c < 2; ++c)
    for (double& v : m.var[c]) v = std::max(v / static_cast<double>(count[c]), kGnbVarianceFloor);
  return m;
}

// ---------------------------------------------------------------------------
// Linear SVM (Pegasos-style primal sub-gradient descent)

struct LinSvmConfig {
  double lambda = 1e-3;
  int epochs = 100;
  std::uint64_t seed = 0;
  bool standardize = true;  // fit a z-score input scaling on the training set
};

struct LinSvmModel {
  std::vector<double> w;
  double b = 0.0;
  InputScaling scaling;

  double decision(std::span<const double> x) const {
    if (x.size() != w.size()) throw DataError("linear SVM input dimension mismatch");
    std::vector<double> buf;
    return dot(w, scaling.apply(x, buf)) + b;
  }

  Label predict(std::span<const double> x) const { return decision(x) >= 0.0 ? Label::MA : Label::Normal; }
};

/// Minimizes (lambda/2)|w|^2 + mean hinge loss with step 1/(lambda t); MA
/// maps to +1. The bias is not regularized, so it steps by 1/sqrt(t): the
/// early 1/(lambda t) steps would otherwise leave it hundreds of units off.
inline LinSvmModel linsvm_train(const Matrix& X, std::span<const Label> y, const LinSvmConfig& cfg) {
  if (X.empty()) throw DataError("linear SVM needs a non-empty training set");
  if (X.rows() != y.size()) throw DataError("linear SVM features and labels differ in length");
  if (!(cfg.lambda > 0.0)) throw DataError("linear SVM lambda must be positive");
  if (cfg.epochs < 1) throw DataError("linear SVM epochs must be at least 1");

  LinSvmModel m{std::vector<double>(X.cols(), 0.0), 0.0, {}};
  if (cfg.standardize) m.scaling = InputScaling::fit(X);
  std::vector<double> buf;
  Rng rng(cfg.seed);
  std::vector<std::size_t> order(X.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::uint64_t t = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t i : order) {
      ++t;
      const double eta = 1.0 / (cfg.lambda * static_cast<double>(t));
      const double yi = y[i] == Label::MA ? 1.0 : -1.0;
      const auto x = m.scaling.apply(X.row(i), buf);
      const double margin = yi * (dot(m.w, x) + m.b);
      const double shrink = 1.0 - eta * cfg.lambda;
      for (double& wk : m.w) wk *= shrink;
      if (margin < 1.0) {
        for (std::size_t k = 0; k < m.w.size(); ++k) m.w[k] += eta * yi * x[k];
        m.b += yi / std::sqrt(static_cast<double>(t));
      }
    }
  }
  return m;
}

}  // namespace bofscan
