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
#include <numeric>
#include <span>
#include <variant>
#include <vector>

#include "bofscan/core.hpp"

namespace bofscan {

struct EigenSystem {
  std::vector<double> values;  // descending
  Matrix vectors;              // row i is the unit eigenvector of values[i]
};

/// Cyclic Jacobi rotations on a symmetric matrix until the off-diagonal
/// Frobenius norm drops below `tol` times the matrix norm.
inline EigenSystem jacobi_eigen(Matrix a, double tol = 1e-12, int max_sweeps = 100) {
  const std::size_t n = a.rows();
  if (n != a.cols()) throw DataError("jacobi_eigen needs a square matrix");
  Matrix v(n, n);
  for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;

  double frob = 0.0;
  for (double x : a.data()) frob += x * x;
  frob = std::sqrt(frob);
  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s += 2.0 * a(i, j) * a(i, j);
    return std::sqrt(s);
  };

  for (int sweep = 0; sweep < max_sweeps && frob > 0.0 && off_norm() >= tol * frob; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });
  EigenSystem es{std::vector<double>(n), Matrix(n, n)};
  for (std::size_t r = 0; r < n; ++r) {
    es.values[r] = a(order[r], order[r]);
    for (std::size_t k = 0; k < n; ++k) es.vectors(r, k) = v(k, order[r]);
  }
  return es;
}

struct PcaModel {
  std::vector<double> mean;
  Matrix components;  // C x input_dim, orthonormal rows
  std::vector<double> eigenvalues;
  double total_variance = 0.0;

  std::size_t input_dim() const { return mean.size(); }
  std::size_t n_components() const { return components.rows(); }

  std::vector<double> explained_variance_ratio() const {
    std::vector<double> r(eigenvalues.size(), 0.0);
    if (total_variance > 0.0)
      for (std::size_t i = 0; i < r.size(); ++i) r[i] = eigenvalues[i] / total_variance;
    return r;
  }
};

/// Either a cumulative explained-variance fraction in (0, 1] or a fixed
/// component count.
using PcaTarget = std::variant<double, std::size_t>;

namespace detail {

inline void sign_fix(std::span<double> row) {
  std::size_t arg = 0;
  for (std::size_t k = 1; k < row.size(); ++k)
    if (std::abs(row[k]) > std::abs(row[arg])) arg = k;
  if (row[arg] < 0.0)
    for (double& x : row) x = -x;
}

}  // namespace detail

/// Principal components of the sample covariance (divisor n - 1). When the
/// feature dimension exceeds the sample count the n x n Gram matrix is
/// diagonalized instead; its nonzero spectrum is the covariance's.
inline PcaModel pca_fit(const Matrix& X, PcaTarget target = 0.95) {
  const std::size_t n = X.rows(), d = X.cols();
  if (n < 2) throw DataError("PCA needs at least 2 samples");
  if (const double* f = std::get_if<double>(&target); f && !(*f > 0.0 && *f <= 1.0)) {
    throw DataError("PCA variance target must lie in (0, 1]");
  }
  if (const std::size_t* c = std::get_if<std::size_t>(&target); c && *c < 1) {
    throw DataError("PCA component count must be at least 1");
  }

  PcaModel p;
  p.mean.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < d; ++k) p.mean[k] += X(i, k);
  for (double& m : p.mean) m /= static_cast<double>(n);

  Matrix centered(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < d; ++k) centered(i, k) = X(i, k) - p.mean[k];

  const double denom = static_cast<double>(n - 1);
  std::vector<double> values;
  Matrix vectors;  // rows in feature space
  if (d <= n) {
    Matrix cov(d, d);
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = a; b < d; ++b) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += centered(i, a) * centered(i, b);
        cov(a, b) = cov(b, a) = s / denom;
      }
    EigenSystem es = jacobi_eigen(std::move(cov));
    values = std::move(es.values);
    vectors = std::move(es.vectors);
  } else {
    Matrix gram(n, n);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a; b < n; ++b) gram(a, b) = gram(b, a) = dot(centered.row(a), centered.row(b)) / denom;
    EigenSystem es = jacobi_eigen(std::move(gram));
    const double floor = 1e-12 * std::max(1.0, es.values.empty() ? 0.0 : es.values.front());
    vectors = Matrix(0, d);
    for (std::size_t r = 0; r < n; ++r) {
      if (es.values[r] <= floor) break;
      // u = Xc^T v / sqrt(lambda (n - 1))
      std::vector<double> u(d, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        const double w = es.vectors(r, i);
        auto row = centered.row(i);
        for (std::size_t k = 0; k < d; ++k) u[k] += w * row[k];
      }
      const double scale = 1.0 / std::sqrt(es.values[r] * denom);
      for (double& x : u) x *= scale;
      vectors.append_row(u);
      values.push_back(es.values[r]);
    }
  }

  for (double& v : values) v = std::max(v, 0.0);
  p.total_variance = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += centered(i, k) * centered(i, k);
    p.total_variance += s / denom;
  }

  std::size_t keep = 0;
  if (const std::size_t* c = std::get_if<std::size_t>(&target)) {
    keep = std::min(*c, values.size());
  } else {
    const double goal = std::get<double>(target) * p.total_variance;
    double cum = 0.0;
    while (keep < values.size()) {
      cum += values[keep++];
      if (cum >= goal * (1.0 - 1e-12)) break;
    }
  }
  keep = std::max<std::size_t>(keep, std::min<std::size_t>(1, values.size()));

  p.components = Matrix(keep, d);
  p.eigenvalues.assign(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(keep));
  for (std::size_t r = 0; r < keep; ++r) {
    std::copy(vectors.row(r).begin(), vectors.row(r).end(), p.components.row(r).begin());
    detail::sign_fix(p.components.row(r));
  }
  return p;
}

inline std::vector<double> pca_transform(const PcaModel& p, std::span<const double> x) {
  if (x.size() != p.input_dim()) throw DataError("PCA input dimension mismatch");
  std::vector<double> centered(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) centered[k] = x[k] - p.mean[k];
  std::vector<double> out(p.n_components());
  for (std::size_t r = 0; r < out.size(); ++r) out[r] = dot(p.components.row(r), centered);
  return out;
}

inline Matrix pca_transform(const PcaModel& p, const Matrix& X) {
  Matrix out(X.rows(), p.n_components());
  for (std::size_t i = 0; i < X.rows(); ++i) {
    const auto r = pca_transform(p, X.row(i));
    std::copy(r.begin(), r.end(), out.row(i).begin());
  }
  return out;
}

/// mean + components^T * z, optionally truncated to the first `use` components.
inline std::vector<double> pca_reconstruct(const PcaModel& p, std::span<const double> z, std::size_t use) {
  std::vector<double> x = p.mean;
  for (std::size_t r = 0; r < std::min(use, z.size()); ++r) {
    auto c = p.components.row(r);
    for (std::size_t k = 0; k < x.size(); ++k) x[k] += z[r] * c[k];
  }
  return x;
}

}  // namespace bofscan
