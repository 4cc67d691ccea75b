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
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bofscan {

// Error categories map one-to-one onto CLI exit codes (1, 2, 3).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

/// Round-half-up, the single rounding rule used across the library.
inline double round_half_up(double v) { return std::floor(v + 0.5); }

inline long round_half_up_to_long(double v) {
  return static_cast<long>(std::floor(v + 0.5));
}

enum class Label : std::uint8_t { Normal = 0, MA = 1 };

inline constexpr std::string_view to_string(Label l) {
  return l == Label::MA ? "MA" : "NORMAL";
}

inline Label parse_label(std::string_view s) {
  if (s == "MA") return Label::MA;
  if (s == "NORMAL") return Label::Normal;
  throw DataError("unknown label '" + std::string(s) + "' (expected MA or NORMAL)");
}

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  void append_row(std::span<const double> values) {
    if (rows_ == 0 && cols_ == 0) cols_ = values.size();
    if (values.size() != cols_) throw DataError("row length does not match matrix width");
    data_.insert(data_.end(), values.begin(), values.end());
    ++rows_;
  }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Rows `indices` of `m`, in the given order.
inline Matrix select_rows(const Matrix& m, std::span<const std::size_t> indices) {
  Matrix out(indices.size(), m.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    auto src = m.row(indices[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// Per-feature affine input map (x - shift) / scale, fitted as a z-score on
/// training data. Empty vectors mean identity.
struct InputScaling {
  std::vector<double> shift;
  std::vector<double> scale;

  bool identity() const { return shift.empty(); }

  static InputScaling fit(const Matrix& X) {
    InputScaling s{std::vector<double>(X.cols(), 0.0), std::vector<double>(X.cols(), 1.0)};
    if (X.empty()) return s;
    const double n = static_cast<double>(X.rows());
    for (std::size_t k = 0; k < X.cols(); ++k) {
      double m = 0.0, v = 0.0;
      for (std::size_t i = 0; i < X.rows(); ++i) m += X(i, k);
      m /= n;
      for (std::size_t i = 0; i < X.rows(); ++i) v += (X(i, k) - m) * (X(i, k) - m);
      const double sd = std::sqrt(v / n);
      s.shift[k] = m;
      s.scale[k] = sd > 1e-12 ? sd : 1.0;  // constant features pass through centered
    }
    return s;
  }

  /// Scaled view of `x`, backed by `buf` unless the map is the identity.
  std::span<const double> apply(std::span<const double> x, std::vector<double>& buf) const {
    if (identity()) return x;
    if (x.size() != shift.size()) throw DataError("input dimension does not match the fitted scaling");
    buf.resize(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) buf[k] = (x[k] - shift[k]) / scale[k];
    return buf;
  }

  bool operator==(const InputScaling&) const = default;
};

/// Seeded generator with platform-independent draw conversions.
///
/// std::mt19937_64 has a fully specified output sequence; the standard
/// distributions do not, so the conversions to doubles, bounded integers and
/// normals are done here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n), unbiased by rejection.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below(0)");
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  /// Standard normal via Box-Muller (one value per call; the pair's twin is discarded).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Per-stage seed: splitmix64(master + stage * golden-ratio increment).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stage) {
  return splitmix64(master + stage * 0x9E3779B97F4A7C15ull);
}

}  // namespace bofscan
