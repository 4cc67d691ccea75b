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
#include <concepts>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "bofscan/core.hpp"
#include "bofscan/features.hpp"

namespace bofscan {

/// The visual dictionary: K cluster centers in descriptor space.
struct Vocabulary {
  Matrix centers;
  std::uint64_t seed = 0;
  double wcss = 0.0;
  std::vector<double> wcss_history;  // one entry per Lloyd iteration
  int iterations = 0;

  std::size_t k() const { return centers.rows(); }
  std::size_t dim() const { return centers.cols(); }
};

struct TermVector {
  std::vector<double> bins;
  std::vector<std::uint64_t> raw_counts;
};

inline Matrix to_matrix(std::span<const Descriptor64> descriptors) {
  Matrix m(descriptors.size(), kDescriptorSize);
  for (std::size_t i = 0; i < descriptors.size(); ++i) {
    std::copy(descriptors[i].begin(), descriptors[i].end(), m.row(i).begin());
  }
  return m;
}

inline std::size_t count_distinct_rows(const Matrix& data) {
  std::vector<std::size_t> idx(data.rows());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  auto less = [&](std::size_t a, std::size_t b) {
    auto ra = data.row(a), rb = data.row(b);
    return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
  };
  std::sort(idx.begin(), idx.end(), less);
  std::size_t distinct = idx.empty() ? 0 : 1;
  for (std::size_t i = 1; i < idx.size(); ++i) {
    if (less(idx[i - 1], idx[i])) ++distinct;
  }
  return distinct;
}

/// Index of the nearest row of `centers` (squared L2), ties to the lowest index.
inline std::size_t nearest_center(const Matrix& centers, std::span<const double> x) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centers.rows(); ++c) {
    const double d = squared_distance(centers.row(c), x);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

inline std::size_t nearest_center(const Vocabulary& vocab, std::span<const double> x) {
  if (x.size() != vocab.dim()) throw DataError("descriptor dimension does not match the vocabulary");
  return nearest_center(vocab.centers, x);
}

/// k-means++ D^2 seeding. `uniform01` supplies draws in [0, 1): the first
/// picks the initial center uniformly, each later one picks a point with
/// probability proportional to its squared distance to the nearest chosen center.
template <std::invocable Uniform01>
Matrix kmeanspp_seed(const Matrix& data, std::size_t k, Uniform01&& uniform01) {
  if (k < 1) throw DataError("k-means++ needs k >= 1");
  if (count_distinct_rows(data) < k) {
    throw DataError("k-means++ needs at least " + std::to_string(k) + " distinct points");
  }
  const std::size_t n = data.rows();
  Matrix centers(k, data.cols());

  auto pick_first = static_cast<std::size_t>(uniform01() * static_cast<double>(n));
  pick_first = std::min(pick_first, n - 1);
  std::copy(data.row(pick_first).begin(), data.row(pick_first).end(), centers.row(0).begin());

  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(data.row(i), centers.row(0));

  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (double v : d2) total += v;
    const double target = uniform01() * total;
    std::size_t chosen = n;
    double cumulative = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      cumulative += d2[i];
      if (d2[i] > 0.0 && cumulative > target) {
        chosen = i;
        break;
      }
    }
    if (chosen == n) {
      // Rounding pushed the target past the end; take the last candidate.
      for (std::size_t i = n; i-- > 0;) {
        if (d2[i] > 0.0) {
          chosen = i;
          break;
        }
      }
    }
    std::copy(data.row(chosen).begin(), data.row(chosen).end(), centers.row(c).begin());
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], squared_distance(data.row(i), centers.row(c)));
  }
  return centers;
}

inline Matrix kmeanspp_seed(const Matrix& data, std::size_t k, std::uint64_t seed) {
  Rng rng(seed);
  return kmeanspp_seed(data, k, [&rng] { return rng.uniform(); });
}

struct LloydParams {
  int max_iter = 300;
  double tol = 1e-6;
};

/// Lloyd iterations from `init`. WCSS is recorded after every mean update and
/// must never increase; an increase throws std::logic_error.
inline Vocabulary lloyd(const Matrix& data, Matrix init, const LloydParams& params = {}) {
  if (data.empty()) throw DataError("k-means needs at least one point");
  if (init.rows() < 1 || init.cols() != data.cols()) throw DataError("initial centers do not match the data");
  if (params.max_iter < 1 || params.tol < 0) throw DataError("invalid Lloyd parameters");

  const std::size_t n = data.rows(), k = init.rows(), dim = data.cols();
  Vocabulary v;
  v.centers = std::move(init);
  std::vector<std::size_t> assign(n);
  std::vector<double> dist(n);
  Matrix sums(k, dim);
  std::vector<std::size_t> counts(k);

  double prev = std::numeric_limits<double>::infinity();
  for (int it = 0; it < params.max_iter; ++it) {
    for (std::size_t i = 0; i < n; ++i) assign[i] = nearest_center(v.centers, data.row(i));

    std::fill(sums.data().begin(), sums.data().end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto dst = sums.row(assign[i]);
      auto src = data.row(i);
      for (std::size_t j = 0; j < dim; ++j) dst[j] += src[j];
      ++counts[assign[i]];
    }
    bool moved = false;
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      auto dst = v.centers.row(c);
      auto src = sums.row(c);
      for (std::size_t j = 0; j < dim; ++j) {
        const double mean = src[j] / static_cast<double>(counts[c]);
        moved = moved || mean != dst[j];
        dst[j] = mean;
      }
    }

    double wcss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      dist[i] = squared_distance(data.row(i), v.centers.row(assign[i]));
      wcss += dist[i];
    }

    // Empty clusters move to the point farthest from its own center. That
    // point keeps its current assignment, so the recorded WCSS is unchanged.
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      const auto far = static_cast<std::size_t>(std::max_element(dist.begin(), dist.end()) - dist.begin());
      if (dist[far] <= 0.0) break;
      std::copy(data.row(far).begin(), data.row(far).end(), v.centers.row(c).begin());
      dist[far] = 0.0;
      moved = true;
    }

    if (wcss > prev * (1.0 + 1e-12) + 1e-12) {
      throw std::logic_error("Lloyd WCSS increased between iterations");
    }
    v.wcss_history.push_back(wcss);
    v.wcss = wcss;
    v.iterations = it + 1;
    if (!moved || prev - wcss < params.tol) break;
    prev = wcss;
  }
  return v;
}

/// k-means++ seeding followed by Lloyd refinement.
inline Vocabulary build_vocabulary(const Matrix& descriptors, std::size_t k, std::uint64_t seed,
                                   const LloydParams& params = {}) {
  Vocabulary v = lloyd(descriptors, kmeanspp_seed(descriptors, k, seed), params);
  v.seed = seed;
  return v;
}

inline TermVector encode(const Vocabulary& vocab, std::span<const Descriptor64> descriptors) {
  if (descriptors.empty()) throw DataError("cannot encode an empty descriptor list");
  TermVector tv{std::vector<double>(vocab.k(), 0.0), std::vector<std::uint64_t>(vocab.k(), 0)};
  for (const auto& d : descriptors) ++tv.raw_counts[nearest_center(vocab, d)];
  const double total = static_cast<double>(descriptors.size());
  for (std::size_t i = 0; i < vocab.k(); ++i) tv.bins[i] = static_cast<double>(tv.raw_counts[i]) / total;
  return tv;
}

/// Per-class elementwise sums of raw visual-word counts.
struct ClassOccurrence {
  std::vector<std::uint64_t> ma;
  std::vector<std::uint64_t> normal;
};

inline ClassOccurrence class_occurrence_sum(std::span<const TermVector> tvs, std::span<const Label> labels) {
  if (tvs.size() != labels.size()) throw DataError("term vectors and labels differ in length");
  const std::size_t k = tvs.empty() ? 0 : tvs.front().raw_counts.size();
  ClassOccurrence out{std::vector<std::uint64_t>(k, 0), std::vector<std::uint64_t>(k, 0)};
  for (std::size_t i = 0; i < tvs.size(); ++i) {
    if (tvs[i].raw_counts.size() != k) throw DataError("term vectors differ in length");
    auto& dst = labels[i] == Label::MA ? out.ma : out.normal;
    for (std::size_t j = 0; j < k; ++j) dst[j] += tvs[i].raw_counts[j];
  }
  return out;
}

}  // namespace bofscan
