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
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bofscan/baselines.hpp"
#include "bofscan/core.hpp"
#include "bofscan/mlp.hpp"
#include "bofscan/pca.hpp"

namespace bofscan {

// ---------------------------------------------------------------------------
// Splitting

struct SplitSpec {
  double train_frac = 0.70;
  double val_frac = 0.15;
  double test_frac = 0.15;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(train_frac > 0 && val_frac > 0 && test_frac > 0)) throw DataError("split fractions must be positive");
    if (std::abs(train_frac + val_frac + test_frac - 1.0) > 1e-12) throw DataError("split fractions must sum to 1");
  }
};

struct Split {
  std::vector<std::size_t> train, val, test;  // ascending sample indices

  bool operator==(const Split&) const = default;
};

/// Split sizes: train = floor(n * train_frac), val = floor(n * val_frac),
/// test = the remainder.
inline std::array<std::size_t, 3> split_sizes(std::size_t n, const SplitSpec& spec) {
  const auto tr = static_cast<std::size_t>(std::floor(static_cast<double>(n) * spec.train_frac + 1e-9));
  const auto va = static_cast<std::size_t>(std::floor(static_cast<double>(n) * spec.val_frac + 1e-9));
  return {tr, va, n - tr - va};
}

/// Seeded stratified split. Per-class split counts are chosen so every
/// (class, split) cell is within one sample of its proportional share.
inline Split split_dataset(std::span<const Label> labels, const SplitSpec& spec) {
  spec.validate();
  const std::size_t n = labels.size();
  if (n < 3) throw DataError("need at least 3 samples to split");
  const auto sizes = split_sizes(n, spec);

  std::array<std::vector<std::size_t>, 2> members;
  for (std::size_t i = 0; i < n; ++i) members[static_cast<int>(labels[i])].push_back(i);
  for (int c = 0; c < 2; ++c) {
    if (!members[c].empty() && members[c].size() < 3) {
      throw DataError(std::string("class ") + std::string(to_string(static_cast<Label>(c))) + " has only " +
                      std::to_string(members[c].size()) + " samples; at least 3 are needed to split");
    }
  }

  // Allocation for the MA class; NORMAL takes the rest of each split.
  const double n_ma = static_cast<double>(members[1].size());
  const double share = n_ma / static_cast<double>(n);
  auto deviation = [&](double count, double total, double cls_share) { return std::abs(count - total * cls_share); };
  std::array<std::size_t, 3> best_ma{};
  double best_err = std::numeric_limits<double>::infinity();
  const long ideal_tr = static_cast<long>(std::floor(sizes[0] * share));
  const long ideal_va = static_cast<long>(std::floor(sizes[1] * share));
  for (long tr = ideal_tr - 1; tr <= ideal_tr + 2; ++tr) {
    for (long va = ideal_va - 1; va <= ideal_va + 2; ++va) {
      const long te = static_cast<long>(members[1].size()) - tr - va;
      if (tr < 0 || va < 0 || te < 0) continue;
      if (tr > static_cast<long>(sizes[0]) || va > static_cast<long>(sizes[1]) || te > static_cast<long>(sizes[2])) {
        continue;
      }
      double err = 0.0;
      const std::array<long, 3> ma{tr, va, te};
      for (int s = 0; s < 3; ++s) {
        err = std::max(err, deviation(static_cast<double>(ma[s]), static_cast<double>(sizes[s]), share));
        err = std::max(err, deviation(static_cast<double>(static_cast<long>(sizes[s]) - ma[s]),
                                      static_cast<double>(sizes[s]), 1.0 - share));
      }
      if (err < best_err - 1e-12) {
        best_err = err;
        best_ma = {static_cast<std::size_t>(tr), static_cast<std::size_t>(va), static_cast<std::size_t>(te)};
      }
    }
  }
  if (!std::isfinite(best_err)) throw DataError("no feasible stratified split");

  Rng rng(spec.seed);
  Split out;
  for (int c = 1; c >= 0; --c) {
    std::vector<std::size_t> idx = members[c];
    rng.shuffle(idx);
    std::array<std::size_t, 3> cnt = best_ma;
    if (c == 0) cnt = {sizes[0] - best_ma[0], sizes[1] - best_ma[1], sizes[2] - best_ma[2]};
    const std::array<std::vector<std::size_t>*, 3> dst{&out.train, &out.val, &out.test};
    std::size_t pos = 0;
    for (int s = 0; s < 3; ++s) {
      dst[s]->insert(dst[s]->end(), idx.begin() + static_cast<std::ptrdiff_t>(pos),
                     idx.begin() + static_cast<std::ptrdiff_t>(pos + cnt[s]));
      pos += cnt[s];
    }
  }
  for (auto* v : {&out.train, &out.val, &out.test}) std::sort(v->begin(), v->end());
  return out;
}

// ---------------------------------------------------------------------------
// Confusion matrix and metrics (MA is the positive class)

struct ConfusionMatrix {
  std::uint64_t tp = 0, fn = 0, tn = 0, fp = 0;

  std::uint64_t total() const { return tp + fn + tn + fp; }
  std::uint64_t positives() const { return tp + fn; }
  std::uint64_t negatives() const { return tn + fp; }
  bool operator==(const ConfusionMatrix&) const = default;
};

inline ConfusionMatrix confusion(std::span<const Label> preds, std::span<const Label> labels) {
  if (preds.size() != labels.size()) throw DataError("predictions and labels differ in length");
  if (preds.empty()) throw DataError("cannot build a confusion matrix from zero samples");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const bool p = preds[i] == Label::MA, a = labels[i] == Label::MA;
    if (a && p) ++cm.tp;
    else if (a) ++cm.fn;
    else if (p) ++cm.fp;
    else ++cm.tn;
  }
  return cm;
}

/// Each metric is empty (not applicable) when its denominator is zero.
struct Metrics {
  std::optional<double> accuracy, sensitivity, specificity, precision;

  std::array<std::optional<double>, 4> as_array() const { return {accuracy, sensitivity, specificity, precision}; }
};

inline constexpr std::array<const char*, 4> kMetricNames = {"accuracy", "sensitivity", "specificity", "precision"};

inline Metrics metrics(const ConfusionMatrix& cm) {
  auto ratio = [](std::uint64_t num, std::uint64_t den) -> std::optional<double> {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
  };
  return {ratio(cm.tp + cm.tn, cm.total()), ratio(cm.tp, cm.tp + cm.fn), ratio(cm.tn, cm.tn + cm.fp),
          ratio(cm.tp, cm.tp + cm.fp)};
}

template <Classifier C>
std::vector<Label> predict_all(const C& clf, const Matrix& X) {
  std::vector<Label> out(X.rows());
  for (std::size_t i = 0; i < X.rows(); ++i) out[i] = clf.predict(X.row(i));
  return out;
}

inline std::vector<Label> select_labels(std::span<const Label> labels, std::span<const std::size_t> idx) {
  std::vector<Label> out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = labels[idx[i]];
  return out;
}

inline double accuracy_of(std::span<const Label> preds, std::span<const Label> labels) {
  return *metrics(confusion(preds, labels)).accuracy;
}

// ---------------------------------------------------------------------------
// Experiments

/// Per-sample features of one experiment: BoF term vectors and the raw
/// concatenated SURF descriptors (the PCA track's input), plus the split.
struct FeatureSet {
  Matrix bof;
  Matrix surf;
  std::vector<Label> labels;
  Split split;
};

struct SweepPoint {
  std::size_t hidden = 0;
  double accuracy = 0.0;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  std::size_t best_hidden = 0;  // argmax, ties -> smaller count
};

/// Trains one MLP per hidden count on the BoF features (identical split and
/// seed) and reports validation accuracy.
inline SweepResult neuron_sweep(const FeatureSet& fs, std::span<const std::size_t> hidden_counts,
                                const TrainConfig& cfg) {
  const Matrix Xtr = select_rows(fs.bof, fs.split.train), Xva = select_rows(fs.bof, fs.split.val);
  const auto ytr = select_labels(fs.labels, fs.split.train), yva = select_labels(fs.labels, fs.split.val);
  if (Xva.empty()) throw DataError("neuron sweep needs a non-empty validation split");
  SweepResult r;
  double best = -1.0;
  for (std::size_t h : hidden_counts) {
    if (h < 1) throw DataError("hidden neuron counts must be at least 1");
    const TrainResult tr = mlp_train(mlp_init(Xtr.cols(), h, cfg.seed), Xtr, ytr, Xva, yva, cfg);
    const double acc = accuracy_of(predict_all(tr.model, Xva), yva);
    r.points.push_back({h, acc});
    if (acc > best || (acc == best && h < r.best_hidden)) {
      best = acc;
      r.best_hidden = h;
    }
  }
  return r;
}

enum class FeatureTrack { Bof, Pca };
enum class ClassifierKind { Mlp, LinSvm, Knn, Gnb };

struct Method {
  FeatureTrack track = FeatureTrack::Bof;
  ClassifierKind kind = ClassifierKind::Mlp;

  std::string name() const {
    static constexpr const char* kinds[] = {"MLP", "LinSVM", "KNN", "GNB"};
    return std::string(track == FeatureTrack::Bof ? "BOF+" : "PCA+") + kinds[static_cast<int>(kind)];
  }
  bool operator==(const Method&) const = default;
};

/// The eight in-scope combinations in report order.
inline std::vector<Method> all_methods() {
  std::vector<Method> m;
  for (FeatureTrack t : {FeatureTrack::Bof, FeatureTrack::Pca})
    for (ClassifierKind k : {ClassifierKind::Mlp, ClassifierKind::LinSvm, ClassifierKind::Knn, ClassifierKind::Gnb})
      m.push_back({t, k});
  return m;
}

inline Method parse_method(std::string_view name) {
  for (const Method& m : all_methods())
    if (m.name() == name) return m;
  std::string valid;
  for (const Method& m : all_methods()) valid += (valid.empty() ? "" : ", ") + m.name();
  throw UsageError("unknown method '" + std::string(name) + "'; valid methods: " + valid);
}

struct MethodConfig {
  std::size_t hidden = 10;
  TrainConfig mlp;
  std::size_t knn_k = 5;
  LinSvmConfig svm;
  PcaTarget pca_target = 0.95;
};

struct MethodResult {
  std::string name;
  ConfusionMatrix cm;
  Metrics metrics;
};

/// Fits one method on the train split (MLP also watches the validation split)
/// and scores it on the test split.
inline MethodResult run_method(const FeatureSet& fs, const Method& method, const MethodConfig& cfg) {
  const Matrix& base = method.track == FeatureTrack::Bof ? fs.bof : fs.surf;
  Matrix Xtr = select_rows(base, fs.split.train), Xva = select_rows(base, fs.split.val),
         Xte = select_rows(base, fs.split.test);
  const auto ytr = select_labels(fs.labels, fs.split.train), yva = select_labels(fs.labels, fs.split.val),
             yte = select_labels(fs.labels, fs.split.test);
  if (method.track == FeatureTrack::Pca) {
    const PcaModel pca = pca_fit(Xtr, cfg.pca_target);
    Xtr = pca_transform(pca, Xtr);
    Xva = pca_transform(pca, Xva);
    Xte = pca_transform(pca, Xte);
  }

  std::vector<Label> preds;
  switch (method.kind) {
    case ClassifierKind::Mlp: {
      const TrainResult tr = mlp_train(mlp_init(Xtr.cols(), cfg.hidden, cfg.mlp.seed), Xtr, ytr, Xva, yva, cfg.mlp);
      preds = predict_all(tr.model, Xte);
      break;
    }
    case ClassifierKind::LinSvm:
      preds = predict_all(linsvm_train(Xtr, ytr, cfg.svm), Xte);
      break;
    case ClassifierKind::Knn:
      preds = predict_all(knn_fit(Xtr, ytr, std::min(cfg.knn_k, Xtr.rows())), Xte);
      break;
    case ClassifierKind::Gnb:
      preds = predict_all(gnb_fit(Xtr, ytr), Xte);
      break;
  }
  const ConfusionMatrix cm = confusion(preds, yte);
  return {method.name(), cm, metrics(cm)};
}

inline std::vector<MethodResult> method_matrix(const FeatureSet& fs, std::span<const Method> methods,
                                               const MethodConfig& cfg) {
  std::vector<MethodResult> rows;
  rows.reserve(methods.size());
  for (const Method& m : methods) rows.push_back(run_method(fs, m, cfg));
  return rows;
}

}  // namespace bofscan
