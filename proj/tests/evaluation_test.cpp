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


#include <gtest/gtest.h>

#include <set>

#include "bofscan/evaluation.hpp"
#include "test_util.hpp"

namespace bofscan {
namespace {

std::vector<Label> labels_of(std::size_t n_ma, std::size_t n_normal) {
  std::vector<Label> y(n_ma, Label::MA);
  y.insert(y.end(), n_normal, Label::Normal);
  return y;
}

// Cell-by-cell stratification check: every (class, split) count within one
// sample of its proportional share.
void expect_stratified(const Split& s, std::span<const Label> y) {
  double n_ma = 0;
  for (Label l : y) n_ma += l == Label::MA;
  const double share = n_ma / static_cast<double>(y.size());
  for (const auto* part : {&s.train, &s.val, &s.test}) {
    double ma = 0;
    for (std::size_t i : *part) ma += y[i] == Label::MA;
    EXPECT_LE(std::abs(ma - part->size() * share), 1.0);
    EXPECT_LE(std::abs((part->size() - ma) - part->size() * (1.0 - share)), 1.0);
  }
}

TEST(SplitSizes, FloorArithmetic) {
  EXPECT_EQ(split_sizes(202, {}), (std::array<std::size_t, 3>{141, 30, 31}));
  EXPECT_EQ(split_sizes(20, {}), (std::array<std::size_t, 3>{14, 3, 3}));
  EXPECT_EQ(split_sizes(100, {}), (std::array<std::size_t, 3>{70, 15, 15}));
}

TEST(SplitDataset, TwoHundredTwoSamples) {
  const auto y = labels_of(92, 110);
  const Split s = split_dataset(y, {});
  EXPECT_EQ(s.train.size(), 141u);
  EXPECT_EQ(s.val.size(), 30u);
  EXPECT_EQ(s.test.size(), 31u);
  expect_stratified(s, y);
}

TEST(SplitDataset, DisjointCoveringAndStratified) {
  Rng rng(17);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n_ma = 3 + rng.below(120), n_normal = 3 + rng.below(120);
    auto y = labels_of(n_ma, n_normal);
    rng.shuffle(y);
    SplitSpec spec;
    spec.seed = rng.next_u64();
    const Split s = split_dataset(y, spec);
    std::set<std::size_t> all;
    for (const auto* part : {&s.train, &s.val, &s.test}) {
      EXPECT_TRUE(std::is_sorted(part->begin(), part->end()));
      all.insert(part->begin(), part->end());
    }
    EXPECT_EQ(all.size(), y.size());
    EXPECT_EQ(s.train.size() + s.val.size() + s.test.size(), y.size());
    expect_stratified(s, y);
  }
}

TEST(SplitDataset, SeededAndReproducible) {
  const auto y = labels_of(10, 10);
  SplitSpec a;
  a.seed = 4;
  EXPECT_EQ(split_dataset(y, a), split_dataset(y, a));
  SplitSpec b = a;
  b.seed = 5;
  EXPECT_NE(split_dataset(y, a), split_dataset(y, b));
  const Split s = split_dataset(y, a);
  EXPECT_EQ(s.train.size(), 14u);
  EXPECT_EQ(s.val.size(), 3u);
  EXPECT_EQ(s.test.size(), 3u);
}

TEST(SplitDataset, StarvedClassIsAnError) {
  EXPECT_THROW(split_dataset(labels_of(2, 50), {}), DataError);
  SplitSpec bad;
  bad.val_frac = 0.2;
  EXPECT_THROW(split_dataset(labels_of(10, 10), bad), DataError);
}

TEST(SplitDataset, SingleClassIsAllowed) {
  const Split s = split_dataset(labels_of(0, 20), {});
  EXPECT_EQ(s.test.size(), 3u);
}

TEST(Confusion, Examples) {
  const auto y = labels_of(5, 5);
  EXPECT_EQ(confusion(y, y), (ConfusionMatrix{5, 0, 5, 0}));
  const std::vector<Label> all_ma(10, Label::MA);
  EXPECT_EQ(confusion(all_ma, y), (ConfusionMatrix{5, 0, 0, 5}));
}

TEST(Confusion, HandTally) {
  // labels: 8 MA then 12 NORMAL; predictions miss MA #2 and #7, flag NORMAL #0, #5, #11.
  std::vector<Label> y = labels_of(8, 12), p = y;
  p[2] = p[7] = Label::Normal;
  p[8 + 0] = p[8 + 5] = p[8 + 11] = Label::MA;
  EXPECT_EQ(confusion(p, y), (ConfusionMatrix{6, 2, 9, 3}));
}

TEST(Confusion, Errors) {
  EXPECT_THROW(confusion(labels_of(1, 1), labels_of(1, 0)), DataError);
  EXPECT_THROW(confusion(std::vector<Label>{}, std::vector<Label>{}), DataError);
}

TEST(Metrics, HandArithmetic) {
  const Metrics m = metrics({9, 1, 9, 1});
  EXPECT_DOUBLE_EQ(*m.accuracy, 0.9);
  EXPECT_DOUBLE_EQ(*m.sensitivity, 0.9);
  EXPECT_DOUBLE_EQ(*m.specificity, 0.9);
  EXPECT_DOUBLE_EQ(*m.precision, 0.9);
  const Metrics perfect = metrics({4, 0, 6, 0});
  for (const auto& v : perfect.as_array()) EXPECT_EQ(*v, 1.0);
}

TEST(Metrics, ZeroDenominatorIsNotApplicable) {
  const Metrics no_positives = metrics({.tp = 0, .fn = 0, .tn = 7, .fp = 3});
  EXPECT_FALSE(no_positives.sensitivity.has_value());
  EXPECT_DOUBLE_EQ(*no_positives.precision, 0.0);
  EXPECT_DOUBLE_EQ(*no_positives.specificity, 0.7);
  EXPECT_DOUBLE_EQ(*no_positives.accuracy, 0.7);

  const Metrics nothing_flagged = metrics({.tp = 0, .fn = 4, .tn = 6, .fp = 0});
  EXPECT_FALSE(nothing_flagged.precision.has_value());
  EXPECT_DOUBLE_EQ(*nothing_flagged.sensitivity, 0.0);
  EXPECT_DOUBLE_EQ(*nothing_flagged.specificity, 1.0);
}

TEST(Metrics, RandomTalliesMatchFormulasAndIdentity) {
  Rng rng(21);
  for (int t = 0; t < 200; ++t) {
    const ConfusionMatrix cm{1 + rng.below(50), 1 + rng.below(50), 1 + rng.below(50), 1 + rng.below(50)};
    // Build the tally from explicit label lists so confusion() is exercised too.
    std::vector<Label> p, y;
    auto push = [&](std::uint64_t n, Label pred, Label truth) {
      for (std::uint64_t i = 0; i < n; ++i) {
        p.push_back(pred);
        y.push_back(truth);
      }
    };
    push(cm.tp, Label::MA, Label::MA);
    push(cm.fn, Label::Normal, Label::MA);
    push(cm.tn, Label::Normal, Label::Normal);
    push(cm.fp, Label::MA, Label::Normal);
    ASSERT_EQ(confusion(p, y), cm);
    const Metrics m = metrics(cm);
    const double tp = cm.tp, fn = cm.fn, tn = cm.tn, fp = cm.fp;
    EXPECT_EQ(*m.accuracy, (tp + tn) / (tp + fn + tn + fp));
    EXPECT_EQ(*m.sensitivity, tp / (tp + fn));
    EXPECT_EQ(*m.specificity, tn / (tn + fp));
    EXPECT_EQ(*m.precision, tp / (tp + fp));
    const double P = tp + fn, N = tn + fp;
    EXPECT_NEAR(*m.accuracy, (*m.sensitivity * P + *m.specificity * N) / (P + N), 1e-12);
  }
}

TEST(Methods, NamesAndOrder) {
  const auto all = all_methods();
  ASSERT_EQ(all.size(), 8u);
  const std::vector<std::string> names{"BOF+MLP", "BOF+LinSVM", "BOF+KNN", "BOF+GNB",
                                       "PCA+MLP", "PCA+LinSVM", "PCA+KNN", "PCA+GNB"};
  for (std::size_t i = 0; i < 8; ++i) {
    EXPECT_EQ(all[i].name(), names[i]);
    EXPECT_EQ(parse_method(names[i]), all[i]);
  }
}

TEST(Methods, UnknownNameListsTheValidOnes) {
  try {
    parse_method("BOF+RBF");
    FAIL() << "expected UsageError";
  } catch (const UsageError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("BOF+RBF"), std::string::npos);
    EXPECT_NE(what.find("PCA+GNB"), std::string::npos);
  }
}

// Two well-separated classes in both feature tracks.
FeatureSet toy_features(std::uint64_t seed) {
  Rng rng(seed);
  FeatureSet fs;
  fs.bof = Matrix(0, 6);
  fs.surf = Matrix(0, 12);
  for (int i = 0; i < 60; ++i) {
    const bool ma = i % 2 == 0;
    std::vector<double> b(6), s(12);
    for (std::size_t k = 0; k < b.size(); ++k) b[k] = rng.uniform() * 0.2 + (ma && k < 3 ? 0.5 : 0.0);
    for (std::size_t k = 0; k < s.size(); ++k) s[k] = rng.normal() * 0.1 + (ma ? 1.0 : 0.0);
    fs.bof.append_row(b);
    fs.surf.append_row(s);
    fs.labels.push_back(ma ? Label::MA : Label::Normal);
  }
  SplitSpec spec;
  spec.seed = seed;
  fs.split = split_dataset(fs.labels, spec);
  return fs;
}

TEST(NeuronSweep, OnePointPerCount) {
  const FeatureSet fs = toy_features(1);
  TrainConfig cfg;
  cfg.epochs = 200;
  const std::vector<std::size_t> counts{5, 10, 15};
  const SweepResult r = neuron_sweep(fs, counts, cfg);
  ASSERT_EQ(r.points.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(r.points[i].hidden, counts[i]);
    EXPECT_GE(r.points[i].accuracy, 0.0);
    EXPECT_LE(r.points[i].accuracy, 1.0);
  }
  EXPECT_NE(std::find(counts.begin(), counts.end(), r.best_hidden), counts.end());
}

TEST(MethodMatrix, EightRowsWithValidMetrics) {
  const FeatureSet fs = toy_features(2);
  MethodConfig cfg;
  cfg.mlp.epochs = 300;
  const auto methods = all_methods();
  const auto rows = method_matrix(fs, methods, cfg);
  ASSERT_EQ(rows.size(), 8u);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].name, methods[i].name());
    EXPECT_EQ(rows[i].cm.total(), fs.split.test.size());
    for (const auto& v : rows[i].metrics.as_array()) {
      if (!v) continue;
      EXPECT_GE(*v, 0.0);
      EXPECT_LE(*v, 1.0);
    }
    // Separable toy data: every method should get most of the test split right.
    EXPECT_GE(*rows[i].metrics.accuracy, 0.8) << rows[i].name;
  }
}

TEST(MethodMatrix, Deterministic) {
  const FeatureSet fs = toy_features(3);
  MethodConfig cfg;
  cfg.mlp.epochs = 100;
  const auto methods = all_methods();
  const auto a = method_matrix(fs, methods, cfg), b = method_matrix(fs, methods, cfg);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].cm, b[i].cm);
}

}  // namespace
}  // namespace bofscan
