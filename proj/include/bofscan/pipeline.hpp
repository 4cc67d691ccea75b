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

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "bofscan/evaluation.hpp"
#include "bofscan/features.hpp"
#include "bofscan/imaging.hpp"
#include "bofscan/registration.hpp"
#include "bofscan/report.hpp"
#include "bofscan/serialization.hpp"
#include "bofscan/synth.hpp"
#include "bofscan/vocabulary.hpp"

namespace bofscan {

namespace fs = std::filesystem;

/// Every knob of the train/test workflow. Loaded from JSON; absent keys keep
/// their defaults.
struct PipelineConfig {
  // synthetic dataset
  int n_scans = 40;
  int scan_width = 768;
  int scan_height = 496;
  int lesions_min = 1;
  int lesions_max = 4;
  double normal_ratio = 110.0 / 92.0;  // NORMAL patches per MA patch
  SynthOptions synth;

  // ROI + features
  int strip_width = 30;
  int band_height = 170;
  SurfParams surf{8, 8, 3.0, 5};  // wide enough that lesions between grid rows still register

  // vocabulary
  std::size_t vocab_k = 100;
  LloydParams lloyd;

  // classifiers
  std::size_t hidden_neurons = 10;
  TrainConfig train;
  std::size_t knn_k = 5;
  double svm_lambda = 1e-2;
  int svm_epochs = 100;
  double pca_variance = 0.95;
  std::vector<std::size_t> sweep_hidden = {1, 2, 5, 10, 15, 20, 30};
  std::vector<std::string> methods;  // empty = all eight

  SplitSpec split;
  std::uint64_t master_seed = 1;

  void validate() const {
    if (n_scans < 1 || scan_width < 64 || scan_height < 64) throw UsageError("invalid scan count or size");
    if (lesions_min < 0 || lesions_max < lesions_min) throw UsageError("invalid lesion count range");
    if (!(normal_ratio > 0)) throw UsageError("normal_ratio must be positive");
    if (strip_width < 1 || band_height < 1) throw UsageError("strip_width and band_height must be positive");
    if (surf.grid_x < 1 || surf.grid_y < 1 || !(surf.scale >= 1.0) || surf.samples_per_subregion < 1) {
      throw UsageError("invalid SURF parameters");
    }
    if (vocab_k < 2) throw UsageError("vocab_k must be at least 2");
    if (hidden_neurons < 1 || knn_k < 1) throw UsageError("hidden_neurons and knn_k must be positive");
    for (std::size_t h : sweep_hidden)
      if (h < 1) throw UsageError("sweep_hidden counts must be positive");
    try {
      train.validate();
      split.validate();
    } catch (const DataError& e) {
      throw UsageError(e.what());
    }
    for (const auto& m : methods) parse_method(m);
  }
};

/// Stage indices for seed derivation from the master seed.
enum class Stage : std::uint64_t { Synth = 1, Split = 2, Vocab = 3, Mlp = 4, Svm = 5 };

inline std::uint64_t stage_seed(const PipelineConfig& cfg, Stage s) {
  return derive_seed(cfg.master_seed, static_cast<std::uint64_t>(s));
}

inline Json to_json(const PipelineConfig& c);

inline PipelineConfig config_from_json(const Json& j) {
  PipelineConfig c;
  auto get = [&](const char* key, auto& dst) {
    if (!j.contains(key)) return;
    try {
      j.at(key).get_to(dst);
    } catch (const Json::exception& e) {
      throw UsageError(std::string("config field '") + key + "': " + e.what());
    }
  };
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  const Json known = to_json(c);
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw UsageError("unknown config field '" + key + "'");
  }
  get("n_scans", c.n_scans);
  get("scan_width", c.scan_width);
  get("scan_height", c.scan_height);
  get("lesions_min", c.lesions_min);
  get("lesions_max", c.lesions_max);
  get("normal_ratio", c.normal_ratio);
  get("noise_sigma", c.synth.noise_sigma);
  get("lesion_amplitude", c.synth.lesion_amplitude);
  get("lesion_min_radius", c.synth.min_radius);
  get("lesion_max_radius", c.synth.max_radius);
  get("vessel_shadows", c.synth.vessel_shadows);
  get("strip_width", c.strip_width);
  get("band_height", c.band_height);
  get("grid_x", c.surf.grid_x);
  get("grid_y", c.surf.grid_y);
  get("surf_scale", c.surf.scale);
  get("samples_per_subregion", c.surf.samples_per_subregion);
  get("vocab_k", c.vocab_k);
  get("lloyd_max_iter", c.lloyd.max_iter);
  get("lloyd_tol", c.lloyd.tol);
  get("hidden_neurons", c.hidden_neurons);
  get("learning_rate", c.train.learning_rate);
  get("epochs", c.train.epochs);
  get("early_stop_patience", c.train.early_stop_patience);
  get("standardize_inputs", c.train.standardize);
  get("knn_k", c.knn_k);
  get("svm_lambda", c.svm_lambda);
  get("svm_epochs", c.svm_epochs);
  get("pca_variance", c.pca_variance);
  get("sweep_hidden", c.sweep_hidden);
  get("methods", c.methods);
  get("train_frac", c.split.train_frac);
  get("val_frac", c.split.val_frac);
  get("test_frac", c.split.test_frac);
  get("master_seed", c.master_seed);
  c.validate();
  return c;
}

inline Json to_json(const PipelineConfig& c) {
  return {{"n_scans", c.n_scans},
          {"scan_width", c.scan_width},
          {"scan_height", c.scan_height},
          {"lesions_min", c.lesions_min},
          {"lesions_max", c.lesions_max},
          {"normal_ratio", c.normal_ratio},
          {"noise_sigma", c.synth.noise_sigma},
          {"lesion_amplitude", c.synth.lesion_amplitude},
          {"lesion_min_radius", c.synth.min_radius},
          {"lesion_max_radius", c.synth.max_radius},
          {"vessel_shadows", c.synth.vessel_shadows},
          {"strip_width", c.strip_width},
          {"band_height", c.band_height},
          {"grid_x", c.surf.grid_x},
          {"grid_y", c.surf.grid_y},
          {"surf_scale", c.surf.scale},
          {"samples_per_subregion", c.surf.samples_per_subregion},
          {"vocab_k", c.vocab_k},
          {"lloyd_max_iter", c.lloyd.max_iter},
          {"lloyd_tol", c.lloyd.tol},
          {"hidden_neurons", c.hidden_neurons},
          {"learning_rate", c.train.learning_rate},
          {"epochs", c.train.epochs},
          {"early_stop_patience", c.train.early_stop_patience},
          {"standardize_inputs", c.train.standardize},
          {"knn_k", c.knn_k},
          {"svm_lambda", c.svm_lambda},
          {"svm_epochs", c.svm_epochs},
          {"pca_variance", c.pca_variance},
          {"sweep_hidden", c.sweep_hidden},
          {"methods", c.methods},
          {"train_frac", c.split.train_frac},
          {"val_frac", c.split.val_frac},
          {"test_frac", c.split.test_frac},
          {"master_seed", c.master_seed}};
}

// --- manifest ----------------------------------------------------------------

struct ManifestRow {
  std::string path;  // relative to the manifest's directory
  Label label = Label::Normal;
  std::string source_id;
  int center_x = 0;

  std::string patch_id() const { return fs::path(path).stem().string(); }
};

inline void write_manifest(const fs::path& path, const std::vector<ManifestRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write manifest " + path.string());
  out << "path,label,source_id,center_x\n";
  for (const auto& r : rows) out << r.path << ',' << to_string(r.label) << ',' << r.source_id << ',' << r.center_x << '\n';
}

inline std::vector<ManifestRow> read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "path,label,source_id,center_x") {
    throw DataError("manifest header must be path,label,source_id,center_x");
  }
  std::vector<ManifestRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c = split_csv_line(line);
    if (c.size() != 4) throw DataError("manifest row has " + std::to_string(c.size()) + " columns: " + line);
    rows.push_back({c[0], parse_label(c[1]), c[2], static_cast<int>(parse_double(c[3]))});
  }
  if (rows.empty()) throw DataError("manifest " + path.string() + " has no rows");
  return rows;
}

namespace detail {

/// Runs `f`, prefixing any library error with the stage name.
template <class F>
auto staged(const char* stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const UsageError& e) {
    throw UsageError(std::string("[") + stage + "] " + e.what());
  } catch (const NumericError& e) {
    throw NumericError(std::string("[") + stage + "] " + e.what());
  } catch (const DataError& e) {
    throw DataError(std::string("[") + stage + "] " + e.what());
  }
}

inline void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw DataError("cannot create output directory " + dir.string());
}

inline std::string scan_id(int s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "scan_%03d", s);
  return buf;
}

}  // namespace detail

// --- synth ---------------------------------------------------------------------

struct SynthSummary {
  fs::path manifest;
  std::size_t n_ma = 0;
  std::size_t n_normal = 0;
};

/// Writes scans/, annotations/, patches/ and manifest.csv under `out_dir`.
/// MA patches are centered on lesions; NORMAL patches sit more than one strip
/// width away from every lesion and from each other.
inline SynthSummary cmd_synth(const PipelineConfig& cfg, const fs::path& out_dir) {
  cfg.validate();
  return detail::staged("synth", [&] {
    for (const char* sub : {"scans", "annotations", "patches"}) detail::ensure_dir(out_dir / sub);
    const std::uint64_t base = stage_seed(cfg, Stage::Synth);
    SynthSummary summary;
    std::vector<ManifestRow> rows;
    const int half = cfg.strip_width / 2;

    for (int s = 0; s < cfg.n_scans; ++s) {
      const std::uint64_t scan_seed = derive_seed(base, static_cast<std::uint64_t>(s));
      Rng layout(derive_seed(scan_seed, 1));
      const int n_lesions = cfg.lesions_min + static_cast<int>(layout.below(cfg.lesions_max - cfg.lesions_min + 1));
      SynthOptions opt = cfg.synth;
      opt.lesion_margin_x = std::max(opt.lesion_margin_x, half + 2);
      auto [scan, ann] = synth_bscan(derive_seed(scan_seed, 0), n_lesions, cfg.scan_width, cfg.scan_height, opt);

      const std::string id = detail::scan_id(s);
      save_pgm(scan, out_dir / "scans" / (id + ".pgm"));
      write_json(out_dir / "annotations" / (id + ".json"), to_json(ann));

      auto emit = [&](int center_x, Label label, int ordinal) {
        const GrayImage patch = crop_to_band(extract_strip(scan, center_x, cfg.strip_width), cfg.band_height);
        const std::string name = id + (label == Label::MA ? "_ma" : "_normal") + std::to_string(ordinal) + ".pgm";
        save_pgm(patch, out_dir / "patches" / name);
        rows.push_back({"patches/" + name, label, id, center_x});
        ++(label == Label::MA ? summary.n_ma : summary.n_normal);
      };

      for (std::size_t i = 0; i < ann.lesion_centers.size(); ++i) emit(ann.lesion_centers[i].x, Label::MA, static_cast<int>(i));

      const int n_normal = static_cast<int>(round_half_up(std::max(1, n_lesions) * cfg.normal_ratio));
      std::vector<int> taken;
      const int lo = half, hi = cfg.scan_width - cfg.strip_width + half;  // valid strip centers
      for (int i = 0; i < n_normal; ++i) {
        bool placed = false;
        for (int attempt = 0; attempt < 10000 && !placed; ++attempt) {
          const int x = lo + static_cast<int>(layout.below(static_cast<std::uint64_t>(hi - lo + 1)));
          bool ok = true;
          for (const auto& c : ann.lesion_centers) ok = ok && std::abs(x - c.x) > cfg.strip_width;
          for (int t : taken) ok = ok && std::abs(x - t) >= cfg.strip_width;
          if (ok) {
            taken.push_back(x);
            emit(x, Label::Normal, i);
            placed = true;
          }
        }
        if (!placed) throw DataError("no lesion-free column left for a NORMAL patch in " + id);
      }
    }
    summary.manifest = out_dir / "manifest.csv";
    write_manifest(summary.manifest, rows);
    return summary;
  });
}

// --- dataset loading -----------------------------------------------------------

struct LoadedDataset {
  std::vector<ManifestRow> rows;
  std::vector<Label> labels;
  std::vector<std::vector<Descriptor64>> descriptors;  // per patch, grid order
};

inline LoadedDataset load_and_describe(const fs::path& manifest, const PipelineConfig& cfg) {
  LoadedDataset ds;
  ds.rows = detail::staged("manifest", [&] { return read_manifest(manifest); });
  const fs::path root = manifest.parent_path();
  detail::staged("describe", [&] {
    for (const auto& r : ds.rows) {
      ds.labels.push_back(r.label);
      ds.descriptors.push_back(describe_patch(load_pgm(root / r.path), cfg.surf));
    }
    return 0;
  });
  return ds;
}

inline Matrix pooled_descriptors(const LoadedDataset& ds, std::span<const std::size_t> idx) {
  Matrix m(0, kDescriptorSize);
  for (std::size_t i : idx)
    for (const auto& d : ds.descriptors[i]) m.append_row(d);
  return m;
}

inline Matrix encode_all(const Vocabulary& vocab, const LoadedDataset& ds, std::vector<TermVector>* tvs = nullptr) {
  Matrix out(ds.descriptors.size(), vocab.k());
  for (std::size_t i = 0; i < ds.descriptors.size(); ++i) {
    TermVector tv = encode(vocab, ds.descriptors[i]);
    std::copy(tv.bins.begin(), tv.bins.end(), out.row(i).begin());
    if (tvs) tvs->push_back(std::move(tv));
  }
  return out;
}

/// Concatenated descriptors per patch (the PCA track's raw feature vector).
inline Matrix concat_descriptors(const LoadedDataset& ds) {
  Matrix out(0, 0);
  for (const auto& patch : ds.descriptors) {
    std::vector<double> row;
    row.reserve(patch.size() * kDescriptorSize);
    for (const auto& d : patch) row.insert(row.end(), d.begin(), d.end());
    out.append_row(row);
  }
  return out;
}

// --- train -----------------------------------------------------------------------

struct TrainArtifacts {
  Vocabulary vocab;
  MlpModel model;
  Split split;
  TrainResult training;
};

inline TrainArtifacts cmd_train(const PipelineConfig& cfg, const fs::path& manifest, const fs::path& out_dir,
                                bool dump_descriptors = false) {
  cfg.validate();
  detail::ensure_dir(out_dir);
  const LoadedDataset ds = load_and_describe(manifest, cfg);

  TrainArtifacts a;
  SplitSpec spec = cfg.split;
  spec.seed = stage_seed(cfg, Stage::Split);
  a.split = detail::staged("split", [&] { return split_dataset(ds.labels, spec); });

  a.vocab = detail::staged("vocabulary", [&] {
    return build_vocabulary(pooled_descriptors(ds, a.split.train), cfg.vocab_k, stage_seed(cfg, Stage::Vocab), cfg.lloyd);
  });

  std::vector<TermVector> tvs;
  const Matrix bof = detail::staged("encode", [&] { return encode_all(a.vocab, ds, &tvs); });

  TrainConfig tc = cfg.train;
  tc.seed = stage_seed(cfg, Stage::Mlp);
  a.training = detail::staged("mlp", [&] {
    return mlp_train(mlp_init(a.vocab.k(), cfg.hidden_neurons, tc.seed), select_rows(bof, a.split.train),
                     select_labels(ds.labels, a.split.train), select_rows(bof, a.split.val),
                     select_labels(ds.labels, a.split.val), tc);
  });
  a.model = a.training.model;

  write_json(out_dir / "vocab.json", to_json(a.vocab));
  write_json(out_dir / "model.json", to_json(a.model));
  write_json(out_dir / "split.json", to_json(a.split, spec.seed));

  std::vector<TermVectorRow> tv_rows;
  for (std::size_t i = 0; i < ds.rows.size(); ++i) tv_rows.push_back({ds.rows[i].patch_id(), ds.labels[i], tvs[i].bins});
  detail::write_text(out_dir / "term_vectors.csv", term_vector_csv(tv_rows));

  if (dump_descriptors) {
    std::ofstream out(out_dir / "descriptors.csv", std::ios::binary);
    out << descriptor_csv_header();
    for (std::size_t i : a.split.train) append_descriptor_csv(out, ds.rows[i].patch_id(), ds.descriptors[i]);
  }
  return a;
}

// --- eval ------------------------------------------------------------------------

struct EvalOutcome {
  MethodResult result;
  std::vector<std::size_t> test_indices;
};

inline EvalOutcome cmd_eval(const PipelineConfig& cfg, const fs::path& manifest, const fs::path& artifacts,
                            const fs::path& out_dir) {
  cfg.validate();
  const auto [vocab, model, split] = detail::staged("artifacts", [&] {
    return std::tuple{vocabulary_from_json(read_json(artifacts / "vocab.json")),
                      mlp_from_json(read_json(artifacts / "model.json")),
                      split_from_json(read_json(artifacts / "split.json"))};
  });
  if (vocab.k() != model.input_dim) {
    throw DataError("[artifacts] dimension mismatch: vocabulary has " + std::to_string(vocab.k()) +
                    " words but the model expects " + std::to_string(model.input_dim) + " inputs");
  }

  const LoadedDataset ds = load_and_describe(manifest, cfg);
  for (const auto* part : {&split.train, &split.val, &split.test})
    for (std::size_t i : *part)
      if (i >= ds.rows.size()) throw DataError("[artifacts] split.json refers to sample " + std::to_string(i) +
                                               " beyond the manifest");

  std::vector<TermVector> tvs;
  const Matrix bof = detail::staged("encode", [&] { return encode_all(vocab, ds, &tvs); });
  const Matrix Xte = select_rows(bof, split.test);
  const auto yte = select_labels(ds.labels, split.test);
  const auto preds = predict_all(model, Xte);
  const ConfusionMatrix cm = confusion(preds, yte);
  EvalOutcome out{{"BOF+MLP", cm, metrics(cm)}, split.test};

  const ClassOccurrence occ = class_occurrence_sum(tvs, ds.labels);
  const std::vector<MethodResult> rows{out.result};
  emit_report(rows, &occ, nullptr, out_dir);

  std::string pred_csv = "index,source_id,label,predicted,probability\n";
  for (std::size_t i = 0; i < split.test.size(); ++i) {
    const std::size_t idx = split.test[i];
    pred_csv += std::to_string(idx) + "," + ds.rows[idx].patch_id() + "," + std::string(to_string(yte[i])) + "," +
                std::string(to_string(preds[i])) + "," + format_fixed(model.forward(Xte.row(i)), 6) + "\n";
  }
  detail::write_text(out_dir / "predictions.csv", pred_csv);
  return out;
}

// --- bench -------------------------------------------------------------------------

struct BenchOutcome {
  std::vector<MethodResult> rows;
  SweepResult sweep;
  ClassOccurrence occurrence;
};

inline MethodConfig method_config(const PipelineConfig& cfg) {
  MethodConfig mc;
  mc.hidden = cfg.hidden_neurons;
  mc.mlp = cfg.train;
  mc.mlp.seed = stage_seed(cfg, Stage::Mlp);
  mc.knn_k = cfg.knn_k;
  mc.svm = {cfg.svm_lambda, cfg.svm_epochs, stage_seed(cfg, Stage::Svm), cfg.train.standardize};
  mc.pca_target = cfg.pca_variance;
  return mc;
}

/// Builds the shared feature set for a manifest: one split, a vocabulary
/// fitted on the training patches, term vectors and raw descriptors.
inline FeatureSet build_feature_set(const PipelineConfig& cfg, const LoadedDataset& ds, Vocabulary* vocab_out = nullptr,
                                    std::vector<TermVector>* tvs = nullptr) {
  FeatureSet fs;
  fs.labels = ds.labels;
  SplitSpec spec = cfg.split;
  spec.seed = stage_seed(cfg, Stage::Split);
  fs.split = detail::staged("split", [&] { return split_dataset(ds.labels, spec); });
  const Vocabulary vocab = detail::staged("vocabulary", [&] {
    return build_vocabulary(pooled_descriptors(ds, fs.split.train), cfg.vocab_k, stage_seed(cfg, Stage::Vocab), cfg.lloyd);
  });
  fs.bof = encode_all(vocab, ds, tvs);
  fs.surf = concat_descriptors(ds);
  if (vocab_out) *vocab_out = vocab;
  return fs;
}

/// Method comparison plus the neuron sweep. Without a manifest, a
/// synthetic dataset is generated under out_dir/dataset first.
inline BenchOutcome cmd_bench(const PipelineConfig& cfg, const fs::path& out_dir,
                              const std::optional<fs::path>& manifest = std::nullopt) {
  cfg.validate();
  detail::ensure_dir(out_dir);
  const fs::path mf = manifest ? *manifest : cmd_synth(cfg, out_dir / "dataset").manifest;
  const LoadedDataset ds = load_and_describe(mf, cfg);

  std::vector<TermVector> tvs;
  const FeatureSet fs = build_feature_set(cfg, ds, nullptr, &tvs);

  std::vector<Method> methods;
  if (cfg.methods.empty()) {
    methods = all_methods();
  } else {
    for (const auto& m : cfg.methods) methods.push_back(parse_method(m));
  }

  BenchOutcome out;
  const MethodConfig mc = method_config(cfg);
  out.rows = detail::staged("methods", [&] { return method_matrix(fs, methods, mc); });
  out.sweep = detail::staged("sweep", [&] { return neuron_sweep(fs, cfg.sweep_hidden, mc.mlp); });
  out.occurrence = class_occurrence_sum(tvs, ds.labels);
  emit_report(out.rows, &out.occurrence, &out.sweep, out_dir);
  return out;
}

// --- register / predict -------------------------------------------------------------

inline RegistrationResult cmd_register(const fs::path& fixed, const fs::path& moving, const fs::path& out,
                                       const SearchSpace& space = {}) {
  const auto result = detail::staged("register", [&] { return rigid_register(load_pgm(fixed), load_pgm(moving), space); });
  write_json(out, to_json(result.params, result.score));
  return result;
}

struct PredictOutcome {
  std::vector<Label> predictions;
  std::optional<ConfusionMatrix> cm;  // set when the CSV carries labels
};

inline PredictOutcome cmd_predict(const fs::path& model_path, const fs::path& csv, const fs::path& out) {
  const AnyClassifier clf = detail::staged("model", [&] { return classifier_from_json(read_json(model_path)); });
  const auto rows = detail::staged("input", [&] { return read_term_vector_csv(csv); });
  PredictOutcome res;
  std::vector<Label> labels;
  std::string text = "source_id,label,predicted\n";
  for (const auto& r : rows) {
    if (r.bins.size() != input_dim(clf)) {
      throw DataError("[predict] dimension mismatch: row has " + std::to_string(r.bins.size()) +
                      " features, model expects " + std::to_string(input_dim(clf)));
    }
    const Label p = predict(clf, r.bins);
    res.predictions.push_back(p);
    labels.push_back(r.label);
    text += r.source_id + "," + std::string(to_string(r.label)) + "," + std::string(to_string(p)) + "\n";
  }
  if (!rows.empty()) res.cm = confusion(res.predictions, labels);
  detail::write_text(out, text);
  return res;
}

}  // namespace bofscan
