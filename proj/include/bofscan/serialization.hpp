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

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "bofscan/baselines.hpp"
#include "bofscan/evaluation.hpp"
#include "bofscan/features.hpp"
#include "bofscan/mlp.hpp"
#include "bofscan/pca.hpp"
#include "bofscan/registration.hpp"
#include "bofscan/synth.hpp"
#include "bofscan/vocabulary.hpp"

namespace bofscan {

using Json = nlohmann::json;

inline Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw DataError("invalid JSON in " + path.string() + ": " + e.what());
  }
}

inline void write_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw DataError("failed writing " + path.string());
}

namespace detail {

inline Json matrix_json(const Matrix& m) {
  Json rows = Json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) rows.push_back(std::vector<double>(m.row(r).begin(), m.row(r).end()));
  return rows;
}

inline Matrix matrix_from_json(const Json& j, std::size_t rows, std::size_t cols, const char* what) {
  if (!j.is_array() || j.size() != rows) throw DataError(std::string(what) + ": expected " + std::to_string(rows) + " rows");
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto v = j[r].get<std::vector<double>>();
    if (v.size() != cols) throw DataError(std::string(what) + ": expected " + std::to_string(cols) + " columns");
    std::copy(v.begin(), v.end(), m.row(r).begin());
  }
  return m;
}

template <class T>
T field(const Json& j, const char* key) {
  if (!j.contains(key)) throw DataError(std::string("missing JSON field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw DataError(std::string("bad JSON field '") + key + "': " + e.what());
  }
}

inline std::vector<double> sized(std::vector<double> v, std::size_t n, const char* what) {
  if (v.size() != n) throw DataError(std::string(what) + ": expected length " + std::to_string(n));
  return v;
}

}  // namespace detail

// --- annotations and registration --------------------------------------------

inline Json to_json(const SynthAnnotation& a) {
  Json lesions = Json::array(), layers = Json::array();
  for (const auto& c : a.lesion_centers) lesions.push_back({c.x, c.y});
  for (const auto& [top, bottom] : a.layer_rows) layers.push_back({top, bottom});
  return {{"seed", a.rng_seed}, {"lesions", lesions}, {"radii", a.lesion_radii}, {"layers", layers}};
}

inline SynthAnnotation annotation_from_json(const Json& j) {
  SynthAnnotation a;
  a.rng_seed = detail::field<std::uint64_t>(j, "seed");
  for (const auto& c : detail::field<std::vector<std::array<int, 2>>>(j, "lesions")) a.lesion_centers.push_back({c[0], c[1]});
  for (const auto& l : detail::field<std::vector<std::array<int, 2>>>(j, "layers")) a.layer_rows.emplace_back(l[0], l[1]);
  if (j.contains("radii")) a.lesion_radii = detail::field<std::vector<double>>(j, "radii");
  if (!a.lesion_radii.empty() && a.lesion_radii.size() != a.lesion_centers.size())
    throw DataError("annotation radii and lesion centers differ in length");
  return a;
}

inline Json to_json(const RigidParams& p, double score) {
  return {{"angle", p.angle}, {"scale", p.scale}, {"tx", p.tx}, {"ty", p.ty}, {"score", score}};
}

inline RigidParams rigid_params_from_json(const Json& j) {
  return {detail::field<double>(j, "angle"), detail::field<double>(j, "scale"), detail::field<double>(j, "tx"),
          detail::field<double>(j, "ty")};
}

// --- vocabulary --------------------------------------------------------------

inline Json to_json(const Vocabulary& v) {
  return {{"k", v.k()}, {"seed", v.seed}, {"wcss", v.wcss}, {"centers", detail::matrix_json(v.centers)}};
}

inline Vocabulary vocabulary_from_json(const Json& j) {
  Vocabulary v;
  const auto k = detail::field<std::size_t>(j, "k");
  if (k < 2) throw DataError("vocabulary must have at least 2 centers");
  v.seed = detail::field<std::uint64_t>(j, "seed");
  v.wcss = detail::field<double>(j, "wcss");
  v.centers = detail::matrix_from_json(detail::field<Json>(j, "centers"), k, kDescriptorSize, "vocabulary centers");
  return v;
}

// --- models --------------------------------------------------------------------

namespace detail {

inline void put_scaling(Json& j, const InputScaling& s) {
  if (!s.identity()) j["input_scaling"] = {{"shift", s.shift}, {"scale", s.scale}};
}

inline InputScaling get_scaling(const Json& j, std::size_t dim) {
  if (!j.contains("input_scaling")) return {};
  const Json& s = j.at("input_scaling");
  InputScaling r{sized(field<std::vector<double>>(s, "shift"), dim, "input_scaling shift"),
                 sized(field<std::vector<double>>(s, "scale"), dim, "input_scaling scale")};
  for (double v : r.scale)
    if (!(v > 0.0) || !std::isfinite(v)) throw DataError("input_scaling scale must be positive and finite");
  return r;
}

}  // namespace detail

inline Json to_json(const MlpModel& m) {
  Json j{{"model_type", "mlp"},     {"input_dim", m.input_dim}, {"hidden", m.hidden},
         {"activation", "sigmoid"}, {"w1", detail::matrix_json(m.w1)}, {"b1", m.b1},
         {"w2", m.w2},              {"b2", m.b2}};
  detail::put_scaling(j, m.scaling);
  return j;
}

inline Json to_json(const KnnModel& m) {
  std::vector<std::string> labels;
  for (Label l : m.y) labels.emplace_back(to_string(l));
  return {{"model_type", "knn"}, {"input_dim", m.X.cols()}, {"n_train", m.X.rows()}, {"k", m.k},
          {"train_x", detail::matrix_json(m.X)}, {"train_y", labels}};
}

inline Json to_json(const GnbModel& m) {
  return {{"model_type", "gnb"}, {"input_dim", m.mean[0].size()},
          {"classes", {"NORMAL", "MA"}}, {"mean", {m.mean[0], m.mean[1]}},
          {"var", {m.var[0], m.var[1]}}, {"log_prior", {m.log_prior[0], m.log_prior[1]}}};
}

inline Json to_json(const LinSvmModel& m) {
  Json j{{"model_type", "linsvm"}, {"input_dim", m.w.size()}, {"w", m.w}, {"b", m.b}};
  detail::put_scaling(j, m.scaling);
  return j;
}

inline Json to_json(const PcaModel& p) {
  return {{"model_type", "pca"},  {"input_dim", p.input_dim()}, {"n_components", p.n_components()},
          {"mean", p.mean},       {"components", detail::matrix_json(p.components)},
          {"eigenvalues", p.eigenvalues}, {"total_variance", p.total_variance}};
}

inline MlpModel mlp_from_json(const Json& j) {
  const auto in = detail::field<std::size_t>(j, "input_dim"), hid = detail::field<std::size_t>(j, "hidden");
  if (in < 1 || hid < 1) throw DataError("MLP dimensions must be at least 1");
  MlpModel m(in, hid);
  m.w1 = detail::matrix_from_json(detail::field<Json>(j, "w1"), hid, in, "mlp w1");
  m.b1 = detail::sized(detail::field<std::vector<double>>(j, "b1"), hid, "mlp b1");
  m.w2 = detail::sized(detail::field<std::vector<double>>(j, "w2"), hid, "mlp w2");
  m.b2 = detail::field<double>(j, "b2");
  m.scaling = detail::get_scaling(j, in);
  if (!m.finite()) throw DataError("MLP model contains non-finite parameters");
  return m;
}

inline KnnModel knn_from_json(const Json& j) {
  const auto dim = detail::field<std::size_t>(j, "input_dim"), n = detail::field<std::size_t>(j, "n_train");
  Matrix X = detail::matrix_from_json(detail::field<Json>(j, "train_x"), n, dim, "knn train_x");
  std::vector<Label> y;
  for (const auto& s : detail::field<std::vector<std::string>>(j, "train_y")) y.push_back(parse_label(s));
  return knn_fit(std::move(X), std::move(y), detail::field<std::size_t>(j, "k"));
}

inline GnbModel gnb_from_json(const Json& j) {
  const auto dim = detail::field<std::size_t>(j, "input_dim");
  GnbModel m;
  const auto mean = detail::field<std::vector<std::vector<double>>>(j, "mean");
  const auto var = detail::field<std::vector<std::vector<double>>>(j, "var");
  const auto lp = detail::field<std::vector<double>>(j, "log_prior");
  if (mean.size() != 2 || var.size() != 2 || lp.size() != 2) throw DataError("naive Bayes model must have 2 classes");
  for (int c = 0; c < 2; ++c) {
    m.mean[c] = detail::sized(mean[c], dim, "gnb mean");
    m.var[c] = detail::sized(var[c], dim, "gnb var");
    m.log_prior[c] = lp[c];
  }
  return m;
}

inline LinSvmModel linsvm_from_json(const Json& j) {
  const auto dim = detail::field<std::size_t>(j, "input_dim");
  return {detail::sized(detail::field<std::vector<double>>(j, "w"), dim, "linsvm w"), detail::field<double>(j, "b"),
          detail::get_scaling(j, dim)};
}

inline PcaModel pca_from_json(const Json& j) {
  PcaModel p;
  const auto dim = detail::field<std::size_t>(j, "input_dim"), c = detail::field<std::size_t>(j, "n_components");
  p.mean = detail::sized(detail::field<std::vector<double>>(j, "mean"), dim, "pca mean");
  p.components = detail::matrix_from_json(detail::field<Json>(j, "components"), c, dim, "pca components");
  p.eigenvalues = detail::sized(detail::field<std::vector<double>>(j, "eigenvalues"), c, "pca eigenvalues");
  p.total_variance = detail::field<double>(j, "total_variance");
  return p;
}

/// Any classifier that can be loaded from a model file.
using AnyClassifier = std::variant<MlpModel, KnnModel, GnbModel, LinSvmModel>;

inline AnyClassifier classifier_from_json(const Json& j) {
  const auto type = detail::field<std::string>(j, "model_type");
  if (type == "mlp") return mlp_from_json(j);
  if (type == "knn") return knn_from_json(j);
  if (type == "gnb") return gnb_from_json(j);
  if (type == "linsvm") return linsvm_from_json(j);
  throw DataError("unsupported model_type '" + type + "'");
}

inline std::size_t input_dim(const AnyClassifier& c) {
  return std::visit(
      [](const auto& m) -> std::size_t {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, MlpModel>) return m.input_dim;
        else if constexpr (std::is_same_v<T, KnnModel>) return m.X.cols();
        else if constexpr (std::is_same_v<T, GnbModel>) return m.mean[0].size();
        else return m.w.size();
      },
      c);
}

inline Label predict(const AnyClassifier& c, std::span<const double> x) {
  return std::visit([&](const auto& m) { return m.predict(x); }, c);
}

// --- split -----------------------------------------------------------------------

inline Json to_json(const Split& s, std::uint64_t seed) {
  return {{"seed", seed}, {"train", s.train}, {"val", s.val}, {"test", s.test}};
}

inline Split split_from_json(const Json& j) {
  return {detail::field<std::vector<std::size_t>>(j, "train"), detail::field<std::vector<std::size_t>>(j, "val"),
          detail::field<std::vector<std::size_t>>(j, "test")};
}

// --- CSV ---------------------------------------------------------------------------

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_double(const std::string& s) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw DataError("not a number: '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    throw DataError("not a number: '" + s + "'");
  }
}

struct TermVectorRow {
  std::string source_id;
  Label label = Label::Normal;
  std::vector<double> bins;
};

inline std::string term_vector_csv(std::span<const TermVectorRow> rows) {
  std::ostringstream out;
  const std::size_t k = rows.empty() ? 0 : rows.front().bins.size();
  out << "source_id,label";
  for (std::size_t i = 0; i < k; ++i) out << ",bin_" << i;
  out << '\n';
  char buf[40];
  for (const auto& r : rows) {
    out << r.source_id << ',' << to_string(r.label);
    for (double b : r.bins) {
      std::snprintf(buf, sizeof buf, "%.17g", b);
      out << ',' << buf;
    }
    out << '\n';
  }
  return out.str();
}

inline std::vector<TermVectorRow> read_term_vector_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open term-vector CSV " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty term-vector CSV " + path.string());
  const auto header = split_csv_line(line);
  if (header.size() < 3 || header[0] != "source_id" || header[1] != "label") {
    throw DataError("term-vector CSV header must start with source_id,label");
  }
  std::vector<TermVectorRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) throw DataError("term-vector CSV row has the wrong number of columns");
    TermVectorRow r{cells[0], parse_label(cells[1]), {}};
    for (std::size_t i = 2; i < cells.size(); ++i) r.bins.push_back(parse_double(cells[i]));
    rows.push_back(std::move(r));
  }
  return rows;
}

/// One row per descriptor: source_id, kp_index, d0..d63.
inline void append_descriptor_csv(std::ostream& out, const std::string& source_id,
                                  std::span<const Descriptor64> descriptors) {
  char buf[40];
  for (std::size_t i = 0; i < descriptors.size(); ++i) {
    out << source_id << ',' << i;
    for (double v : descriptors[i]) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << ',' << buf;
    }
    out << '\n';
  }
}

inline std::string descriptor_csv_header() {
  std::string s = "source_id,kp_index";
  for (std::size_t i = 0; i < kDescriptorSize; ++i) s += ",d" + std::to_string(i);
  return s + "\n";
}

}  // namespace bofscan
