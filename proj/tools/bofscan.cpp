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


// bofscan: synthetic OCT patch dataset generation, bag-of-features training,
// evaluation, the baseline comparison bench, rigid registration and
// model-file prediction.
//
// Exit status: 0 success, 1 usage error, 2 data error, 3 numeric failure.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "bofscan/bofscan.hpp"

namespace {

using namespace bofscan;

struct CommonOptions {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool out_required = true) {
  cmd->add_option("--config", o.config, "Pipeline config JSON (defaults apply to absent keys)")->check(CLI::ExistingFile);
  auto* out = cmd->add_option("--out", o.out, "Output directory");
  if (out_required) out->required();
  cmd->add_option("--seed", o.seed, "Master seed (overrides the config)");
}

PipelineConfig load_config(const CommonOptions& o) {
  PipelineConfig cfg;
  if (!o.config.empty()) {
    try {
      cfg = config_from_json(read_json(o.config));
    } catch (const DataError& e) {
      throw UsageError(e.what());
    }
  }
  if (o.seed) cfg.master_seed = *o.seed;
  cfg.validate();
  return cfg;
}

void print_metrics(const std::vector<MethodResult>& rows) { std::cout << format_table(rows); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bofscan - bag-of-features microaneurysm patch classification"};
  app.require_subcommand(1);

  CommonOptions synth_o, train_o, eval_o, bench_o, reg_o, pred_o;
  std::string manifest, artifacts, fixed, moving, model, input;
  std::vector<std::string> methods;
  bool dump_descriptors = false;

  auto* synth = app.add_subcommand("synth", "Generate a seeded synthetic B-scan patch dataset");
  add_common(synth, synth_o);

  auto* train = app.add_subcommand("train", "Split, build the visual vocabulary and train the MLP");
  add_common(train, train_o);
  train->add_option("--manifest", manifest, "Manifest CSV from `synth`")->required()->check(CLI::ExistingFile);
  train->add_flag("--dump-descriptors", dump_descriptors, "Also write descriptors.csv for the training patches");

  auto* eval = app.add_subcommand("eval", "Evaluate trained artifacts on the test split");
  add_common(eval, eval_o);
  eval->add_option("--manifest", manifest, "Manifest CSV")->required()->check(CLI::ExistingFile);
  eval->add_option("--artifacts", artifacts, "Directory holding vocab.json, model.json, split.json")
      ->required()
      ->check(CLI::ExistingDirectory);

  auto* bench = app.add_subcommand("bench", "Run the BOF/PCA x classifier comparison and the neuron sweep");
  add_common(bench, bench_o);
  bench->add_option("--manifest", manifest, "Existing manifest (default: synthesize one under --out)")
      ->check(CLI::ExistingFile);
  bench->add_option("--methods", methods, "Subset of methods, e.g. BOF+MLP PCA+KNN");

  auto* reg = app.add_subcommand("register", "Rigid NCC registration of two PGM images");
  add_common(reg, reg_o);
  reg->add_option("--fixed", fixed, "Fixed image (PGM)")->required()->check(CLI::ExistingFile);
  reg->add_option("--moving", moving, "Moving image (PGM)")->required()->check(CLI::ExistingFile);

  auto* pred = app.add_subcommand("predict", "Apply any saved classifier to a term-vector CSV");
  add_common(pred, pred_o);
  pred->add_option("--model", model, "Model JSON")->required()->check(CLI::ExistingFile);
  pred->add_option("--input", input, "Term-vector CSV (source_id,label,bins...)")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*synth) {
      const auto s = cmd_synth(load_config(synth_o), synth_o.out);
      std::cout << "wrote " << s.manifest.string() << ": " << s.n_ma << " MA, " << s.n_normal << " NORMAL patches\n";
    } else if (*train) {
      const auto a = cmd_train(load_config(train_o), manifest, train_o.out, dump_descriptors);
      std::cout << "vocabulary: k=" << a.vocab.k() << " wcss=" << a.vocab.wcss << " (" << a.vocab.iterations
                << " Lloyd iterations)\nmlp: hidden=" << a.model.hidden << " best epoch " << a.training.best_epoch
                << "\nsplit: " << a.split.train.size() << "/" << a.split.val.size() << "/" << a.split.test.size()
                << "\n";
    } else if (*eval) {
      const auto r = cmd_eval(load_config(eval_o), manifest, artifacts, eval_o.out);
      print_metrics({r.result});
    } else if (*bench) {
      PipelineConfig cfg = load_config(bench_o);
      if (!methods.empty()) cfg.methods = methods;
      cfg.validate();
      const auto r = cmd_bench(cfg, bench_o.out, manifest.empty() ? std::nullopt : std::optional<fs::path>(manifest));
      print_metrics(r.rows);
      std::cout << "neuron sweep (validation accuracy):";
      for (const auto& p : r.sweep.points) std::cout << ' ' << p.hidden << ':' << format_fixed(p.accuracy, 4);
      std::cout << "  best=" << r.sweep.best_hidden << "\n";
    } else if (*reg) {
      load_config(reg_o);
      const auto r = cmd_register(fixed, moving, reg_o.out);
      std::cout << to_json(r.params, r.score).dump() << "\n";
    } else if (*pred) {
      load_config(pred_o);
      const auto r = cmd_predict(model, input, pred_o.out);
      if (r.cm) print_metrics({{"model", *r.cm, metrics(*r.cm)}});
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
