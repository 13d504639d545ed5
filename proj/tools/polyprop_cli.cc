// Copyright 2026 The polyprop Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end: extraction, dataset building, training,
// evaluation, the prompt ablation, the uncertainty report and corpus
// generation.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "polyprop/audit.h"
#include "polyprop/corpus.h"
#include "polyprop/experiments.h"
#include "polyprop/extraction.h"
#include "polyprop/metrics.h"
#include "polyprop/prompt.h"
#include "polyprop/text.h"
#include "polyprop/trainer.h"

namespace pp = polyprop;

namespace {

struct Options {
  std::optional<std::uint64_t> seed;
  std::vector<std::string> inputs;
  std::string output;
  std::string json_output;
  std::string config;
  std::string variant = "sample_synthesis";
  std::string split = "test";
  std::string truth_output;
  std::string trace_output;
  double test_fraction = 0.2;
};

pp::KeyValueConfig load_config(const std::string& path) {
  return path.empty() ? pp::KeyValueConfig() : pp::KeyValueConfig::load(path);
}

pp::SplitSelector parse_split(const std::string& s) {
  if (s == "test") return pp::SplitSelector::kTest;
  if (s == "train") return pp::SplitSelector::kTrain;
  if (s == "all") return pp::SplitSelector::kAll;
  throw pp::ConfigError("--split must be test, train or all");
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
  } else {
    pp::write_file(path, content);
  }
}

pp::Extraction load_extraction(const std::string& path) {
  const std::string text = pp::read_file(path);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    return pp::extraction_from_json(text);
  }
  return pp::extract_document(text);
}

int cmd_extract(const Options& o) {
  std::vector<std::string> docs;
  for (const auto& p : o.inputs) docs.push_back(pp::read_file(p));
  const pp::Extraction ex = pp::extract_documents(docs);
  write_output(o.output, pp::extraction_to_json(ex));
  std::cerr << "samples=" << ex.samples.size() << " observations=" << ex.observations.size()
            << " unmapped=" << ex.unmapped << " incompatible=" << ex.incompatible << "\n";
  return 0;
}

int cmd_build_dataset(const Options& o) {
  const pp::Extraction ex = load_extraction(o.inputs.at(0));
  pp::DatasetOptions opts;
  const auto v = pp::parse_variant(o.variant);
  if (!v) throw pp::ConfigError("--variant must be sample_synthesis or sample_only");
  opts.variant = *v;
  opts.split_seed = o.seed.value_or(0);
  opts.test_fraction = o.test_fraction;
  const auto data = pp::build_dataset(ex, opts);
  pp::leakage_guard(data);
  write_output(o.output, pp::dataset_to_tsv(data));
  std::cerr << "instances=" << data.size() << " leakage_hits=0\n";
  return 0;
}

int cmd_train(const Options& o) {
  const auto kv = load_config(o.config);
  pp::TrainConfig cfg = pp::TrainConfig::from_config(kv);
  if (o.seed) cfg.seed = *o.seed;
  const auto data = pp::dataset_from_tsv(pp::read_file(o.inputs.at(0)));
  pp::leakage_guard(data);
  const pp::TrainResult result = pp::train(cfg, data);
  if (o.output.empty()) throw pp::ConfigError("train needs -o <checkpoint>");
  pp::save_checkpoint(result.checkpoint, o.output);
  std::string trace = "epoch\tloss\n";
  for (std::size_t e = 0; e < result.epoch_loss.size(); ++e) {
    trace += std::to_string(e + 1) + "\t" + pp::format_double(result.epoch_loss[e]) + "\n";
  }
  if (!o.trace_output.empty()) pp::write_file(o.trace_output, trace);
  std::cerr << "epochs=" << result.epoch_loss.size();
  if (!result.epoch_loss.empty()) std::cerr << " final_loss=" << result.epoch_loss.back();
  std::cerr << "\n";
  return 0;
}

int cmd_eval(const Options& o) {
  const pp::Checkpoint ck = pp::load_checkpoint(o.inputs.at(0));
  const auto data = pp::dataset_from_tsv(pp::read_file(o.inputs.at(1)));
  const pp::EvalReport r = pp::evaluate(ck, data, parse_split(o.split));
  write_output(o.output, pp::report_to_tsv(r));
  if (!o.json_output.empty()) pp::write_file(o.json_output, pp::report_to_json(r));
  return 0;
}

int cmd_score(const Options& o) {
  const std::string predictions = pp::read_file(o.inputs.at(0));
  const auto data = pp::dataset_from_tsv(pp::read_file(o.inputs.at(1)));
  const pp::EvalReport r = pp::score_predictions(predictions, data, parse_split(o.split));
  write_output(o.output, pp::report_to_tsv(r));
  if (!o.json_output.empty()) pp::write_file(o.json_output, pp::report_to_json(r));
  std::cerr << "responses=" << r.responses_total << " retained=" << r.responses_retained << "\n";
  return 0;
}

int cmd_ablate(const Options& o) {
  auto kv = load_config(o.config);
  pp::AblationOptions opts = pp::AblationOptions::from_config(kv);
  if (o.seed) opts.seeds = {*o.seed};
  const pp::AblationReport r =
      pp::run_ablation(opts, [](const std::string& msg) { std::cerr << msg << "\n"; });
  write_output(o.output, pp::ablation_to_tsv(r));
  if (!o.json_output.empty()) pp::write_file(o.json_output, pp::ablation_to_json(r));
  std::cerr << "mean_delta=" << r.mean_delta << "\n";
  return 0;
}

int cmd_audit(const Options& o) {
  const pp::Extraction ex = load_extraction(o.inputs.at(0));
  const auto gold = pp::parse_gold(pp::read_file(o.inputs.at(1)));
  const pp::AuditReport r = pp::audit(ex.observations, gold);
  const std::string table = pp::audit_table(r);
  if (!o.output.empty()) pp::write_file(o.output, table);
  std::cout << table;
  return 0;
}

int cmd_uncertainty(const Options& o) {
  const pp::Checkpoint ck = pp::load_checkpoint(o.inputs.at(0));
  const auto data = pp::dataset_from_tsv(pp::read_file(o.inputs.at(1)));
  std::optional<std::array<double, pp::kNumHeads>> eta;
  if (!o.config.empty()) {
    eta = pp::SynthConfig::from_config(load_config(o.config)).noise;
  }
  const pp::UncertaintyReport r = pp::run_uncertainty_report(ck, data, eta);
  write_output(o.output, pp::uncertainty_to_tsv(r));
  if (!o.json_output.empty()) pp::write_file(o.json_output, pp::uncertainty_to_json(r));
  return 0;
}

int cmd_gen_corpus(const Options& o) {
  auto kv = load_config(o.config);
  pp::SynthConfig cfg = pp::SynthConfig::from_config(kv);
  if (o.seed) cfg.seed = *o.seed;
  const pp::Corpus corpus = pp::gen_corpus(cfg);
  write_output(o.output, corpus.document);
  if (!o.truth_output.empty()) pp::write_file(o.truth_output, pp::truth_to_tsv(corpus.truth));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"polyprop: polymer property extraction and multi-task regression"};
  app.require_subcommand(1);
  Options o;

  auto add_seed = [&](CLI::App* c) {
    c->add_option("--seed", o.seed, "Random seed (split, training or corpus seed)");
  };

  auto* extract = app.add_subcommand("extract", "Extract property observations from documents");
  extract->add_option("docs", o.inputs, "Document files")->required()->check(CLI::ExistingFile);
  extract->add_option("-o,--output", o.output, "Observations JSON (default stdout)");
  add_seed(extract);

  auto* build = app.add_subcommand("build-dataset", "Build masked prompts with labels");
  build->add_option("observations", o.inputs, "Observations JSON or document file")
      ->required()->expected(1)->check(CLI::ExistingFile);
  build->add_option("--variant", o.variant, "sample_synthesis or sample_only");
  build->add_option("--test-fraction", o.test_fraction, "Held-out fraction")
      ->check(CLI::Range(0.0, 1.0));
  build->add_option("-o,--output", o.output, "Dataset TSV (default stdout)");
  add_seed(build);

  auto* train = app.add_subcommand("train", "Train the multi-task regressor");
  train->add_option("dataset", o.inputs, "Dataset TSV")->required()->expected(1)
      ->check(CLI::ExistingFile);
  train->add_option("--config", o.config, "Key-value config (train.*)")->check(CLI::ExistingFile);
  train->add_option("-o,--output", o.output, "Checkpoint path")->required();
  train->add_option("--loss-trace", o.trace_output, "Per-epoch loss TSV");
  add_seed(train);

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
  eval->add_option("files", o.inputs, "Checkpoint and dataset")->required()->expected(2)
      ->check(CLI::ExistingFile);
  eval->add_option("--split", o.split, "test, train or all");
  eval->add_option("-o,--output", o.output, "Report TSV (default stdout)");
  eval->add_option("--json", o.json_output, "Structured report");
  add_seed(eval);

  auto* score = app.add_subcommand("score", "Score an external prediction file");
  score->add_option("files", o.inputs, "Predictions TSV and dataset")->required()->expected(2)
      ->check(CLI::ExistingFile);
  score->add_option("--split", o.split, "test, train or all");
  score->add_option("-o,--output", o.output, "Report TSV (default stdout)");
  score->add_option("--json", o.json_output, "Structured report");
  add_seed(score);

  auto* ablate = app.add_subcommand("ablate", "Run the prompt-variant ablation");
  ablate->add_option("--config", o.config, "Key-value config (train.*, synth.*, ablation.*)")
      ->check(CLI::ExistingFile);
  ablate->add_option("-o,--output", o.output, "Report TSV (default stdout)");
  ablate->add_option("--json", o.json_output, "Structured report");
  add_seed(ablate);

  auto* audit = app.add_subcommand("audit", "Score extraction against gold annotations");
  audit->add_option("files", o.inputs, "Extraction (JSON or documents) and gold TSV")
      ->required()->expected(2)->check(CLI::ExistingFile);
  audit->add_option("-o,--output", o.output, "Report path");
  add_seed(audit);

  auto* unc = app.add_subcommand("uncertainty-report", "Learned sigma versus held-out error");
  unc->add_option("files", o.inputs, "Checkpoint and dataset")->required()->expected(2)
      ->check(CLI::ExistingFile);
  unc->add_option("--config", o.config, "Corpus config supplying injected noise (synth.*)")
      ->check(CLI::ExistingFile);
  unc->add_option("-o,--output", o.output, "Report TSV (default stdout)");
  unc->add_option("--json", o.json_output, "Structured report");
  add_seed(unc);

  auto* gen = app.add_subcommand("gen-corpus", "Generate a synthetic literature corpus");
  gen->add_option("--config", o.config, "Key-value config (synth.*)")->check(CLI::ExistingFile);
  gen->add_option("-o,--output", o.output, "Document file (default stdout)");
  gen->add_option("--truth", o.truth_output, "Ground-truth TSV");
  add_seed(gen);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*extract) return cmd_extract(o);
    if (*build) return cmd_build_dataset(o);
    if (*train) return cmd_train(o);
    if (*eval) return cmd_eval(o);
    if (*score) return cmd_score(o);
    if (*ablate) return cmd_ablate(o);
    if (*audit) return cmd_audit(o);
    if (*unc) return cmd_uncertainty(o);
    if (*gen) return cmd_gen_corpus(o);
  } catch (const pp::Error& e) {
    std::cerr << "polyprop: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "polyprop: internal error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
