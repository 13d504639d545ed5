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

#include "polyprop/experiments.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"
#include "polyprop/extraction.h"
#include "polyprop/text.h"

namespace polyprop {
namespace {

using json = nlohmann::json;

std::string opt(const std::optional<double>& v) {
  return v ? format_double(*v) : "NA";
}

json opt_json(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

std::string with_digest(const std::string& content, std::uint64_t config) {
  return content + "# config=" + hex64(config) + " digest=" + hex64(fnv1a64(content)) + "\n";
}

}  // namespace

void leakage_guard(std::span<const PromptInstance> data) {
  const auto hits = scan_leakage(data);
  if (hits.empty()) return;
  const auto& h = hits.front();
  throw LeakageDetected(std::to_string(hits.size()) + " leaked target value(s); first: sample " +
                        h.sample_id + ", head " + Registry::builtin().spec(h.head_id).name +
                        ", literal '" + h.literal + "' (" + h.unit + ")");
}

std::uint64_t split_hash(std::span<const PromptInstance> data) {
  std::vector<std::string> ids;
  for (const auto& inst : data) {
    if (inst.test_split) ids.push_back(inst.sample_id);
  }
  std::sort(ids.begin(), ids.end());
  std::uint64_t h = fnv1a64("split");
  for (const auto& id : ids) h = fnv1a64(id + "\n", h);
  return h;
}

std::vector<PromptInstance> synthetic_dataset(const SynthConfig& synth,
                                              Variant variant,
                                              std::uint64_t split_seed,
                                              double test_fraction) {
  const Corpus corpus = gen_corpus(synth);
  const Extraction ex = extract_document(corpus.document, Registry::builtin());
  DatasetOptions opts;
  opts.variant = variant;
  opts.split_seed = split_seed;
  opts.test_fraction = test_fraction;
  auto data = build_dataset(ex, opts);
  leakage_guard(data);
  return data;
}

AblationOptions AblationOptions::from_config(const KeyValueConfig& kv) {
  AblationOptions o;
  o.train = TrainConfig::from_config(kv);
  o.synth = SynthConfig::from_config(kv);
  o.seeds.clear();
  for (const std::string& s : kv.get_list("ablation.seeds")) {
    try {
      o.seeds.push_back(std::stoull(s));
    } catch (const std::exception&) {
      throw ConfigError("ablation.seeds: bad seed '" + s + "'");
    }
  }
  if (o.seeds.empty()) o.seeds.push_back(o.train.seed);
  o.test_fraction = kv.get_double("ablation.test_fraction", o.test_fraction);
  o.control = kv.get_bool("ablation.control", o.control);
  kv.reject_unread("ablation.");
  if (!(o.test_fraction > 0.0 && o.test_fraction < 1.0)) {
    throw ConfigError("ablation.test_fraction must lie in (0, 1)");
  }
  return o;
}

std::string AblationOptions::serialize() const {
  std::string seeds_text;
  for (auto s : seeds) seeds_text += (seeds_text.empty() ? "" : ",") + std::to_string(s);
  KeyValueConfig kv;
  kv.set("ablation.seeds", seeds_text);
  kv.set("ablation.test_fraction", format_double(test_fraction));
  kv.set("ablation.control", control ? "true" : "false");
  return kv.serialize() + synth.serialize() + train.serialize();
}

AblationReport run_ablation(const AblationOptions& options, const Progress& progress) {
  AblationReport report;
  report.config_digest = fnv1a64(options.serialize());
  const auto heads = options.synth.head_list();
  std::vector<double> sum_with(kNumHeads, 0.0), sum_without(kNumHeads, 0.0);
  std::vector<int> sum_n(kNumHeads, 0);
  for (const std::uint64_t seed : options.seeds) {
    SynthConfig synth = options.synth;
    synth.seed = seed;
    TrainConfig train_cfg = options.train;
    train_cfg.seed = seed;
    train_cfg.variant.reset();

    const Corpus corpus = gen_corpus(synth);
    const Extraction ex = extract_document(corpus.document, Registry::builtin());
    DatasetOptions opts;
    opts.split_seed = seed;
    opts.test_fraction = options.test_fraction;
    opts.variant = Variant::kSampleSynthesis;
    const auto with = build_dataset(ex, opts);
    opts.variant = options.control ? Variant::kSampleSynthesis : Variant::kSampleOnly;
    const auto without = build_dataset(ex, opts);
    leakage_guard(with);
    leakage_guard(without);

    AblationRun run;
    run.seed = seed;
    run.split_hash = split_hash(with);
    if (split_hash(without) != run.split_hash) {
      throw ContractViolation("ablation variants disagree on the held-out split");
    }
    const TrainResult a = train(train_cfg, with);
    if (progress) progress("seed " + std::to_string(seed) + ": sample_synthesis trained");
    const TrainResult b = train(train_cfg, without);
    if (progress) progress("seed " + std::to_string(seed) + ": second arm trained");
    const EvalReport ea = evaluate(a.checkpoint, with);
    const EvalReport eb = evaluate(b.checkpoint, without);

    double total = 0.0;
    for (int h : heads) {
      const auto find = [h](const EvalReport& r) -> const HeadEval* {
        for (const auto& e : r.heads) {
          if (e.head_id == h) return &e;
        }
        return nullptr;
      };
      const HeadEval* ha = find(ea);
      const HeadEval* hb = find(eb);
      if (!ha || !hb || !ha->primary || !hb->primary) {
        throw DegenerateHead("ablation head " + Registry::builtin().spec(h).name +
                             " has no primary metric on the held-out split");
      }
      AblationHead row;
      row.head_id = h;
      row.n = ha->n;
      row.r2_with = *ha->primary;
      row.r2_without = *hb->primary;
      row.delta = row.r2_without - row.r2_with;
      total += row.delta;
      sum_with[h] += row.r2_with;
      sum_without[h] += row.r2_without;
      sum_n[h] += row.n;
      run.heads.push_back(row);
    }
    run.mean_delta = total / static_cast<double>(heads.size());
    report.runs.push_back(std::move(run));
  }
  const double runs = static_cast<double>(options.seeds.size());
  double total = 0.0;
  for (int h : heads) {
    AblationHead row;
    row.head_id = h;
    row.n = sum_n[h];
    row.r2_with = sum_with[h] / runs;
    row.r2_without = sum_without[h] / runs;
    row.delta = row.r2_without - row.r2_with;
    total += row.delta;
    report.heads.push_back(row);
  }
  report.mean_delta = total / static_cast<double>(heads.size());
  return report;
}

std::string ablation_to_tsv(const AblationReport& report) {
  std::ostringstream body;
  body << "seed\thead\tn\tr2_sample_synthesis\tr2_sample_only\tdelta\n";
  const Registry& reg = Registry::builtin();
  for (const auto& run : report.runs) {
    for (const auto& h : run.heads) {
      body << run.seed << '\t' << reg.spec(h.head_id).name << '\t' << h.n << '\t'
           << format_double(h.r2_with) << '\t' << format_double(h.r2_without) << '\t'
           << format_double(h.delta) << '\n';
    }
  }
  for (const auto& h : report.heads) {
    body << "mean\t" << reg.spec(h.head_id).name << '\t' << h.n << '\t'
         << format_double(h.r2_with) << '\t' << format_double(h.r2_without) << '\t'
         << format_double(h.delta) << '\n';
  }
  body << "# mean_delta=" << format_double(report.mean_delta) << '\n';
  for (const auto& run : report.runs) {
    body << "# seed=" << run.seed << " mean_delta=" << format_double(run.mean_delta)
         << " split=" << hex64(run.split_hash) << '\n';
  }
  return with_digest(body.str(), report.config_digest);
}

std::string ablation_to_json(const AblationReport& report) {
  const Registry& reg = Registry::builtin();
  auto rows = [&](const std::vector<AblationHead>& heads) {
    json a = json::array();
    for (const auto& h : heads) {
      a.push_back({{"head", reg.spec(h.head_id).name},
                   {"n", h.n},
                   {"r2_sample_synthesis", h.r2_with},
                   {"r2_sample_only", h.r2_without},
                   {"delta", h.delta}});
    }
    return a;
  };
  json j;
  j["format"] = "polyprop.ablation";
  j["config_digest"] = hex64(report.config_digest);
  j["heads"] = rows(report.heads);
  j["mean_delta"] = report.mean_delta;
  json runs = json::array();
  for (const auto& run : report.runs) {
    runs.push_back({{"seed", run.seed},
                    {"split_hash", hex64(run.split_hash)},
                    {"mean_delta", run.mean_delta},
                    {"heads", rows(run.heads)}});
  }
  j["runs"] = runs;
  return j.dump(2) + "\n";
}

UncertaintyReport run_uncertainty_report(
    const Checkpoint& ckpt, std::span<const PromptInstance> data,
    const std::optional<std::array<double, kNumHeads>>& eta) {
  const EvalReport eval = evaluate(ckpt, data);
  UncertaintyReport out;
  out.config_digest = ckpt.config_digest;
  for (const auto& h : eval.heads) {
    if (!h.sigma || !h.rmse_normalized) continue;
    UncertaintyRow row;
    row.head_id = h.head_id;
    row.n = h.n;
    row.sigma = *h.sigma;
    row.rmse = *h.rmse_normalized;
    if (eta) row.eta = (*eta)[h.head_id];
    out.rows.push_back(row);
  }
  if (out.rows.size() < 5) {
    throw ContractViolation("uncertainty report needs at least five evaluated heads");
  }
  double ms = 0.0, mr = 0.0;
  for (const auto& r : out.rows) {
    ms += r.sigma;
    mr += r.rmse;
  }
  ms /= static_cast<double>(out.rows.size());
  mr /= static_cast<double>(out.rows.size());
  std::vector<double> sig, err, noise;
  for (auto& r : out.rows) {
    r.sigma_rel = r.sigma / ms;
    r.rmse_rel = mr > 0.0 ? r.rmse / mr : 0.0;
    sig.push_back(r.sigma);
    err.push_back(r.rmse);
    if (r.eta) noise.push_back(*r.eta);
  }
  out.correlations = rank_correlations(sig, err);
  out.calibration = calibration_ratio(err, sig);
  if (noise.size() == sig.size()) out.spearman_eta = spearman(sig, noise);
  return out;
}

std::string uncertainty_to_tsv(const UncertaintyReport& report) {
  std::ostringstream body;
  body << "head\tn\tsigma\trmse_normalized\tsigma_rel\trmse_rel\teta\n";
  const Registry& reg = Registry::builtin();
  for (const auto& r : report.rows) {
    body << reg.spec(r.head_id).name << '\t' << r.n << '\t' << format_double(r.sigma) << '\t'
         << format_double(r.rmse) << '\t' << format_double(r.sigma_rel) << '\t'
         << format_double(r.rmse_rel) << '\t' << opt(r.eta) << '\n';
  }
  body << "# pearson=" << opt(report.correlations.pearson)
       << " spearman=" << opt(report.correlations.spearman)
       << " spearman_eta=" << opt(report.spearman_eta)
       << " calibration_ratio=" << opt(report.calibration) << '\n';
  return with_digest(body.str(), report.config_digest);
}

std::string uncertainty_to_json(const UncertaintyReport& report) {
  json j;
  j["format"] = "polyprop.uncertainty";
  j["config_digest"] = hex64(report.config_digest);
  json rows = json::array();
  const Registry& reg = Registry::builtin();
  for (const auto& r : report.rows) {
    rows.push_back({{"head", reg.spec(r.head_id).name},
                    {"n", r.n},
                    {"sigma", r.sigma},
                    {"rmse_normalized", r.rmse},
                    {"sigma_rel", r.sigma_rel},
                    {"rmse_rel", r.rmse_rel},
                    {"eta", opt_json(r.eta)}});
  }
  j["rows"] = rows;
  j["pearson"] = opt_json(report.correlations.pearson);
  j["spearman"] = opt_json(report.correlations.spearman);
  j["spearman_eta"] = opt_json(report.spearman_eta);
  j["calibration_ratio"] = opt_json(report.calibration);
  return j.dump(2) + "\n";
}

}  // namespace polyprop
