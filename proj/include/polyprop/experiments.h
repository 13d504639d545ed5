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

#ifndef POLYPROP_EXPERIMENTS_H_
#define POLYPROP_EXPERIMENTS_H_

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "polyprop/corpus.h"
#include "polyprop/metrics.h"
#include "polyprop/trainer.h"

namespace polyprop {

// Throws LeakageDetected when any target value survives in a prompt.
void leakage_guard(std::span<const PromptInstance> data);

// Order-independent hash of the held-out sample ids.
std::uint64_t split_hash(std::span<const PromptInstance> data);

// gen_corpus -> extract -> build_dataset for one variant, leakage-checked.
std::vector<PromptInstance> synthetic_dataset(const SynthConfig& synth,
                                              Variant variant,
                                              std::uint64_t split_seed,
                                              double test_fraction = 0.2);

struct AblationHead {
  int head_id = 0;
  int n = 0;  // held-out labels
  double r2_with = 0.0;
  double r2_without = 0.0;
  double delta = 0.0;  // r2_without - r2_with, negative when synthesis helps
};

struct AblationRun {
  std::uint64_t seed = 0;
  std::vector<AblationHead> heads;
  double mean_delta = 0.0;
  std::uint64_t split_hash = 0;  // identical for both variants by assertion
};

struct AblationReport {
  std::vector<AblationRun> runs;
  std::vector<AblationHead> heads;  // averaged over runs
  double mean_delta = 0.0;
  std::uint64_t config_digest = 0;
};

struct AblationOptions {
  TrainConfig train;
  SynthConfig synth;
  std::vector<std::uint64_t> seeds{0};
  double test_fraction = 0.2;
  // Control arm: both models see the full prompt, so every delta is 0.
  bool control = false;

  // Reads `train.*`, `synth.*` and `ablation.*` keys.
  static AblationOptions from_config(const KeyValueConfig& cfg);
  std::string serialize() const;
};

// Optional progress sink, called once per finished training.
using Progress = std::function<void(const std::string&)>;

// For every seed: one corpus, one split, two trainings that differ only in
// prompt variant, both scored on the same held-out samples.
AblationReport run_ablation(const AblationOptions& options,
                            const Progress& progress = nullptr);

std::string ablation_to_tsv(const AblationReport& report);
std::string ablation_to_json(const AblationReport& report);

struct UncertaintyRow {
  int head_id = 0;
  int n = 0;
  double sigma = 0.0;
  double rmse = 0.0;  // normalized space
  double sigma_rel = 0.0;  // sigma / mean sigma
  double rmse_rel = 0.0;   // rmse / mean rmse
  std::optional<double> eta;  // injected noise, when known
};

struct UncertaintyReport {
  std::vector<UncertaintyRow> rows;
  Correlations correlations;  // sigma vs held-out rmse
  std::optional<double> spearman_eta;  // sigma vs injected noise
  std::optional<double> calibration;
  std::uint64_t config_digest = 0;
};

// Needs at least five evaluated heads.
UncertaintyReport run_uncertainty_report(
    const Checkpoint& ckpt, std::span<const PromptInstance> data,
    const std::optional<std::array<double, kNumHeads>>& eta = std::nullopt);

std::string uncertainty_to_tsv(const UncertaintyReport& report);
std::string uncertainty_to_json(const UncertaintyReport& report);

}  // namespace polyprop

#endif  // POLYPROP_EXPERIMENTS_H_
