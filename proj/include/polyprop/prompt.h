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

#ifndef POLYPROP_PROMPT_H_
#define POLYPROP_PROMPT_H_

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "polyprop/extraction.h"

namespace polyprop {

enum class Variant { kSampleSynthesis, kSampleOnly };

std::string_view variant_name(Variant v);
std::optional<Variant> parse_variant(std::string_view s);

inline constexpr std::string_view kMaskToken = "[MASKED]";

// "[Sample]\n<sample>\n[Synthesis]\n<synthesis>" for kSampleSynthesis;
// "[Sample]\n<sample>" for kSampleOnly. Throws EmptySample.
std::string build_prompt(std::string_view sample_desc,
                         std::string_view synthesis_desc, Variant variant);

struct TargetValue {
  int head_id;
  double canonical_value;
};

// Replaces every numeric literal within 0.5% (relative, magnitudes compared)
// of an observed target, expressed in any registered unit of the target's
// dimension, with "[MASKED]". A literal such as "5 × 10^4" is replaced as a
// whole when either its value or any digit run inside it matches.
std::string mask_labels(std::string_view text,
                        std::span<const TargetValue> targets);

inline constexpr double kMaskTolerance = 0.005;

struct PromptInstance {
  std::string sample_id;
  Variant variant = Variant::kSampleSynthesis;
  bool test_split = false;
  std::string text;
  std::array<double, kNumHeads> labels;  // NaN where missing
  std::array<bool, kNumHeads> label_mask{};

  std::vector<TargetValue> targets() const;
  int num_labels() const;
};

struct DatasetOptions {
  Variant variant = Variant::kSampleSynthesis;
  double test_fraction = 0.2;
  std::uint64_t split_seed = 0;
};

// Deterministic held-out assignment, a function of sample id and seed only,
// so both ablation variants share one split.
bool is_test_sample(std::string_view sample_id, std::uint64_t split_seed,
                    double test_fraction);

// One instance per sample with at least one canonical label. The first
// observation of a head within a sample wins.
std::vector<PromptInstance> build_dataset(const Extraction& ex,
                                          const DatasetOptions& options);

struct LeakageHit {
  std::string sample_id;
  int head_id;
  std::string unit;
  std::string literal;
};

// Independent check over the finished prompts: every decimal digit run (and
// scientific-notation literal) is compared against every observed target in
// every registered unit of its dimension.
std::vector<LeakageHit> scan_leakage(std::span<const PromptInstance> data);

std::string dataset_to_tsv(std::span<const PromptInstance> data,
                           const Registry& registry = Registry::builtin());
std::vector<PromptInstance> dataset_from_tsv(
    std::string_view text, const Registry& registry = Registry::builtin());

}  // namespace polyprop

#endif  // POLYPROP_PROMPT_H_
