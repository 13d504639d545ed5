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

#ifndef POLYPROP_METRICS_H_
#define POLYPROP_METRICS_H_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "polyprop/prompt.h"
#include "polyprop/trainer.h"

namespace polyprop {

enum class Space { kLinear, kLog10 };

// 1 - SSE/SST in the chosen space, SST about the target mean. In log space
// pairs with a non-positive member are dropped and counted in `excluded`.
// Throws ZeroVariance when the retained targets are all equal and
// ContractViolation when fewer than two pairs remain.
double r_squared(std::span<const double> targets, std::span<const double> preds,
                 Space space = Space::kLinear, int* excluded = nullptr);

double mae(std::span<const double> targets, std::span<const double> preds);
double rmse(std::span<const double> targets, std::span<const double> preds);

// Ranks starting at 1; tied values share their average rank.
std::vector<double> average_ranks(std::span<const double> values);

// Absent when either vector has zero variance.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);
std::optional<double> spearman(std::span<const double> x, std::span<const double> y);

struct Correlations {
  std::optional<double> pearson;
  std::optional<double> spearman;
};

// Requires at least three pairs.
Correlations rank_correlations(std::span<const double> sigma,
                               std::span<const double> rmse);

// Mean over heads of rmse_t / sigma_t.
double calibration_ratio(std::span<const double> rmse,
                         std::span<const double> sigma);

// One number with an optional unit and nothing else, converted to the head's
// canonical unit. A bare number is read in the canonical unit.
std::optional<double> strict_numeric_parse(std::string_view response, int head_id);

struct HeadEval {
  int head_id = 0;
  int n = 0;
  std::optional<double> r2_linear;
  std::optional<double> r2_log;
  int log_excluded = 0;
  double mae = 0.0;
  double rmse = 0.0;
  bool primary_is_log = false;
  std::optional<double> primary;
  // Uncertainty pieces, present for checkpoint evaluations.
  std::optional<double> rmse_normalized;
  std::optional<double> sigma;
};

struct EvalReport {
  std::vector<HeadEval> heads;
  std::optional<double> macro_r2_linear;
  std::optional<double> macro_r2_log;
  std::optional<double> macro_primary;
  Correlations uncertainty;
  std::optional<double> calibration;
  // Strict-parse bookkeeping for external prediction files.
  int responses_total = 0;
  int responses_retained = 0;
  std::uint64_t config_digest = 0;
};

// Builds per-head rows and macro averages from canonical-unit pairs.
HeadEval evaluate_head(int head_id, std::span<const double> targets,
                       std::span<const double> preds);
void finalize_report(EvalReport& report);

enum class SplitSelector { kTest, kTrain, kAll };

// Scores a checkpoint on the selected split of `data`.
EvalReport evaluate(const Checkpoint& ckpt, std::span<const PromptInstance> data,
                    SplitSelector split = SplitSelector::kTest);

// Scores a prediction file (`sample_id<TAB>head<TAB>response`) against the
// dataset labels through strict_numeric_parse.
EvalReport score_predictions(std::string_view predictions,
                             std::span<const PromptInstance> data,
                             SplitSelector split = SplitSelector::kTest);

std::string report_to_tsv(const EvalReport& report);
std::string report_to_json(const EvalReport& report);

}  // namespace polyprop

#endif  // POLYPROP_METRICS_H_
