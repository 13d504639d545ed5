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

#ifndef POLYPROP_MODEL_H_
#define POLYPROP_MODEL_H_

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "polyprop/encoder.h"
#include "polyprop/objective.h"
#include "polyprop/prompt.h"
#include "polyprop/regressor.h"

namespace polyprop {

struct ModelConfig {
  EncoderConfig encoder;
  TrunkConfig trunk;
};

// Everything the network learns, plus the frozen base projection.
struct ModelState {
  EncoderParams encoder;
  TrunkParams trunk;
  Vector rho;  // log sigma_t^2 per head

  static ModelState init(const ModelConfig& cfg, std::uint64_t seed);
};

// A contiguous parameter block, addressed by name for checkpoints and the
// optimizer.
struct TensorRef {
  std::string name;
  double* data;
  Eigen::Index rows;
  Eigen::Index cols;
  bool trainable;

  Eigen::Index size() const { return rows * cols; }
};

// Stable order. The embedding table is first; `freeze_embedding` marks it
// non-trainable. W0 is never trainable.
std::vector<TensorRef> tensors(ModelState& s, bool freeze_embedding);

struct ParameterCount {
  std::int64_t trainable = 0;
  std::int64_t total = 0;
  double fraction() const {
    return total ? static_cast<double>(trainable) / static_cast<double>(total) : 0.0;
  }
};

ParameterCount count_parameters(const ModelState& s, bool freeze_embedding);

struct ModelGrads {
  EncoderGrads encoder;
  TrunkParams trunk;
  Vector rho;

  static ModelGrads zeros_like(const ModelState& s);
  void clear();
};

// Mirrors tensors() for the gradient buffers.
std::vector<TensorRef> tensors(ModelGrads& g, bool freeze_embedding);

// A prompt ready for the network: token buckets plus normalized targets.
struct Example {
  std::vector<int> buckets;
  std::array<double, kNumHeads> target{};  // normalized; 0 where missing
  std::array<char, kNumHeads> mask{};
  std::array<double, kNumHeads> weight{};  // KDE weight; 0 where missing
};

// Tokenizes and normalizes. Labels on heads outside `heads` or outside the
// transform's domain are treated as missing. Weights come from `density`
// when given and are 1 otherwise.
std::vector<Example> prepare_examples(std::span<const PromptInstance> data,
                                      const LabelTransform& transform,
                                      const DensityModel* density,
                                      std::span<const char> heads, int vocab);

// Normalized predictions for all 22 heads.
Vector predict(const ModelState& s, std::span<const int> buckets);

struct BatchObjective {
  double total = 0.0;
  std::array<double, kNumHeads> task_loss{};
  std::array<char, kNumHeads> present{};
};

// Weighted squared error per present head and the uncertainty-weighted sum.
// When `grads` is given, gradients are accumulated into it. Embedding
// gradients are skipped when `freeze_embedding` is set.
BatchObjective batch_objective(const ModelState& s,
                               std::span<const Example* const> batch,
                               ModelGrads* grads, bool freeze_embedding = false);

}  // namespace polyprop

#endif  // POLYPROP_MODEL_H_
