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

#ifndef POLYPROP_TRAINER_H_
#define POLYPROP_TRAINER_H_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "polyprop/config.h"
#include "polyprop/model.h"

namespace polyprop {

struct TrainConfig {
  std::uint64_t seed = 0;
  int batch_size = 32;
  int epochs = 10;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double clip_norm = 5.0;
  std::optional<Variant> variant;  // when set, the dataset must match
  bool freeze_embedding = false;
  std::vector<std::string> heads;  // head names; empty means every head
  ModelConfig model;

  // Reads `train.*` keys; unknown `train.*` keys are rejected.
  static TrainConfig from_config(const KeyValueConfig& cfg);
  std::string serialize() const;
  std::uint64_t digest() const;
  // 22-slot mask of heads this run may train.
  std::array<char, kNumHeads> head_mask() const;
};

struct Checkpoint {
  inline static constexpr std::uint32_t kVersion = 1;

  std::string config_text;  // TrainConfig::serialize()
  std::uint64_t config_digest = 0;
  ModelState state;
  LabelTransform transform;
  DensityModel density;
  std::array<char, kNumHeads> trained_heads{};
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<double> epoch_loss;  // mean batch objective per epoch
};

// Trains on the instances whose test_split flag is false.
TrainResult train(const TrainConfig& cfg, std::span<const PromptInstance> data);

// Rebuilds the model configuration recorded in a checkpoint.
TrainConfig config_of(const Checkpoint& ckpt);

std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(std::string_view bytes);
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace polyprop

#endif  // POLYPROP_TRAINER_H_
