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

#ifndef POLYPROP_CORPUS_H_
#define POLYPROP_CORPUS_H_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "polyprop/config.h"
#include "polyprop/registry.h"

namespace polyprop {

// Synthetic literature generator. Each sample has categorical composition
// tokens (base polymer, filler, loading) and process tokens (method, anneal
// temperature, time, cooling, atmosphere). The latent value for head t is
//   s = f_t(composition) + gamma_t * g_t(process) + eta_t * N(0, 1)
// with gamma_t = gamma on mechanical heads and gamma / 2 elsewhere. f_t and
// g_t have unit variance over uniformly drawn tokens. Labels are
// center + scale * skew(s) (log heads: 10 to that power) with
// skew(s) = (exp(k s) - 1) / k, which gives a long right tail.
struct SynthConfig {
  std::uint64_t seed = 0;
  int documents = 2000;
  std::vector<int> heads;  // head ids; empty means all 22
  std::array<double, kNumHeads> noise{};  // eta_t, all 0.3 by default
  double gamma = 0.5;
  double skew = 0.6;
  int min_labels = 1;
  int max_labels = 4;

  SynthConfig();
  // Reads `synth.*` keys. `synth.heads` takes head names or the group names
  // thermal, mechanical, electrical_transport, physicochemical, all.
  // `synth.noise` is one value or one value per head in head-id order.
  static SynthConfig from_config(const KeyValueConfig& cfg);
  std::string serialize() const;
  std::vector<int> head_list() const;
};

struct TruthRecord {
  std::string sample_id;
  int head_id;
  double latent;
  double value;  // exact canonical label before formatting
};

struct Corpus {
  std::string document;  // all samples, `== SAMPLE id ==` delimited
  std::vector<TruthRecord> truth;
};

Corpus gen_corpus(const SynthConfig& cfg);

std::string truth_to_tsv(const std::vector<TruthRecord>& truth);

// (exp(k s) - 1) / k, and s itself when k is 0.
double skew_transform(double s, double k);

}  // namespace polyprop

#endif  // POLYPROP_CORPUS_H_
