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

#ifndef POLYPROP_TESTS_GRADIENT_CHECK_H_
#define POLYPROP_TESTS_GRADIENT_CHECK_H_

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "polyprop/model.h"

namespace polyprop::testing {

struct GradientProblem {
  ModelState state;
  std::vector<Example> examples;
};

// A default-sized model with every parameter moved off its initial value so
// the adapter, the pooling query and rho all carry gradient.
inline GradientProblem random_problem(std::uint64_t seed, int batch = 8,
                                      PoolingMode pooling = PoolingMode::kAttention) {
  ModelConfig cfg;
  cfg.encoder.pooling = pooling;
  GradientProblem gp{ModelState::init(cfg, seed), {}};
  Rng rng(derive_seed(seed, "problem"));
  auto& enc = gp.state.encoder;
  for (Eigen::Index i = 0; i < enc.lora_b.size(); ++i) enc.lora_b.data()[i] = 0.1 * rng.normal();
  for (Eigen::Index i = 0; i < enc.query.size(); ++i) enc.query(i) = 0.5 * rng.normal();
  for (int h = 0; h < kNumHeads; ++h) gp.state.rho(h) = 0.5 * rng.normal();
  for (int i = 0; i < batch; ++i) {
    Example ex;
    const int len = 3 + static_cast<int>(rng.below(15));
    for (int t = 0; t < len; ++t) {
      ex.buckets.push_back(static_cast<int>(rng.below(enc.vocab())));
    }
    for (int h = 0; h < kNumHeads; ++h) {
      if (rng.uniform() < 0.3 || h == i % kNumHeads) {
        ex.mask[h] = 1;
        ex.target[h] = rng.normal();
        ex.weight[h] = 0.2 + 2.0 * rng.uniform();
      }
    }
    gp.examples.push_back(std::move(ex));
  }
  return gp;
}

inline std::vector<const Example*> batch_of(const std::vector<Example>& ex) {
  std::vector<const Example*> b;
  for (const auto& e : ex) b.push_back(&e);
  return b;
}

struct GradientCheck {
  int checked = 0;
  double max_rel = 0.0;
  std::string worst;
};

// Central differences on randomly drawn trainable coordinates.
// Relative error uses max(|analytic|, |numeric|, floor) as denominator.
inline GradientCheck check_gradients(GradientProblem& gp, std::uint64_t seed,
                                     int coords = 200, double step = 1e-4,
                                     double floor = 1e-6,
                                     bool freeze_embedding = false) {
  const auto batch = batch_of(gp.examples);
  ModelGrads grads = ModelGrads::zeros_like(gp.state);
  batch_objective(gp.state, batch, &grads, freeze_embedding);
  auto params = tensors(gp.state, freeze_embedding);
  auto grad_refs = tensors(grads, freeze_embedding);
  std::vector<std::size_t> trainable;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].trainable) trainable.push_back(i);
  }
  std::set<int> rows;
  for (const auto& e : gp.examples) rows.insert(e.buckets.begin(), e.buckets.end());
  const std::vector<int> touched(rows.begin(), rows.end());

  Rng rng(seed);
  GradientCheck out;
  for (int c = 0; c < coords; ++c) {
    const std::size_t ti = trainable[rng.below(trainable.size())];
    TensorRef& p = params[ti];
    Eigen::Index idx;
    if (p.name == "encoder.embedding") {
      // Row-major table: only rows seen in the batch carry gradient.
      const int row = touched[rng.below(touched.size())];
      idx = static_cast<Eigen::Index>(row) * p.cols +
            static_cast<Eigen::Index>(rng.below(p.cols));
    } else {
      idx = static_cast<Eigen::Index>(rng.below(p.size()));
    }
    const double saved = p.data[idx];
    p.data[idx] = saved + step;
    const double up = batch_objective(gp.state, batch, nullptr).total;
    p.data[idx] = saved - step;
    const double down = batch_objective(gp.state, batch, nullptr).total;
    p.data[idx] = saved;
    const double numeric = (up - down) / (2 * step);
    const double analytic = grad_refs[ti].data[idx];
    const double rel = std::fabs(analytic - numeric) /
                       std::max({std::fabs(analytic), std::fabs(numeric), floor});
    ++out.checked;
    if (rel > out.max_rel) {
      out.max_rel = rel;
      out.worst = p.name + "[" + std::to_string(idx) + "] analytic=" +
                  std::to_string(analytic) + " numeric=" + std::to_string(numeric);
    }
  }
  return out;
}

}  // namespace polyprop::testing

#endif  // POLYPROP_TESTS_GRADIENT_CHECK_H_
