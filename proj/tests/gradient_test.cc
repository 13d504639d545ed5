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

#include <gtest/gtest.h>

#include "gradient_check.h"

namespace polyprop {
namespace {

using testing::batch_of;
using testing::check_gradients;
using testing::random_problem;

TEST(Gradient, AttentionPoolingMatchesFiniteDifferences) {
  for (std::uint64_t seed : {1, 2}) {
    auto gp = random_problem(seed);
    const auto r = check_gradients(gp, seed);
    EXPECT_LE(r.max_rel, 1e-4) << r.worst;
    EXPECT_EQ(r.checked, 200);
  }
}

TEST(Gradient, MeanPoolingMatchesFiniteDifferences) {
  auto gp = random_problem(3, 6, PoolingMode::kMean);
  const auto r = check_gradients(gp, 3);
  EXPECT_LE(r.max_rel, 1e-4) << r.worst;
}

TEST(Gradient, FrozenEmbeddingSkipsTable) {
  auto gp = random_problem(4);
  ModelGrads g = ModelGrads::zeros_like(gp.state);
  batch_objective(gp.state, batch_of(gp.examples), &g, true);
  EXPECT_TRUE(g.encoder.embedding.isZero(0));
  EXPECT_FALSE(g.encoder.lora_a.isZero(0));
  const auto r = check_gradients(gp, 4, 100, 1e-4, 1e-6, true);
  EXPECT_LE(r.max_rel, 1e-4) << r.worst;
}

// A missing slot's stored target and weight must not reach any gradient.
TEST(Gradient, MissingLabelsContributeNothing) {
  auto gp = random_problem(5);
  ModelGrads a = ModelGrads::zeros_like(gp.state);
  const auto before = batch_objective(gp.state, batch_of(gp.examples), &a);
  Rng rng(6);
  for (auto& ex : gp.examples) {
    for (int h = 0; h < kNumHeads; ++h) {
      if (!ex.mask[h]) {
        ex.target[h] = 50 * rng.normal();
        ex.weight[h] = 3.0;
      }
    }
  }
  ModelGrads b = ModelGrads::zeros_like(gp.state);
  const auto after = batch_objective(gp.state, batch_of(gp.examples), &b);
  EXPECT_EQ(before.total, after.total);
  auto ta = tensors(a, false);
  auto tb = tensors(b, false);
  for (std::size_t i = 0; i < ta.size(); ++i) {
    if (!ta[i].data) continue;
    for (Eigen::Index k = 0; k < ta[i].size(); ++k) {
      ASSERT_EQ(ta[i].data[k], tb[i].data[k]) << ta[i].name;
    }
  }
}

TEST(Gradient, AbsentHeadsHaveNoRhoGradient) {
  auto gp = random_problem(7, 2);
  ModelGrads g = ModelGrads::zeros_like(gp.state);
  const auto obj = batch_objective(gp.state, batch_of(gp.examples), &g);
  for (int h = 0; h < kNumHeads; ++h) {
    if (!obj.present[h]) {
      EXPECT_EQ(g.rho(h), 0.0);
      EXPECT_TRUE(g.trunk.head_w.row(h).isZero(0));
    }
  }
}

}  // namespace
}  // namespace polyprop
