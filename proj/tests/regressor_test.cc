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

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "polyprop/regressor.h"

namespace polyprop {
namespace {

TrunkParams random_trunk(std::uint64_t seed, int input = 64, int hidden = 128,
                         int blocks = 2) {
  Rng rng(seed);
  TrunkParams p = TrunkParams::init({input, hidden, blocks}, rng);
  // Perturb gains and biases so the oracle sees non-trivial values.
  for (auto& b : p.blocks) {
    for (int i = 0; i < hidden; ++i) {
      b.ln_gain(i) = 1.0 + 0.1 * rng.normal();
      b.ln_bias(i) = 0.1 * rng.normal();
      b.b(i) = 0.1 * rng.normal();
    }
  }
  for (int i = 0; i < hidden; ++i) p.proj_b(i) = 0.1 * rng.normal();
  for (int i = 0; i < kBottleneckWidth; ++i) p.bottleneck_b(i) = 0.1 * rng.normal();
  for (int i = 0; i < kNumHeads; ++i) p.head_b(i) = rng.normal();
  return p;
}

// Straight-line evaluation over std::vector, sharing nothing with the
// Eigen implementation beyond the weights.
std::vector<double> oracle_trunk(const TrunkParams& p, const std::vector<double>& in) {
  const int h = p.hidden();
  std::vector<double> x(h);
  for (int i = 0; i < h; ++i) {
    double s = p.proj_b(i);
    for (std::size_t j = 0; j < in.size(); ++j) s += p.proj_w(i, j) * in[j];
    x[i] = s;
  }
  for (const auto& blk : p.blocks) {
    double mean = 0;
    for (double v : x) mean += v;
    mean /= h;
    double var = 0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= h;
    std::vector<double> act(h);
    for (int i = 0; i < h; ++i) {
      const double n = (x[i] - mean) / std::sqrt(var + 1e-5);
      const double a = blk.ln_gain(i) * n + blk.ln_bias(i);
      act[i] = 0.5 * a * (1.0 + std::erf(a / std::sqrt(2.0)));
    }
    std::vector<double> next(h);
    for (int i = 0; i < h; ++i) {
      double s = blk.b(i);
      for (int j = 0; j < h; ++j) s += blk.w(i, j) * act[j];
      next[i] = x[i] + s;
    }
    x = next;
  }
  std::vector<double> z(kBottleneckWidth);
  for (int i = 0; i < kBottleneckWidth; ++i) {
    double s = p.bottleneck_b(i);
    for (int j = 0; j < h; ++j) s += p.bottleneck_w(i, j) * x[j];
    z[i] = s;
  }
  return z;
}

TEST(Trunk, BottleneckIs128) {
  const TrunkParams p = random_trunk(1);
  EXPECT_EQ(trunk_forward(Vector::Zero(64), p).size(), 128);
  EXPECT_EQ(kBottleneckWidth, 128);
}

TEST(Trunk, MatchesStraightLineOracle) {
  Rng rng(42);
  for (int trial = 0; trial < 10; ++trial) {
    const TrunkParams p = random_trunk(100 + trial);
    std::vector<double> in(64);
    Vector v(64);
    for (int i = 0; i < 64; ++i) v(i) = in[i] = rng.normal();
    const Vector z = trunk_forward(v, p);
    const auto oz = oracle_trunk(p, in);
    for (int i = 0; i < kBottleneckWidth; ++i) EXPECT_NEAR(z(i), oz[i], 1e-10);
  }
}

TEST(Trunk, ZeroInnerLinearMakesBlockIdentity) {
  TrunkParams p = random_trunk(3, 8, 16, 1);
  p.blocks[0].w.setZero();
  p.blocks[0].b.setZero();
  TrunkParams no_blocks = p;
  no_blocks.blocks.clear();
  Rng rng(1);
  Vector v(8);
  for (int i = 0; i < 8; ++i) v(i) = rng.normal();
  EXPECT_EQ(trunk_forward(v, p), trunk_forward(v, no_blocks));
}

TEST(Trunk, ZeroInputIsFinite) {
  TrunkParams p = random_trunk(4);
  p.proj_b.setZero();
  for (auto& b : p.blocks) {
    b.w.setZero();
    b.b.setZero();
    b.ln_bias.setZero();
  }
  const Vector z = trunk_forward(Vector::Zero(64), p);
  EXPECT_TRUE(z.allFinite());
  double inv_std = 0;
  const Vector n = layer_norm(Vector::Zero(16), &inv_std);
  EXPECT_TRUE(n.isZero(0));
  EXPECT_TRUE(std::isfinite(inv_std));
}

TEST(Trunk, NonFiniteInputRejected) {
  const TrunkParams p = random_trunk(5);
  Vector v = Vector::Zero(64);
  v(3) = std::nan("");
  EXPECT_THROW(trunk_forward(v, p), ContractViolation);
}

TEST(Heads, ZeroWeightsAndZeroInput) {
  TrunkParams p = random_trunk(6);
  TrunkParams zero = TrunkParams::zeros_like(p);
  EXPECT_TRUE(heads_forward(Vector::Ones(128), zero).isZero(0));
  EXPECT_EQ(heads_forward(Vector::Zero(128), p), p.head_b);
}

TEST(Heads, PerturbingOneHeadChangesOnlyItsOutput) {
  TrunkParams p = random_trunk(7);
  Rng rng(8);
  Vector z(128);
  for (int i = 0; i < 128; ++i) z(i) = rng.normal();
  const Vector before = heads_forward(z, p);
  for (int t : {0, 9, 21}) {
    TrunkParams q = p;
    q.head_w.row(t).array() += 0.5;
    const Vector after = heads_forward(z, q);
    for (int h = 0; h < kNumHeads; ++h) {
      if (h == t) EXPECT_NE(after(h), before(h));
      else EXPECT_EQ(after(h), before(h));
    }
  }
}

TEST(Gelu, ExactErfForm) {
  EXPECT_DOUBLE_EQ(gelu(0.0), 0.0);
  EXPECT_NEAR(gelu(1.0), 0.8413447460685429, 1e-15);
  EXPECT_NEAR(gelu(-1.0), -0.15865525393145707, 1e-15);
  for (double x : {-3.0, -0.5, 0.2, 2.0}) {
    const double fd = (gelu(x + 1e-6) - gelu(x - 1e-6)) / 2e-6;
    EXPECT_NEAR(gelu_grad(x), fd, 1e-8);
  }
}

}  // namespace
}  // namespace polyprop
