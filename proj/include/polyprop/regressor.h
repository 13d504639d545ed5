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

#ifndef POLYPROP_REGRESSOR_H_
#define POLYPROP_REGRESSOR_H_

#include <vector>

#include "polyprop/encoder.h"

namespace polyprop {

inline constexpr int kBottleneckWidth = 128;
inline constexpr double kLayerNormEps = 1e-5;

struct TrunkConfig {
  int input_dim = 64;
  int hidden = 128;
  int blocks = 2;
};

// Pre-norm residual block: x + W * GELU(LayerNorm(x)) + b.
struct ResidualBlock {
  Vector ln_gain;
  Vector ln_bias;
  Matrix w;  // hidden x hidden
  Vector b;
};

struct TrunkParams {
  Matrix proj_w;  // hidden x input
  Vector proj_b;
  std::vector<ResidualBlock> blocks;
  Matrix bottleneck_w;  // 128 x hidden
  Vector bottleneck_b;
  Matrix head_w;  // 22 x 128, row t is head t
  Vector head_b;  // 22

  int input_dim() const { return static_cast<int>(proj_w.cols()); }
  int hidden() const { return static_cast<int>(proj_w.rows()); }

  static TrunkParams init(const TrunkConfig& cfg, Rng& rng);
  static TrunkParams zeros_like(const TrunkParams& p);
  void set_zero();
};

double gelu(double x);
double gelu_grad(double x);

// Intermediates kept for the backward pass.
struct TrunkCache {
  Vector input;
  std::vector<Vector> block_in;   // residual stream entering each block
  std::vector<Vector> normed;     // LayerNorm output before gain/bias
  std::vector<double> inv_std;
  std::vector<Vector> pre_act;    // gain * normed + bias
  Vector last;                    // residual stream after the final block
  Vector z;                       // bottleneck output
};

// LayerNorm without gain/bias: (x - mean) / sqrt(var + eps).
Vector layer_norm(const Vector& x, double* inv_std = nullptr);

Vector trunk_forward(const Vector& pooled, const TrunkParams& p,
                     TrunkCache* cache = nullptr);
Vector heads_forward(const Vector& z, const TrunkParams& p);

// Accumulates parameter gradients into `g` and returns d(loss)/d(pooled).
Vector regressor_backward(const TrunkCache& cache, const TrunkParams& p,
                          const Vector& d_pred, TrunkParams& g);

}  // namespace polyprop

#endif  // POLYPROP_REGRESSOR_H_
