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

#ifndef POLYPROP_ENCODER_H_
#define POLYPROP_ENCODER_H_

#include <Eigen/Dense>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "polyprop/common.h"

namespace polyprop {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class PoolingMode { kMean, kAttention };

std::string_view pooling_name(PoolingMode m);
PoolingMode parse_pooling(std::string_view s);

struct EncoderConfig {
  int vocab = 1 << 16;
  int dim = 64;
  int rank = 8;
  double alpha = 16.0;
  PoolingMode pooling = PoolingMode::kAttention;
};

// Token embeddings, a frozen base projection W0 with a low-rank adapter
// (alpha / rank) * B * A, and a pooling query.
struct EncoderParams {
  RowMatrix embedding;  // vocab x dim
  Matrix w0;            // dim x dim, never trained
  Matrix lora_a;        // rank x dim
  Matrix lora_b;        // dim x rank, zero at init
  Vector query;         // dim
  double alpha = 16.0;
  PoolingMode pooling = PoolingMode::kAttention;

  int dim() const { return static_cast<int>(w0.rows()); }
  int rank() const { return static_cast<int>(lora_a.rows()); }
  int vocab() const { return static_cast<int>(embedding.rows()); }
  double scale() const { return alpha / rank(); }

  static EncoderParams init(const EncoderConfig& cfg, Rng& rng);
};

// Lowercased word and number tokens. Punctuation separates tokens and is
// dropped; "[Sample]", "[Synthesis]" and "[MASKED]" stay atomic.
std::vector<std::string> tokenize(std::string_view text);

// Stable bucket of a token: FNV-1a 64 modulo vocab.
int token_bucket(std::string_view token, int vocab);
std::vector<int> token_buckets(std::span<const std::string> tokens, int vocab);

// T x d rows, row t = embedding[bucket t]. No tokens gives one zero row.
Matrix embed(std::span<const int> buckets, const EncoderParams& p);

// Row x maps to W0 x + (alpha / r) B (A x).
Matrix lora_project(const Matrix& h, const EncoderParams& p);

// Mean or attention pooling over rows with mask[t] == true. Returns the
// zero vector when every row is masked. `weights_out`, when given, receives
// the per-row pooling weights (zero for masked rows).
Vector pool(const Matrix& h, std::span<const char> mask, const EncoderParams& p,
            Vector* weights_out = nullptr);

// Gradient pieces, accumulated (+=) into the given outputs.
struct EncoderGrads {
  RowMatrix embedding;
  Matrix lora_a;
  Matrix lora_b;
  Vector query;
  std::vector<int> touched_rows;  // embedding rows reached this batch
  std::vector<char> touched_flag;

  static EncoderGrads zeros_like(const EncoderParams& p);
  void clear();  // zeroes touched rows and the small tensors
};

// d(loss)/dH given d(loss)/d(pooled).
Matrix pool_backward(const Matrix& h, std::span<const char> mask,
                     const EncoderParams& p, const Vector& weights,
                     const Vector& d_pooled, EncoderGrads& g);

// d(loss)/dH given d(loss)/d(projected).
Matrix lora_backward(const Matrix& h, const EncoderParams& p,
                     const Matrix& d_out, EncoderGrads& g);

void embed_backward(std::span<const int> buckets, const Matrix& d_rows,
                    EncoderGrads& g);

}  // namespace polyprop

#endif  // POLYPROP_ENCODER_H_
