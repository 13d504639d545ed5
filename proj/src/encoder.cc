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

#include "polyprop/encoder.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "polyprop/text.h"

namespace polyprop {
namespace {

constexpr std::string_view kAtomic[] = {"[Sample]", "[Synthesis]", "[MASKED]"};

bool is_word_byte(char c) {
  return is_ascii_alpha(c) || is_ascii_digit(c) || c == '_' ||
         static_cast<unsigned char>(c) >= 0x80;
}

template <typename M>
void fill_normal(M& m, double stddev, Rng& rng) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = stddev * rng.normal();
  }
}

}  // namespace

std::string_view pooling_name(PoolingMode m) {
  return m == PoolingMode::kMean ? "mean" : "attention";
}

PoolingMode parse_pooling(std::string_view s) {
  if (s == "mean") return PoolingMode::kMean;
  if (s == "attention") return PoolingMode::kAttention;
  throw ConfigError("unknown pooling mode '" + std::string(s) + "'");
}

EncoderParams EncoderParams::init(const EncoderConfig& cfg, Rng& rng) {
  require(cfg.vocab > 0 && cfg.dim > 0, "encoder sizes must be positive");
  require(cfg.rank > 0 && cfg.rank < cfg.dim, "LoRA rank must satisfy 0 < r < d");
  require(cfg.alpha > 0.0, "LoRA alpha must be positive");
  EncoderParams p;
  p.alpha = cfg.alpha;
  p.pooling = cfg.pooling;
  p.embedding.resize(cfg.vocab, cfg.dim);
  fill_normal(p.embedding, 0.1, rng);
  p.w0.resize(cfg.dim, cfg.dim);
  fill_normal(p.w0, 1.0 / std::sqrt(double(cfg.dim)), rng);
  p.lora_a.resize(cfg.rank, cfg.dim);
  fill_normal(p.lora_a, 1.0 / std::sqrt(double(cfg.dim)), rng);
  p.lora_b = Matrix::Zero(cfg.dim, cfg.rank);
  p.query = Vector::Zero(cfg.dim);
  return p;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    bool atomic = false;
    for (std::string_view a : kAtomic) {
      if (text.substr(i, a.size()) == a) {
        out.emplace_back(a);
        i += a.size();
        atomic = true;
        break;
      }
    }
    if (atomic) continue;
    const char c = text[i];
    if (is_ascii_digit(c)) {
      std::size_t j = i;
      while (j < text.size() && is_ascii_digit(text[j])) ++j;
      if (j + 1 < text.size() && text[j] == '.' && is_ascii_digit(text[j + 1])) {
        ++j;
        while (j < text.size() && is_ascii_digit(text[j])) ++j;
      }
      if (j + 1 < text.size() && (text[j] == 'e' || text[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < text.size() && (text[k] == '-' || text[k] == '+')) ++k;
        if (k < text.size() && is_ascii_digit(text[k])) {
          while (k < text.size() && is_ascii_digit(text[k])) ++k;
          j = k;
        }
      }
      out.emplace_back(text.substr(i, j - i));
      i = j;
    } else if (is_word_byte(c)) {
      std::size_t j = i;
      while (j < text.size() && is_word_byte(text[j])) ++j;
      out.push_back(to_lower_ascii(text.substr(i, j - i)));
      i = j;
    } else {
      ++i;
    }
  }
  return out;
}

int token_bucket(std::string_view token, int vocab) {
  return static_cast<int>(fnv1a64(token) % static_cast<std::uint64_t>(vocab));
}

std::vector<int> token_buckets(std::span<const std::string> tokens, int vocab) {
  std::vector<int> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(token_bucket(t, vocab));
  return out;
}

Matrix embed(std::span<const int> buckets, const EncoderParams& p) {
  if (buckets.empty()) return Matrix::Zero(1, p.dim());
  Matrix h(static_cast<Eigen::Index>(buckets.size()), p.dim());
  for (std::size_t t = 0; t < buckets.size(); ++t) {
    require(buckets[t] >= 0 && buckets[t] < p.vocab(), "bucket out of range");
    h.row(static_cast<Eigen::Index>(t)) = p.embedding.row(buckets[t]);
  }
  return h;
}

Matrix lora_project(const Matrix& h, const EncoderParams& p) {
  require(h.cols() == p.dim(), "lora_project: width mismatch");
  Matrix out = h * p.w0.transpose();
  out.noalias() += p.scale() * ((h * p.lora_a.transpose()) * p.lora_b.transpose());
  return out;
}

Vector pool(const Matrix& h, std::span<const char> mask, const EncoderParams& p,
            Vector* weights_out) {
  require(static_cast<Eigen::Index>(mask.size()) == h.rows(),
          "pool: mask length mismatch");
  Vector w = Vector::Zero(h.rows());
  int active = 0;
  for (char m : mask) active += m != 0;
  if (active == 0) {
    if (weights_out) *weights_out = w;
    return Vector::Zero(h.cols());
  }
  if (p.pooling == PoolingMode::kMean) {
    for (Eigen::Index t = 0; t < h.rows(); ++t) {
      if (mask[t]) w(t) = 1.0 / active;
    }
  } else {
    const Vector scores = h * p.query;
    double max_score = -std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < h.rows(); ++t) {
      if (mask[t]) max_score = std::max(max_score, scores(t));
    }
    double total = 0.0;
    for (Eigen::Index t = 0; t < h.rows(); ++t) {
      if (mask[t]) {
        w(t) = std::exp(scores(t) - max_score);
        total += w(t);
      }
    }
    w /= total;
  }
  if (weights_out) *weights_out = w;
  Vector out = Vector::Zero(h.cols());
  for (Eigen::Index t = 0; t < h.rows(); ++t) {
    if (mask[t]) out.noalias() += w(t) * h.row(t).transpose();
  }
  return out;
}

EncoderGrads EncoderGrads::zeros_like(const EncoderParams& p) {
  EncoderGrads g;
  g.embedding = RowMatrix::Zero(p.embedding.rows(), p.embedding.cols());
  g.lora_a = Matrix::Zero(p.lora_a.rows(), p.lora_a.cols());
  g.lora_b = Matrix::Zero(p.lora_b.rows(), p.lora_b.cols());
  g.query = Vector::Zero(p.query.size());
  g.touched_flag.assign(static_cast<std::size_t>(p.embedding.rows()), 0);
  return g;
}

void EncoderGrads::clear() {
  for (int r : touched_rows) {
    embedding.row(r).setZero();
    touched_flag[r] = 0;
  }
  touched_rows.clear();
  lora_a.setZero();
  lora_b.setZero();
  query.setZero();
}

Matrix pool_backward(const Matrix& h, std::span<const char> mask,
                     const EncoderParams& p, const Vector& weights,
                     const Vector& d_pooled, EncoderGrads& g) {
  Matrix dh = Matrix::Zero(h.rows(), h.cols());
  if (p.pooling == PoolingMode::kMean) {
    for (Eigen::Index t = 0; t < h.rows(); ++t) {
      if (mask[t]) dh.row(t) = weights(t) * d_pooled.transpose();
    }
    return dh;
  }
  // out = sum_t a_t h_t with a = softmax(h q). With c_t = h_t . d_out and
  // cbar = sum_t a_t c_t, d(score_t) = a_t (c_t - cbar).
  const Vector c = h * d_pooled;
  double cbar = 0.0;
  for (Eigen::Index t = 0; t < h.rows(); ++t) {
    if (mask[t]) cbar += weights(t) * c(t);
  }
  for (Eigen::Index t = 0; t < h.rows(); ++t) {
    if (!mask[t]) continue;
    const double ds = weights(t) * (c(t) - cbar);
    dh.row(t) = weights(t) * d_pooled.transpose() + ds * p.query.transpose();
    g.query.noalias() += ds * h.row(t).transpose();
  }
  return dh;
}

Matrix lora_backward(const Matrix& h, const EncoderParams& p,
                     const Matrix& d_out, EncoderGrads& g) {
  const double s = p.scale();
  const Matrix ah = h * p.lora_a.transpose();         // T x r
  const Matrix d_ah = d_out * p.lora_b;               // T x r
  g.lora_b.noalias() += s * d_out.transpose() * ah;   // d x r
  g.lora_a.noalias() += s * d_ah.transpose() * h;     // r x d
  Matrix dh = d_out * p.w0;
  dh.noalias() += s * d_ah * p.lora_a;
  return dh;
}

void embed_backward(std::span<const int> buckets, const Matrix& d_rows,
                    EncoderGrads& g) {
  for (std::size_t t = 0; t < buckets.size(); ++t) {
    const int r = buckets[t];
    if (!g.touched_flag[r]) {
      g.touched_flag[r] = 1;
      g.touched_rows.push_back(r);
    }
    g.embedding.row(r) += d_rows.row(static_cast<Eigen::Index>(t));
  }
}

}  // namespace polyprop
