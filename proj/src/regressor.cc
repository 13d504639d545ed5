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

#include "polyprop/regressor.h"

#include <cmath>

namespace polyprop {
namespace {

void fill_normal(Matrix& m, double stddev, Rng& rng) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = stddev * rng.normal();
  }
}

}  // namespace

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * M_SQRT1_2)); }

double gelu_grad(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x * M_SQRT1_2));
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
  return cdf + x * pdf;
}

TrunkParams TrunkParams::init(const TrunkConfig& cfg, Rng& rng) {
  require(cfg.input_dim > 0 && cfg.hidden > 0, "trunk sizes must be positive");
  require(cfg.blocks >= 1, "trunk needs at least one residual block");
  TrunkParams p;
  const double in_scale = 1.0 / std::sqrt(double(cfg.input_dim));
  const double h_scale = 1.0 / std::sqrt(double(cfg.hidden));
  p.proj_w.resize(cfg.hidden, cfg.input_dim);
  fill_normal(p.proj_w, in_scale, rng);
  p.proj_b = Vector::Zero(cfg.hidden);
  for (int k = 0; k < cfg.blocks; ++k) {
    ResidualBlock b;
    b.ln_gain = Vector::Ones(cfg.hidden);
    b.ln_bias = Vector::Zero(cfg.hidden);
    b.w.resize(cfg.hidden, cfg.hidden);
    fill_normal(b.w, h_scale, rng);
    b.b = Vector::Zero(cfg.hidden);
    p.blocks.push_back(std::move(b));
  }
  p.bottleneck_w.resize(kBottleneckWidth, cfg.hidden);
  fill_normal(p.bottleneck_w, h_scale, rng);
  p.bottleneck_b = Vector::Zero(kBottleneckWidth);
  p.head_w.resize(kNumHeads, kBottleneckWidth);
  fill_normal(p.head_w, 1.0 / std::sqrt(double(kBottleneckWidth)), rng);
  p.head_b = Vector::Zero(kNumHeads);
  return p;
}

TrunkParams TrunkParams::zeros_like(const TrunkParams& p) {
  TrunkParams z = p;
  z.set_zero();
  return z;
}

void TrunkParams::set_zero() {
  proj_w.setZero();
  proj_b.setZero();
  for (auto& b : blocks) {
    b.ln_gain.setZero();
    b.ln_bias.setZero();
    b.w.setZero();
    b.b.setZero();
  }
  bottleneck_w.setZero();
  bottleneck_b.setZero();
  head_w.setZero();
  head_b.setZero();
}

Vector layer_norm(const Vector& x, double* inv_std) {
  const double n = static_cast<double>(x.size());
  const double mean = x.sum() / n;
  const Vector centered = x.array() - mean;
  const double var = centered.squaredNorm() / n;
  const double is = 1.0 / std::sqrt(var + kLayerNormEps);
  if (inv_std) *inv_std = is;
  return centered * is;
}

Vector trunk_forward(const Vector& pooled, const TrunkParams& p,
                     TrunkCache* cache) {
  require(pooled.size() == p.input_dim(), "trunk_forward: width mismatch");
  require(pooled.allFinite(), "trunk_forward: non-finite input");
  Vector u = p.proj_w * pooled + p.proj_b;
  if (cache) {
    cache->input = pooled;
    cache->block_in.clear();
    cache->normed.clear();
    cache->inv_std.clear();
    cache->pre_act.clear();
  }
  for (const auto& b : p.blocks) {
    double is = 0.0;
    const Vector n = layer_norm(u, &is);
    const Vector a = b.ln_gain.cwiseProduct(n) + b.ln_bias;
    const Vector act = a.unaryExpr([](double v) { return gelu(v); });
    if (cache) {
      cache->block_in.push_back(u);
      cache->normed.push_back(n);
      cache->inv_std.push_back(is);
      cache->pre_act.push_back(a);
    }
    u += b.w * act + b.b;
  }
  Vector z = p.bottleneck_w * u + p.bottleneck_b;
  if (cache) {
    cache->last = u;
    cache->z = z;
  }
  return z;
}

Vector heads_forward(const Vector& z, const TrunkParams& p) {
  return p.head_w * z + p.head_b;
}

Vector regressor_backward(const TrunkCache& cache, const TrunkParams& p,
                          const Vector& d_pred, TrunkParams& g) {
  g.head_w.noalias() += d_pred * cache.z.transpose();
  g.head_b += d_pred;
  const Vector dz = p.head_w.transpose() * d_pred;
  g.bottleneck_w.noalias() += dz * cache.last.transpose();
  g.bottleneck_b += dz;
  Vector du = p.bottleneck_w.transpose() * dz;
  for (int k = static_cast<int>(p.blocks.size()) - 1; k >= 0; --k) {
    const auto& b = p.blocks[k];
    auto& gb = g.blocks[k];
    const Vector& a = cache.pre_act[k];
    const Vector act = a.unaryExpr([](double v) { return gelu(v); });
    gb.w.noalias() += du * act.transpose();
    gb.b += du;
    const Vector d_act = b.w.transpose() * du;
    const Vector da = d_act.cwiseProduct(a.unaryExpr([](double v) { return gelu_grad(v); }));
    const Vector& n = cache.normed[k];
    gb.ln_gain += da.cwiseProduct(n);
    gb.ln_bias += da;
    const Vector dn = da.cwiseProduct(b.ln_gain);
    const double len = static_cast<double>(dn.size());
    const double mean_dn = dn.sum() / len;
    const double mean_dn_n = dn.dot(n) / len;
    const Vector dx = cache.inv_std[k] * (dn.array() - mean_dn - n.array() * mean_dn_n).matrix();
    du += dx;
  }
  g.proj_w.noalias() += du * cache.input.transpose();
  g.proj_b += du;
  return p.proj_w.transpose() * du;
}

}  // namespace polyprop
