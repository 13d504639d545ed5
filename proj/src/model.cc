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

#include "polyprop/model.h"

#include <cmath>

namespace polyprop {
namespace {

template <typename M>
TensorRef ref(std::string name, M& m, bool trainable) {
  return {std::move(name), m.data(), m.rows(), m.cols(), trainable};
}

template <typename Trunk>
void append_trunk(std::vector<TensorRef>& out, Trunk& t) {
  out.push_back(ref("trunk.proj_w", t.proj_w, true));
  out.push_back(ref("trunk.proj_b", t.proj_b, true));
  for (std::size_t k = 0; k < t.blocks.size(); ++k) {
    const std::string p = "trunk.block" + std::to_string(k) + ".";
    out.push_back(ref(p + "ln_gain", t.blocks[k].ln_gain, true));
    out.push_back(ref(p + "ln_bias", t.blocks[k].ln_bias, true));
    out.push_back(ref(p + "w", t.blocks[k].w, true));
    out.push_back(ref(p + "b", t.blocks[k].b, true));
  }
  out.push_back(ref("trunk.bottleneck_w", t.bottleneck_w, true));
  out.push_back(ref("trunk.bottleneck_b", t.bottleneck_b, true));
  out.push_back(ref("heads.w", t.head_w, true));
  out.push_back(ref("heads.b", t.head_b, true));
}

// Forward intermediates for one example.
struct Trace {
  Matrix h;
  Matrix projected;
  Vector pool_weights;
  TrunkCache trunk;
  Vector pred;
};

const std::vector<char>& all_rows(Eigen::Index n) {
  thread_local std::vector<char> mask;
  if (static_cast<Eigen::Index>(mask.size()) < n) mask.assign(n, 1);
  return mask;
}

Vector forward(const ModelState& s, std::span<const int> buckets, Trace* tr) {
  Matrix h = embed(buckets, s.encoder);
  Matrix projected = lora_project(h, s.encoder);
  const auto& rows = all_rows(projected.rows());
  const std::span<const char> mask(rows.data(), projected.rows());
  Vector weights;
  const Vector pooled = pool(projected, mask, s.encoder, tr ? &weights : nullptr);
  Vector pred = heads_forward(trunk_forward(pooled, s.trunk, tr ? &tr->trunk : nullptr),
                              s.trunk);
  if (tr) {
    tr->h = std::move(h);
    tr->projected = std::move(projected);
    tr->pool_weights = std::move(weights);
    tr->pred = pred;
  }
  return pred;
}

}  // namespace

ModelState ModelState::init(const ModelConfig& cfg, std::uint64_t seed) {
  require(cfg.trunk.input_dim == cfg.encoder.dim,
          "trunk input width must equal encoder width");
  ModelState s;
  Rng enc_rng(derive_seed(seed, "encoder"));
  s.encoder = EncoderParams::init(cfg.encoder, enc_rng);
  Rng trunk_rng(derive_seed(seed, "trunk"));
  s.trunk = TrunkParams::init(cfg.trunk, trunk_rng);
  s.rho = Vector::Zero(kNumHeads);
  return s;
}

std::vector<TensorRef> tensors(ModelState& s, bool freeze_embedding) {
  std::vector<TensorRef> out;
  out.push_back(ref("encoder.embedding", s.encoder.embedding, !freeze_embedding));
  out.push_back(ref("encoder.w0", s.encoder.w0, false));
  out.push_back(ref("encoder.lora_a", s.encoder.lora_a, true));
  out.push_back(ref("encoder.lora_b", s.encoder.lora_b, true));
  out.push_back(ref("encoder.query", s.encoder.query, true));
  append_trunk(out, s.trunk);
  out.push_back(ref("uncertainty.rho", s.rho, true));
  return out;
}

std::vector<TensorRef> tensors(ModelGrads& g, bool freeze_embedding) {
  std::vector<TensorRef> out;
  out.push_back(ref("encoder.embedding", g.encoder.embedding, !freeze_embedding));
  // W0 has no gradient buffer; keep the slot so indices line up.
  out.push_back({"encoder.w0", nullptr, 0, 0, false});
  out.push_back(ref("encoder.lora_a", g.encoder.lora_a, true));
  out.push_back(ref("encoder.lora_b", g.encoder.lora_b, true));
  out.push_back(ref("encoder.query", g.encoder.query, true));
  append_trunk(out, g.trunk);
  out.push_back(ref("uncertainty.rho", g.rho, true));
  return out;
}

ParameterCount count_parameters(const ModelState& s, bool freeze_embedding) {
  ParameterCount c;
  for (const auto& t : tensors(const_cast<ModelState&>(s), freeze_embedding)) {
    c.total += t.size();
    if (t.trainable) c.trainable += t.size();
  }
  return c;
}

ModelGrads ModelGrads::zeros_like(const ModelState& s) {
  ModelGrads g;
  g.encoder = EncoderGrads::zeros_like(s.encoder);
  g.trunk = TrunkParams::zeros_like(s.trunk);
  g.rho = Vector::Zero(s.rho.size());
  return g;
}

void ModelGrads::clear() {
  encoder.clear();
  trunk.set_zero();
  rho.setZero();
}

std::vector<Example> prepare_examples(std::span<const PromptInstance> data,
                                      const LabelTransform& transform,
                                      const DensityModel* density,
                                      std::span<const char> heads, int vocab) {
  require(heads.size() == kNumHeads, "prepare_examples: head mask length");
  std::vector<Example> out;
  out.reserve(data.size());
  std::array<std::size_t, kNumHeads> cursor{};
  for (const auto& inst : data) {
    Example ex;
    const auto tokens = tokenize(inst.text);
    ex.buckets = token_buckets(tokens, vocab);
    for (int h = 0; h < kNumHeads; ++h) {
      if (!heads[h] || !inst.label_mask[h] || !transform.active[h]) continue;
      if (!transform.admissible(h, inst.labels[h])) continue;
      ex.mask[h] = 1;
      ex.target[h] = transform.normalize(h, inst.labels[h]);
      if (density == nullptr) {
        ex.weight[h] = 1.0;
        continue;
      }
      // Training data arrives in the order the density was fit on, so the
      // cached weights line up; anything else is scored by the frozen model.
      const HeadDensity& d = density->heads[h];
      std::size_t& c = cursor[h];
      if (c < d.train.size() && d.train[c] == ex.target[h]) {
        ex.weight[h] = d.weights[c++];
      } else {
        ex.weight[h] = d.weight(ex.target[h]);
      }
    }
    out.push_back(std::move(ex));
  }
  return out;
}

Vector predict(const ModelState& s, std::span<const int> buckets) {
  return forward(s, buckets, nullptr);
}

BatchObjective batch_objective(const ModelState& s,
                               std::span<const Example* const> batch,
                               ModelGrads* grads, bool freeze_embedding) {
  BatchObjective out;
  std::vector<Trace> traces(batch.size());
  std::array<int, kNumHeads> count{};
  for (std::size_t i = 0; i < batch.size(); ++i) {
    forward(s, batch[i]->buckets, &traces[i]);
    for (int h = 0; h < kNumHeads; ++h) {
      if (!batch[i]->mask[h]) continue;
      const double e = traces[i].pred(h) - batch[i]->target[h];
      out.task_loss[h] += batch[i]->weight[h] * e * e;
      ++count[h];
    }
  }
  for (int h = 0; h < kNumHeads; ++h) {
    if (count[h] == 0) continue;
    out.present[h] = 1;
    out.task_loss[h] /= count[h];
    out.total += 0.5 * out.task_loss[h] * std::exp(-s.rho(h)) + 0.5 * s.rho(h);
  }
  if (grads == nullptr) return out;

  for (int h = 0; h < kNumHeads; ++h) {
    if (out.present[h]) {
      grads->rho(h) += -0.5 * out.task_loss[h] * std::exp(-s.rho(h)) + 0.5;
    }
  }
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Example& ex = *batch[i];
    Trace& tr = traces[i];
    Vector d_pred = Vector::Zero(kNumHeads);
    bool any = false;
    for (int h = 0; h < kNumHeads; ++h) {
      if (!ex.mask[h]) continue;
      d_pred(h) = std::exp(-s.rho(h)) * ex.weight[h] *
                  (tr.pred(h) - ex.target[h]) / count[h];
      any = true;
    }
    if (!any) continue;
    const Vector d_pooled = regressor_backward(tr.trunk, s.trunk, d_pred, grads->trunk);
    const auto& rows = all_rows(tr.projected.rows());
    const std::span<const char> mask(rows.data(), tr.projected.rows());
    const Matrix d_proj = pool_backward(tr.projected, mask, s.encoder,
                                        tr.pool_weights, d_pooled, grads->encoder);
    const Matrix d_h = lora_backward(tr.h, s.encoder, d_proj, grads->encoder);
    if (!freeze_embedding && !ex.buckets.empty()) {
      embed_backward(ex.buckets, d_h, grads->encoder);
    }
  }
  return out;
}

}  // namespace polyprop
