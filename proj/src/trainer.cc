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

#include "polyprop/trainer.h"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <map>

#include "polyprop/text.h"

namespace polyprop {
namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

constexpr char kMagic[8] = {'P', 'O', 'L', 'Y', 'C', 'K', 'P', 'T'};

// Adam with lazy updates for embedding rows: only rows that received a
// gradient in the current step have their moments advanced.
class Adam {
 public:
  Adam(const TrainConfig& cfg, std::vector<TensorRef> params)
      : cfg_(cfg), params_(std::move(params)) {
    for (const auto& p : params_) {
      m_.emplace_back(p.trainable ? p.size() : 0, 0.0);
      v_.emplace_back(p.trainable ? p.size() : 0, 0.0);
    }
  }

  void step(const std::vector<TensorRef>& grads, const std::vector<int>& rows) {
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, t_);
    const double c2 = 1.0 - std::pow(cfg_.beta2, t_);
    for (std::size_t k = 0; k < params_.size(); ++k) {
      const TensorRef& p = params_[k];
      if (!p.trainable) continue;
      if (k == 0) {
        // Row-major embedding: row r occupies [r * cols, (r + 1) * cols).
        for (int r : rows) {
          const Eigen::Index base = r * p.cols;
          for (Eigen::Index j = 0; j < p.cols; ++j) update(k, base + j, grads[k].data[base + j], c1, c2);
        }
      } else {
        for (Eigen::Index i = 0; i < p.size(); ++i) update(k, i, grads[k].data[i], c1, c2);
      }
    }
  }

 private:
  void update(std::size_t k, Eigen::Index i, double g, double c1, double c2) {
    double& m = m_[k][i];
    double& v = v_[k][i];
    m = cfg_.beta1 * m + (1.0 - cfg_.beta1) * g;
    v = cfg_.beta2 * v + (1.0 - cfg_.beta2) * g * g;
    params_[k].data[i] -= cfg_.learning_rate * (m / c1) / (std::sqrt(v / c2) + cfg_.adam_eps);
  }

  const TrainConfig& cfg_;
  std::vector<TensorRef> params_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  int t_ = 0;
};

// Scales every trainable gradient so the global L2 norm is at most `limit`.
void clip_global_norm(const std::vector<TensorRef>& grads,
                      const std::vector<int>& rows, double limit) {
  double ss = 0.0;
  auto visit = [&](auto&& fn) {
    for (std::size_t k = 0; k < grads.size(); ++k) {
      const TensorRef& g = grads[k];
      if (!g.trainable) continue;
      if (k == 0) {
        for (int r : rows) {
          for (Eigen::Index j = 0; j < g.cols; ++j) fn(g.data[r * g.cols + j]);
        }
      } else {
        for (Eigen::Index i = 0; i < g.size(); ++i) fn(g.data[i]);
      }
    }
  };
  visit([&](double& x) { ss += x * x; });
  const double norm = std::sqrt(ss);
  if (norm <= limit) return;
  const double scale = limit / norm;
  visit([&](double& x) { x *= scale; });
}

DensityModel fit_density(std::span<const Example> examples) {
  DensityModel d;
  std::array<std::vector<double>, kNumHeads> labels;
  for (const auto& ex : examples) {
    for (int h = 0; h < kNumHeads; ++h) {
      if (ex.mask[h]) labels[h].push_back(ex.target[h]);
    }
  }
  for (int h = 0; h < kNumHeads; ++h) {
    if (!labels[h].empty()) d.heads[h] = HeadDensity::fit(std::move(labels[h]));
  }
  return d;
}

// Little-endian byte writer and bounds-checked reader.
class Writer {
 public:
  template <typename T>
  void put(T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out_.append(buf, sizeof(T));
  }
  void bytes(std::string_view s) {
    put<std::uint64_t>(s.size());
    out_.append(s);
  }
  void raw(const void* p, std::size_t n) { out_.append(static_cast<const char*>(p), n); }
  std::string& str() { return out_; }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}
  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, in_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string bytes() {
    const auto n = get<std::uint64_t>();
    need(n);
    std::string s(in_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  void raw(void* p, std::size_t n) {
    need(n);
    std::memcpy(p, in_.data() + pos_, n);
    pos_ += n;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  void need(std::uint64_t n) const {
    if (n > in_.size() - pos_) throw CorruptCheckpoint("checkpoint truncated");
  }
  std::string_view in_;
  std::size_t pos_ = 0;
};

// Auxiliary tensors stored next to the model parameters.
struct Aux {
  std::string name;
  std::vector<double> values;
};

std::vector<Aux> aux_tensors(const Checkpoint& c) {
  std::vector<Aux> out;
  std::vector<double> active, log, mean, sd, trained;
  for (int h = 0; h < kNumHeads; ++h) {
    active.push_back(c.transform.active[h]);
    log.push_back(c.transform.log_space[h]);
    mean.push_back(c.transform.mean[h]);
    sd.push_back(c.transform.stddev[h]);
    trained.push_back(c.trained_heads[h]);
  }
  out.push_back({"transform.active", active});
  out.push_back({"transform.log_space", log});
  out.push_back({"transform.mean", mean});
  out.push_back({"transform.stddev", sd});
  out.push_back({"transform.dropped", {double(c.transform.dropped_nonpositive)}});
  out.push_back({"heads.trained", trained});
  for (int h = 0; h < kNumHeads; ++h) {
    const HeadDensity& d = c.density.heads[h];
    if (d.train.empty()) continue;
    const std::string p = "density." + std::to_string(h) + ".";
    out.push_back({p + "params", {d.bandwidth, d.epsilon, d.scale}});
    out.push_back({p + "train", d.train});
    out.push_back({p + "weights", d.weights});
  }
  return out;
}

}  // namespace

TrainConfig TrainConfig::from_config(const KeyValueConfig& kv) {
  TrainConfig c;
  c.seed = kv.get_uint("train.seed", c.seed);
  c.batch_size = static_cast<int>(kv.get_int("train.batch_size", c.batch_size));
  c.epochs = static_cast<int>(kv.get_int("train.epochs", c.epochs));
  c.learning_rate = kv.get_double("train.learning_rate", c.learning_rate);
  c.beta1 = kv.get_double("train.beta1", c.beta1);
  c.beta2 = kv.get_double("train.beta2", c.beta2);
  c.adam_eps = kv.get_double("train.adam_eps", c.adam_eps);
  c.clip_norm = kv.get_double("train.clip_norm", c.clip_norm);
  if (kv.has("train.variant")) {
    const auto v = parse_variant(kv.get("train.variant", ""));
    if (!v) throw ConfigError("train.variant must be sample_synthesis or sample_only");
    c.variant = *v;
  }
  c.freeze_embedding = kv.get_bool("train.freeze_embedding", c.freeze_embedding);
  c.heads = kv.get_list("train.heads");
  auto& e = c.model.encoder;
  e.vocab = static_cast<int>(kv.get_int("train.vocab", e.vocab));
  e.dim = static_cast<int>(kv.get_int("train.dim", e.dim));
  e.rank = static_cast<int>(kv.get_int("train.rank", e.rank));
  e.alpha = kv.get_double("train.alpha", e.alpha);
  e.pooling = parse_pooling(kv.get("train.pooling", std::string(pooling_name(e.pooling))));
  auto& t = c.model.trunk;
  t.input_dim = e.dim;
  t.hidden = static_cast<int>(kv.get_int("train.hidden", t.hidden));
  t.blocks = static_cast<int>(kv.get_int("train.blocks", t.blocks));
  kv.reject_unread("train.");
  if (c.batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
  if (c.epochs < 0) throw ConfigError("train.epochs must be >= 0");
  if (!(c.learning_rate > 0.0)) throw ConfigError("train.learning_rate must be > 0");
  if (!(c.beta1 >= 0.0 && c.beta1 < 1.0 && c.beta2 >= 0.0 && c.beta2 < 1.0)) {
    throw ConfigError("Adam moments must lie in [0, 1)");
  }
  if (!(c.clip_norm > 0.0)) throw ConfigError("train.clip_norm must be > 0");
  if (e.vocab < 1 || e.dim < 2 || e.rank < 1 || e.rank >= e.dim) {
    throw ConfigError("encoder sizes must satisfy vocab >= 1 and 0 < rank < dim");
  }
  if (t.hidden < 1 || t.blocks < 1) throw ConfigError("trunk needs hidden >= 1 and blocks >= 1");
  c.head_mask();  // validates head names
  return c;
}

std::string TrainConfig::serialize() const {
  KeyValueConfig kv;
  kv.set("train.seed", std::to_string(seed));
  kv.set("train.batch_size", std::to_string(batch_size));
  kv.set("train.epochs", std::to_string(epochs));
  kv.set("train.learning_rate", format_double(learning_rate));
  kv.set("train.beta1", format_double(beta1));
  kv.set("train.beta2", format_double(beta2));
  kv.set("train.adam_eps", format_double(adam_eps));
  kv.set("train.clip_norm", format_double(clip_norm));
  if (variant) kv.set("train.variant", std::string(variant_name(*variant)));
  kv.set("train.freeze_embedding", freeze_embedding ? "true" : "false");
  std::string hs;
  for (const auto& h : heads) hs += (hs.empty() ? "" : ",") + h;
  kv.set("train.heads", hs);
  kv.set("train.vocab", std::to_string(model.encoder.vocab));
  kv.set("train.dim", std::to_string(model.encoder.dim));
  kv.set("train.rank", std::to_string(model.encoder.rank));
  kv.set("train.alpha", format_double(model.encoder.alpha));
  kv.set("train.pooling", std::string(pooling_name(model.encoder.pooling)));
  kv.set("train.hidden", std::to_string(model.trunk.hidden));
  kv.set("train.blocks", std::to_string(model.trunk.blocks));
  return kv.serialize();
}

std::uint64_t TrainConfig::digest() const { return fnv1a64(serialize()); }

std::array<char, kNumHeads> TrainConfig::head_mask() const {
  std::array<char, kNumHeads> mask{};
  if (heads.empty()) {
    mask.fill(1);
    return mask;
  }
  for (const auto& name : heads) {
    const PropertySpec* spec = Registry::builtin().lookup(name);
    if (spec == nullptr) throw ConfigError("unknown head '" + name + "'");
    mask[spec->head_id] = 1;
  }
  return mask;
}

TrainConfig config_of(const Checkpoint& ckpt) {
  return TrainConfig::from_config(KeyValueConfig::parse(ckpt.config_text));
}

TrainResult train(const TrainConfig& cfg, std::span<const PromptInstance> data) {
  std::vector<PromptInstance> train_set;
  for (const auto& inst : data) {
    if (cfg.variant && inst.variant != *cfg.variant) {
      throw ConfigError("dataset variant " + std::string(variant_name(inst.variant)) +
                        " does not match train.variant");
    }
    if (!inst.test_split) train_set.push_back(inst);
  }
  const auto requested = cfg.head_mask();

  std::array<std::vector<double>, kNumHeads> labels;
  for (const auto& inst : train_set) {
    for (int h = 0; h < kNumHeads; ++h) {
      if (requested[h] && inst.label_mask[h]) labels[h].push_back(inst.labels[h]);
    }
  }
  TrainResult result;
  Checkpoint& ck = result.checkpoint;
  ck.config_text = cfg.serialize();
  ck.config_digest = cfg.digest();
  ck.transform = LabelTransform::fit(labels);
  for (int h = 0; h < kNumHeads; ++h) ck.trained_heads[h] = ck.transform.active[h];
  ck.state = ModelState::init(cfg.model, cfg.seed);

  const std::span<const char> heads(ck.trained_heads.data(), kNumHeads);
  auto examples = prepare_examples(train_set, ck.transform, nullptr, heads,
                                   cfg.model.encoder.vocab);
  ck.density = fit_density(examples);
  examples = prepare_examples(train_set, ck.transform, &ck.density, heads,
                              cfg.model.encoder.vocab);

  ModelGrads grads = ModelGrads::zeros_like(ck.state);
  const auto param_refs = tensors(ck.state, cfg.freeze_embedding);
  const auto grad_refs = tensors(grads, cfg.freeze_embedding);
  Adam adam(cfg, param_refs);
  Rng shuffle_rng(derive_seed(cfg.seed, "shuffle"));

  std::vector<std::size_t> order(examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<const Example*> batch;
  std::size_t batch_index = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double sum = 0.0;
    int batches = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(&examples[order[i]]);
      // Inputs are validated up front, so a contract failure here means the
      // parameters themselves have diverged.
      BatchObjective obj;
      try {
        obj = batch_objective(ck.state, batch, &grads, cfg.freeze_embedding);
      } catch (const ContractViolation& e) {
        throw NonFiniteLoss("non-finite loss at batch " + std::to_string(batch_index) +
                            " (" + e.what() + ")");
      }
      if (!std::isfinite(obj.total)) {
        throw NonFiniteLoss("non-finite loss at batch " + std::to_string(batch_index));
      }
      clip_global_norm(grad_refs, grads.encoder.touched_rows, cfg.clip_norm);
      adam.step(grad_refs, grads.encoder.touched_rows);
      grads.clear();
      sum += obj.total;
      ++batches;
      ++batch_index;
    }
    result.epoch_loss.push_back(batches ? sum / batches : 0.0);
  }
  return result;
}

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  Writer w;
  w.raw(kMagic, sizeof(kMagic));
  w.put<std::uint32_t>(Checkpoint::kVersion);
  w.put<std::uint32_t>(kHashVersion);
  w.bytes(ckpt.config_text);
  w.put<std::uint64_t>(ckpt.config_digest);
  auto refs = tensors(const_cast<ModelState&>(ckpt.state), false);
  const auto aux = aux_tensors(ckpt);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(refs.size() + aux.size()));
  for (const auto& t : refs) {
    w.bytes(t.name);
    w.put<std::uint64_t>(t.rows);
    w.put<std::uint64_t>(t.cols);
    w.raw(t.data, sizeof(double) * t.size());
  }
  for (const auto& a : aux) {
    w.bytes(a.name);
    w.put<std::uint64_t>(a.values.size());
    w.put<std::uint64_t>(1);
    w.raw(a.values.data(), sizeof(double) * a.values.size());
  }
  const std::string& body = w.str();
  const auto crc = static_cast<std::uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(body.data()), static_cast<uInt>(body.size())));
  w.put<std::uint32_t>(crc);
  return std::move(w.str());
}

Checkpoint deserialize_checkpoint(std::string_view bytes) {
  if (bytes.size() < sizeof(kMagic) + 4 ||
      std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw CorruptCheckpoint("not a polyprop checkpoint (bad magic)");
  }
  Reader r(bytes);
  char magic[sizeof(kMagic)];
  r.raw(magic, sizeof(magic));
  const auto version = r.get<std::uint32_t>();
  if (version != Checkpoint::kVersion) {
    throw VersionMismatch("checkpoint format version " + std::to_string(version) +
                          ", expected " + std::to_string(Checkpoint::kVersion));
  }
  if (bytes.size() < 4) throw CorruptCheckpoint("checkpoint truncated");
  const std::string_view body = bytes.substr(0, bytes.size() - 4);
  std::uint32_t stored;
  std::memcpy(&stored, bytes.data() + body.size(), 4);
  const auto crc = static_cast<std::uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(body.data()), static_cast<uInt>(body.size())));
  if (crc != stored) throw CorruptCheckpoint("checkpoint checksum mismatch");

  Reader b(body.substr(sizeof(kMagic) + 4));
  const auto hash_version = b.get<std::uint32_t>();
  if (hash_version != kHashVersion) {
    throw VersionMismatch("checkpoint token hash version " + std::to_string(hash_version));
  }
  Checkpoint ck;
  ck.config_text = b.bytes();
  ck.config_digest = b.get<std::uint64_t>();
  TrainConfig cfg;
  try {
    cfg = TrainConfig::from_config(KeyValueConfig::parse(ck.config_text));
  } catch (const ConfigError& e) {
    throw CorruptCheckpoint(std::string("checkpoint config unreadable: ") + e.what());
  }
  if (cfg.digest() != ck.config_digest) throw CorruptCheckpoint("config digest mismatch");

  // Allocate shapes without paying for a random initialization.
  ModelState& s = ck.state;
  const auto& e = cfg.model.encoder;
  s.encoder.alpha = e.alpha;
  s.encoder.pooling = e.pooling;
  s.encoder.embedding.resize(e.vocab, e.dim);
  s.encoder.w0.resize(e.dim, e.dim);
  s.encoder.lora_a.resize(e.rank, e.dim);
  s.encoder.lora_b.resize(e.dim, e.rank);
  s.encoder.query.resize(e.dim);
  auto& t = s.trunk;
  t.proj_w.resize(cfg.model.trunk.hidden, e.dim);
  t.proj_b.resize(cfg.model.trunk.hidden);
  t.blocks.resize(cfg.model.trunk.blocks);
  for (auto& blk : t.blocks) {
    blk.ln_gain.resize(cfg.model.trunk.hidden);
    blk.ln_bias.resize(cfg.model.trunk.hidden);
    blk.w.resize(cfg.model.trunk.hidden, cfg.model.trunk.hidden);
    blk.b.resize(cfg.model.trunk.hidden);
  }
  t.bottleneck_w.resize(kBottleneckWidth, cfg.model.trunk.hidden);
  t.bottleneck_b.resize(kBottleneckWidth);
  t.head_w.resize(kNumHeads, kBottleneckWidth);
  t.head_b.resize(kNumHeads);
  s.rho.resize(kNumHeads);

  std::map<std::string, TensorRef> by_name;
  for (const auto& ref : tensors(s, false)) by_name.emplace(ref.name, ref);
  std::map<std::string, std::vector<double>> aux;
  const auto count = b.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::string name = b.bytes();
    const auto rows = b.get<std::uint64_t>();
    const auto cols = b.get<std::uint64_t>();
    if (cols != 0 && rows > (std::uint64_t(1) << 40) / cols) {
      throw CorruptCheckpoint("tensor " + name + " has an absurd shape");
    }
    const auto it = by_name.find(name);
    if (it != by_name.end()) {
      if (static_cast<Eigen::Index>(rows) != it->second.rows ||
          static_cast<Eigen::Index>(cols) != it->second.cols) {
        throw CorruptCheckpoint("tensor " + name + " shape disagrees with config");
      }
      b.raw(it->second.data, sizeof(double) * rows * cols);
      by_name.erase(it);
    } else {
      std::vector<double> v(rows * cols);
      b.raw(v.data(), sizeof(double) * v.size());
      aux[name] = std::move(v);
    }
  }
  if (!b.done()) throw CorruptCheckpoint("trailing bytes in checkpoint");
  if (!by_name.empty()) throw CorruptCheckpoint("missing tensor " + by_name.begin()->first);

  auto take = [&](const std::string& name, std::size_t n) {
    const auto it = aux.find(name);
    if (it == aux.end() || (n && it->second.size() != n)) {
      throw CorruptCheckpoint("missing or malformed " + name);
    }
    return it->second;
  };
  const auto active = take("transform.active", kNumHeads);
  const auto log = take("transform.log_space", kNumHeads);
  const auto mean = take("transform.mean", kNumHeads);
  const auto sd = take("transform.stddev", kNumHeads);
  const auto trained = take("heads.trained", kNumHeads);
  ck.transform.dropped_nonpositive = static_cast<int>(take("transform.dropped", 1)[0]);
  for (int h = 0; h < kNumHeads; ++h) {
    ck.transform.active[h] = active[h] != 0.0;
    ck.transform.log_space[h] = log[h] != 0.0;
    ck.transform.mean[h] = mean[h];
    ck.transform.stddev[h] = sd[h];
    ck.trained_heads[h] = trained[h] != 0.0;
    const std::string p = "density." + std::to_string(h) + ".";
    if (!aux.count(p + "params")) continue;
    HeadDensity& d = ck.density.heads[h];
    const auto params = take(p + "params", 3);
    d.bandwidth = params[0];
    d.epsilon = params[1];
    d.scale = params[2];
    d.train = take(p + "train", 0);
    d.weights = take(p + "weights", d.train.size());
  }
  return ck;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  write_file(path, serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::string& path) {
  return deserialize_checkpoint(read_file(path));
}

}  // namespace polyprop
