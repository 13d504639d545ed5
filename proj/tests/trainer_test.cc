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
#include <cstring>
#include <limits>

#include <gtest/gtest.h>

#include "polyprop/config.h"
#include "polyprop/extraction.h"
#include "polyprop/metrics.h"
#include "polyprop/text.h"
#include "polyprop/trainer.h"
#include "test_support.h"

namespace polyprop {
namespace {

using testing::head;
using testing::source_path;

const std::vector<PromptInstance>& smoke_data() {
  static const std::vector<PromptInstance> data = [] {
    const auto ex = extract_document(read_file(source_path("tests/fixtures/smoke_docs.txt")));
    return build_dataset(ex, {Variant::kSampleSynthesis, 0.2, 7});
  }();
  return data;
}

TrainConfig smoke_config(int epochs) {
  auto cfg = TrainConfig::from_config(
      KeyValueConfig::load(source_path("tests/fixtures/smoke.cfg")));
  cfg.epochs = epochs;
  return cfg;
}

bool same_tensors(Checkpoint& a, Checkpoint& b) {
  auto ta = tensors(a.state, false);
  auto tb = tensors(b.state, false);
  if (ta.size() != tb.size()) return false;
  for (std::size_t i = 0; i < ta.size(); ++i) {
    if (ta[i].name != tb[i].name || ta[i].size() != tb[i].size()) return false;
    if (std::memcmp(ta[i].data, tb[i].data, sizeof(double) * ta[i].size()) != 0) {
      return false;
    }
  }
  return true;
}

TEST(TrainConfig, ParsesAndRejectsUnknownKeys) {
  auto kv = KeyValueConfig::parse("train.epochs = 3\ntrain.batch_size = 8\n"
                                  "train.pooling = mean\ntrain.heads = tg, mw\n");
  const auto cfg = TrainConfig::from_config(kv);
  EXPECT_EQ(cfg.epochs, 3);
  EXPECT_EQ(cfg.batch_size, 8);
  EXPECT_EQ(cfg.model.encoder.pooling, PoolingMode::kMean);
  const auto mask = cfg.head_mask();
  EXPECT_TRUE(mask[head("tg")] && mask[head("mw")] && !mask[head("tm")]);
  EXPECT_THROW(TrainConfig::from_config(KeyValueConfig::parse("train.epoch = 3\n")),
               ConfigError);
  EXPECT_THROW(TrainConfig::from_config(KeyValueConfig::parse("train.heads = shoe\n")),
               ConfigError);
}

TEST(TrainConfig, SerializeIsStableAndDigestSensitive) {
  auto a = smoke_config(3);
  auto b = TrainConfig::from_config(KeyValueConfig::parse(a.serialize()));
  EXPECT_EQ(a.serialize(), b.serialize());
  b.learning_rate *= 2;
  EXPECT_NE(a.digest(), b.digest());
}

TEST(Train, ZeroEpochsEqualsInitialization) {
  const auto cfg = smoke_config(0);
  auto r = train(cfg, smoke_data());
  EXPECT_TRUE(r.epoch_loss.empty());
  Checkpoint init;
  init.state = ModelState::init(cfg.model, cfg.seed);
  EXPECT_TRUE(same_tensors(r.checkpoint, init));
}

TEST(Train, SameSeedGivesIdenticalCheckpointAndTrace) {
  const auto cfg = smoke_config(2);
  auto a = train(cfg, smoke_data());
  auto b = train(cfg, smoke_data());
  EXPECT_EQ(a.epoch_loss, b.epoch_loss);
  EXPECT_EQ(serialize_checkpoint(a.checkpoint), serialize_checkpoint(b.checkpoint));
  auto c = cfg;
  c.seed += 1;
  auto d = train(c, smoke_data());
  EXPECT_NE(serialize_checkpoint(a.checkpoint), serialize_checkpoint(d.checkpoint));
}

TEST(Train, LossTraceSettlesAfterThirdEpoch) {
  const auto r = train(smoke_config(12), smoke_data());
  ASSERT_EQ(r.epoch_loss.size(), 12u);
  for (std::size_t e = 3; e < r.epoch_loss.size(); ++e) {
    const double prev = r.epoch_loss[e - 1];
    // Allow transient increases up to 10% of the previous magnitude.
    EXPECT_LE(r.epoch_loss[e], prev + 0.1 * std::fabs(prev)) << "epoch " << e;
  }
  EXPECT_LT(r.epoch_loss.back(), r.epoch_loss.front());
}

TEST(Train, MemorizesOneSample) {
  std::vector<PromptInstance> data = {
      testing::instance("A", "[Sample]\nPLA film", {{head("tg"), 60.0}}),
      testing::instance("B", "[Sample]\nPCL film", {{head("tg"), -60.0}})};
  TrainConfig cfg;
  // Adam moves rho about one step size per update and the loss follows
  // exp(rho) down, so a tight fit needs a few thousand steps.
  cfg.epochs = 3000;
  cfg.batch_size = 2;
  cfg.heads = {"tg"};
  cfg.learning_rate = 1e-3;
  const auto r = train(cfg, data);
  const auto& ck = r.checkpoint;
  for (const auto& inst : data) {
    const auto buckets = token_buckets(tokenize(inst.text), cfg.model.encoder.vocab);
    const double pred = predict(ck.state, buckets)(head("tg"));
    const double target = ck.transform.normalize(head("tg"), inst.labels[head("tg")]);
    EXPECT_LT((pred - target) * (pred - target), 1e-3);
  }
}

TEST(Train, VariantMismatchRejected) {
  auto cfg = smoke_config(1);
  cfg.variant = Variant::kSampleOnly;
  EXPECT_THROW(train(cfg, smoke_data()), ConfigError);
}

TEST(Train, DivergenceReportsBatch) {
  auto cfg = smoke_config(3);
  cfg.learning_rate = 1e250;
  try {
    train(cfg, smoke_data());
    FAIL() << "expected NonFiniteLoss";
  } catch (const NonFiniteLoss& e) {
    EXPECT_NE(std::string(e.what()).find("batch"), std::string::npos);
  }
}

TEST(Train, OnlyRequestedHeadsAreTrained) {
  auto cfg = smoke_config(1);
  cfg.heads = {"tg", "density"};
  const auto r = train(cfg, smoke_data());
  for (int h = 0; h < kNumHeads; ++h) {
    EXPECT_EQ(bool(r.checkpoint.trained_heads[h]), h == head("tg") || h == head("density"));
  }
  // Untrained heads keep their initial rho.
  EXPECT_EQ(r.checkpoint.state.rho(head("tm")), 0.0);
}

// With every tm label removed, tm's own parameters stay at initialization
// and listing tm among the trained heads changes no tensor at all.
TEST(Train, HeadWithoutLabelsIsInert) {
  auto data = smoke_data();
  const int tm = head("tm");
  for (auto& inst : data) {
    inst.labels[tm] = std::numeric_limits<double>::quiet_NaN();
    inst.label_mask[tm] = 0;
  }
  auto with = smoke_config(2);
  with.heads.clear();
  for (int h = 0; h < kNumHeads; ++h) {
    if (h != head("tm")) with.heads.push_back(Registry::builtin().spec(h).name);
  }
  auto without = with;
  with.heads.push_back("tm");
  auto a = train(with, data).checkpoint;
  auto b = train(without, data).checkpoint;
  const auto init = ModelState::init(with.model, with.seed);
  EXPECT_EQ(a.state.rho(tm), 0.0);
  EXPECT_EQ(a.state.trunk.head_b(tm), init.trunk.head_b(tm));
  EXPECT_EQ(Vector(a.state.trunk.head_w.row(tm)), Vector(init.trunk.head_w.row(tm)));
  const auto ta = tensors(a.state, false);
  const auto tb = tensors(b.state, false);
  ASSERT_EQ(ta.size(), tb.size());
  for (std::size_t i = 0; i < ta.size(); ++i) {
    if (ta[i].data == nullptr) continue;
    EXPECT_EQ(0, std::memcmp(ta[i].data, tb[i].data, sizeof(double) * ta[i].size()))
        << ta[i].name;
  }
}

class CheckpointFile : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    ckpt_ = new Checkpoint(train(smoke_config(1), smoke_data()).checkpoint);
  }
  static void TearDownTestSuite() { delete ckpt_; }
  static Checkpoint* ckpt_;
};
Checkpoint* CheckpointFile::ckpt_ = nullptr;

TEST_F(CheckpointFile, RoundTripIsBitwise) {
  const auto dir = testing::scratch_dir("ckpt");
  const std::string path = (dir / "a.bin").string();
  save_checkpoint(*ckpt_, path);
  Checkpoint back = load_checkpoint(path);
  EXPECT_TRUE(same_tensors(*ckpt_, back));
  EXPECT_EQ(back.config_text, ckpt_->config_text);
  EXPECT_EQ(back.config_digest, ckpt_->config_digest);
  EXPECT_EQ(back.trained_heads, ckpt_->trained_heads);
  for (int h = 0; h < kNumHeads; ++h) {
    EXPECT_EQ(back.transform.mean[h], ckpt_->transform.mean[h]);
    EXPECT_EQ(back.transform.stddev[h], ckpt_->transform.stddev[h]);
    EXPECT_EQ(back.density.heads[h].weights, ckpt_->density.heads[h].weights);
    EXPECT_EQ(back.density.heads[h].bandwidth, ckpt_->density.heads[h].bandwidth);
  }
  EXPECT_EQ(serialize_checkpoint(back), serialize_checkpoint(*ckpt_));
}

TEST_F(CheckpointFile, TruncationDetected) {
  const std::string bytes = serialize_checkpoint(*ckpt_);
  for (std::size_t len : {std::size_t{0}, std::size_t{7}, std::size_t{20},
                          bytes.size() / 2, bytes.size() - 1}) {
    EXPECT_THROW(deserialize_checkpoint(std::string_view(bytes).substr(0, len)),
                 CorruptCheckpoint)
        << len;
  }
}

TEST_F(CheckpointFile, BitFlipDetected) {
  std::string bytes = serialize_checkpoint(*ckpt_);
  bytes[bytes.size() / 3] ^= 0x10;
  EXPECT_THROW(deserialize_checkpoint(bytes), CorruptCheckpoint);
}

TEST_F(CheckpointFile, VersionBumpDetected) {
  std::string bytes = serialize_checkpoint(*ckpt_);
  // Version follows the 8-byte magic, little endian.
  bytes[8] = static_cast<char>(Checkpoint::kVersion + 1);
  EXPECT_THROW(deserialize_checkpoint(bytes), VersionMismatch);
}

TEST_F(CheckpointFile, WrongMagicDetected) {
  std::string bytes = serialize_checkpoint(*ckpt_);
  bytes[0] = 'X';
  EXPECT_THROW(deserialize_checkpoint(bytes), CorruptCheckpoint);
}

TEST_F(CheckpointFile, EvaluationAfterReloadIsIdentical) {
  const auto dir = testing::scratch_dir("ckpt_eval");
  const std::string path = (dir / "a.bin").string();
  save_checkpoint(*ckpt_, path);
  const Checkpoint back = load_checkpoint(path);
  EXPECT_EQ(report_to_tsv(evaluate(*ckpt_, smoke_data())),
            report_to_tsv(evaluate(back, smoke_data())));
}

}  // namespace
}  // namespace polyprop
