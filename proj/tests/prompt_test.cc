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
#include <cstdio>

#include <gtest/gtest.h>

#include "polyprop/extraction.h"
#include "polyprop/prompt.h"
#include "polyprop/units.h"
#include "test_support.h"

namespace polyprop {
namespace {

using testing::head;

TEST(BuildPrompt, BothBlocks) {
  EXPECT_EQ(build_prompt("PLA film", "annealed 2 h at 80 °C", Variant::kSampleSynthesis),
            "[Sample]\nPLA film\n[Synthesis]\nannealed 2 h at 80 °C");
}

TEST(BuildPrompt, SampleOnlyDropsSynthesis) {
  const auto p = build_prompt("PLA film", "annealed 2 h at 80 °C", Variant::kSampleOnly);
  EXPECT_EQ(p.find("[Synthesis]"), std::string::npos);
  EXPECT_EQ(p.find("annealed"), std::string::npos);
}

TEST(BuildPrompt, EmptySynthesisKeepsHeader) {
  EXPECT_EQ(build_prompt("PLA film", "", Variant::kSampleSynthesis),
            "[Sample]\nPLA film\n[Synthesis]\n");
}

TEST(BuildPrompt, EmptySampleThrows) {
  EXPECT_THROW(build_prompt("  ", "x", Variant::kSampleSynthesis), EmptySample);
}

TEST(MaskLabels, Examples) {
  const std::vector<TargetValue> tg = {{head("tg"), 105.0}};
  EXPECT_EQ(mask_labels("Tg of 105 °C, cured at 120 °C", tg),
            "Tg of [MASKED] °C, cured at 120 °C");
  EXPECT_EQ(mask_labels("Tg reported as 378 K", tg), "Tg reported as [MASKED] K");
  EXPECT_EQ(mask_labels("cured at 120 °C for 2 h", tg), "cured at 120 °C for 2 h");
}

TEST(MaskLabels, ScientificLiteralMaskedWhole) {
  const std::vector<TargetValue> mw = {{head("mw"), 1.2e5}};
  EXPECT_EQ(mask_labels("grade with Mw 1.2 × 10^5 g/mol", mw),
            "grade with Mw [MASKED] g/mol");
  EXPECT_EQ(mask_labels("grade with Mw 120 kg/mol", mw), "grade with Mw [MASKED] kg/mol");
}

TEST(MaskLabels, ToleranceBoundary) {
  const std::vector<TargetValue> t = {{head("tensile_strength"), 100.0}};
  EXPECT_EQ(mask_labels("at 100.4 MPa", t), "at [MASKED] MPa");
  EXPECT_EQ(mask_labels("at 101 MPa", t), "at 101 MPa");
}

// Target values written in every unit of their dimension, embedded in prose
// with unrelated numbers, never survive masking.
TEST(MaskLabels, RandomCrossUnitMentionsAreScrubbed) {
  Rng rng(17);
  const char* heads[] = {"tg", "tensile_strength", "mn", "viscosity", "density",
                         "electrical_conductivity"};
  for (int trial = 0; trial < 300; ++trial) {
    const int h = head(heads[rng.below(std::size(heads))]);
    const auto& spec = Registry::builtin().spec(h);
    const double canonical = 1.0 + std::round(rng.uniform() * 5000) / 10.0;
    const auto units = units_of(head_dimension(spec));
    const Unit* u = units[rng.below(units.size())];
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.5g", u->from_canonical(canonical));
    const std::string text = "made at 7 bar, value " + std::string(buf) + " " +
                             std::string(u->symbol) + ", dried 12 h";
    PromptInstance inst = testing::instance("X", "", {{h, canonical}});
    inst.text = build_prompt(mask_labels(text, inst.targets()), "", Variant::kSampleOnly);
    const std::vector<PromptInstance> one = {inst};
    EXPECT_TRUE(scan_leakage(one).empty()) << text << " -> " << inst.text;
    EXPECT_NE(inst.text.find("12 h"), std::string::npos) << inst.text;
  }
}

TEST(ScanLeakage, FindsUnmaskedTarget) {
  const std::vector<PromptInstance> data = {
      testing::instance("X", "[Sample]\nPLA with Tg 105 °C", {{head("tg"), 105.0}})};
  const auto hits = scan_leakage(data);
  ASSERT_FALSE(hits.empty());
  EXPECT_EQ(hits[0].head_id, head("tg"));
}

TEST(Split, DeterministicAndRoughlyProportional) {
  int test = 0;
  for (int i = 0; i < 10000; ++i) {
    const std::string id = "S" + std::to_string(i);
    const bool t = is_test_sample(id, 4, 0.2);
    EXPECT_EQ(t, is_test_sample(id, 4, 0.2));
    test += t;
  }
  EXPECT_NEAR(test / 10000.0, 0.2, 0.02);
}

const char* kDoc =
    "== SAMPLE A ==\nSample: PLA film, Tg 105 °C\nSynthesis: annealed at 378 K\n"
    "Tg = 105 °C. Tg = 99 °C. Tm of 150–160 °C. tensile strength > 40 MPa.\n"
    "== END SAMPLE ==\n"
    "== SAMPLE B ==\nSample: PCL\nSynthesis: none\nhardness 80 Shore\n"
    "== END SAMPLE ==\n";

TEST(BuildDataset, FirstObservationWinsAndLimitsCarryNoLabel) {
  const auto ex = extract_document(kDoc);
  const auto data = build_dataset(ex, {});
  ASSERT_EQ(data.size(), 1u);  // B has no labels
  const auto& a = data[0];
  EXPECT_DOUBLE_EQ(a.labels[head("tg")], 105.0);
  EXPECT_DOUBLE_EQ(a.labels[head("tm")], 155.0);
  EXPECT_FALSE(a.label_mask[head("tensile_strength")]);
  EXPECT_EQ(a.num_labels(), 2);
  EXPECT_EQ(a.text, "[Sample]\nPLA film, Tg [MASKED] °C\n[Synthesis]\nannealed at [MASKED] K");
}

TEST(BuildDataset, LabelFiniteIffMasked) {
  const auto data = build_dataset(extract_document(kDoc), {});
  for (const auto& inst : data) {
    for (int h = 0; h < kNumHeads; ++h) {
      EXPECT_EQ(std::isfinite(inst.labels[h]), inst.label_mask[h]);
    }
  }
}

TEST(BuildDataset, VariantsShareTheSplit) {
  std::string big;
  for (int i = 0; i < 200; ++i) {
    big += "== SAMPLE S" + std::to_string(i) +
           " ==\nSample: PLA\nSynthesis: dried\nTg = " + std::to_string(50 + i) +
           " °C.\n== END SAMPLE ==\n";
  }
  const auto ex = extract_document(big);
  const auto a = build_dataset(ex, {Variant::kSampleSynthesis, 0.3, 9});
  const auto b = build_dataset(ex, {Variant::kSampleOnly, 0.3, 9});
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].sample_id, b[i].sample_id);
    EXPECT_EQ(a[i].test_split, b[i].test_split);
    EXPECT_EQ(b[i].variant, Variant::kSampleOnly);
  }
}

TEST(DatasetTsv, RoundTrip) {
  const auto data = build_dataset(extract_document(kDoc), {});
  const std::string tsv = dataset_to_tsv(data);
  const auto back = dataset_from_tsv(tsv);
  ASSERT_EQ(back.size(), data.size());
  EXPECT_EQ(back[0].text, data[0].text);
  EXPECT_EQ(back[0].label_mask, data[0].label_mask);
  EXPECT_EQ(dataset_to_tsv(back), tsv);
}

}  // namespace
}  // namespace polyprop
