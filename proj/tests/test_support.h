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

#ifndef POLYPROP_TESTS_TEST_SUPPORT_H_
#define POLYPROP_TESTS_TEST_SUPPORT_H_

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "polyprop/common.h"
#include "polyprop/prompt.h"
#include "polyprop/registry.h"

namespace polyprop::testing {

inline std::string source_path(const std::string& rel) {
  return std::string(POLYPROP_SOURCE_DIR) + "/" + rel;
}

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("polyprop_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline int head(const std::string& name) {
  const PropertySpec* spec = Registry::builtin().lookup(name);
  if (!spec) throw ContractViolation("unknown head in test: " + name);
  return spec->head_id;
}

inline PromptInstance instance(const std::string& id, const std::string& text,
                               std::vector<std::pair<int, double>> labels,
                               bool test_split = false) {
  PromptInstance p;
  p.sample_id = id;
  p.text = text;
  p.test_split = test_split;
  p.labels.fill(std::nan(""));
  for (auto [h, v] : labels) {
    p.labels[h] = v;
    p.label_mask[h] = true;
  }
  return p;
}

}  // namespace polyprop::testing

#endif  // POLYPROP_TESTS_TEST_SUPPORT_H_
