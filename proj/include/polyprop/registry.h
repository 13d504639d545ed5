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

#ifndef POLYPROP_REGISTRY_H_
#define POLYPROP_REGISTRY_H_

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "polyprop/common.h"

namespace polyprop {

enum class Group { kThermal, kMechanical, kElectricalTransport, kPhysicochemical };

std::string_view group_name(Group g);
std::optional<Group> parse_group(std::string_view s);

// One regression head.
struct PropertySpec {
  int head_id = -1;
  std::string name;
  Group group = Group::kThermal;
  std::string canonical_unit;  // "1" for dimensionless heads
  bool log_space = false;
  std::vector<std::string> aliases;  // folded (lowercase, single-spaced)
};

// The 22-head property table. Immutable once constructed, so a const
// Registry can be shared freely between threads.
class Registry {
 public:
  // The table shipped in data/properties.tsv, compiled in.
  static const Registry& builtin();

  // Parses the tab-separated registry format. Validates head count, id
  // permutation, group sizes and alias disjointness; throws ConfigError.
  static Registry parse(std::string_view text);
  static Registry load(const std::string& path);

  std::string serialize() const;

  // Returns nullptr (unmapped) when no alias matches after folding.
  const PropertySpec* lookup(std::string_view alias) const;

  const PropertySpec& spec(int head_id) const;
  bool is_log_space(int head_id) const { return spec(head_id).log_space; }
  const std::array<PropertySpec, kNumHeads>& specs() const { return specs_; }

  std::vector<int> heads_in(Group g) const;

  // Longest alias length in words; bounds the extractor's phrase search.
  int max_alias_words() const { return max_alias_words_; }

 private:
  std::array<PropertySpec, kNumHeads> specs_;
  std::map<std::string, int, std::less<>> alias_index_;
  int max_alias_words_ = 0;
};

// Free-function spellings of the registry operations.
inline const PropertySpec* lookup_property(std::string_view alias) {
  return Registry::builtin().lookup(alias);
}
inline bool is_log_space(int head_id) {
  return Registry::builtin().is_log_space(head_id);
}

}  // namespace polyprop

#endif  // POLYPROP_REGISTRY_H_
