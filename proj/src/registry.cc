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

#include "polyprop/registry.h"

#include <algorithm>
#include <sstream>

#include "polyprop/text.h"

namespace polyprop {

extern const char* const kBuiltinRegistryTsv;

namespace {

constexpr int kExpectedGroupSize[] = {5, 8, 3, 6};

int count_words(std::string_view s) {
  int n = 1;
  for (char c : s) n += (c == ' ');
  return n;
}

}  // namespace

std::string_view group_name(Group g) {
  switch (g) {
    case Group::kThermal: return "thermal";
    case Group::kMechanical: return "mechanical";
    case Group::kElectricalTransport: return "electrical_transport";
    case Group::kPhysicochemical: return "physicochemical";
  }
  return "?";
}

std::optional<Group> parse_group(std::string_view s) {
  if (s == "thermal") return Group::kThermal;
  if (s == "mechanical") return Group::kMechanical;
  if (s == "electrical_transport") return Group::kElectricalTransport;
  if (s == "physicochemical") return Group::kPhysicochemical;
  return std::nullopt;
}

const Registry& Registry::builtin() {
  static const Registry registry = parse(kBuiltinRegistryTsv);
  return registry;
}

Registry Registry::load(const std::string& path) {
  return parse(read_file(path));
}

Registry Registry::parse(std::string_view text) {
  Registry reg;
  std::array<bool, kNumHeads> seen{};
  int rows = 0;
  int line_no = 0;
  for (const std::string& raw : split(text, '\n')) {
    ++line_no;
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split(raw, '\t');
    const auto where = "registry line " + std::to_string(line_no);
    if (fields.size() != 6) throw ConfigError(where + ": expected 6 fields");
    PropertySpec spec;
    try {
      spec.head_id = std::stoi(fields[0]);
    } catch (const std::exception&) {
      throw ConfigError(where + ": bad head id");
    }
    if (spec.head_id < 0 || spec.head_id >= kNumHeads) {
      throw ConfigError(where + ": head id out of range");
    }
    if (seen[spec.head_id]) throw ConfigError(where + ": duplicate head id");
    seen[spec.head_id] = true;
    spec.name = std::string(trim(fields[1]));
    const auto group = parse_group(trim(fields[2]));
    if (!group) throw ConfigError(where + ": unknown group");
    spec.group = *group;
    spec.canonical_unit = std::string(trim(fields[3]));
    const auto flag = trim(fields[4]);
    if (flag != "0" && flag != "1") throw ConfigError(where + ": bad log flag");
    spec.log_space = flag == "1";
    for (const std::string& a : split(fields[5], ';')) {
      std::string folded = fold(a);
      if (folded.empty()) continue;
      spec.aliases.push_back(folded);
    }
    if (std::find(spec.aliases.begin(), spec.aliases.end(), fold(spec.name)) ==
        spec.aliases.end()) {
      spec.aliases.insert(spec.aliases.begin(), fold(spec.name));
    }
    for (const std::string& a : spec.aliases) {
      auto [it, inserted] = reg.alias_index_.emplace(a, spec.head_id);
      if (!inserted && it->second != spec.head_id) {
        throw ConfigError(where + ": alias '" + a + "' already maps to head " +
                          std::to_string(it->second));
      }
      reg.max_alias_words_ = std::max(reg.max_alias_words_, count_words(a));
    }
    reg.specs_[spec.head_id] = std::move(spec);
    ++rows;
  }
  if (rows != kNumHeads) {
    throw ConfigError("registry must define exactly 22 heads, got " +
                      std::to_string(rows));
  }
  int group_size[4] = {0, 0, 0, 0};
  for (const auto& s : reg.specs_) ++group_size[static_cast<int>(s.group)];
  for (int g = 0; g < 4; ++g) {
    if (group_size[g] != kExpectedGroupSize[g]) {
      throw ConfigError("registry group '" +
                        std::string(group_name(static_cast<Group>(g))) +
                        "' has " + std::to_string(group_size[g]) + " heads");
    }
  }
  return reg;
}

std::string Registry::serialize() const {
  std::ostringstream out;
  out << "# polyprop property registry, format version 1\n"
      << "# id\tname\tgroup\tunit\tlog_space\taliases (';'-separated, "
         "lowercase)\n";
  for (const auto& s : specs_) {
    out << s.head_id << '\t' << s.name << '\t' << group_name(s.group) << '\t'
        << s.canonical_unit << '\t' << (s.log_space ? 1 : 0) << '\t';
    for (std::size_t i = 0; i < s.aliases.size(); ++i) {
      if (i) out << ';';
      out << s.aliases[i];
    }
    out << '\n';
  }
  return out.str();
}

const PropertySpec* Registry::lookup(std::string_view alias) const {
  const std::string key = fold(alias);
  if (key.empty()) return nullptr;
  auto it = alias_index_.find(key);
  return it == alias_index_.end() ? nullptr : &specs_[it->second];
}

const PropertySpec& Registry::spec(int head_id) const {
  require(head_id >= 0 && head_id < kNumHeads, "unknown head id");
  return specs_[head_id];
}

std::vector<int> Registry::heads_in(Group g) const {
  std::vector<int> out;
  for (const auto& s : specs_) {
    if (s.group == g) out.push_back(s.head_id);
  }
  return out;
}

}  // namespace polyprop
