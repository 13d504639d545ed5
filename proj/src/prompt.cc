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

#include "polyprop/prompt.h"

#include <cmath>
#include <map>
#include <regex>
#include <sstream>

#include "polyprop/text.h"
#include "polyprop/units.h"

namespace polyprop {
namespace {

bool within_tolerance(double literal, double target) {
  const double a = std::fabs(literal);
  const double b = std::fabs(target);
  return std::fabs(a - b) <= kMaskTolerance * b;
}

// True when `value` equals some target in some unit of its dimension.
bool matches_any_target(double value, std::span<const TargetValue> targets) {
  for (const auto& t : targets) {
    const PropertySpec& spec = Registry::builtin().spec(t.head_id);
    for (const Unit* u : units_of(head_dimension(spec))) {
      if (within_tolerance(value, u->from_canonical(t.canonical_value))) {
        return true;
      }
    }
  }
  return false;
}

// Maximal runs of the form digits[.digits] inside a literal.
std::vector<double> digit_runs(std::string_view s) {
  std::vector<double> out;
  std::size_t i = 0;
  while (i < s.size()) {
    if (!is_ascii_digit(s[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < s.size() && is_ascii_digit(s[j])) ++j;
    if (j + 1 < s.size() && s[j] == '.' && is_ascii_digit(s[j + 1])) {
      ++j;
      while (j < s.size() && is_ascii_digit(s[j])) ++j;
    }
    out.push_back(std::stod(std::string(s.substr(i, j - i))));
    i = j;
  }
  return out;
}

}  // namespace

std::string_view variant_name(Variant v) {
  return v == Variant::kSampleSynthesis ? "sample_synthesis" : "sample_only";
}

std::optional<Variant> parse_variant(std::string_view s) {
  if (s == "sample_synthesis") return Variant::kSampleSynthesis;
  if (s == "sample_only") return Variant::kSampleOnly;
  return std::nullopt;
}

std::string build_prompt(std::string_view sample_desc,
                         std::string_view synthesis_desc, Variant variant) {
  const std::string_view sample = trim(sample_desc);
  if (sample.empty()) throw EmptySample("sample description is blank");
  std::string out = "[Sample]\n";
  out += sample;
  if (variant == Variant::kSampleSynthesis) {
    out += "\n[Synthesis]\n";
    out += trim(synthesis_desc);
  }
  return out;
}

std::string mask_labels(std::string_view text,
                        std::span<const TargetValue> targets) {
  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    if (!is_ascii_digit(text[pos])) {
      out.push_back(text[pos++]);
      continue;
    }
    const auto tok = lex_number(text.substr(pos));
    const std::size_t len = tok ? tok->length : 1;
    const std::string_view literal = text.substr(pos, len);
    bool hit = tok && matches_any_target(tok->value, targets);
    if (!hit) {
      for (double run : digit_runs(literal)) {
        if (matches_any_target(run, targets)) {
          hit = true;
          break;
        }
      }
    }
    if (hit) {
      out += kMaskToken;
    } else {
      out += literal;
    }
    pos += len;
  }
  return out;
}

std::vector<TargetValue> PromptInstance::targets() const {
  std::vector<TargetValue> out;
  for (int h = 0; h < kNumHeads; ++h) {
    if (label_mask[h]) out.push_back({h, labels[h]});
  }
  return out;
}

int PromptInstance::num_labels() const {
  int n = 0;
  for (bool b : label_mask) n += b;
  return n;
}

bool is_test_sample(std::string_view sample_id, std::uint64_t split_seed,
                    double test_fraction) {
  const std::uint64_t h = fnv1a64(sample_id, derive_seed(split_seed, "split"));
  return static_cast<double>(h % 1000000) < test_fraction * 1e6;
}

std::vector<PromptInstance> build_dataset(const Extraction& ex,
                                          const DatasetOptions& options) {
  std::map<std::string, std::vector<const PropertyObservation*>> by_sample;
  for (const auto& o : ex.observations) {
    if (o.canonical_value && std::isfinite(*o.canonical_value)) {
      by_sample[o.sample_id].push_back(&o);
    }
  }
  std::vector<PromptInstance> out;
  for (const auto& s : ex.samples) {
    auto it = by_sample.find(s.sample_id);
    if (it == by_sample.end()) continue;
    PromptInstance inst;
    inst.sample_id = s.sample_id;
    inst.variant = options.variant;
    inst.test_split =
        is_test_sample(s.sample_id, options.split_seed, options.test_fraction);
    inst.labels.fill(std::nan(""));
    for (const PropertyObservation* o : it->second) {
      if (inst.label_mask[o->head_id]) continue;
      inst.label_mask[o->head_id] = true;
      inst.labels[o->head_id] = *o->canonical_value;
    }
    const auto targets = inst.targets();
    inst.text = build_prompt(mask_labels(s.sample_text, targets),
                             mask_labels(s.synthesis_text, targets),
                             options.variant);
    out.push_back(std::move(inst));
  }
  return out;
}

std::vector<LeakageHit> scan_leakage(std::span<const PromptInstance> data) {
  static const std::regex plain(R"(\d+(?:\.\d+)?)");
  static const std::regex scientific(
      R"((\d+(?:\.\d+)?)(?:[eE]([-+]?\d+)|\s*(?:×|x|X|·|\*)\s*10\^((?:-|\+|−)?\d+)))");
  std::vector<LeakageHit> hits;
  for (const auto& inst : data) {
    std::vector<std::pair<double, std::string>> literals;
    for (auto it = std::sregex_iterator(inst.text.begin(), inst.text.end(), plain);
         it != std::sregex_iterator(); ++it) {
      literals.emplace_back(std::stod(it->str()), it->str());
    }
    for (auto it = std::sregex_iterator(inst.text.begin(), inst.text.end(),
                                        scientific);
         it != std::sregex_iterator(); ++it) {
      std::string exp = (*it)[2].matched ? (*it)[2].str() : (*it)[3].str();
      if (exp.rfind("−", 0) == 0) exp = "-" + exp.substr(std::string("−").size());
      const double v = std::stod((*it)[1].str()) * std::pow(10.0, std::stod(exp));
      literals.emplace_back(v, it->str());
    }
    for (int h = 0; h < kNumHeads; ++h) {
      if (!inst.label_mask[h]) continue;
      const PropertySpec& spec = Registry::builtin().spec(h);
      for (const Unit* u : units_of(head_dimension(spec))) {
        const double target = std::fabs(u->from_canonical(inst.labels[h]));
        for (const auto& [v, text] : literals) {
          if (std::fabs(std::fabs(v) - target) <= kMaskTolerance * target) {
            hits.push_back({inst.sample_id, h, std::string(u->symbol), text});
          }
        }
      }
    }
  }
  return hits;
}

std::string dataset_to_tsv(std::span<const PromptInstance> data,
                           const Registry& registry) {
  std::ostringstream body;
  body << "sample_id\tsplit\tvariant\tprompt";
  for (const auto& s : registry.specs()) body << '\t' << s.name;
  body << '\n';
  for (const auto& inst : data) {
    body << inst.sample_id << '\t' << (inst.test_split ? "test" : "train")
         << '\t' << variant_name(inst.variant) << '\t'
         << escape_field(inst.text);
    for (int h = 0; h < kNumHeads; ++h) {
      body << '\t' << (inst.label_mask[h] ? format_double(inst.labels[h]) : "NA");
    }
    body << '\n';
  }
  const std::string content = body.str();
  return content + "# digest=" + hex64(fnv1a64(content)) + "\n";
}

std::vector<PromptInstance> dataset_from_tsv(std::string_view text,
                                             const Registry& registry) {
  std::vector<PromptInstance> out;
  bool header = true;
  int line_no = 0;
  for (const std::string& raw : split(text, '\n')) {
    ++line_no;
    if (raw.empty() || raw.front() == '#') continue;
    const auto f = split(raw, '\t');
    const auto where = "dataset line " + std::to_string(line_no);
    if (f.size() != 4 + kNumHeads) {
      throw ConfigError(where + ": expected " + std::to_string(4 + kNumHeads) +
                        " fields");
    }
    if (header) {
      header = false;
      for (int h = 0; h < kNumHeads; ++h) {
        if (f[4 + h] != registry.spec(h).name) {
          throw ConfigError(where + ": label columns do not match registry");
        }
      }
      continue;
    }
    PromptInstance inst;
    inst.sample_id = f[0];
    if (f[1] != "train" && f[1] != "test") throw ConfigError(where + ": bad split");
    inst.test_split = f[1] == "test";
    const auto v = parse_variant(f[2]);
    if (!v) throw ConfigError(where + ": bad variant");
    inst.variant = *v;
    inst.text = unescape_field(f[3]);
    for (int h = 0; h < kNumHeads; ++h) {
      const std::string& cell = f[4 + h];
      if (cell == "NA") {
        inst.labels[h] = std::nan("");
        continue;
      }
      try {
        inst.labels[h] = std::stod(cell);
      } catch (const std::exception&) {
        throw ConfigError(where + ": bad label '" + cell + "'");
      }
      if (!std::isfinite(inst.labels[h])) {
        throw ConfigError(where + ": non-finite label");
      }
      inst.label_mask[h] = true;
    }
    out.push_back(std::move(inst));
  }
  return out;
}

}  // namespace polyprop
