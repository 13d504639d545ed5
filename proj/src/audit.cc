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

#include "polyprop/audit.h"

#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "polyprop/text.h"
#include "polyprop/units.h"

namespace polyprop {
namespace {

double parse_number(std::string_view s, const std::string& where) {
  const auto tok = lex_number(trim(s));
  if (!tok || tok->length != trim(s).size()) {
    throw ConfigError(where + ": bad number '" + std::string(s) + "'");
  }
  return tok->value;
}

bool same_number(double a, double b) {
  return std::fabs(a - b) <= 1e-9 * std::max(1.0, std::max(std::fabs(a), std::fabs(b)));
}

bool same_value(const Quantity& a, const Quantity& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case QuantityKind::kPoint:
      return same_number(a.value, b.value);
    case QuantityKind::kRange:
      return same_number(a.lo, b.lo) && same_number(a.hi, b.hi);
    case QuantityKind::kLimit:
      return a.direction == b.direction && same_number(a.value, b.value);
  }
  return false;
}

std::optional<std::string> normalize_unit(const std::optional<std::string>& u) {
  if (!u) return std::nullopt;
  if (const Unit* unit = find_unit(*u)) return std::string(unit->symbol);
  return u;
}

bool is_header_row(std::string_view line) {
  return to_lower_ascii(line.substr(0, 9)) == "record_id";
}

}  // namespace

std::vector<GoldRecord> parse_gold(std::string_view tsv,
                                   const Registry& registry) {
  std::vector<GoldRecord> out;
  int line_no = 0;
  bool header_seen = false;
  for (const std::string& raw : split(tsv, '\n')) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      header_seen = true;
      if (is_header_row(line)) continue;
    }
    const auto where = "gold line " + std::to_string(line_no);
    const auto f = split(raw, '\t');
    if (f.size() < 5) throw ConfigError(where + ": expected at least 5 fields");
    GoldRecord g;
    g.record_id = std::string(trim(f[0]));
    g.sample_id = std::string(trim(f[1]));
    const PropertySpec* spec = registry.lookup(f[2]);
    if (!spec) throw ConfigError(where + ": unknown head '" + f[2] + "'");
    g.head_id = spec->head_id;
    const std::string_view v = trim(f[3]);
    if (v != "-") {
      if (v.front() == '>' || v.front() == '<') {
        g.quantity = Quantity::limit(
            v.front() == '>' ? LimitDirection::kGreater : LimitDirection::kLess,
            parse_number(v.substr(1), where));
      } else if (const auto dots = v.find(".."); dots != std::string_view::npos) {
        g.quantity = Quantity::range(parse_number(v.substr(0, dots), where),
                                     parse_number(v.substr(dots + 2), where));
      } else {
        g.quantity = Quantity::point(parse_number(v, where));
      }
    }
    const std::string_view u = trim(f[4]);
    if (u != "-") g.unit = std::string(u);
    if (f.size() > 5) g.note = std::string(trim(f[5]));
    out.push_back(std::move(g));
  }
  return out;
}

AuditReport audit(const std::vector<PropertyObservation>& extracted,
                  const std::vector<GoldRecord>& gold) {
  std::map<std::string, const GoldRecord*> by_id;
  for (const auto& g : gold) {
    if (!by_id.emplace(g.record_id, &g).second) {
      throw MismatchedIds("duplicate gold record '" + g.record_id + "'");
    }
  }
  if (extracted.size() != gold.size()) {
    throw MismatchedIds("extracted " + std::to_string(extracted.size()) +
                        " records but gold has " + std::to_string(gold.size()));
  }
  AuditReport r;
  std::map<std::string, bool> used;
  for (const auto& e : extracted) {
    auto it = by_id.find(e.record_id);
    if (it == by_id.end()) {
      throw MismatchedIds("record '" + e.record_id + "' missing from gold");
    }
    if (used[e.record_id]) {
      throw MismatchedIds("duplicate extracted record '" + e.record_id + "'");
    }
    used[e.record_id] = true;
    const GoldRecord& g = *it->second;
    const bool sample_ok = e.sample_id == g.sample_id;
    const bool prop_ok = e.head_id == g.head_id;
    const bool value_ok = g.quantity && same_value(e.quantity, *g.quantity);
    const bool unit_ok = normalize_unit(e.quantity.unit) == normalize_unit(g.unit);
    ++r.n;
    r.sample_assoc_correct += sample_ok;
    r.property_correct += prop_ok;
    r.value_correct += value_ok;
    r.unit_correct += unit_ok;
    r.strict_correct += sample_ok && prop_ok && value_ok && unit_ok;
  }
  return r;
}

std::string audit_table(const AuditReport& r) {
  std::ostringstream out;
  char buf[128];
  out << "component\tcorrect\ttotal\tprecision\n";
  auto row = [&](const char* name, int k, double p) {
    std::snprintf(buf, sizeof(buf), "%s\t%d\t%d\t%.3f\n", name, k, r.n, p);
    out << buf;
  };
  row("sample_association", r.sample_assoc_correct, r.sample_assoc_precision());
  row("property_mapping", r.property_correct, r.property_precision());
  row("value_extraction", r.value_correct, r.value_precision());
  row("unit_extraction", r.unit_correct, r.unit_precision());
  row("strict_record", r.strict_correct, r.strict_precision());
  return out.str();
}

}  // namespace polyprop
