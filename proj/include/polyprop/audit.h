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

#ifndef POLYPROP_AUDIT_H_
#define POLYPROP_AUDIT_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "polyprop/extraction.h"

namespace polyprop {

// One manually annotated record. `quantity` is absent when the source states
// no single value (e.g. an equation); `unit` is absent for unitless values.
struct GoldRecord {
  std::string record_id;
  std::string sample_id;
  int head_id = -1;
  std::optional<Quantity> quantity;
  std::optional<std::string> unit;
  std::string note;
};

// Tab-separated: record_id, sample_id, head, value, unit, note.
// value is "105", "150..160", ">200", "<5" or "-"; unit "-" means none.
std::vector<GoldRecord> parse_gold(std::string_view tsv,
                                   const Registry& registry = Registry::builtin());

struct AuditReport {
  int n = 0;
  int sample_assoc_correct = 0;
  int property_correct = 0;
  int value_correct = 0;
  int unit_correct = 0;
  int strict_correct = 0;

  double sample_assoc_precision() const { return ratio(sample_assoc_correct); }
  double property_precision() const { return ratio(property_correct); }
  double value_precision() const { return ratio(value_correct); }
  double unit_precision() const { return ratio(unit_correct); }
  double strict_precision() const { return ratio(strict_correct); }

 private:
  double ratio(int k) const { return n == 0 ? 0.0 : double(k) / n; }
};

// Scores extracted records against gold by record id. A record is strictly
// correct when sample, property, value and unit are all correct.
// Throws MismatchedIds when the two id sets differ.
AuditReport audit(const std::vector<PropertyObservation>& extracted,
                  const std::vector<GoldRecord>& gold);

std::string audit_table(const AuditReport& r);

}  // namespace polyprop

#endif  // POLYPROP_AUDIT_H_
