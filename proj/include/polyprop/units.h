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

#ifndef POLYPROP_UNITS_H_
#define POLYPROP_UNITS_H_

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "polyprop/registry.h"

namespace polyprop {

enum class Dimension {
  kDimensionless,
  kTemperature,
  kStress,
  kPercent,
  kImpactEnergy,
  kDensity,
  kMolarMass,
  kViscosity,
  kElectricalConductivity,
  kThermalConductivity,
};

// canonical = factor * value + offset. Only temperatures carry an offset.
struct Unit {
  std::string_view symbol;
  Dimension dimension;
  double factor;
  double offset;
  std::vector<std::string_view> spellings;

  double to_canonical(double v) const { return factor * v + offset; }
  double from_canonical(double c) const { return (c - offset) / factor; }
};

// Every registered unit, including the implicit dimensionless unit "1".
std::span<const Unit> all_units();

// Exact spelling lookup (case-sensitive; "MPa" and "mPa" differ).
const Unit* find_unit(std::string_view spelling);

// Resolves a canonical symbol as written in the registry ("1" included).
const Unit& unit_by_symbol(std::string_view symbol);

// Longest registered spelling that prefixes `text` and ends on a token
// boundary. Returns the unit and the number of bytes consumed.
struct UnitMatch {
  const Unit* unit;
  std::size_t length;
};
std::optional<UnitMatch> match_unit_prefix(std::string_view text);

Dimension head_dimension(const PropertySpec& head);
const Unit& canonical_unit(const PropertySpec& head);

// Registered units sharing a dimension, canonical unit first.
std::vector<const Unit*> units_of(Dimension d);

}  // namespace polyprop

#endif  // POLYPROP_UNITS_H_
