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

#include "polyprop/units.h"

#include <string>

#include "polyprop/text.h"

namespace polyprop {
namespace {

using D = Dimension;

// The first entry of each dimension is its canonical unit.
const std::vector<Unit>& table() {
  static const std::vector<Unit> units = {
      {"1", D::kDimensionless, 1.0, 0.0, {}},

      {"°C", D::kTemperature, 1.0, 0.0, {"°C", "℃", "ºC", "degC", "C"}},
      {"K", D::kTemperature, 1.0, -273.15, {"K"}},
      {"°F", D::kTemperature, 5.0 / 9.0, -160.0 / 9.0, {"°F", "℉", "degF"}},

      {"MPa", D::kStress, 1.0, 0.0, {"MPa", "Mpa", "N/mm²", "N/mm2"}},
      {"GPa", D::kStress, 1e3, 0.0, {"GPa", "Gpa"}},
      {"kPa", D::kStress, 1e-3, 0.0, {"kPa"}},
      {"Pa", D::kStress, 1e-6, 0.0, {"Pa"}},
      {"psi", D::kStress, 6.894757293168361e-3, 0.0, {"psi"}},
      {"ksi", D::kStress, 6.894757293168361, 0.0, {"ksi"}},

      {"%", D::kPercent, 1.0, 0.0, {"%"}},

      {"kJ/m²", D::kImpactEnergy, 1.0, 0.0,
       {"kJ/m²", "kJ/m2", "kJ m-2", "kJ·m-2", "kJ m⁻²"}},
      {"J/m²", D::kImpactEnergy, 1e-3, 0.0, {"J/m²", "J/m2", "J m-2"}},

      {"g/cm³", D::kDensity, 1.0, 0.0,
       {"g/cm³", "g/cm3", "g cm-3", "g·cm-3", "g cm⁻³", "g/cc", "g/mL",
        "g/ml"}},
      {"kg/m³", D::kDensity, 1e-3, 0.0, {"kg/m³", "kg/m3", "kg m-3"}},

      {"g/mol", D::kMolarMass, 1.0, 0.0, {"g/mol", "g mol-1", "g·mol-1", "Da"}},
      {"kg/mol", D::kMolarMass, 1e3, 0.0,
       {"kg/mol", "kg mol-1", "kg·mol-1", "kDa"}},

      {"Pa·s", D::kViscosity, 1.0, 0.0,
       {"Pa·s", "Pa s", "Pa.s", "Pa*s", "Pa⋅s"}},
      {"mPa·s", D::kViscosity, 1e-3, 0.0,
       {"mPa·s", "mPa s", "mPa.s", "mPa*s", "mPa⋅s", "cP", "cp"}},

      {"S/cm", D::kElectricalConductivity, 1.0, 0.0,
       {"S/cm", "S cm-1", "S·cm-1", "S cm⁻¹"}},
      {"S/m", D::kElectricalConductivity, 1e-2, 0.0,
       {"S/m", "S m-1", "S·m-1", "S m⁻¹"}},
      {"mS/cm", D::kElectricalConductivity, 1e-3, 0.0,
       {"mS/cm", "mS cm-1", "mS·cm-1"}},
      {"µS/cm", D::kElectricalConductivity, 1e-6, 0.0,
       {"µS/cm", "μS/cm", "uS/cm", "µS cm-1", "μS cm-1"}},

      {"W/(m·K)", D::kThermalConductivity, 1.0, 0.0,
       {"W/(m·K)", "W/(m K)", "W/(m*K)", "W/(m⋅K)", "W/mK", "W/m·K",
        "W/m/K", "W m-1 K-1", "W·m-1·K-1", "W m⁻¹ K⁻¹"}},
      {"mW/(m·K)", D::kThermalConductivity, 1e-3, 0.0,
       {"mW/(m·K)", "mW/(m K)", "mW/mK", "mW m-1 K-1"}},
  };
  return units;
}

bool continues_token(char c) {
  return is_ascii_alpha(c) || is_ascii_digit(c) || c == '_' ||
         (static_cast<unsigned char>(c) >= 0x80);
}

}  // namespace

std::span<const Unit> all_units() { return table(); }

const Unit* find_unit(std::string_view spelling) {
  for (const Unit& u : table()) {
    for (std::string_view s : u.spellings) {
      if (s == spelling) return &u;
    }
  }
  return nullptr;
}

const Unit& unit_by_symbol(std::string_view symbol) {
  for (const Unit& u : table()) {
    if (u.symbol == symbol) return u;
  }
  throw ConfigError("unknown unit symbol '" + std::string(symbol) + "'");
}

std::optional<UnitMatch> match_unit_prefix(std::string_view text) {
  std::optional<UnitMatch> best;
  for (const Unit& u : table()) {
    for (std::string_view s : u.spellings) {
      if (text.size() < s.size() || text.substr(0, s.size()) != s) continue;
      if (text.size() > s.size() && continues_token(text[s.size()]) &&
          continues_token(s.back())) {
        continue;
      }
      if (!best || s.size() > best->length) best = UnitMatch{&u, s.size()};
    }
  }
  return best;
}

const Unit& canonical_unit(const PropertySpec& head) {
  return unit_by_symbol(head.canonical_unit);
}

Dimension head_dimension(const PropertySpec& head) {
  return canonical_unit(head).dimension;
}

std::vector<const Unit*> units_of(Dimension d) {
  std::vector<const Unit*> out;
  for (const Unit& u : table()) {
    if (u.dimension == d) out.push_back(&u);
  }
  return out;
}

}  // namespace polyprop
