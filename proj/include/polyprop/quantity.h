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

#ifndef POLYPROP_QUANTITY_H_
#define POLYPROP_QUANTITY_H_

#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "polyprop/registry.h"

namespace polyprop {

enum class QuantityKind { kPoint, kRange, kLimit };
enum class LimitDirection { kGreater, kLess };

// A measured quantity as written in text. For kPoint `value` holds the
// number, for kLimit it holds the bound; kRange uses lo < hi. `unit` is the
// registered symbol when the unit is known, the raw text otherwise, and
// absent when nothing followed the number.
struct Quantity {
  QuantityKind kind = QuantityKind::kPoint;
  double value = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  LimitDirection direction = LimitDirection::kGreater;
  std::optional<std::string> unit;

  static Quantity point(double v, std::optional<std::string> unit = {});
  static Quantity range(double lo, double hi,
                        std::optional<std::string> unit = {});
  static Quantity limit(LimitDirection d, double bound,
                        std::optional<std::string> unit = {});

  bool operator==(const Quantity&) const = default;
};

std::string describe(const Quantity& q);

struct ParseFailure {
  std::string reason;
};

// Lexes one number at the start of `text`: decimal or scientific notation,
// thousands separators, "× 10^n" mantissa forms and superscript exponents.
struct NumberToken {
  double value;
  std::size_t length;
};
std::optional<NumberToken> lex_number(std::string_view text);

// Parses a quantity from the start of `text` and reports how much was
// consumed. Used by the document extractor, where prose follows the unit.
struct QuantityPrefix {
  Quantity quantity;
  std::size_t consumed = 0;
  bool had_tolerance = false;  // "± x" seen and dropped
  bool approximate = false;    // leading "~" or "≈"
};
std::variant<QuantityPrefix, ParseFailure> parse_quantity_prefix(
    std::string_view text);

// Parses a whole candidate span. Anything left after the unit other than
// trailing punctuation makes the span ambiguous.
std::variant<Quantity, ParseFailure> parse_quantity(std::string_view text);

// Converts to the head's canonical unit. Points convert directly, ranges
// convert their midpoint, limits return nullopt (no regression label).
// Throws IncompatibleUnit when dimensions differ.
std::optional<double> to_canonical(const Quantity& q, const PropertySpec& head);

}  // namespace polyprop

#endif  // POLYPROP_QUANTITY_H_
