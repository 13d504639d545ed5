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

#include "polyprop/quantity.h"

#include <array>
#include <charconv>
#include <cmath>

#include "polyprop/text.h"
#include "polyprop/units.h"

namespace polyprop {
namespace {

constexpr std::string_view kMinus = "\xE2\x88\x92";  // U+2212

bool starts_with(std::string_view s, std::string_view p) {
  return s.size() >= p.size() && s.substr(0, p.size()) == p;
}

std::size_t skip_spaces(std::string_view s, std::size_t p) {
  while (p < s.size()) {
    if (is_ascii_space(s[p])) {
      ++p;
    } else if (starts_with(s.substr(p), "\xC2\xA0")) {  // no-break space
      p += 2;
    } else if (starts_with(s.substr(p), "\xE2\x80\x89")) {  // thin space
      p += 3;
    } else {
      break;
    }
  }
  return p;
}

std::size_t count_digits(std::string_view s, std::size_t p) {
  std::size_t n = 0;
  while (p + n < s.size() && is_ascii_digit(s[p + n])) ++n;
  return n;
}

// Superscript digits and minus, as used in "10⁻⁵".
struct Superscript {
  std::string_view bytes;
  char ascii;
};
constexpr std::array<Superscript, 12> kSuperscripts = {{
    {"\xE2\x81\xB0", '0'}, {"\xC2\xB9", '1'},     {"\xC2\xB2", '2'},
    {"\xC2\xB3", '3'},     {"\xE2\x81\xB4", '4'}, {"\xE2\x81\xB5", '5'},
    {"\xE2\x81\xB6", '6'}, {"\xE2\x81\xB7", '7'}, {"\xE2\x81\xB8", '8'},
    {"\xE2\x81\xB9", '9'}, {"\xE2\x81\xBB", '-'}, {"\xE2\x81\xBA", '+'},
}};

// Reads a signed integer exponent, ASCII ("^-5", "^5") or superscript.
// Returns the exponent text and bytes consumed, or 0 consumed on failure.
std::pair<std::string, std::size_t> read_exponent(std::string_view s) {
  std::string out;
  std::size_t p = 0;
  if (starts_with(s, "^")) {
    p = 1;
    if (p < s.size() && (s[p] == '-' || s[p] == '+')) {
      out.push_back(s[p]);
      ++p;
    } else if (starts_with(s.substr(p), kMinus)) {
      out.push_back('-');
      p += kMinus.size();
    }
    const std::size_t n = count_digits(s, p);
    if (n == 0) return {"", 0};
    out.append(s.substr(p, n));
    return {out, p + n};
  }
  bool any_digit = false;
  for (;;) {
    bool matched = false;
    for (const auto& sup : kSuperscripts) {
      if (starts_with(s.substr(p), sup.bytes)) {
        if ((sup.ascii == '-' || sup.ascii == '+') && !out.empty()) break;
        out.push_back(sup.ascii);
        any_digit |= is_ascii_digit(sup.ascii);
        p += sup.bytes.size();
        matched = true;
        break;
      }
    }
    if (!matched) break;
  }
  if (!any_digit) return {"", 0};
  return {out, p};
}

std::optional<double> to_double(const std::string& s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    return std::nullopt;
  }
  if (!std::isfinite(v)) return std::nullopt;
  return v;
}

constexpr std::array<std::string_view, 26> kStopwords = {
    "and",   "or",    "was",     "were", "is",    "are",   "at",
    "with",  "for",   "in",      "of",   "the",   "a",     "an",
    "by",    "after", "which",   "while", "when", "than",  "to",
    "from",  "on",    "measured", "respectively", "whereas"};

bool is_stopword(std::string_view w) {
  const std::string lw = to_lower_ascii(w);
  for (std::string_view s : kStopwords) {
    if (lw == s) return true;
  }
  return false;
}

bool has_ascii_digit(std::string_view s) {
  for (char c : s) {
    if (is_ascii_digit(c)) return true;
  }
  return false;
}

enum class UnitMode { kToken, kRemainder };

struct UnitRead {
  std::optional<std::string> unit;
  std::size_t end;
  bool known = false;
};

// Known unit at `p` (after optional spaces), else nothing.
UnitRead read_known_unit(std::string_view s, std::size_t p) {
  const std::size_t q = skip_spaces(s, p);
  if (auto m = match_unit_prefix(s.substr(q))) {
    return {std::string(m->unit->symbol), q + m->length, true};
  }
  return {std::nullopt, p, false};
}

// An unregistered unit written as one token right after the number.
UnitRead read_unknown_token(std::string_view s, std::size_t p) {
  const std::size_t q = skip_spaces(s, p);
  std::size_t e = q;
  while (e < s.size() && !is_ascii_space(s[e]) && s[e] != '(' &&
         s[e] != ')' && s[e] != ',' && s[e] != ';' && s[e] != ':') {
    ++e;
  }
  std::size_t end = e;
  while (end > q && (s[end - 1] == '.')) --end;
  std::string_view tok = s.substr(q, end - q);
  if (tok.empty() || has_ascii_digit(tok) || is_stopword(tok)) {
    return {std::nullopt, p, false};
  }
  return {std::string(tok), end, false};
}

std::variant<QuantityPrefix, ParseFailure> parse_core(std::string_view text,
                                                      UnitMode mode) {
  QuantityPrefix out;
  std::size_t p = skip_spaces(text, 0);

  for (std::string_view m : {"~", "\xE2\x89\x88", "\xE2\x88\xBC"}) {
    if (starts_with(text.substr(p), m)) {
      out.approximate = true;
      p = skip_spaces(text, p + m.size());
      break;
    }
  }

  std::optional<LimitDirection> limit;
  struct Comparator {
    std::string_view text;
    LimitDirection dir;
  };
  constexpr Comparator kComparators[] = {
      {">=", LimitDirection::kGreater}, {"\xE2\x89\xA5", LimitDirection::kGreater},
      {"\xE2\xA9\xBE", LimitDirection::kGreater}, {">", LimitDirection::kGreater},
      {"<=", LimitDirection::kLess},   {"\xE2\x89\xA4", LimitDirection::kLess},
      {"\xE2\xA9\xBD", LimitDirection::kLess},    {"<", LimitDirection::kLess},
  };
  for (const auto& c : kComparators) {
    if (starts_with(text.substr(p), c.text)) {
      limit = c.dir;
      p = skip_spaces(text, p + c.text.size());
      break;
    }
  }

  const auto first = lex_number(text.substr(p));
  if (!first) return ParseFailure{"no number"};
  p += first->length;
  UnitRead unit = read_known_unit(text, p);
  p = unit.end;

  // "± tol" keeps the value and drops the tolerance.
  {
    const std::size_t q = skip_spaces(text, p);
    std::size_t len = 0;
    for (std::string_view pm : {"\xC2\xB1", "+/-", "+-"}) {
      if (starts_with(text.substr(q), pm)) {
        len = pm.size();
        break;
      }
    }
    if (len > 0) {
      const std::size_t r = skip_spaces(text, q + len);
      const auto tol = lex_number(text.substr(r));
      if (!tol) return ParseFailure{"tolerance sign without a number"};
      out.had_tolerance = true;
      p = r + tol->length;
      UnitRead after = read_known_unit(text, p);
      if (after.unit) {
        if (unit.unit && *unit.unit != *after.unit) {
          return ParseFailure{"inconsistent units around tolerance"};
        }
        unit = after;
        p = after.end;
      }
    }
  }

  std::optional<double> second;
  if (!limit && !out.had_tolerance) {
    const std::size_t q = skip_spaces(text, p);
    std::size_t len = 0;
    for (std::string_view sep : {std::string_view("\xE2\x80\x93"),
                                 std::string_view("\xE2\x80\x94"),
                                 std::string_view("-"), kMinus}) {
      if (starts_with(text.substr(q), sep)) {
        len = sep.size();
        break;
      }
    }
    if (len == 0 && starts_with(to_lower_ascii(text.substr(q, 3)), "to ")) {
      len = 3;
    }
    if (len > 0) {
      const std::size_t r = skip_spaces(text, q + len);
      if (const auto hi = lex_number(text.substr(r))) {
        second = hi->value;
        p = r + hi->length;
        UnitRead unit2 = read_known_unit(text, p);
        if (unit2.unit) {
          if (unit.unit && *unit.unit != *unit2.unit) {
            return ParseFailure{"range endpoints carry different units"};
          }
          unit = unit2;
          p = unit2.end;
        }
      }
    }
  }

  if (!unit.unit) {
    if (mode == UnitMode::kToken) {
      UnitRead tok = read_unknown_token(text, p);
      if (tok.unit) {
        unit = tok;
        p = tok.end;
      }
    } else {
      std::string_view rest = trim(text.substr(p));
      while (!rest.empty() && (rest.back() == '.' || rest.back() == ',')) {
        rest.remove_suffix(1);
      }
      rest = trim(rest);
      if (!rest.empty()) {
        if (has_ascii_digit(rest)) {
          return ParseFailure{"ambiguous span: more than one number"};
        }
        unit = UnitRead{std::string(rest), text.size(), false};
        p = text.size();
      }
    }
  }

  if (limit) {
    out.quantity = Quantity::limit(*limit, first->value, unit.unit);
  } else if (second) {
    if (!(first->value < *second)) {
      return ParseFailure{"range requires lo < hi"};
    }
    out.quantity = Quantity::range(first->value, *second, unit.unit);
  } else {
    out.quantity = Quantity::point(first->value, unit.unit);
  }
  out.consumed = p;
  return out;
}

}  // namespace

Quantity Quantity::point(double v, std::optional<std::string> unit) {
  Quantity q;
  q.kind = QuantityKind::kPoint;
  q.value = v;
  q.unit = std::move(unit);
  return q;
}

Quantity Quantity::range(double lo, double hi,
                         std::optional<std::string> unit) {
  Quantity q;
  q.kind = QuantityKind::kRange;
  q.lo = lo;
  q.hi = hi;
  q.unit = std::move(unit);
  return q;
}

Quantity Quantity::limit(LimitDirection d, double bound,
                         std::optional<std::string> unit) {
  Quantity q;
  q.kind = QuantityKind::kLimit;
  q.direction = d;
  q.value = bound;
  q.unit = std::move(unit);
  return q;
}

std::string describe(const Quantity& q) {
  std::string s;
  switch (q.kind) {
    case QuantityKind::kPoint:
      s = "point " + format_double(q.value);
      break;
    case QuantityKind::kRange:
      s = "range " + format_double(q.lo) + " " + format_double(q.hi);
      break;
    case QuantityKind::kLimit:
      s = std::string("limit ") +
          (q.direction == LimitDirection::kGreater ? ">" : "<") + " " +
          format_double(q.value);
      break;
  }
  return s;
}

std::optional<NumberToken> lex_number(std::string_view text) {
  std::size_t p = 0;
  std::string digits;
  if (starts_with(text, kMinus)) {
    digits.push_back('-');
    p = kMinus.size();
  } else if (!text.empty() && (text[0] == '-' || text[0] == '+')) {
    if (text[0] == '-') digits.push_back('-');
    p = 1;
  }
  const std::size_t int_len = count_digits(text, p);
  digits.append(text.substr(p, int_len));
  p += int_len;
  // Thousands separators: "12,819" but not "1,2".
  if (int_len >= 1 && int_len <= 3) {
    while (p + 4 <= text.size() && text[p] == ',' &&
           count_digits(text, p + 1) == 3) {
      digits.append(text.substr(p + 1, 3));
      p += 4;
    }
  }
  std::size_t frac_len = 0;
  if (p + 1 < text.size() + 1 && p < text.size() && text[p] == '.' &&
      count_digits(text, p + 1) > 0) {
    frac_len = count_digits(text, p + 1);
    digits.push_back('.');
    digits.append(text.substr(p + 1, frac_len));
    p += 1 + frac_len;
  }
  if (int_len == 0 && frac_len == 0) return std::nullopt;

  std::string exponent;
  if (p < text.size() && (text[p] == 'e' || text[p] == 'E')) {
    std::size_t q = p + 1;
    std::string sign;
    if (q < text.size() && (text[q] == '-' || text[q] == '+')) {
      sign = text[q] == '-' ? "-" : "";
      ++q;
    } else if (starts_with(text.substr(q), kMinus)) {
      sign = "-";
      q += kMinus.size();
    }
    const std::size_t n = count_digits(text, q);
    if (n > 0 && (q + n == text.size() || !is_ascii_alpha(text[q + n]))) {
      exponent = sign + std::string(text.substr(q, n));
      p = q + n;
    }
  }

  // Mantissa forms: "1.2 × 10^-5", "1.2x10⁵", or a bare "10^5".
  if (exponent.empty()) {
    bool bare_power = digits == "10" || digits == "-10";
    std::size_t q = p;
    if (!bare_power) {
      q = skip_spaces(text, p);
      std::size_t len = 0;
      for (std::string_view times :
           {"\xC3\x97", "x", "X", "\xC2\xB7", "*", "\xE2\x8B\x85"}) {
        if (starts_with(text.substr(q), times)) {
          len = times.size();
          break;
        }
      }
      if (len > 0) {
        q = skip_spaces(text, q + len);
        if (starts_with(text.substr(q), "10") && count_digits(text, q) == 2) {
          q += 2;
        } else {
          len = 0;
        }
      }
      if (len == 0) q = std::string_view::npos;
    }
    if (q != std::string_view::npos) {
      auto [exp_text, used] = read_exponent(text.substr(q));
      if (used > 0) {
        exponent = exp_text;
        if (bare_power) digits = digits[0] == '-' ? "-1" : "1";
        p = q + used;
      }
    }
  }

  std::string literal = digits;
  if (!exponent.empty()) literal += "e" + exponent;
  const auto v = to_double(literal);
  if (!v) return std::nullopt;
  return NumberToken{*v, p};
}

std::variant<QuantityPrefix, ParseFailure> parse_quantity_prefix(
    std::string_view text) {
  return parse_core(text, UnitMode::kToken);
}

std::variant<Quantity, ParseFailure> parse_quantity(std::string_view text) {
  auto res = parse_core(text, UnitMode::kRemainder);
  if (auto* f = std::get_if<ParseFailure>(&res)) return *f;
  auto& prefix = std::get<QuantityPrefix>(res);
  std::string_view rest = trim(text.substr(prefix.consumed));
  while (!rest.empty() && (rest.back() == '.' || rest.back() == ',')) {
    rest.remove_suffix(1);
  }
  if (!trim(rest).empty()) {
    return ParseFailure{"unexpected text after quantity"};
  }
  return prefix.quantity;
}

std::optional<double> to_canonical(const Quantity& q,
                                   const PropertySpec& head) {
  const Unit& target = canonical_unit(head);
  const Unit* unit = nullptr;
  if (!q.unit) {
    if (target.dimension != Dimension::kDimensionless) {
      throw IncompatibleUnit("no unit given for " + head.name);
    }
    unit = &target;
  } else {
    for (const Unit& u : all_units()) {
      if (u.symbol == *q.unit) unit = &u;
    }
    if (!unit) unit = find_unit(*q.unit);
    if (!unit) {
      throw IncompatibleUnit("unregistered unit '" + *q.unit + "' for " +
                             head.name);
    }
    if (unit->dimension != target.dimension) {
      throw IncompatibleUnit("unit '" + *q.unit + "' does not measure " +
                             head.name);
    }
  }
  switch (q.kind) {
    case QuantityKind::kPoint:
      return target.from_canonical(unit->to_canonical(q.value));
    case QuantityKind::kRange:
      return target.from_canonical(unit->to_canonical(0.5 * (q.lo + q.hi)));
    case QuantityKind::kLimit:
      return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace polyprop
